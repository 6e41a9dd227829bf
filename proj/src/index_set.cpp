#include "ere/dataset.hpp"

#include "ere/error.hpp"

#include <algorithm>
#include <iterator>

namespace ere {

IndexSet make_index_set(std::vector<Index> indices) {
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  return indices;
}

IndexSet set_union(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

IndexSet set_difference(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

IndexSet set_intersection(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool contains(const IndexSet& set, Index j) { return std::binary_search(set.begin(), set.end(), j); }

bool is_subset(const IndexSet& sub, const IndexSet& super) {
  return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

std::optional<std::size_t> ModalityPartition::find(const std::string& name) const {
  for (std::size_t m = 0; m < modalities.size(); ++m) {
    if (modalities[m].name == name) return m;
  }
  return std::nullopt;
}

IndexSet ModalityPartition::all_columns() const {
  IndexSet out;
  for (const auto& m : modalities) out = set_union(out, m.columns);
  return out;
}

void ModalityPartition::validate(Index p) const {
  std::vector<int> owner(static_cast<std::size_t>(p), -1);
  for (std::size_t m = 0; m < modalities.size(); ++m) {
    if (modalities[m].columns.empty()) {
      throw ConfigError("modality '" + modalities[m].name + "' has no columns");
    }
    for (Index j : modalities[m].columns) {
      if (j < 0 || j >= p) {
        throw ConfigError("modality '" + modalities[m].name + "' references column " + std::to_string(j) +
                          " outside the design");
      }
      auto& o = owner[static_cast<std::size_t>(j)];
      if (o >= 0) {
        throw ConfigError("modalities '" + modalities[static_cast<std::size_t>(o)].name + "' and '" +
                          modalities[m].name + "' share column " + std::to_string(j));
      }
      o = static_cast<int>(m);
    }
  }
}

ModalityPartition even_partition(Index p, std::size_t blocks) {
  ModalityPartition out;
  const Index base = p / static_cast<Index>(blocks);
  const Index extra = p % static_cast<Index>(blocks);
  Index start = 0;
  for (std::size_t m = 0; m < blocks; ++m) {
    const Index len = base + (static_cast<Index>(m) < extra ? 1 : 0);
    Modality mod;
    mod.name = std::to_string(m + 1);
    for (Index j = start; j < start + len; ++j) mod.columns.push_back(j);
    start += len;
    out.modalities.push_back(std::move(mod));
  }
  return out;
}

}  // namespace ere
