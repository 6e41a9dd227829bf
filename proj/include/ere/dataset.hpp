#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace ere {

using Index = Eigen::Index;

/// Sorted, duplicate-free list of column indices.
using IndexSet = std::vector<Index>;

IndexSet make_index_set(std::vector<Index> indices);
IndexSet set_union(const IndexSet& a, const IndexSet& b);
IndexSet set_difference(const IndexSet& a, const IndexSet& b);
IndexSet set_intersection(const IndexSet& a, const IndexSet& b);
bool contains(const IndexSet& set, Index j);
bool is_subset(const IndexSet& sub, const IndexSet& super);

struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::string> column_names;

  Index n() const { return X.rows(); }
  Index p() const { return X.cols(); }
};

/// A named block of covariates.
struct Modality {
  std::string name;
  IndexSet columns;
};

struct ModalityPartition {
  std::vector<Modality> modalities;

  std::size_t size() const { return modalities.size(); }
  const Modality& operator[](std::size_t m) const { return modalities[m]; }
  std::optional<std::size_t> find(const std::string& name) const;
  IndexSet all_columns() const;

  /// Throws ConfigError when blocks overlap or reference columns >= p.
  void validate(Index p) const;
};

/// Splits p columns into `blocks` contiguous modalities of near-equal size,
/// named "1", "2", ...
ModalityPartition even_partition(Index p, std::size_t blocks);

}  // namespace ere
