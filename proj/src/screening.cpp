#include "ere/screening.hpp"

#include "ere/error.hpp"
#include "ere/glm.hpp"
#include "glm_detail.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ere {

MarginalFit marginal_mmle(const Dataset& data, Index j, const GlmFamily& family) {
  if (j < 0 || j >= data.p()) throw std::out_of_range("marginal_mmle: column out of range");
  const Index n = data.n();
  const Eigen::VectorXd x = data.X.col(j);
  if (!x.allFinite()) throw DataError("column " + std::to_string(j) + " has non-finite entries");

  MarginalFit out;
  const double mean = x.mean();
  const double spread = (x.array() - mean).abs().maxCoeff();
  Eigen::MatrixXd Z(n, 2);
  Z.col(0).setOnes();
  Z.col(1) = x;
  if (spread <= 1e-12 * std::max(1.0, std::abs(mean))) {
    out.constant_column = true;
    Eigen::MatrixXd ones = Z.leftCols(1);
    Dataset intercept_only{ones, data.y, {"(intercept)"}};
    const FitResult f = fit_mle(intercept_only, IndexSet{0}, family);
    out.intercept = f.beta[0];
    out.converged = f.converged;
    return out;
  }
  if (family.kind == FamilyKind::gaussian) {
    const Eigen::VectorXd xc = x.array() - mean;
    out.slope = xc.dot(data.y) / xc.squaredNorm();
    out.intercept = data.y.mean() - out.slope * mean;
    out.converged = true;
    return out;
  }
  Dataset pair{Z, data.y, {"(intercept)", "x"}};
  const FitResult f = fit_mle(pair, IndexSet{0, 1}, family);
  out.intercept = f.beta[0];
  out.slope = f.beta[1];
  out.converged = f.converged;
  return out;
}

ScreenResult marginal_screen_stats(const Dataset& data, const IndexSet& candidates, const GlmFamily& family) {
  ScreenResult r;
  r.candidates = candidates;
  r.mmle = Eigen::VectorXd::Zero(data.p());
  r.intercepts = Eigen::VectorXd::Zero(data.p());
  for (Index j : candidates) {
    const MarginalFit m = marginal_mmle(data, j, family);
    r.mmle[j] = m.slope;
    r.intercepts[j] = m.intercept;
    if (m.constant_column) r.warnings.push_back("column " + std::to_string(j) + " is constant; slope set to 0");
    else if (!m.converged) r.warnings.push_back("marginal fit for column " + std::to_string(j) + " did not converge");
  }
  return r;
}

IndexSet screen(const Eigen::VectorXd& mmle, double gamma) {
  IndexSet out;
  for (Index j = 0; j < mmle.size(); ++j) {
    if (std::abs(mmle[j]) >= gamma) out.push_back(j);
  }
  return out;
}

IndexSet screen(const Eigen::VectorXd& mmle, double gamma, const IndexSet& candidates) {
  IndexSet out;
  for (Index j : candidates) {
    if (std::abs(mmle[j]) >= gamma) out.push_back(j);
  }
  return out;
}

Index default_max_screened(Index n, Index always_included) {
  const auto cap = static_cast<Index>(std::floor(static_cast<double>(n) / std::log(static_cast<double>(n))));
  return std::max<Index>(1, std::min(cap, n - 1 - always_included));
}

std::vector<double> default_threshold_grid(const Eigen::VectorXd& mmle, const IndexSet& candidates,
                                           Index max_size, std::size_t points) {
  if (candidates.empty()) throw std::invalid_argument("no candidate columns to screen");
  std::vector<double> mags;
  mags.reserve(candidates.size());
  for (Index j : candidates) mags.push_back(std::abs(mmle[j]));
  std::sort(mags.begin(), mags.end(), std::greater<>());

  const auto keep = static_cast<std::size_t>(std::clamp<Index>(max_size, 1, static_cast<Index>(mags.size())));
  double lower = mags[keep - 1];
  // a threshold equal to the next magnitude would admit it too
  if (keep < mags.size() && mags[keep] == lower) lower = std::nextafter(lower, HUGE_VAL);
  const double upper = mags.front();
  lower = std::max(lower, 1e-12);
  if (!(upper > lower) || points < 2) return {lower};

  std::vector<double> grid(points);
  const double ll = std::log(lower), lu = std::log(upper);
  for (std::size_t k = 0; k < points; ++k) {
    grid[k] = std::exp(ll + (lu - ll) * static_cast<double>(k) / static_cast<double>(points - 1));
  }
  grid.front() = lower;
  grid.back() = upper;
  return grid;
}

namespace {

// RSS of every nested least-squares fit along `order` from one Cholesky
// factorisation: the leading block of the factor is the factor of the
// leading block of the Gram matrix.
std::optional<std::vector<double>> nested_rss(const Dataset& data, const IndexSet& order_cols) {
  const Eigen::MatrixXd Xk = data.X(Eigen::all, order_cols);
  const Eigen::MatrixXd G = Xk.transpose() * Xk;
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const Eigen::MatrixXd L = llt.matrixL();
  const double dmax = L.diagonal().cwiseAbs().maxCoeff();
  if (L.diagonal().cwiseAbs().minCoeff() <= 1e-7 * std::max(1.0, dmax)) return std::nullopt;
  const Eigen::VectorXd w = L.triangularView<Eigen::Lower>().solve(Xk.transpose() * data.y);
  std::vector<double> rss(order_cols.size() + 1);
  double acc = data.y.squaredNorm();
  rss[0] = acc;
  for (std::size_t k = 0; k < order_cols.size(); ++k) {
    acc -= w[static_cast<Index>(k)] * w[static_cast<Index>(k)];
    rss[k + 1] = std::max(acc, 0.0);
  }
  return rss;
}

double gaussian_loglik_from_rss(const GlmFamily& family, const Dataset& data, double rss) {
  const double n = static_cast<double>(data.n());
  if (family.estimates_dispersion()) return -0.5 * n * (std::log(std::max(rss, 1e-300) / n) + 1.0);
  return 0.5 * (data.y.squaredNorm() - rss);
}

}  // namespace

ThresholdSelection select_threshold(const Dataset& data, const Eigen::VectorXd& mmle,
                                    const std::vector<double>& grid, const GlmFamily& family,
                                    const IndexSet& candidates, const IndexSet& always_include) {
  if (grid.empty()) throw std::invalid_argument("select_threshold: empty grid");
  const Index n = data.n();
  const double logn = std::log(static_cast<double>(n));
  ThresholdSelection out;

  struct Point {
    double gamma;
    IndexSet set;
  };
  std::vector<Point> feasible;
  for (double g : grid) {
    IndexSet set = set_union(screen(mmle, g, candidates), always_include);
    if (static_cast<Index>(set.size()) >= n) {
      out.warnings.push_back("threshold " + std::to_string(g) + " keeps " + std::to_string(set.size()) +
                             " columns (>= n); dropped");
      continue;
    }
    feasible.push_back({g, std::move(set)});
  }
  if (feasible.empty()) throw NumericalError("select_threshold: no feasible grid point (every screened set has size >= n)");

  std::optional<std::vector<double>> rss;
  IndexSet order;
  if (family.kind == FamilyKind::gaussian) {
    // columns ordered by decreasing |mmle| after the always-included ones
    order = always_include;
    IndexSet rest = set_difference(candidates, always_include);
    std::stable_sort(rest.begin(), rest.end(),
                     [&](Index a, Index b) { return std::abs(mmle[a]) > std::abs(mmle[b]); });
    std::size_t largest = 0;
    for (const auto& pt : feasible) largest = std::max(largest, pt.set.size());
    for (Index j : rest) {
      if (order.size() >= largest) break;
      order.push_back(j);
    }
    rss = nested_rss(data, order);
  }

  for (const auto& pt : feasible) {
    double value;
    if (rss) {
      const double ll = gaussian_loglik_from_rss(family, data, (*rss)[pt.set.size()]);
      value = -2.0 * ll + static_cast<double>(pt.set.size()) * logn;
    } else {
      try {
        value = bic(fit_mle(data, pt.set, family));
      } catch (const NumericalError& e) {
        out.warnings.push_back("threshold " + std::to_string(pt.gamma) + ": " + e.what() + "; dropped");
        continue;
      }
    }
    out.trace.push_back({pt.gamma, static_cast<Index>(pt.set.size()), value});
  }
  if (out.trace.empty()) throw NumericalError("select_threshold: every grid fit failed");

  double best = out.trace.front().bic;
  double mean = 0.0;
  for (const auto& b : out.trace) {
    best = std::min(best, b.bic);
    mean += b.bic;
  }
  mean /= static_cast<double>(out.trace.size());
  double se = 0.0;
  if (out.trace.size() > 1) {
    double ss = 0.0;
    for (const auto& b : out.trace) ss += (b.bic - mean) * (b.bic - mean);
    se = std::sqrt(ss / static_cast<double>(out.trace.size() - 1)) / std::sqrt(static_cast<double>(out.trace.size()));
  }
  out.gamma = HUGE_VAL;
  for (const auto& b : out.trace) {
    if (b.bic <= best + se) out.gamma = std::min(out.gamma, b.threshold);
  }
  return out;
}

}  // namespace ere
