#pragma once

#include "ere/dataset.hpp"
#include "ere/family.hpp"

#include <string>
#include <vector>

namespace ere {

struct MarginalFit {
  double intercept = 0.0;
  double slope = 0.0;
  bool converged = false;
  bool constant_column = false;
};

/// Two-parameter MLE of y on (1, x_j).
MarginalFit marginal_mmle(const Dataset& data, Index j, const GlmFamily& family);

struct BicPoint {
  double threshold;
  Index model_size;
  double bic;
};

struct ScreenResult {
  Eigen::VectorXd mmle;        // marginal slopes; 0 for columns not screened
  Eigen::VectorXd intercepts;
  IndexSet candidates;         // columns that took part in screening
  IndexSet selected;
  double threshold = 0.0;
  std::vector<BicPoint> bic_trace;
  std::vector<std::string> warnings;
};

/// MMLE for every candidate column.
ScreenResult marginal_screen_stats(const Dataset& data, const IndexSet& candidates, const GlmFamily& family);

/// {j : |mmle_j| >= gamma} over all entries of `mmle`.
IndexSet screen(const Eigen::VectorXd& mmle, double gamma);

/// As above, restricted to `candidates`.
IndexSet screen(const Eigen::VectorXd& mmle, double gamma, const IndexSet& candidates);

struct ThresholdSelection {
  double gamma = 0.0;
  std::vector<BicPoint> trace;
  std::vector<std::string> warnings;
};

/// Grid search over thresholds: fit the unpenalized MLE on each screened set
/// (plus `always_include`), score it by BIC, and return the smallest threshold
/// whose BIC is within one standard error of the minimum. Grid points whose
/// screened set would not leave residual degrees of freedom are dropped.
ThresholdSelection select_threshold(const Dataset& data, const Eigen::VectorXd& mmle,
                                    const std::vector<double>& grid, const GlmFamily& family,
                                    const IndexSet& candidates, const IndexSet& always_include = {});

/// 20 log-spaced thresholds from the |mmle| that keeps `max_size` columns up
/// to the largest |mmle|, which keeps a single column.
std::vector<double> default_threshold_grid(const Eigen::VectorXd& mmle, const IndexSet& candidates,
                                           Index max_size, std::size_t points = 20);

/// Largest screened-set size the default grid admits: floor(n / log n),
/// further limited so the fitted model keeps a residual degree of freedom.
Index default_max_screened(Index n, Index always_included);

}  // namespace ere
