#pragma once

#include "ere/dataset.hpp"
#include "ere/family.hpp"
#include "ere/glm.hpp"
#include "ere/penalty.hpp"

#include <vector>

namespace ere {

/// Partially penalized likelihood problem. Coordinates in `screened` minus
/// `forced_zero` are free; of those, `unpenalized` carry no penalty. Every
/// other coordinate is fixed at zero.
struct PenalizedProblem {
  const Dataset* data = nullptr;
  IndexSet screened;
  IndexSet unpenalized;
  IndexSet forced_zero;
  PenaltyConfig penalty;
  GlmFamily family;

  IndexSet free_set() const { return set_difference(screened, forced_zero); }
  /// Throws ConfigError when the index sets are inconsistent.
  void validate() const;
};

/// Where the local linear approximation starts: coefficients (length p) and
/// the likelihood scale phi in the objective -loglik/(n phi) + penalty.
struct PenalizedStart {
  Eigen::VectorXd beta;
  double scale = 1.0;
  bool from_mle = false;
};

struct PenalizedOptions {
  int lla_max_steps = 500;
  double lla_tolerance = 1e-9;
  int newton_max_iterations = 100;
  double newton_tolerance = 1e-8;
  double cd_tolerance = 1e-9;
  int cd_max_sweeps = 10000;
  double kkt_tolerance = 1e-6;
  /// Optional permutation of the free coordinates (positions 0..s-1).
  std::vector<Index> coordinate_order;
  const PenalizedStart* start = nullptr;
  /// Starting point of the first inner solve (length p); defaults to the start.
  const Eigen::VectorXd* warm_start = nullptr;
};

/// Unpenalized MLE on the free set when it exists and is finite; otherwise a
/// feasible point with every penalized coordinate at zero.
PenalizedStart penalized_start(const PenalizedProblem& problem);

/// Local linear approximation: each step solves a weighted-L1 problem by
/// proximal Newton with cyclic coordinate descent; steps repeat until the
/// coefficients stop moving. gradient_norm holds the KKT residual and
/// objective_trace the objective after every step.
FitResult fit_penalized(const PenalizedProblem& problem, const PenalizedOptions& options = {});

/// Requires forced_zero empty.
FitResult fit_full(const PenalizedProblem& problem, const PenalizedOptions& options = {});
/// Same solver; the target block goes in forced_zero and stays at zero.
FitResult fit_reduced(const PenalizedProblem& problem, const PenalizedOptions& options = {});

/// -loglik/(n scale) + sum of penalties over penalized free coordinates.
double penalized_objective(const PenalizedProblem& problem, const Eigen::VectorXd& beta, double scale);

/// Largest violation of the first-order conditions at beta, with the score
/// scaled by 1/(n scale): |s_j| <= p'(0) for penalized zeros,
/// s_j = sign(b_j) p'(|b_j|) for penalized nonzeros, s_j = 0 for unpenalized.
double kkt_residual(const PenalizedProblem& problem, const Eigen::VectorXd& beta, double scale);

struct LambdaPoint {
  double lambda;
  double bic;
  Index df;
  bool converged;
};

struct LambdaSelection {
  double lambda = 0.0;
  FitResult fit;
  std::vector<LambdaPoint> trace;
  std::vector<std::string> warnings;
};

/// Fits every grid value (the template's lambda is ignored) and returns the
/// BIC minimiser, ties going to the larger lambda. Grid points whose fit
/// throws are skipped.
LambdaSelection select_lambda(const PenalizedProblem& problem, const std::vector<double>& grid,
                              const PenalizedOptions& options = {});

/// `points` values c sqrt(log(max(s, 2)) / n), c log-spaced on [0.01, 4],
/// in decreasing order.
std::vector<double> default_lambda_grid(Index s_tilde, Index n, std::size_t points = 30);

}  // namespace ere
