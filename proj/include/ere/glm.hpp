#pragma once

#include "ere/dataset.hpp"
#include "ere/family.hpp"

#include <vector>

namespace ere {

struct FitResult {
  Eigen::VectorXd beta;  // length p, exactly zero outside `support`
  IndexSet support;
  /// Log-likelihood with the c(y) term dropped. For a Gaussian family with
  /// estimated dispersion this is the profile log-likelihood
  /// -(n/2)(log(RSS/n) + 1); otherwise sum of t(y) eta - b(eta).
  double loglik = 0.0;
  double dispersion = 1.0;
  bool converged = false;
  int iterations = 0;
  /// Norm of the score over the free coordinates (for penalized fits, the
  /// largest KKT violation).
  double gradient_norm = 0.0;
  bool separation = false;
  Index n = 0;
  /// Scale used in the fitting objective (phi for Gaussian, 1 otherwise).
  double objective_scale = 1.0;
  /// Objective value after every accepted iteration.
  std::vector<double> objective_trace;
};

struct IrlsOptions {
  int max_iterations = 100;
  double tolerance = 1e-10;        // relative log-likelihood change
  double gradient_tolerance = 1e-8;
  int max_halvings = 20;
  double separation_eta = 30.0;
  double weight_floor = 1e-10;
};

/// Throws DataError for non-finite entries, n < 2, or responses the family
/// does not admit.
void validate_dataset(const Dataset& data, const GlmFamily& family);

/// dispersion^-1 * sum_i [t(y_i) x_i'beta - b(x_i'beta)].
double log_likelihood(const Dataset& data, const Eigen::VectorXd& beta, const GlmFamily& family,
                      double dispersion = 1.0);

/// Newton/IRLS maximiser of the log-likelihood restricted to `support`.
FitResult fit_mle(const Dataset& data, const IndexSet& support, const GlmFamily& family,
                  const IrlsOptions& options = {});

/// (2/n)(loglik_full - loglik_reduced).
double deviance_difference(const FitResult& full, const FitResult& reduced, Index n);

/// -2 loglik + |support| log n.
double bic(const FitResult& fit);

/// Log-likelihood reported in FitResult for a coefficient vector, given the
/// linear predictor. Profiled for Gaussian with estimated dispersion.
double reported_loglik(const Dataset& data, const Eigen::VectorXd& eta, const GlmFamily& family);

/// RSS/(n - df) for Gaussian with estimated dispersion, 1 otherwise.
double estimate_dispersion(const Dataset& data, const Eigen::VectorXd& eta, const GlmFamily& family,
                           Index df);

/// Score X' (dl/deta) at beta, all p coordinates, unit dispersion.
Eigen::VectorXd score(const Dataset& data, const Eigen::VectorXd& beta, const GlmFamily& family);

}  // namespace ere
