#pragma once

#include "ere/entropy.hpp"

namespace ere {

/// CDF of the non-central chi-square law with k degrees of freedom and
/// noncentrality theta. Returns 0 for x <= 0.
double ncx2_cdf(Index k, double theta, double x);

/// Central chi-square upper tail P(chi2_k > x) and its logarithm, the latter
/// accurate far below the smallest double.
double chi2_sf(Index k, double x);
double chi2_log_sf(Index k, double x);

/// theta >= 0 with F_{k,theta}(x) = target. Returns 0 when F_{k,0}(x) <= target.
double solve_noncentrality(Index k, double x, double target);

struct EreInference {
  double h_hat = 0.0;
  Index n = 0;
  Index s_tilde_m = 0;
  double alpha = 0.05;
  double ci_lower = 0.0;
  double ci_upper = 0.0;  // +inf for a one-sided bound
  double p_value = 1.0;
  double log_p_value = 0.0;
  double r2_hat = 0.0;
  double r2_ci_lower = 0.0;
  double r2_ci_upper = 0.0;
  bool one_sided = false;
  bool screened_out = false;
};

EreInference infer(const EreEstimate& estimate, double alpha, bool two_sided = true);

}  // namespace ere
