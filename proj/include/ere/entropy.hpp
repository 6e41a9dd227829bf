#pragma once

#include "ere/dataset.hpp"
#include "ere/family.hpp"
#include "ere/glm.hpp"
#include "ere/sampler.hpp"

#include <cstdint>

namespace ere {

struct EreEstimate {
  double h_hat = 0.0;
  double raw_diff = 0.0;
  Index s_tilde_m = 0;
  Index n = 0;
  bool clamped = false;
  bool screened_out = false;
};

/// How a Gaussian likelihood with unknown variance enters the deviance.
/// profiled: each fit at its own variance estimate, giving log(RSS_red/RSS_full).
/// shared: both fits at the full model's dispersion, giving
/// (RSS_red - RSS_full) / (n phi_full).
enum class GaussianScale { profiled, shared };

EreEstimate estimate_ere(const FitResult& full, const FitResult& reduced, const Dataset& data,
                         const GlmFamily& family, Index s_tilde_m,
                         GaussianScale scale = GaussianScale::profiled);

enum class GroundTruthMethod { closed_form_linear, monte_carlo };

struct GroundTruthEre {
  double h = 0.0;
  GroundTruthMethod method = GroundTruthMethod::monte_carlo;
  Index mc_samples = 0;
  double mc_std_error = 0.0;
};

/// H_m of a linear model with x ~ N(0, Sigma): with
/// s2 = beta_m' (Sigma_mm - Sigma_m,-m Sigma_-m^-1 Sigma_-m,m) beta_m,
/// log((s2 + sigma_eps2)/sigma_eps2) + (beta_m' Sigma_mm beta_m - s2)/(s2 + sigma_eps2).
double ere_linear_closed_form(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& beta_star,
                              const IndexSet& modality, double sigma_eps2);

/// Reduced working model: coefficients and, for the Gaussian family, its
/// error variance.
struct ReducedModel {
  Eigen::VectorXd beta0;
  double dispersion = 1.0;
};

struct McOptions {
  std::size_t shards = 8;
  double sigma_eps2 = 1.0;  // Gaussian error variance of the true model
};

/// Twice the covariate-averaged KL divergence from the true model to the
/// reduced one, from N draws. For the Gaussian family the KL between
/// N(x'beta*, sigma_eps2) and N(x'beta0, tau2) is used.
GroundTruthEre mc_ere(const GlmFamily& family, const Eigen::VectorXd& beta_star, const ReducedModel& reduced,
                      const CovariateSampler& sampler, Index n_samples, std::uint64_t seed,
                      const McOptions& options = {});

/// 1 - exp(-h).
double pseudo_r2(double h);
/// -log(1 - r).
double pseudo_r2_inverse(double r);

/// Sum of a sequence by pairwise splitting.
double pairwise_sum(const double* values, std::size_t count);

}  // namespace ere
