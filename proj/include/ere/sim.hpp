#pragma once

#include "ere/pipeline.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ere {

/// One of the three simulation designs: x ~ N(0, 0.8 I + 0.2 J) and the
/// nonzero coefficients in the leading positions of each block.
struct SimModel {
  int id = 1;
  Index n = 300;
  Index p = 600;
  ModalityPartition modalities;
  Eigen::VectorXd beta_star;
  /// Positions that carry a coefficient in the design pattern. Stays fixed
  /// when a block is zeroed, so the oracle keeps fitting those columns.
  IndexSet slots;
  double delta = 1.0;
  GlmFamily family;    // data-generating law
  double rho = 0.2;
  double sigma_eps = 1.0;

  IndexSet true_support() const;
};

/// Model 1 (gaussian, 3 blocks), 2 (logistic, 2 blocks) or 3 (probit, 2 blocks)
/// at scale delta; n and p default to 300 and 600, blocks split p evenly.
SimModel make_model(int id, double delta, Index n = 300, Index p = 600);

/// Same design with the coefficients of block m set to zero.
SimModel with_null_block(SimModel model, std::size_t m);

/// Default delta grid of each model.
std::vector<double> default_deltas(int id);

Dataset generate(const SimModel& model, std::uint64_t seed);

enum class SimMethod { oracle, sis_scad, sis_refit };
std::string_view method_name(SimMethod m);
SimMethod parse_method(std::string_view name);

struct MethodRun {
  EreEstimate estimate;
  Index df = 0;                 // degrees of freedom used for inference
  IndexSet full_support;
  double sensitivity = 1.0;
  double specificity = 1.0;
  bool converged = true;
};

struct MethodOptions {
  /// Likelihood the estimators maximise; defaults to the generating family.
  std::optional<GlmFamily> fit_family;
  GaussianScale gaussian_scale = GaussianScale::profiled;
  std::optional<double> threshold;
};

/// Screening used by both SIS methods on one dataset.
ScreeningStage sim_screening(const Dataset& data, const SimModel& model, const MethodOptions& options = {});

MethodRun run_method(const Dataset& data, const SimModel& model, std::size_t m, SimMethod method,
                     const MethodOptions& options = {}, const ScreeningStage* screening = nullptr);

/// Ground-truth H_m: closed form for the Gaussian design; otherwise beta0 by
/// MLE on `fit_samples` fresh draws over the nonzero columns outside block m,
/// then a Monte Carlo average over `mc_samples` more.
GroundTruthEre ground_truth(const SimModel& model, std::size_t m, std::uint64_t seed,
                            Index fit_samples = 10000, Index mc_samples = 10000);

/// Gamma_n = n beta_m' (Omega_mm)^-1 beta_m with Omega the inverse of a Monte
/// Carlo estimate of E[w(x'beta*) x_M x_M'] over the true support M.
double oracle_noncentrality(const SimModel& model, std::size_t m, Index mc_samples, std::uint64_t seed);

struct CoverageConfig {
  int model = 1;
  Index n = 300;
  Index p = 600;
  std::vector<double> deltas;
  std::vector<SimMethod> methods{SimMethod::oracle, SimMethod::sis_scad, SimMethod::sis_refit};
  std::vector<std::size_t> modalities;  // empty: all
  Index reps = 500;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  MethodOptions method_options;
  Index truth_fit_samples = 10000;
  Index truth_mc_samples = 10000;
};

struct SimRow {
  int model;
  double delta;
  SimMethod method;
  std::string modality;
  double coverage;
  double sensitivity;
  double specificity;
  double mean_h_hat;
  double true_h;
  Index reps;        // successful replications
  Index failures;
  Index screened_out;
};

/// Replication i uses seed + i; results do not depend on the thread count.
std::vector<SimRow> run_coverage(const CoverageConfig& config);

std::string coverage_csv(const std::vector<SimRow>& rows);

/// Runs `task(i)` for i in [0, count) on up to `threads` threads.
void parallel_for(Index count, unsigned threads, const std::function<void(Index)>& task);

}  // namespace ere
