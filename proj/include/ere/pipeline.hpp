#pragma once

#include "ere/entropy.hpp"
#include "ere/inference.hpp"
#include "ere/penalized.hpp"
#include "ere/screening.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ere {

/// First stage shared by every target modality of one dataset.
struct ScreeningStage {
  ScreenResult stats;
  double gamma = 0.0;
  bool gamma_overridden = false;
  IndexSet always_include;  // e.g. the intercept column, never screened or penalized
  IndexSet selected;        // screened columns plus always_include
  std::vector<std::string> warnings;
};

ScreeningStage run_screening(const Dataset& data, const GlmFamily& family, const IndexSet& candidates,
                             const IndexSet& always_include, std::optional<double> threshold = std::nullopt);

struct AnalysisOptions {
  double alpha = 0.05;
  bool two_sided = true;
  /// Both fits at lambda = 0, i.e. unpenalized refits on the screened set.
  bool refit = false;
  PenaltyKind penalty = PenaltyKind::scad;
  std::vector<double> lambda1_grid;  // empty: default grid
  std::vector<double> lambda2_grid;
  GaussianScale gaussian_scale = GaussianScale::profiled;
};

struct ModalityAnalysis {
  IndexSet screened_m;
  FitResult full;
  FitResult reduced;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::vector<LambdaPoint> lambda1_trace;
  std::vector<LambdaPoint> lambda2_trace;
  EreEstimate estimate;
  EreInference inference;
  std::vector<std::string> warnings;
};

/// Full fit leaves the screened part of the modality unpenalized, the reduced
/// fit forces it to zero; both tune lambda by BIC unless refitting.
ModalityAnalysis analyze_modality(const Dataset& data, const GlmFamily& family, const ScreeningStage& stage,
                                  const IndexSet& modality_columns, const AnalysisOptions& options);

}  // namespace ere
