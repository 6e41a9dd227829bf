#include "ere/pipeline.hpp"

#include "ere/error.hpp"

namespace ere {

ScreeningStage run_screening(const Dataset& data, const GlmFamily& family, const IndexSet& candidates,
                             const IndexSet& always_include, std::optional<double> threshold) {
  ScreeningStage st;
  st.always_include = always_include;
  const IndexSet pool = set_difference(candidates, always_include);
  if (pool.empty()) throw ConfigError("no candidate columns to screen");
  st.stats = marginal_screen_stats(data, pool, family);
  st.warnings = st.stats.warnings;
  if (threshold) {
    if (!(*threshold >= 0.0)) throw ConfigError("screening threshold must be >= 0");
    st.gamma = *threshold;
    st.gamma_overridden = true;
  } else {
    const Index cap = default_max_screened(data.n(), static_cast<Index>(always_include.size()));
    const auto grid = default_threshold_grid(st.stats.mmle, pool, cap);
    auto sel = select_threshold(data, st.stats.mmle, grid, family, pool, always_include);
    st.gamma = sel.gamma;
    st.stats.bic_trace = sel.trace;
    st.warnings.insert(st.warnings.end(), sel.warnings.begin(), sel.warnings.end());
  }
  st.stats.threshold = st.gamma;
  st.stats.selected = screen(st.stats.mmle, st.gamma, pool);
  st.selected = set_union(st.stats.selected, always_include);
  if (static_cast<Index>(st.selected.size()) >= data.n()) {
    throw ConfigError("threshold " + std::to_string(st.gamma) + " keeps " + std::to_string(st.selected.size()) +
                      " columns; at most n - 1 = " + std::to_string(data.n() - 1) + " can be fitted");
  }
  return st;
}

ModalityAnalysis analyze_modality(const Dataset& data, const GlmFamily& family, const ScreeningStage& stage,
                                  const IndexSet& modality_columns, const AnalysisOptions& options) {
  ModalityAnalysis a;
  a.screened_m = set_intersection(set_difference(stage.selected, stage.always_include), modality_columns);
  const auto s_m = static_cast<Index>(a.screened_m.size());
  if (s_m == 0) {
    a.estimate.n = data.n();
    a.estimate.screened_out = true;
    a.inference = infer(a.estimate, options.alpha, options.two_sided);
    return a;
  }

  if (options.refit) {
    a.full = fit_mle(data, stage.selected, family);
    a.reduced = fit_mle(data, set_difference(stage.selected, a.screened_m), family);
  } else {
    const PenaltyConfig pen{options.penalty, 0.0, options.penalty == PenaltyKind::scad ? 3.7 : 3.0};
    const auto s_tilde = static_cast<Index>(stage.selected.size() - stage.always_include.size());

    PenalizedProblem full{&data, stage.selected, set_union(a.screened_m, stage.always_include), {}, pen, family};
    const auto g1 = options.lambda1_grid.empty() ? default_lambda_grid(s_tilde, data.n()) : options.lambda1_grid;
    auto s1 = select_lambda(full, g1);
    a.full = std::move(s1.fit);
    a.lambda1 = s1.lambda;
    a.lambda1_trace = std::move(s1.trace);
    a.warnings.insert(a.warnings.end(), s1.warnings.begin(), s1.warnings.end());

    PenalizedProblem reduced{&data, stage.selected, stage.always_include, a.screened_m, pen, family};
    const auto g2 = options.lambda2_grid.empty() ? default_lambda_grid(s_tilde, data.n()) : options.lambda2_grid;
    auto s2 = select_lambda(reduced, g2);
    a.reduced = std::move(s2.fit);
    a.lambda2 = s2.lambda;
    a.lambda2_trace = std::move(s2.trace);
    a.warnings.insert(a.warnings.end(), s2.warnings.begin(), s2.warnings.end());
  }
  if (!a.full.converged) a.warnings.push_back("full-model fit did not converge");
  if (!a.reduced.converged) a.warnings.push_back("reduced-model fit did not converge");

  a.estimate = estimate_ere(a.full, a.reduced, data, family, s_m, options.gaussian_scale);
  a.inference = infer(a.estimate, options.alpha, options.two_sided);
  return a;
}

}  // namespace ere
