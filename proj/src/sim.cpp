#include "ere/sim.hpp"

#include "ere/error.hpp"
#include "ere/sampler.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

namespace ere {

namespace {

std::mt19937_64 make_rng(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
  return std::mt19937_64(seq);
}

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Eigen::VectorXd draw_response(const GlmFamily& family, const Eigen::VectorXd& eta, double sigma,
                              std::mt19937_64& rng) {
  Eigen::VectorXd y(eta.size());
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud;
  for (Index i = 0; i < eta.size(); ++i) {
    switch (family.kind) {
      case FamilyKind::gaussian: y[i] = eta[i] + sigma * nd(rng); break;
      case FamilyKind::binomial_logit:
      case FamilyKind::binomial_probit: y[i] = ud(rng) < mean_response(family, eta[i]) ? 1.0 : 0.0; break;
      default: throw ConfigError("simulation designs cover gaussian, logistic and probit responses only");
    }
  }
  return y;
}

}  // namespace

IndexSet SimModel::true_support() const {
  IndexSet out;
  for (Index j = 0; j < beta_star.size(); ++j) {
    if (beta_star[j] != 0.0) out.push_back(j);
  }
  return out;
}

SimModel make_model(int id, double delta, Index n, Index p) {
  std::vector<std::vector<double>> patterns;
  SimModel m;
  switch (id) {
    case 1:
      patterns = {{-1.15, 1.0, 1.75}, {-0.6, -0.8, 0.45}, {-0.75, 0.8, -0.75}};
      m.family = GlmFamily::gaussian();
      break;
    case 2:
      patterns = {{0.5, -1.0, -1.6, 0.9}, {0.4, 0.8, -0.7, -1.4}};
      m.family = GlmFamily::logistic();
      break;
    case 3:
      patterns = {{0.5, 0.6, -0.7, -0.9}, {0.4, 0.5, -0.6, -0.7}};
      m.family = GlmFamily::probit();
      break;
    default: throw ConfigError("model id must be 1, 2 or 3");
  }
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("delta must be positive");
  if (n < 10) throw ConfigError("simulation needs n >= 10");
  m.id = id;
  m.n = n;
  m.p = p;
  m.delta = delta;
  m.modalities = even_partition(p, patterns.size());
  m.beta_star = Eigen::VectorXd::Zero(p);
  for (std::size_t b = 0; b < patterns.size(); ++b) {
    const auto& cols = m.modalities[b].columns;
    if (cols.size() < patterns[b].size()) throw ConfigError("p is too small for the coefficient pattern");
    for (std::size_t k = 0; k < patterns[b].size(); ++k) {
      m.beta_star[cols[k]] = delta * patterns[b][k];
      m.slots.push_back(cols[k]);
    }
  }
  return m;
}

SimModel with_null_block(SimModel model, std::size_t m) {
  if (m >= model.modalities.size()) throw ConfigError("block index out of range");
  for (Index j : model.modalities[m].columns) model.beta_star[j] = 0.0;
  return model;
}

std::vector<double> default_deltas(int id) {
  switch (id) {
    case 1: return {0.6, 0.8, 1.0, 1.2, 1.6, 2.0};
    case 2: return {1.0, 1.2, 1.4, 1.7, 2.0, 2.3};
    case 3: return {1.0, 1.1, 1.2, 1.3, 1.4, 1.5};
    default: throw ConfigError("model id must be 1, 2 or 3");
  }
}

Dataset generate(const SimModel& model, std::uint64_t seed) {
  auto rng = make_rng(seed, 0x5151u);
  EquicorrelatedSampler sampler(model.p, model.rho);
  Dataset d;
  d.X = sampler.sample(model.n, rng);
  d.y = draw_response(model.family, d.X * model.beta_star, model.sigma_eps, rng);
  d.column_names.reserve(static_cast<std::size_t>(model.p));
  for (Index j = 0; j < model.p; ++j) d.column_names.push_back("x" + std::to_string(j + 1));
  return d;
}

std::string_view method_name(SimMethod m) {
  switch (m) {
    case SimMethod::oracle: return "oracle";
    case SimMethod::sis_scad: return "sis_scad";
    case SimMethod::sis_refit: return "sis_refit";
  }
  return "?";
}

SimMethod parse_method(std::string_view name) {
  if (name == "oracle") return SimMethod::oracle;
  if (name == "sis_scad" || name == "sis+scad") return SimMethod::sis_scad;
  if (name == "sis_refit" || name == "sis+refit") return SimMethod::sis_refit;
  throw ConfigError("unknown method '" + std::string(name) + "' (oracle, sis_scad, sis_refit)");
}

ScreeningStage sim_screening(const Dataset& data, const SimModel& model, const MethodOptions& options) {
  IndexSet all(static_cast<std::size_t>(data.p()));
  for (Index j = 0; j < data.p(); ++j) all[static_cast<std::size_t>(j)] = j;
  return run_screening(data, options.fit_family.value_or(model.family), all, {}, options.threshold);
}

MethodRun run_method(const Dataset& data, const SimModel& model, std::size_t m, SimMethod method,
                     const MethodOptions& options, const ScreeningStage* screening) {
  if (m >= model.modalities.size()) throw ConfigError("block index out of range");
  const GlmFamily family = options.fit_family.value_or(model.family);
  const IndexSet& block = model.modalities[m].columns;
  MethodRun run;
  if (method == SimMethod::oracle) {
    const IndexSet in_block = set_intersection(model.slots, block);
    const FitResult full = fit_mle(data, model.slots, family);
    const FitResult reduced = fit_mle(data, set_difference(model.slots, block), family);
    run.df = static_cast<Index>(in_block.size());
    run.estimate = estimate_ere(full, reduced, data, family, run.df, options.gaussian_scale);
    run.full_support = full.support;
    run.converged = full.converged && reduced.converged;
  } else {
    std::optional<ScreeningStage> own;
    if (!screening) own = sim_screening(data, model, options);
    const ScreeningStage& stage = screening ? *screening : *own;
    AnalysisOptions ao;
    ao.refit = method == SimMethod::sis_refit;
    ao.gaussian_scale = options.gaussian_scale;
    const ModalityAnalysis a = analyze_modality(data, family, stage, block, ao);
    run.estimate = a.estimate;
    run.df = a.estimate.s_tilde_m;
    run.full_support = a.full.support;
    run.converged = a.estimate.screened_out || (a.full.converged && a.reduced.converged);
  }
  const IndexSet truth = model.true_support();
  const Index zeros = data.p() - static_cast<Index>(truth.size());
  const auto hits = static_cast<Index>(set_intersection(run.full_support, truth).size());
  const auto false_pos = static_cast<Index>(run.full_support.size()) - hits;
  run.sensitivity = truth.empty() ? 1.0 : static_cast<double>(hits) / static_cast<double>(truth.size());
  run.specificity = zeros == 0 ? 1.0 : static_cast<double>(zeros - false_pos) / static_cast<double>(zeros);
  return run;
}

GroundTruthEre ground_truth(const SimModel& model, std::size_t m, std::uint64_t seed, Index fit_samples,
                            Index mc_samples) {
  if (m >= model.modalities.size()) throw ConfigError("block index out of range");
  const IndexSet& block = model.modalities[m].columns;
  EquicorrelatedSampler sampler(model.p, model.rho);
  if (model.family.kind == FamilyKind::gaussian) {
    GroundTruthEre g;
    g.method = GroundTruthMethod::closed_form_linear;
    g.h = ere_linear_closed_form(sampler.covariance(), model.beta_star, block, model.sigma_eps * model.sigma_eps);
    return g;
  }
  const IndexSet outside = set_difference(model.true_support(), block);
  ReducedModel reduced{Eigen::VectorXd::Zero(model.p), 1.0};
  if (!outside.empty()) {
    auto rng = make_rng(seed, 0x7a11u);
    Dataset big;
    big.X = sampler.sample(fit_samples, rng);
    big.y = draw_response(model.family, big.X * model.beta_star, model.sigma_eps, rng);
    reduced.beta0 = fit_mle(big, outside, model.family).beta;
  }
  McOptions mo;
  return mc_ere(model.family, model.beta_star, reduced, sampler, mc_samples, mix(seed), mo);
}

double oracle_noncentrality(const SimModel& model, std::size_t m, Index mc_samples, std::uint64_t seed) {
  if (m >= model.modalities.size()) throw ConfigError("block index out of range");
  const IndexSet support = model.true_support();
  const IndexSet& block = model.modalities[m].columns;
  std::vector<Index> pos;  // positions of the block's columns within the support
  for (std::size_t k = 0; k < support.size(); ++k) {
    if (contains(block, support[k])) pos.push_back(static_cast<Index>(k));
  }
  if (pos.empty()) return 0.0;
  if (mc_samples < static_cast<Index>(support.size()) + 1) throw std::invalid_argument("too few Monte Carlo samples");

  EquicorrelatedSampler sampler(model.p, model.rho);
  auto rng = make_rng(seed, 0x0a11u);
  const Eigen::MatrixXd X = sampler.sample(mc_samples, rng);
  const Eigen::MatrixXd XM = X(Eigen::all, support);
  const Eigen::VectorXd eta = X * model.beta_star;
  Eigen::VectorXd w(mc_samples);
  const double s2 = model.sigma_eps * model.sigma_eps;
  for (Index i = 0; i < mc_samples; ++i) {
    w[i] = model.family.kind == FamilyKind::gaussian ? 1.0 / s2 : fisher_weight(model.family, eta[i]);
  }
  const Eigen::MatrixXd info = (XM.transpose() * w.asDiagonal() * XM) / static_cast<double>(mc_samples);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 0.0) {
    throw NumericalError("information estimate is singular");
  }
  const Eigen::MatrixXd omega = ldlt.solve(Eigen::MatrixXd::Identity(info.rows(), info.cols()));
  const Eigen::MatrixXd omega_mm = omega(pos, pos);
  const Eigen::VectorXd bm = model.beta_star(IndexSet(support))(pos);
  return static_cast<double>(model.n) * bm.dot(omega_mm.ldlt().solve(bm));
}

void parallel_for(Index count, unsigned threads, const std::function<void(Index)>& task) {
  if (threads <= 1 || count <= 1) {
    for (Index i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const unsigned used = static_cast<unsigned>(std::min<Index>(threads, count));
  for (unsigned t = 0; t < used; ++t) {
    pool.emplace_back([&] {
      for (Index i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::vector<SimRow> run_coverage(const CoverageConfig& config) {
  if (config.reps < 1) throw ConfigError("reps must be >= 1");
  if (config.methods.empty()) throw ConfigError("no methods requested");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  const std::vector<double> deltas = config.deltas.empty() ? default_deltas(config.model) : config.deltas;

  std::vector<SimRow> rows;
  for (double delta : deltas) {
    const SimModel model = make_model(config.model, delta, config.n, config.p);
    std::vector<std::size_t> blocks = config.modalities;
    if (blocks.empty()) {
      for (std::size_t m = 0; m < model.modalities.size(); ++m) blocks.push_back(m);
    }
    for (std::size_t m : blocks) {
      if (m >= model.modalities.size()) throw ConfigError("modality index out of range");
    }
    std::vector<double> truth;
    for (std::size_t m : blocks) {
      const std::uint64_t tseed = mix(config.seed ^ mix(static_cast<std::uint64_t>(std::llround(delta * 1e6)) * 31 + m));
      truth.push_back(ground_truth(model, m, tseed, config.truth_fit_samples, config.truth_mc_samples).h);
    }

    struct Record {
      bool ok = false;
      bool covered = false;
      bool screened_out = false;
      double sens = 0.0, spec = 0.0, h = 0.0;
    };
    const std::size_t cells = blocks.size() * config.methods.size();
    std::vector<Record> records(static_cast<std::size_t>(config.reps) * cells);
    const bool need_screen = std::any_of(config.methods.begin(), config.methods.end(),
                                         [](SimMethod s) { return s != SimMethod::oracle; });

    parallel_for(config.reps, config.threads, [&](Index i) {
      const Dataset data = generate(model, config.seed + static_cast<std::uint64_t>(i));
      std::optional<ScreeningStage> stage;
      if (need_screen) {
        try {
          stage = sim_screening(data, model, config.method_options);
        } catch (const std::exception&) {
        }
      }
      for (std::size_t b = 0; b < blocks.size(); ++b) {
        for (std::size_t k = 0; k < config.methods.size(); ++k) {
          Record& r = records[static_cast<std::size_t>(i) * cells + b * config.methods.size() + k];
          const SimMethod method = config.methods[k];
          if (method != SimMethod::oracle && !stage) continue;
          try {
            const MethodRun run = run_method(data, model, blocks[b], method, config.method_options,
                                             stage ? &*stage : nullptr);
            const EreInference inf = infer(run.estimate, config.alpha, true);
            r.ok = true;
            r.covered = inf.ci_lower <= truth[b] && truth[b] <= inf.ci_upper;
            r.screened_out = inf.screened_out;
            r.sens = run.sensitivity;
            r.spec = run.specificity;
            r.h = run.estimate.h_hat;
          } catch (const std::exception&) {
            r.ok = false;
          }
        }
      }
    });

    for (std::size_t b = 0; b < blocks.size(); ++b) {
      for (std::size_t k = 0; k < config.methods.size(); ++k) {
        SimRow row{config.model, delta, config.methods[k], model.modalities[blocks[b]].name,
                   0.0, 0.0, 0.0, 0.0, truth[b], 0, 0, 0};
        double cov = 0.0, sens = 0.0, spec = 0.0, h = 0.0;
        for (Index i = 0; i < config.reps; ++i) {
          const Record& r = records[static_cast<std::size_t>(i) * cells + b * config.methods.size() + k];
          if (!r.ok) {
            ++row.failures;
            continue;
          }
          ++row.reps;
          if (r.screened_out) ++row.screened_out;
          cov += r.covered ? 1.0 : 0.0;
          sens += r.sens;
          spec += r.spec;
          h += r.h;
        }
        if (row.reps > 0) {
          const double d = static_cast<double>(row.reps);
          row.coverage = cov / d;
          row.sensitivity = sens / d;
          row.specificity = spec / d;
          row.mean_h_hat = h / d;
        }
        rows.push_back(row);
      }
    }
  }
  return rows;
}

std::string coverage_csv(const std::vector<SimRow>& rows) {
  std::string out = "model,delta,method,modality,coverage,sensitivity,specificity,mean_h_hat,true_h,reps\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.6g,%s,%s,%.6f,%.6f,%.6f,%.8g,%.8g,%lld\n", r.model, r.delta,
                  std::string(method_name(r.method)).c_str(), r.modality.c_str(), r.coverage, r.sensitivity,
                  r.specificity, r.mean_h_hat, r.true_h, static_cast<long long>(r.reps));
    out += buf;
  }
  return out;
}

}  // namespace ere
