#include "ere/penalized.hpp"

#include "ere/error.hpp"
#include "glm_detail.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ere {

void PenalizedProblem::validate() const {
  if (data == nullptr) throw ConfigError("penalized problem has no data");
  penalty.validate();
  const Index p = data->p();
  for (Index j : screened) {
    if (j < 0 || j >= p) throw ConfigError("screened index " + std::to_string(j) + " outside the design");
  }
  if (!is_subset(unpenalized, screened)) throw ConfigError("unpenalized columns must be screened");
  if (!is_subset(forced_zero, screened)) throw ConfigError("forced-zero columns must be screened");
  if (!set_intersection(unpenalized, forced_zero).empty()) {
    throw ConfigError("a column cannot be both unpenalized and forced to zero");
  }
  if (static_cast<Index>(screened.size()) >= data->n()) {
    throw ConfigError("screened set of size " + std::to_string(screened.size()) + " needs fewer columns than rows");
  }
}

namespace {

double soft_threshold(double z, double w) {
  if (z > w) return z - w;
  if (z < -w) return z + w;
  return 0.0;
}

struct Workspace {
  const PenalizedProblem& problem;
  const PenalizedOptions& options;
  IndexSet free;
  Eigen::MatrixXd X;                // n x s
  std::vector<bool> penalized;      // per free position
  std::vector<Index> order;
  double scale;                     // n * phi
  std::optional<Eigen::MatrixXd> fixed_q;  // Gaussian: Hessian does not depend on beta

  Workspace(const PenalizedProblem& pr, const PenalizedOptions& opt, double phi)
      : problem(pr), options(opt), free(pr.free_set()) {
    X = pr.data->X(Eigen::all, free);
    const auto s = static_cast<Index>(free.size());
    penalized.resize(free.size());
    for (std::size_t k = 0; k < free.size(); ++k) penalized[k] = !contains(pr.unpenalized, free[k]);
    if (opt.coordinate_order.empty()) {
      order.resize(free.size());
      std::iota(order.begin(), order.end(), Index{0});
    } else {
      order = opt.coordinate_order;
      std::vector<Index> check = order;
      std::sort(check.begin(), check.end());
      for (Index k = 0; k < static_cast<Index>(check.size()); ++k) {
        if (check[static_cast<std::size_t>(k)] != k || static_cast<Index>(check.size()) != s) {
          throw ConfigError("coordinate_order must be a permutation of the free coordinates");
        }
      }
    }
    scale = static_cast<double>(pr.data->n()) * phi;
    if (pr.family.kind == FamilyKind::gaussian) fixed_q = X.transpose() * X / scale;
  }

  // -loglik/scale, or nullopt outside the domain
  std::optional<double> smooth(const Eigen::VectorXd& eta) const {
    auto ll = detail::objective_loglik(problem.family, problem.data->y, eta);
    if (!ll) return std::nullopt;
    return -*ll / scale;
  }

  double l1(const Eigen::VectorXd& b, const Eigen::VectorXd& w) const { return w.cwiseProduct(b.cwiseAbs()).sum(); }

  double concave(const Eigen::VectorXd& b) const {
    double total = 0.0;
    for (std::size_t k = 0; k < free.size(); ++k) {
      if (penalized[k]) total += penalty_value(problem.penalty, std::abs(b[static_cast<Index>(k)]));
    }
    return total;
  }

  Eigen::VectorXd lla_weights(const Eigen::VectorXd& b) const {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(b.size());
    for (std::size_t k = 0; k < free.size(); ++k) {
      if (penalized[k]) w[static_cast<Index>(k)] = penalty_derivative(problem.penalty, std::abs(b[static_cast<Index>(k)]));
    }
    return w;
  }

  struct InnerResult {
    Eigen::VectorXd beta;
    bool converged = false;
    bool separation = false;
  };

  // Solve the quadratic exactly on the current active set and keep the
  // result if signs and the zero-coordinate conditions hold.
  bool polish(const Eigen::MatrixXd& Q, const Eigen::VectorXd& u, const Eigen::VectorXd& w,
              Eigen::VectorXd& z) const {
    std::vector<Index> active;
    for (Index k = 0; k < z.size(); ++k) {
      if (z[k] != 0.0) active.push_back(k);
    }
    Eigen::VectorXd cand = Eigen::VectorXd::Zero(z.size());
    if (!active.empty()) {
      Eigen::VectorXd rhs(static_cast<Index>(active.size()));
      for (std::size_t a = 0; a < active.size(); ++a) {
        const Index k = active[a];
        rhs[static_cast<Index>(a)] = u[k] - w[k] * (z[k] > 0 ? 1.0 : -1.0);
      }
      const Eigen::MatrixXd Qa = Q(active, active);
      Eigen::LLT<Eigen::MatrixXd> llt(Qa);
      if (llt.info() != Eigen::Success) return false;
      const Eigen::VectorXd za = llt.solve(rhs);
      for (std::size_t a = 0; a < active.size(); ++a) {
        const Index k = active[a];
        if ((za[static_cast<Index>(a)] > 0) != (z[k] > 0) || za[static_cast<Index>(a)] == 0.0) return false;
        cand[k] = za[static_cast<Index>(a)];
      }
    }
    const Eigen::VectorXd grad = u - Q * cand;
    for (Index k = 0; k < z.size(); ++k) {
      if (cand[k] == 0.0 && std::abs(grad[k]) > w[k] + 1e-12) return false;
    }
    z = cand;
    return true;
  }

  // minimise -loglik/scale + sum w_k |b_k| from `b`
  InnerResult weighted_l1(Eigen::VectorXd b, const Eigen::VectorXd& w) const {
    InnerResult out;
    const auto& y = problem.data->y;
    Eigen::VectorXd eta = X * b;
    auto f0 = smooth(eta);
    if (!f0) throw DomainError(std::string(problem.family.name()) + ": penalized start outside the domain");
    double f = *f0;
    for (int it = 0; it < options.newton_max_iterations; ++it) {
      const auto terms = detail::working_terms(problem.family, y, eta, 1e-10, 30.0);
      out.separation = out.separation || terms.separation;
      const Eigen::VectorXd c = X.transpose() * terms.score / scale;

      double viol = 0.0;
      for (Index k = 0; k < b.size(); ++k) {
        const double v = b[k] == 0.0 ? std::max(0.0, std::abs(c[k]) - w[k]) : std::abs(c[k] - w[k] * (b[k] > 0 ? 1.0 : -1.0));
        viol = std::max(viol, v);
      }
      if (viol <= options.newton_tolerance) {
        out.converged = true;
        break;
      }

      const Eigen::MatrixXd Q = fixed_q ? *fixed_q : Eigen::MatrixXd(detail::weighted_gram(X, terms.weight) / scale);
      // coordinate descent on 0.5 z'Qz - u'z + sum w|z|, u = c + Q b
      Eigen::VectorXd z = b;
      Eigen::VectorXd Qz = Q * b;
      const Eigen::VectorXd u = c + Qz;
      bool cd_done = false;
      for (int sweep = 0; sweep < options.cd_max_sweeps; ++sweep) {
        double maxd = 0.0;
        for (Index k : order) {
          const double qkk = Q(k, k);
          if (!(qkk > 0.0)) continue;
          const double r = u[k] - (Qz[k] - qkk * z[k]);
          const double zk = soft_threshold(r, w[k]) / qkk;
          const double d = zk - z[k];
          if (d != 0.0) {
            Qz.noalias() += Q.col(k) * d;
            z[k] = zk;
            maxd = std::max(maxd, std::abs(d) * qkk);
          }
        }
        if (maxd <= options.cd_tolerance || (maxd <= 1e-5 && polish(Q, u, w, z))) {
          cd_done = true;
          break;
        }
      }
      const Eigen::VectorXd dir = z - b;
      const double decrease = -c.dot(dir) + l1(z, w) - l1(b, w);
      if (!(decrease < 0.0) || dir.lpNorm<Eigen::Infinity>() == 0.0) {
        out.converged = cd_done;
        break;
      }
      const double g0 = f + l1(b, w);
      const Eigen::VectorXd eta_dir = X * dir;
      double t = 1.0;
      bool accepted = false;
      // a quadratic model that is exact, or a decrease lost in rounding: take the full step
      if (fixed_q || -decrease <= 1e-12 * std::max(1.0, std::abs(g0))) {
        const Eigen::VectorXd cand_eta = eta + eta_dir;
        if (auto fc = smooth(cand_eta)) {
          b = z;
          eta = cand_eta;
          f = *fc;
          continue;
        }
      }
      for (int h = 0; h < 40; ++h, t *= 0.5) {
        const Eigen::VectorXd cand = t == 1.0 ? z : Eigen::VectorXd(b + t * dir);
        const Eigen::VectorXd cand_eta = eta + t * eta_dir;
        auto fc = smooth(cand_eta);
        if (fc && *fc + l1(cand, w) <= g0 + 1e-4 * t * decrease) {
          b = cand;
          eta = cand_eta;
          f = *fc;
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
    }
    out.beta = std::move(b);
    return out;
  }
};

Eigen::VectorXd restrict(const Eigen::VectorXd& full, const IndexSet& idx) { return full(idx); }

}  // namespace

PenalizedStart penalized_start(const PenalizedProblem& problem) {
  problem.validate();
  const Dataset& data = *problem.data;
  const IndexSet free = problem.free_set();
  PenalizedStart start;
  start.beta = Eigen::VectorXd::Zero(data.p());
  try {
    const FitResult mle = fit_mle(data, free, problem.family);
    if (mle.converged && !mle.separation && mle.beta.allFinite()) {
      start.beta = mle.beta;
      start.scale = mle.dispersion;
      start.from_mle = true;
      return start;
    }
  } catch (const NumericalError&) {
  }
  // fall back to the unpenalized block alone; the first step is then a weighted lasso
  const IndexSet base = set_intersection(problem.unpenalized, free);
  try {
    const FitResult f = fit_mle(data, base, problem.family);
    start.beta = f.beta;
  } catch (const NumericalError&) {
    const Eigen::MatrixXd Xf = data.X(Eigen::all, free);
    start.beta(free) = detail::initial_coefficients(problem.family, Xf, data.y);
  }
  start.scale = estimate_dispersion(data, data.X * start.beta, problem.family, 0);
  return start;
}

double penalized_objective(const PenalizedProblem& problem, const Eigen::VectorXd& beta, double scale) {
  const Dataset& data = *problem.data;
  const double ll = log_likelihood(data, beta, problem.family, 1.0);
  double pen = 0.0;
  for (Index j : problem.free_set()) {
    if (!contains(problem.unpenalized, j)) pen += penalty_value(problem.penalty, std::abs(beta[j]));
  }
  return -ll / (static_cast<double>(data.n()) * scale) + pen;
}

double kkt_residual(const PenalizedProblem& problem, const Eigen::VectorXd& beta, double scale) {
  const Dataset& data = *problem.data;
  const Eigen::VectorXd g = score(data, beta, problem.family) / (static_cast<double>(data.n()) * scale);
  double worst = 0.0;
  for (Index j : problem.free_set()) {
    double v;
    if (contains(problem.unpenalized, j)) {
      v = std::abs(g[j]);
    } else if (beta[j] == 0.0) {
      v = std::max(0.0, std::abs(g[j]) - penalty_derivative(problem.penalty, 0.0));
    } else {
      const double sgn = beta[j] > 0 ? 1.0 : -1.0;
      v = std::abs(g[j] - sgn * penalty_derivative(problem.penalty, std::abs(beta[j])));
    }
    worst = std::max(worst, v);
  }
  return worst;
}

FitResult fit_penalized(const PenalizedProblem& problem, const PenalizedOptions& options) {
  problem.validate();
  const Dataset& data = *problem.data;
  const IndexSet free = problem.free_set();

  FitResult fit;
  fit.n = data.n();
  fit.beta = Eigen::VectorXd::Zero(data.p());
  if (free.empty()) {
    const Eigen::VectorXd eta = Eigen::VectorXd::Zero(data.n());
    fit.loglik = reported_loglik(data, eta, problem.family);
    fit.dispersion = estimate_dispersion(data, eta, problem.family, 0);
    fit.converged = true;
    return fit;
  }

  const PenalizedStart own = options.start ? PenalizedStart{} : penalized_start(problem);
  const PenalizedStart& start = options.start ? *options.start : own;
  if (start.beta.size() != data.p()) throw std::invalid_argument("penalized start has the wrong length");

  Workspace ws(problem, options, start.scale);
  fit.objective_scale = start.scale;

  Eigen::VectorXd beta = restrict(start.beta, free);
  Eigen::VectorXd inner_from = options.warm_start ? restrict(*options.warm_start, free) : beta;
  if (options.warm_start) {
    auto ok = ws.smooth(ws.X * inner_from);
    if (!ok) inner_from = beta;
  }

  bool inner_ok = true;
  int step = 0;
  for (; step < options.lla_max_steps; ++step) {
    const Eigen::VectorXd w = ws.lla_weights(beta);
    auto inner = ws.weighted_l1(step == 0 ? inner_from : beta, w);
    fit.separation = fit.separation || inner.separation;
    inner_ok = inner.converged;
    const double change = (inner.beta - beta).lpNorm<Eigen::Infinity>();
    const double size = std::max(1.0, inner.beta.lpNorm<Eigen::Infinity>());
    beta = std::move(inner.beta);
    auto sm = ws.smooth(ws.X * beta);
    fit.objective_trace.push_back(sm ? *sm + ws.concave(beta) : HUGE_VAL);
    if (change <= options.lla_tolerance * size) {
      ++step;
      break;
    }
  }
  fit.iterations = step;

  fit.beta(free) = beta;
  for (std::size_t k = 0; k < free.size(); ++k) {
    if (beta[static_cast<Index>(k)] != 0.0) fit.support.push_back(free[k]);
  }
  const Eigen::VectorXd eta = data.X * fit.beta;
  fit.loglik = reported_loglik(data, eta, problem.family);
  fit.gradient_norm = kkt_residual(problem, fit.beta, start.scale);
  fit.converged = inner_ok && fit.gradient_norm <= options.kkt_tolerance;
  fit.dispersion = static_cast<Index>(fit.support.size()) < data.n()
                       ? estimate_dispersion(data, eta, problem.family, static_cast<Index>(fit.support.size()))
                       : start.scale;
  return fit;
}

FitResult fit_full(const PenalizedProblem& problem, const PenalizedOptions& options) {
  if (!problem.forced_zero.empty()) throw ConfigError("full fit takes no forced-zero columns");
  return fit_penalized(problem, options);
}

FitResult fit_reduced(const PenalizedProblem& problem, const PenalizedOptions& options) {
  return fit_penalized(problem, options);
}

LambdaSelection select_lambda(const PenalizedProblem& problem, const std::vector<double>& grid,
                              const PenalizedOptions& options) {
  if (grid.empty()) throw std::invalid_argument("select_lambda: empty grid");
  problem.validate();
  const PenalizedStart own = options.start ? PenalizedStart{} : penalized_start(problem);
  PenalizedOptions opts = options;
  opts.start = options.start ? options.start : &own;

  LambdaSelection out;
  bool have = false;
  double best = HUGE_VAL;
  Eigen::VectorXd warm;
  for (double lam : grid) {
    PenalizedProblem pr = problem;
    pr.penalty.lambda = lam;
    opts.warm_start = warm.size() ? &warm : nullptr;
    FitResult f;
    try {
      f = fit_penalized(pr, opts);
    } catch (const NumericalError& e) {
      out.warnings.push_back("lambda " + std::to_string(lam) + ": " + e.what());
      continue;
    }
    const double b = bic(f);
    out.trace.push_back({lam, b, static_cast<Index>(f.support.size()), f.converged});
    warm = f.beta;
    const double tie = 1e-10 * std::max(1.0, std::abs(best));
    if (!have || b < best - tie || (std::abs(b - best) <= tie && lam > out.lambda)) {
      best = std::min(best, b);
      out.lambda = lam;
      out.fit = std::move(f);
      have = true;
    }
  }
  if (!have) throw NumericalError("select_lambda: every grid fit failed");
  return out;
}

std::vector<double> default_lambda_grid(Index s_tilde, Index n, std::size_t points) {
  if (n < 2) throw std::invalid_argument("default_lambda_grid: n must be >= 2");
  const double rate = std::sqrt(std::log(std::max<double>(static_cast<double>(s_tilde), 2.0)) / static_cast<double>(n));
  std::vector<double> grid(points);
  const double lo = std::log(0.01), hi = std::log(4.0);
  for (std::size_t k = 0; k < points; ++k) {
    const double frac = points == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(points - 1);
    grid[k] = std::exp(hi - (hi - lo) * frac) * rate;
  }
  return grid;
}

}  // namespace ere
