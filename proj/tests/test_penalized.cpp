#include <doctest.h>

#include "ere/error.hpp"
#include "ere/penalized.hpp"
#include "ere/pipeline.hpp"
#include "ere/sim.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace ere;

namespace {

struct Problem {
  Dataset data;
  IndexSet truth;
};

// s columns of which the first three carry signal; the first column of the
// target block is column 0.
Problem sparse_problem(const GlmFamily& family, Index n, Index p, std::uint64_t seed, double signal = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Problem pr;
  pr.data.X.resize(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) pr.data.X(i, j) = z(rng);
  const double coef[] = {signal, -0.8 * signal, 0.6 * signal};
  pr.data.y.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double eta = coef[0] * pr.data.X(i, 0) + coef[1] * pr.data.X(i, 1) + coef[2] * pr.data.X(i, 2);
    if (family.kind == FamilyKind::gaussian) {
      pr.data.y[i] = eta + z(rng);
    } else {
      pr.data.y[i] = std::bernoulli_distribution(1.0 / (1.0 + std::exp(-eta)))(rng);
    }
  }
  pr.data.column_names.resize(static_cast<std::size_t>(p));
  pr.truth = {0, 1, 2};
  return pr;
}

IndexSet iota(Index p) {
  IndexSet s(static_cast<std::size_t>(p));
  std::iota(s.begin(), s.end(), Index{0});
  return s;
}

double integrated(const PenaltyConfig& c, double t, int steps = 20000) {
  if (t <= 0.0) return 0.0;
  const double h = t / steps;
  double s = 0.5 * (penalty_derivative(c, 0.0) + penalty_derivative(c, t));
  for (int i = 1; i < steps; ++i) s += penalty_derivative(c, i * h);
  return s * h;
}

}  // namespace

TEST_SUITE("penalized") {

TEST_CASE("SCAD reference values") {
  const auto c = PenaltyConfig::scad(1.0, 3.7);
  CHECK(penalty_value(c, 0.0) == 0.0);
  CHECK(penalty_derivative(c, 5.0) == 0.0);
  CHECK(penalty_value(c, 5.0) == doctest::Approx(2.35).epsilon(1e-12));
  CHECK(oracle::scad_integrated(5.0, 1.0, 3.7) == doctest::Approx(2.35).epsilon(1e-6));
  for (double t : {0.3, 1.0, 1.7, 2.9, 3.7, 8.0}) {
    CHECK(penalty_value(c, t) == doctest::Approx(oracle::scad_integrated(t, 1.0, 3.7)).epsilon(1e-6));
  }
  CHECK_THROWS_AS(penalty_value(c, -1.0), std::invalid_argument);
}

TEST_CASE("penalty conditions on a dense grid") {
  for (auto kind : {PenaltyKind::scad, PenaltyKind::mcp}) {
    for (double lambda : {0.05, 0.5, 1.0, 3.0}) {
      for (double a : {kind == PenaltyKind::scad ? 2.5 : 1.5, 3.7, 6.0}) {
        const PenaltyConfig c{kind, lambda, a};
        c.validate();
        CHECK(penalty_value(c, 0.0) == 0.0);
        const double top = 2.0 * a * lambda;
        double prev = 0.0;
        bool ok = true;
        for (int i = 0; i <= 10000; ++i) {
          const double t = top * i / 10000.0;
          const double v = penalty_value(c, t), d = penalty_derivative(c, t);
          ok = ok && v >= prev && d >= 0.0 && d <= lambda;
          if (t >= a * lambda) ok = ok && d == 0.0;
          prev = v;
        }
        CHECK(ok);
        for (double t : {0.5 * lambda, lambda, 2.0 * lambda, a * lambda, 1.5 * a * lambda}) {
          CHECK(penalty_value(c, t) == doctest::Approx(integrated(c, t)).epsilon(1e-6));
        }
      }
    }
  }
  CHECK_THROWS_AS(PenaltyConfig::scad(1.0, 2.0).validate(), ConfigError);
  CHECK_THROWS_AS(PenaltyConfig::mcp(1.0, 1.0).validate(), ConfigError);
  CHECK_THROWS_AS(PenaltyConfig::scad(-1.0).validate(), ConfigError);
}

TEST_CASE("orthonormal univariate fit matches a grid search") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> z;
  const Index n = 64;
  for (auto kind : {PenaltyKind::scad, PenaltyKind::mcp}) {
    const PenaltyConfig pen = kind == PenaltyKind::scad ? PenaltyConfig::scad(1.0) : PenaltyConfig::mcp(1.0);
    for (double target : {-4.5, -2.2, -0.7, 0.4, 0.95, 1.3, 1.8, 2.5, 3.2, 6.0}) {
      Dataset d;
      d.X.resize(n, 1);
      d.y.resize(n);
      for (Index i = 0; i < n; ++i) {
        d.X(i, 0) = i % 2 ? 1.0 : -1.0;  // x'x = n
        d.y[i] = target * d.X(i, 0) + 0.3 * z(rng);
      }
      d.column_names = {"x"};
      const double zbar = d.X.col(0).dot(d.y) / static_cast<double>(n);
      PenalizedProblem pr{&d, {0}, {}, {}, pen, GlmFamily::gaussian(DispersionMode::fixed_one)};
      const auto fit = fit_full(pr);
      const double grid =
          oracle::grid_minimiser(zbar, [&](double t) { return penalty_value(pen, t); });
      CHECK(fit.converged);
      CHECK(std::abs(fit.beta[0] - grid) <= 2e-4);
    }
  }
}

TEST_CASE("zero penalty reproduces the unpenalized MLE") {
  for (const auto& fam : {GlmFamily::gaussian(), GlmFamily::logistic()}) {
    const auto pr = sparse_problem(fam, 200, 12, 3);
    const IndexSet all = iota(12);
    PenalizedProblem full{&pr.data, all, {0, 1, 2, 3}, {}, PenaltyConfig::scad(0.0), fam};
    const auto f = fit_full(full);
    const auto mle = fit_mle(pr.data, all, fam);
    CHECK((f.beta - mle.beta).cwiseAbs().maxCoeff() <= 1e-6);

    PenalizedProblem red{&pr.data, all, {}, {0, 1, 2, 3}, PenaltyConfig::scad(0.0), fam};
    const auto r = fit_reduced(red);
    const auto rmle = fit_mle(pr.data, set_difference(all, {0, 1, 2, 3}), fam);
    CHECK((r.beta - rmle.beta).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("unpenalized block satisfies its score equations") {
  for (const auto& fam : {GlmFamily::gaussian(), GlmFamily::logistic()}) {
    const auto pr = sparse_problem(fam, 250, 20, 11);
    PenalizedProblem full{&pr.data, iota(20), {0, 5, 6}, {}, PenaltyConfig::scad(0.1), fam};
    const auto f = fit_full(full);
    CHECK(f.converged);
    const Eigen::VectorXd g = score(pr.data, f.beta, fam) / (250.0 * f.objective_scale);
    for (Index j : {0, 5, 6}) CHECK(std::abs(g[j]) < 1e-6);
    CHECK(f.gradient_norm <= 1e-6);
  }
}

TEST_CASE("fully constrained reduced model") {
  const auto pr = sparse_problem(GlmFamily::logistic(), 100, 6, 2);
  PenalizedProblem red{&pr.data, {0, 1, 2}, {}, {0, 1, 2}, PenaltyConfig::scad(0.2), GlmFamily::logistic()};
  const auto r = fit_reduced(red);
  CHECK(r.beta.isZero(0.0));
  CHECK(r.support.empty());
  CHECK(r.loglik == doctest::Approx(log_likelihood(pr.data, Eigen::VectorXd::Zero(6), GlmFamily::logistic())));

  const auto g = sparse_problem(GlmFamily::gaussian(), 100, 6, 2);
  PenalizedProblem gred{&g.data, {0, 1, 2}, {}, {0, 1, 2}, PenaltyConfig::scad(0.2), GlmFamily::gaussian()};
  CHECK(fit_reduced(gred).loglik == doctest::Approx(fit_mle(g.data, {}, GlmFamily::gaussian()).loglik));
}

TEST_CASE("index set validation") {
  const auto pr = sparse_problem(GlmFamily::gaussian(), 50, 6, 2);
  PenalizedProblem overlap{&pr.data, {0, 1, 2}, {0}, {0}, PenaltyConfig::scad(0.2), GlmFamily::gaussian()};
  CHECK_THROWS_AS(fit_reduced(overlap), ConfigError);
  PenalizedProblem outside{&pr.data, {0, 1}, {3}, {}, PenaltyConfig::scad(0.2), GlmFamily::gaussian()};
  CHECK_THROWS_AS(fit_full(outside), ConfigError);
  PenalizedProblem forced{&pr.data, {0, 1, 2}, {}, {1}, PenaltyConfig::scad(0.2), GlmFamily::gaussian()};
  CHECK_THROWS_AS(fit_full(forced), ConfigError);
}

TEST_CASE("reduced fit on simulated data leaves the target block empty") {
  const SimModel model = make_model(1, 1.0);
  const Dataset d = generate(model, 77);
  const auto stage = sim_screening(d, model);
  const auto a = analyze_modality(d, model.family, stage, model.modalities[0].columns, AnalysisOptions{});
  CHECK(set_intersection(a.reduced.support, model.modalities[0].columns).empty());
  for (Index j : model.modalities[0].columns) CHECK(a.reduced.beta[j] == 0.0);
  CHECK(is_subset(a.full.support, stage.selected));
  CHECK(is_subset(a.screened_m, a.full.support));
}

TEST_CASE("coordinate order does not change the solution") {
  for (const auto& fam : {GlmFamily::gaussian(), GlmFamily::logistic()}) {
    const auto pr = sparse_problem(fam, 300, 25, 19);
    const IndexSet all = iota(25);
    PenalizedProblem full{&pr.data, all, {0, 1, 2, 3, 4}, {}, PenaltyConfig::scad(0.08), fam};
    PenalizedProblem red{&pr.data, all, {}, {0, 1, 2, 3, 4}, PenaltyConfig::scad(0.08), fam};
    const auto f0 = fit_full(full);
    const auto r0 = fit_reduced(red);
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 3; ++rep) {
      PenalizedOptions of, orr;
      of.coordinate_order.resize(25);
      std::iota(of.coordinate_order.begin(), of.coordinate_order.end(), Index{0});
      std::shuffle(of.coordinate_order.begin(), of.coordinate_order.end(), rng);
      orr.coordinate_order.resize(20);
      std::iota(orr.coordinate_order.begin(), orr.coordinate_order.end(), Index{0});
      std::shuffle(orr.coordinate_order.begin(), orr.coordinate_order.end(), rng);
      CHECK((fit_full(full, of).beta - f0.beta).cwiseAbs().maxCoeff() <= 1e-8);
      CHECK((fit_reduced(red, orr).beta - r0.beta).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
}

TEST_CASE("LLA objective never increases and zeros are exact") {
  for (const auto& fam : {GlmFamily::gaussian(), GlmFamily::logistic()}) {
    for (std::uint64_t seed = 40; seed < 45; ++seed) {
      const auto pr = sparse_problem(fam, 200, 30, seed);
      PenalizedProblem full{&pr.data, iota(30), {0}, {}, PenaltyConfig::scad(0.12), fam};
      const auto start = penalized_start(full);
      PenalizedOptions opt;
      opt.start = &start;
      const auto f = fit_full(full, opt);
      double prev = penalized_objective(full, start.beta, start.scale);
      for (double v : f.objective_trace) {
        CHECK(v <= prev + 1e-12 * std::max(1.0, std::abs(prev)));
        prev = v;
      }
      CHECK(f.objective_trace.back() ==
            doctest::Approx(penalized_objective(full, f.beta, start.scale)).epsilon(1e-12));
      for (Index j = 0; j < 30; ++j) CHECK((f.beta[j] != 0.0) == contains(f.support, j));
      CHECK(f.support.size() < 30);
    }
  }
}

TEST_CASE("lambda selection") {
  const auto pr = sparse_problem(GlmFamily::gaussian(), 150, 30, 23);
  PenalizedProblem full{&pr.data, iota(30), {}, {}, PenaltyConfig::scad(0.0), GlmFamily::gaussian()};

  const auto only = select_lambda(full, {0.0});
  CHECK(only.lambda == 0.0);
  CHECK(only.trace.size() == 1);

  const auto grid = default_lambda_grid(30, 150);
  CHECK(grid.size() == 30);
  CHECK(std::is_sorted(grid.rbegin(), grid.rend()));
  CHECK(grid.front() == doctest::Approx(4.0 * std::sqrt(std::log(30.0) / 150.0)));
  CHECK(grid.back() == doctest::Approx(0.01 * std::sqrt(std::log(30.0) / 150.0)));

  const auto sel = select_lambda(full, grid);
  double best = INFINITY;
  for (double lam : grid) {
    PenalizedProblem p = full;
    p.penalty.lambda = lam;
    const auto f = fit_full(p);
    const double rss = (pr.data.y - pr.data.X * f.beta).squaredNorm();
    const double ll = -75.0 * (std::log(rss / 150.0) + 1.0);
    best = std::min(best, -2.0 * ll + static_cast<double>(f.support.size()) * std::log(150.0));
  }
  CHECK(bic(sel.fit) == doctest::Approx(best).epsilon(1e-9));

  // every large lambda empties the model: a tie that goes to the largest value
  const auto tie = select_lambda(full, {50.0, 100.0, 70.0});
  CHECK(tie.lambda == 100.0);
  CHECK(tie.fit.support.empty());
}

TEST_CASE("tuned fit is at least as specific as the unpenalized one") {
  double spec_sel = 0.0, spec_zero = 0.0;
  const int reps = 100;
  for (int r = 0; r < reps; ++r) {
    const auto pr = sparse_problem(GlmFamily::gaussian(), 200, 30, 500 + static_cast<std::uint64_t>(r));
    PenalizedProblem full{&pr.data, iota(30), {}, {}, PenaltyConfig::scad(0.0), GlmFamily::gaussian()};
    const auto sel = select_lambda(full, default_lambda_grid(30, 200));
    const auto zero = fit_full(full);
    auto specificity = [&](const IndexSet& s) {
      return 1.0 - static_cast<double>(set_difference(s, pr.truth).size()) / 27.0;
    };
    const double a = specificity(sel.fit.support), b = specificity(zero.support);
    CHECK(a >= b);
    spec_sel += a;
    spec_zero += b;
  }
  CHECK(spec_sel >= spec_zero);
}

TEST_CASE("KKT conditions on seeded problems") {
  int checked = 0;
  for (const auto& fam : {GlmFamily::gaussian(), GlmFamily::logistic()}) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto pr = sparse_problem(fam, 200, 40, 900 + seed, 0.8);
      PenalizedProblem full{&pr.data, iota(40), {0, 1}, {}, PenaltyConfig::scad(0.0), fam};
      const auto sel = select_lambda(full, default_lambda_grid(38, 200));
      CHECK(sel.fit.gradient_norm <= 1e-6);
      CHECK(sel.fit.converged);
      for (const auto& pt : sel.trace) {
        INFO(fam.name(), " seed ", seed, " lambda ", pt.lambda, " df ", pt.df);
        CHECK(pt.converged);
      }
      ++checked;
    }
  }
  CHECK(checked == 100);
}

}
