#include "commands.hpp"

#include "ere/error.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <thread>

namespace {

enum Exit { ok = 0, other = 1, config = 2, data = 3, numerical = 4 };

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ere::ConfigError("cannot write '" + path + "'");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Expected relative entropy: modality-level inference for GLMs"};
  app.require_subcommand(1);

  ere::cli::AnalysisConfig ac;
  std::string config_path;
  std::vector<std::string> targets;
  std::optional<std::string> family;
  std::optional<double> alpha, threshold;
  std::optional<std::uint64_t> seed;
  bool one_sided = false, no_intercept = false, no_standardize = false;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());

  auto add_analysis = [&](CLI::App* sub) {
    sub->add_option("--data", ac.data_path, "CSV file with a header row")->required();
    sub->add_option("--config", config_path, "JSON modality map")->required();
    sub->add_option("--family", family, "gaussian|logistic|poisson|exponential|probit");
    sub->add_option("--modality", targets, "target modality name (repeatable; default all)");
    sub->add_option("--alpha", alpha, "significance level (default 0.05)");
    sub->add_option("--threshold", threshold, "screening threshold instead of the BIC grid search");
    sub->add_option("--seed", seed, "seed recorded in the report");
    sub->add_option("--threads", threads, "worker threads");
    sub->add_option("--out", ac.out_path, "output file (default standard output)");
    sub->add_flag("--no-intercept", no_intercept, "fit without an intercept");
    sub->add_flag("--no-standardize", no_standardize, "keep columns on their original scale");
    sub->add_option("--gaussian-scale", ac.gaussian_scale, "profiled|shared");
  };

  auto* infer = app.add_subcommand("infer", "ERE estimate, confidence interval and p-value per modality");
  add_analysis(infer);
  infer->add_flag("--one-sided", one_sided, "report the one-sided lower confidence bound");
  infer->add_flag("--refit", ac.refit, "unpenalized refits on the screened set");
  infer->add_option("--penalty", ac.penalty, "scad|mcp");

  auto* screen = app.add_subcommand("screen", "screening diagnostics only");
  add_analysis(screen);

  ere::cli::SimulateConfig sc;
  std::optional<ere::Index> reps;
  std::vector<std::size_t> sim_modalities;
  auto* simulate = app.add_subcommand("simulate", "coverage study on the simulation designs");
  simulate->add_option("--model", sc.model, "design 1, 2 or 3")->required()->check(CLI::Range(1, 3));
  simulate->add_option("--delta", sc.deltas, "signal scales (comma separated; default the design grid)")->delimiter(',');
  simulate->add_option("--methods", sc.methods, "oracle,sis_scad,sis_refit")->delimiter(',');
  simulate->add_option("--modality", sim_modalities, "1-based block numbers (default all)")->delimiter(',');
  simulate->add_option("--reps", reps, "replications per cell");
  simulate->add_flag("--small", sc.small, "n=200, p=400, 200 replications");
  simulate->add_option("--n", sc.n, "sample size");
  simulate->add_option("--p", sc.p, "number of covariates");
  simulate->add_option("--alpha", sc.alpha, "significance level");
  simulate->add_option("--seed", sc.seed, "base seed; replication i uses seed + i");
  simulate->add_option("--threads", threads, "worker threads");
  simulate->add_option("--fit-family", sc.fit_family, "likelihood maximised by the estimators");
  simulate->add_option("--gaussian-scale", sc.gaussian_scale, "profiled|shared");
  simulate->add_option("--out", sc.out_path, "CSV output (default standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? Exit::ok : Exit::config;
  }

  try {
    if (simulate->parsed()) {
      sc.reps = reps;
      sc.threads = threads;
      for (std::size_t m : sim_modalities) {
        if (m < 1) throw ere::ConfigError("modality numbers start at 1");
        sc.modalities.push_back(m - 1);
      }
      write_output(sc.out_path, ere::cli::simulate_command(sc, std::cerr));
      return Exit::ok;
    }
    ere::cli::load_config_file(config_path, ac);
    if (family) ac.family = *family;
    if (!targets.empty()) ac.targets = targets;
    if (alpha) ac.alpha = *alpha;
    if (threshold) ac.threshold = threshold;
    if (seed) ac.seed = *seed;
    if (one_sided) ac.one_sided = true;
    ac.intercept = !no_intercept;
    ac.standardize = !no_standardize;
    const auto report = infer->parsed() ? ere::cli::infer_command(ac, std::cerr, std::cout)
                                        : ere::cli::screen_command(ac, std::cerr, std::cout);
    if (!ac.out_path.empty()) write_output(ac.out_path, ere::cli::dump_report(report));
    return Exit::ok;
  } catch (const ere::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ere::ErrorKind::config: return Exit::config;
      case ere::ErrorKind::data: return Exit::data;
      case ere::ErrorKind::numerical: return Exit::numerical;
    }
    return Exit::other;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return Exit::other;
  }
}
