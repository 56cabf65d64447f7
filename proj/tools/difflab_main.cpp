#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "difflab/config.hpp"
#include "difflab/harness.hpp"
#include "difflab/selftest.hpp"

namespace {

using namespace difflab;

struct ConfigArgs {
  std::string path;
  cli::Overrides overrides;
};

void add_config_options(CLI::App* sub, ConfigArgs& args) {
  sub->add_option("config", args.path, "JSON experiment config")->required();
  sub->add_option("--seed", args.overrides.seed, "master seed");
  sub->add_option("--runs", args.overrides.runs, "Monte Carlo runs");
  sub->add_option("--iterations", args.overrides.iterations, "iterations per run");
  sub->add_option("--output", args.overrides.output, "output CSV path (default: stdout)");
  sub->add_option("--threads", args.overrides.threads, "worker threads (default: DIFFLAB_THREADS or 1)");
  sub->add_option("--strategies", args.overrides.strategies, "comma-separated subset of noncoop,centralized,consensus,diffusion");
}

cli::CliConfig resolve(const ConfigArgs& args) {
  cli::CliConfig c = cli::load_config(args.path);
  cli::apply_overrides(c, args.overrides, std::getenv("DIFFLAB_THREADS"));
  return c;
}

template <class Writer>
void emit(const std::string& output, Writer&& write) {
  if (output.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream f(output);
  if (!f) throw std::runtime_error("cannot open " + output + " for writing");
  write(f);
  if (!f) throw std::runtime_error("write to " + output + " failed");
}

int simulate(const ConfigArgs& args) {
  const auto c = resolve(args);
  const auto curve = harness::run_monte_carlo(c.experiment, c.threads);
  emit(c.output, [&](std::ostream& o) { harness::write_curve_csv(curve, o); });
  if (!c.output.empty()) harness::write_metadata_json(c.experiment, curve, c.output + ".meta.json");
  return 0;
}

int predict(const ConfigArgs& args) {
  const auto c = resolve(args);
  const auto ex = harness::prepare_experiment(c.experiment);
  const auto grid = harness::recording_grid(c.experiment.iterations, c.experiment.record_stride,
                                            c.experiment.record_growth);
  const auto rows = harness::predict(ex, grid);
  emit(c.output, [&](std::ostream& o) { harness::write_prediction_csv(rows, o); });
  return 0;
}

void print_summary(const harness::Experiment& ex, const harness::LearningCurve& curve) {
  using strategies::StrategyKind;
  const std::size_t last = curve.iterations.back();
  const std::size_t half = std::max<std::size_t>(1, last / 2);
  auto has = [&](StrategyKind k) {
    for (const auto& s : curve.series)
      if (s.strategy == k) return true;
    return false;
  };
  std::printf("final iteration %zu, %zu runs\n", last, curve.runs);
  for (const auto& s : curve.series) {
    std::printf("  %-12s er=%.6e (%.2f dB)", std::string(strategies::to_string(s.strategy)).c_str(),
                s.er_mean.back(), s.er_db.back());
    if (last >= 10 * std::max<std::size_t>(1, last / 10)) {
      std::printf("  slope %.2f dB/decade",
                  harness::fit_decade_slope(curve.curve(s.strategy), std::max<std::size_t>(1, last / 10), last));
    }
    std::printf("\n");
  }
  if (has(StrategyKind::NonCooperative) && has(StrategyKind::Diffusion)) {
    std::printf("gap noncoop - diffusion over [%zu, %zu]: %.2f dB\n", half, last,
                harness::gap_db(curve.curve(StrategyKind::NonCooperative), curve.curve(StrategyKind::Diffusion), half,
                                last));
  }
  if (has(StrategyKind::Diffusion) && has(StrategyKind::Centralized)) {
    std::printf("gap diffusion - centralized over [%zu, %zu]: %.2f dB\n", half, last,
                harness::gap_db(curve.curve(StrategyKind::Diffusion), curve.curve(StrategyKind::Centralized), half,
                                last));
  }
  if (has(StrategyKind::Consensus) && has(StrategyKind::Diffusion)) {
    std::printf("gap consensus - diffusion over [%zu, %zu]: %.2f dB\n", half, last,
                harness::gap_db(curve.curve(StrategyKind::Consensus), curve.curve(StrategyKind::Diffusion), half,
                                last));
  }
  const auto rows = harness::predict(ex, {last});
  if (!rows.empty()) {
    std::printf("predicted network er at %zu: %.6e (%.2f dB), large-step form %.6e (%.2f dB)\n", last,
                rows.front().predictor_exact, harness::to_db(rows.front().predictor_exact), rows.front().predictor_mlsp,
                harness::to_db(rows.front().predictor_mlsp));
    if (has(StrategyKind::Diffusion)) {
      std::printf("diffusion minus prediction: %.2f dB\n",
                  curve.get(StrategyKind::Diffusion).er_db.back() - harness::to_db(rows.front().predictor_exact));
    }
  }
}

int compare(const ConfigArgs& args) {
  const auto c = resolve(args);
  const auto ex = harness::prepare_experiment(c.experiment);
  const auto curve = harness::run_monte_carlo(ex, c.threads);
  if (!c.output.empty()) {
    harness::write_curve_csv(curve, std::filesystem::path(c.output));
    harness::write_metadata_json(c.experiment, curve, c.output + ".meta.json");
    harness::write_prediction_csv(harness::predict(ex, curve.iterations), std::filesystem::path(c.output + ".predict.csv"));
  }
  print_summary(ex, curve);
  return 0;
}

int topology(const ConfigArgs& args) {
  const auto c = resolve(args);
  const auto ex = harness::prepare_experiment(c.experiment);
  emit(c.output, [&](std::ostream& o) {
    const auto& t = ex.reference_topology;
    for (std::size_t k = 0; k < t.size(); ++k) {
      o << k << ':';
      for (std::size_t l : t.neighbors(k)) o << ' ' << l;
      o << '\n';
    }
    o << "perron_norm_sq=" << harness::format_double(ex.reference_spectral.perron_norm_sq()) << '\n';
  });
  return 0;
}

int run_selftest() {
  return selftest::report(selftest::run_all(), std::cout) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"difflab: distributed stochastic-gradient learning experiments"};
  app.set_version_flag("--version", harness::version_string());
  app.require_subcommand(1);

  ConfigArgs sim_args, pred_args, cmp_args, topo_args;
  auto* sim = app.add_subcommand("simulate", "run the Monte Carlo experiment and write the learning-curve CSV");
  add_config_options(sim, sim_args);
  auto* pred = app.add_subcommand("predict", "write theoretical predictions on the recording grid");
  add_config_options(pred, pred_args);
  auto* cmp = app.add_subcommand("compare", "simulate, predict and print gap/slope summary");
  add_config_options(cmp, cmp_args);
  auto* topo = app.add_subcommand("topology", "print the reference topology and its Perron norm");
  add_config_options(topo, topo_args);
  auto* self = app.add_subcommand("selftest", "run the numerical oracle checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*sim) return simulate(sim_args);
    if (*pred) return predict(pred_args);
    if (*cmp) return compare(cmp_args);
    if (*topo) return topology(topo_args);
    if (*self) return run_selftest();
  } catch (const harness::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
