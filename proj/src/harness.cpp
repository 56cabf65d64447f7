#include "difflab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

#ifndef DIFFLAB_VERSION
#define DIFFLAB_VERSION "0.1.0"
#endif

namespace difflab::harness {

using strategies::StrategyKind;

namespace {

constexpr std::uint64_t kSharedRun = std::numeric_limits<std::uint64_t>::max();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string_view model_name(ModelKind k) { return k == ModelKind::Quadratic ? "quadratic" : "logistic"; }

std::string_view combiner_name(CombinerKind k) {
  switch (k) {
    case CombinerKind::Metropolis: return "metropolis";
    case CombinerKind::Uniform: return "uniform";
    case CombinerKind::Identity: return "identity";
  }
  return "unknown";
}

models::RiskModel build_model(const ExperimentConfig& c) {
  if (c.model == ModelKind::Quadratic) {
    const auto m = static_cast<Eigen::Index>(c.dim);
    Eigen::VectorXd w = Eigen::VectorXd::Ones(m);
    if (!c.w_opt.empty()) w = Eigen::Map<const Eigen::VectorXd>(c.w_opt.data(), m);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(m, m);
    if (!c.feature_cov_diag.empty()) {
      cov = Eigen::Map<const Eigen::VectorXd>(c.feature_cov_diag.data(), m).asDiagonal();
    }
    return models::QuadraticModel(std::move(w), c.sigma_v_sq, std::move(cov), c.features);
  }
  models::Dataset data;
  if (!c.dataset_csv.empty()) {
    data = read_dataset_csv(c.dataset_csv);
    if (data.dim() != c.dim) {
      throw ConfigError("dataset " + c.dataset_csv + " has " + std::to_string(data.dim()) +
                        " features but config dim is " + std::to_string(c.dim));
    }
  } else {
    Stream rng(derive_seed(c.master_seed, kSharedRun, 2));
    data = models::synthetic_logistic_dataset(c.dataset_size, c.dim, c.label_noise, rng);
  }
  return models::LogisticModel(std::move(data), c.regularizer);
}

struct RunRecord {
  // [strategy][recorded index]
  std::vector<std::vector<double>> er;
  std::vector<std::vector<double>> msd;
};

void check_finite(const Eigen::VectorXd& w, std::size_t run, StrategyKind k, std::size_t iteration) {
  if (!w.allFinite()) {
    throw SimulationError("non-finite estimate in run " + std::to_string(run) + ", strategy " +
                          std::string(strategies::to_string(k)) + ", iteration " + std::to_string(iteration));
  }
}

RunRecord simulate_run(const Experiment& ex, const std::vector<std::size_t>& grid, std::size_t run) {
  const ExperimentConfig& c = ex.config;
  const std::size_t n = c.n_nodes;
  const auto m = static_cast<Eigen::Index>(c.dim);
  const Eigen::VectorXd& w_opt = models::w_opt(ex.model);

  std::optional<netgraph::CombinationMatrix> per_run;
  if (c.topology_per_run && c.combiner != CombinerKind::Identity) {
    Stream topo_rng(derive_seed(c.master_seed, run, kTopologyStream));
    per_run = build_combiner(c.combiner, netgraph::random_connected_topology(n, c.topology_edge_prob, topo_rng));
  }
  const netgraph::CombinationMatrix& a = per_run ? *per_run : ex.reference_combiner;
  if (c.combiner != CombinerKind::Identity && !netgraph::spectral_summary(a).is_primitive) {
    throw SimulationError("combination matrix of run " + std::to_string(run) + " is not primitive");
  }

  std::vector<Eigen::VectorXd> init(n, Eigen::VectorXd::Zero(m));
  if (c.init.gaussian) {
    Stream init_rng(derive_seed(c.master_seed, run, kInitStream));
    const double scale = c.init.radius / std::sqrt(static_cast<double>(c.dim));
    for (auto& w : init)
      for (Eigen::Index i = 0; i < m; ++i) w(i) = scale * init_rng.normal();
  }

  std::vector<Stream> base;
  base.reserve(n);
  for (std::size_t k = 0; k < n; ++k) base.emplace_back(derive_seed(c.master_seed, run, kNodeStreamBase + k));

  const strategies::StepSchedule schedule(c.mu);
  RunRecord rec;
  for (StrategyKind kind : c.strategies) {
    std::vector<Stream> streams = base;
    std::vector<double> er;
    std::vector<double> msd;
    er.reserve(grid.size());
    msd.reserve(grid.size());
    std::size_t next = 0;

    if (kind == StrategyKind::Centralized) {
      Eigen::VectorXd w = init.front();
      for (std::size_t i = 1; i <= c.iterations; ++i) {
        if (next < grid.size() && grid[next] == i) {
          er.push_back(excess_risk(ex.model, w));
          msd.push_back((w_opt - w).squaredNorm());
          ++next;
        }
        w = strategies::centralized_step(w, i, ex.model, schedule, streams);
        check_finite(w, run, kind, i);
      }
    } else {
      strategies::NetworkState state;
      state.estimates = init;
      state.psi.assign(n, Eigen::VectorXd::Zero(m));
      for (std::size_t i = 1; i <= c.iterations; ++i) {
        if (next < grid.size() && grid[next] == i) {
          double er_sum = 0.0;
          double msd_sum = 0.0;
          for (const auto& w : state.estimates) {
            er_sum += excess_risk(ex.model, w);
            msd_sum += (w_opt - w).squaredNorm();
          }
          er.push_back(er_sum / static_cast<double>(n));
          msd.push_back(msd_sum / static_cast<double>(n));
          ++next;
        }
        switch (kind) {
          case StrategyKind::NonCooperative: strategies::noncoop_step(state, ex.model, schedule, streams); break;
          case StrategyKind::Diffusion: strategies::diffusion_step(state, a, ex.model, schedule, streams); break;
          case StrategyKind::Consensus: strategies::consensus_step(state, a, ex.model, schedule, streams); break;
          case StrategyKind::Centralized: break;
        }
        for (const auto& w : state.estimates) check_finite(w, run, kind, i);
      }
    }
    rec.er.push_back(std::move(er));
    rec.msd.push_back(std::move(msd));
  }
  return rec;
}

void mean_and_stderr(const std::vector<RunRecord>& runs, std::size_t s, std::size_t idx, bool use_msd,
                     double& mean, double& stderr_out) {
  const double count = static_cast<double>(runs.size());
  double sum = 0.0;
  for (const auto& r : runs) sum += (use_msd ? r.msd : r.er)[s][idx];
  mean = sum / count;
  if (runs.size() < 2) {
    stderr_out = 0.0;
    return;
  }
  double ss = 0.0;
  for (const auto& r : runs) {
    const double d = (use_msd ? r.msd : r.er)[s][idx] - mean;
    ss += d * d;
  }
  stderr_out = std::sqrt(ss / (count - 1.0) / count);
}

}  // namespace

void ExperimentConfig::validate() const {
  if (n_nodes == 0) throw ConfigError("n_nodes must be >= 1");
  if (dim == 0) throw ConfigError("dim must be >= 1");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("mu must be positive");
  if (!(sigma_v_sq >= 0.0) || !std::isfinite(sigma_v_sq)) throw ConfigError("sigma_v_sq must be >= 0");
  if (!(regularizer > 0.0) || !std::isfinite(regularizer)) throw ConfigError("regularizer must be positive");
  if (iterations < 2) throw ConfigError("iterations must be >= 2");
  if (runs < 1) throw ConfigError("runs must be >= 1");
  if (strategies.empty()) throw ConfigError("strategies must be non-empty");
  for (std::size_t i = 0; i < strategies.size(); ++i)
    for (std::size_t j = i + 1; j < strategies.size(); ++j)
      if (strategies[i] == strategies[j]) throw ConfigError("strategies contains duplicates");
  if (!(topology_edge_prob > 0.0 && topology_edge_prob <= 1.0)) {
    throw ConfigError("topology_edge_prob must lie in (0, 1]");
  }
  if (record_stride < 1) throw ConfigError("record_stride must be >= 1");
  if (!(record_growth >= 1.0) || !std::isfinite(record_growth)) throw ConfigError("record_growth must be >= 1");
  if (init.gaussian && !(init.radius >= 0.0)) throw ConfigError("init radius must be >= 0");
  if (model == ModelKind::Quadratic) {
    if (!w_opt.empty() && w_opt.size() != dim) throw ConfigError("w_opt length must equal dim");
    if (!feature_cov_diag.empty()) {
      if (feature_cov_diag.size() != dim) throw ConfigError("feature_cov_diag length must equal dim");
      for (double d : feature_cov_diag)
        if (!(d > 0.0)) throw ConfigError("feature_cov_diag entries must be positive");
    }
  } else {
    if (dataset_csv.empty() && dataset_size == 0) throw ConfigError("dataset_size must be >= 1");
    if (!(label_noise >= 0.0)) throw ConfigError("label_noise must be >= 0");
    if (noise_samples < 1000) throw ConfigError("noise_samples must be >= 1000");
  }
}

netgraph::CombinationMatrix build_combiner(CombinerKind kind, const netgraph::Topology& t) {
  switch (kind) {
    case CombinerKind::Metropolis: return netgraph::metropolis_weights(t);
    case CombinerKind::Uniform: return netgraph::uniform_weights(t);
    case CombinerKind::Identity: return netgraph::CombinationMatrix::identity(t.size());
  }
  throw std::logic_error("unknown combiner");
}

Experiment prepare_experiment(const ExperimentConfig& config) {
  config.validate();
  models::RiskModel model = build_model(config);
  models::HessianSpectrum spec = models::spectrum(model);
  models::NoiseStats noise = std::visit(
      overloaded{[](const models::QuadraticModel& q) { return models::quad_noise_stats(q); },
                 [&](const models::LogisticModel& l) {
                   Stream rng(derive_seed(config.master_seed, kSharedRun, 3));
                   return models::estimate_noise_stats(model, l.w_opt(), spec, config.noise_samples, rng);
                 }},
      model);
  // The reference topology is run 0's when topologies vary per run.
  Stream topo_rng(derive_seed(config.master_seed, config.topology_per_run ? 0 : kSharedRun, kTopologyStream));
  netgraph::Topology topo = config.combiner == CombinerKind::Identity
                                ? netgraph::Topology::from_edges(config.n_nodes, {})
                                : netgraph::random_connected_topology(config.n_nodes, config.topology_edge_prob, topo_rng);
  netgraph::CombinationMatrix a = build_combiner(config.combiner, topo);
  netgraph::SpectralSummary summary = netgraph::spectral_summary(a);
  return Experiment{config,          std::move(model), std::move(spec), std::move(noise),
                    std::move(topo), std::move(a),     std::move(summary)};
}

double excess_risk(const models::RiskModel& model, const Eigen::VectorXd& w) {
  return std::visit(overloaded{[&](const models::QuadraticModel& q) {
                                 const Eigen::VectorXd e = w - q.w_opt();
                                 return e.dot(q.feature_cov() * e);
                               },
                               [&](const models::LogisticModel& l) {
                                 return std::max(0.0, models::logistic_empirical_risk(l, w) - l.w_opt_risk());
                               }},
                    model);
}

double weighted_er_approx(const Eigen::VectorXd& w_tilde, const models::HessianSpectrum& spectrum) {
  if (w_tilde.size() != spectrum.eigenvalues.size()) throw std::invalid_argument("weighted_er_approx: dimension mismatch");
  const Eigen::VectorXd proj = spectrum.eigenvectors.transpose() * w_tilde;
  return 0.5 * proj.dot(spectrum.eigenvalues.cwiseProduct(proj));
}

std::vector<std::size_t> recording_grid(std::size_t iterations, std::size_t stride, double growth) {
  if (stride < 1 || growth < 1.0) throw std::invalid_argument("recording_grid: stride >= 1 and growth >= 1 required");
  std::vector<std::size_t> grid;
  std::size_t i = 1;
  while (i <= iterations) {
    grid.push_back(i);
    const auto grown = static_cast<std::size_t>(std::llround(static_cast<double>(i) * growth));
    i = std::max(i + stride, grown);
  }
  if (grid.back() != iterations) grid.push_back(iterations);
  return grid;
}

const CurveSeries& LearningCurve::get(StrategyKind k) const {
  for (const auto& s : series)
    if (s.strategy == k) return s;
  throw std::out_of_range("strategy " + std::string(strategies::to_string(k)) + " not present in curve");
}

Curve LearningCurve::curve(StrategyKind k) const { return {iterations, get(k).er_mean}; }

LearningCurve run_monte_carlo(const Experiment& ex, std::size_t threads) {
  const ExperimentConfig& c = ex.config;
  const auto grid = recording_grid(c.iterations, c.record_stride, c.record_growth);

  std::vector<RunRecord> records(c.runs);
  std::vector<std::exception_ptr> errors(c.runs);
  std::atomic<std::size_t> next_run{0};
  auto worker = [&] {
    for (std::size_t r = next_run++; r < c.runs; r = next_run++) {
      try {
        records[r] = simulate_run(ex, grid, r);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(threads, 1, c.runs);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  LearningCurve out;
  out.iterations = grid;
  out.runs = c.runs;
  out.metadata = {c.master_seed, config_hash(c), true};
  for (std::size_t s = 0; s < c.strategies.size(); ++s) {
    CurveSeries series;
    series.strategy = c.strategies[s];
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
      double mean = 0.0, se = 0.0;
      mean_and_stderr(records, s, idx, false, mean, se);
      series.er_mean.push_back(mean);
      series.er_stderr.push_back(se);
      series.er_db.push_back(to_db(mean));
      mean_and_stderr(records, s, idx, true, mean, se);
      series.msd_mean.push_back(mean);
      series.msd_stderr.push_back(se);
    }
    out.series.push_back(std::move(series));
  }
  return out;
}

LearningCurve run_monte_carlo(const ExperimentConfig& config, std::size_t threads) {
  return run_monte_carlo(prepare_experiment(config), threads);
}

double to_db(double x) { return 10.0 * std::log10(x); }

double gap_db(const Curve& a, const Curve& b, std::size_t i_lo, std::size_t i_hi) {
  if (a.iterations != b.iterations) throw std::invalid_argument("gap_db: curves have different iteration grids");
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t idx = 0; idx < a.iterations.size(); ++idx) {
    const std::size_t i = a.iterations[idx];
    if (i < i_lo || i > i_hi) continue;
    acc += to_db(a.er[idx]) - to_db(b.er[idx]);
    ++count;
  }
  if (count == 0) throw std::invalid_argument("gap_db: window contains no recorded iterations");
  return acc / static_cast<double>(count);
}

double fit_decade_slope(const Curve& c, std::size_t i_lo, std::size_t i_hi) {
  if (i_lo == 0 || i_hi < 10 * i_lo) throw std::invalid_argument("fit_decade_slope: window must span a decade");
  if (c.iterations.empty() || i_lo < c.iterations.front() || i_hi > c.iterations.back()) {
    throw std::invalid_argument("fit_decade_slope: window outside recorded grid");
  }
  std::vector<double> xs, ys;
  for (std::size_t idx = 0; idx < c.iterations.size(); ++idx) {
    const std::size_t i = c.iterations[idx];
    if (i < i_lo || i > i_hi) continue;
    xs.push_back(std::log10(static_cast<double>(i)));
    ys.push_back(to_db(c.er[idx]));
  }
  if (xs.size() < 2) throw std::invalid_argument("fit_decade_slope: fewer than two points in window");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxy += (xs[k] - mx) * (ys[k] - my);
    sxx += (xs[k] - mx) * (xs[k] - mx);
  }
  return sxy / sxx;
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_curve_csv(const LearningCurve& curve, std::ostream& out) {
  out << kCurveCsvHeader << '\n';
  for (const auto& s : curve.series) {
    for (std::size_t idx = 0; idx < curve.iterations.size(); ++idx) {
      out << curve.iterations[idx] << ',' << strategies::to_string(s.strategy) << ',' << format_double(s.er_mean[idx])
          << ',' << format_double(s.er_db[idx]) << ',' << format_double(s.er_stderr[idx]) << ',' << curve.runs << '\n';
    }
  }
}

void write_curve_csv(const LearningCurve& curve, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_curve_csv(curve, f);
  if (!f) throw std::runtime_error("write to " + path.string() + " failed");
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string_view field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
    out.push_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> parse_number(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

}  // namespace

models::Dataset read_dataset_csv(std::istream& in) {
  std::vector<double> labels;
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_fields(line);
    const auto first = parse_number(fields.front());
    if (!first) {
      if (rows.empty() && labels.empty() && line_no == 1) continue;  // header
      throw CsvError("line " + std::to_string(line_no) + ": label '" + std::string(fields.front()) + "' is not numeric");
    }
    if (*first != 1.0 && *first != -1.0) {
      throw CsvError("line " + std::to_string(line_no) + ": label must be +1 or -1, got " + std::string(fields.front()));
    }
    if (fields.size() < 2) throw CsvError("line " + std::to_string(line_no) + ": no feature columns");
    if (width == 0) width = fields.size();
    if (fields.size() != width) {
      throw CsvError("line " + std::to_string(line_no) + ": expected " + std::to_string(width) + " columns, found " +
                     std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(width - 1);
    for (std::size_t f = 1; f < fields.size(); ++f) {
      const auto v = parse_number(fields[f]);
      if (!v || !std::isfinite(*v)) {
        throw CsvError("line " + std::to_string(line_no) + ": column " + std::to_string(f + 1) + " is not a finite number");
      }
      row.push_back(*v);
    }
    labels.push_back(*first);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw CsvError("dataset contains no samples");
  models::Dataset d;
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto m = static_cast<Eigen::Index>(width - 1);
  d.features.resize(n, m);
  d.labels.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    d.labels(j) = labels[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < m; ++i) d.features(j, i) = rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
  }
  return d;
}

models::Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw CsvError("cannot open dataset " + path.string());
  try {
    return read_dataset_csv(f);
  } catch (const CsvError& e) {
    throw CsvError(path.string() + ": " + e.what());
  }
}

void write_dataset_csv(const models::Dataset& data, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (Eigen::Index j = 0; j < data.features.rows(); ++j) {
    f << (data.labels(j) > 0 ? "1" : "-1");
    for (Eigen::Index i = 0; i < data.features.cols(); ++i) f << ',' << format_double(data.features(j, i));
    f << '\n';
  }
}

std::string config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["model"] = model_name(c.model);
  j["n_nodes"] = c.n_nodes;
  j["dim"] = c.dim;
  j["mu"] = c.mu;
  j["sigma_v_sq"] = c.sigma_v_sq;
  j["regularizer"] = c.regularizer;
  j["iterations"] = c.iterations;
  j["runs"] = c.runs;
  std::vector<std::string> names;
  for (auto k : c.strategies) names.emplace_back(strategies::to_string(k));
  j["strategies"] = names;
  j["combiner"] = combiner_name(c.combiner);
  j["topology_edge_prob"] = c.topology_edge_prob;
  j["topology_per_run"] = c.topology_per_run;
  j["master_seed"] = c.master_seed;
  j["record_stride"] = c.record_stride;
  j["record_growth"] = c.record_growth;
  if (c.init.gaussian) {
    j["init"] = {{"gaussian", c.init.radius}};
  } else {
    j["init"] = "zero";
  }
  j["features"] = c.features == models::FeatureDistribution::Gaussian ? "gaussian" : "rademacher";
  j["w_opt"] = c.w_opt;
  j["feature_cov_diag"] = c.feature_cov_diag;
  j["dataset_csv"] = c.dataset_csv;
  j["dataset_size"] = c.dataset_size;
  j["label_noise"] = c.label_noise;
  j["noise_samples"] = c.noise_samples;
  return j.dump();
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : config_to_json(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string version_string() { return DIFFLAB_VERSION; }

void write_metadata_json(const ExperimentConfig& config, const LearningCurve& curve,
                         const std::filesystem::path& path) {
  nlohmann::json j;
  j["config"] = nlohmann::json::parse(config_to_json(config));
  j["master_seed"] = curve.metadata.master_seed;
  j["config_hash"] = curve.metadata.config_hash;
  j["common_random_numbers"] = curve.metadata.common_random_numbers;
  j["version"] = version_string();
  j["runs"] = curve.runs;
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << j.dump(2) << '\n';
}

namespace {

// Nodes behave as isolated learners under A = I.
double effective_perron_norm_sq(const Experiment& ex) {
  return ex.config.combiner == CombinerKind::Identity ? 1.0 : ex.reference_spectral.perron_norm_sq();
}

}  // namespace

theory::RateParams rate_params(const Experiment& ex) {
  return theory::make_rate_params(ex.spectrum, ex.noise, ex.config.mu, effective_perron_norm_sq(ex), ex.config.n_nodes);
}

theory::TransientParams transient_params(const Experiment& ex) {
  const Eigen::VectorXd& w_opt = models::w_opt(ex.model);
  const Eigen::VectorXd proj = ex.spectrum.eigenvectors.transpose() * w_opt;
  theory::TransientParams t;
  t.eigenvalues = ex.spectrum.eigenvalues;
  t.mu = ex.config.mu;
  t.initial_mode_energy = proj.cwiseAbs2();
  if (ex.config.init.gaussian) {
    const double spread = ex.config.init.radius * ex.config.init.radius / static_cast<double>(ex.config.dim);
    t.initial_mode_energy.array() += effective_perron_norm_sq(ex) * spread;
  }
  return t;
}

std::vector<PredictionRow> predict(const Experiment& ex, const std::vector<std::size_t>& grid) {
  const auto params = rate_params(ex);
  const auto transient = transient_params(ex);
  std::size_t transient_floor = 0;
  for (Eigen::Index m = 0; m < transient.eigenvalues.size(); ++m) {
    transient_floor = std::max(transient_floor, theory::transient_min_iteration(transient.eigenvalues(m), transient.mu));
  }
  std::optional<Eigen::MatrixXd> fim;
  if (const auto* q = std::get_if<models::QuadraticModel>(&ex.model); q != nullptr && q->sigma_v_sq() > 0.0) {
    fim = theory::fim_quadratic(*q);
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<PredictionRow> rows;
  for (std::size_t i : grid) {
    if (i < 2) continue;
    PredictionRow r;
    r.i = i;
    r.predictor_exact = theory::asymptotic_er_predictor(params, i);
    r.predictor_mlsp = theory::mlsp_approx(params.mu, ex.noise.trace, params.perron_norm_sq, i);
    if (i >= transient_floor) {
      const auto b = theory::transient_bounds(transient, i);
      r.transient_lower = b.lower;
      r.transient_upper = b.upper;
    } else {
      r.transient_lower = r.transient_upper = nan;
    }
    r.cramer_rao = fim ? theory::cramer_rao_msd(*fim, ex.config.n_nodes, i) : nan;
    rows.push_back(r);
  }
  return rows;
}

void write_prediction_csv(const std::vector<PredictionRow>& rows, std::ostream& out) {
  out << kPredictionCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.i << ',' << format_double(r.predictor_exact) << ',' << format_double(r.predictor_mlsp) << ','
        << format_double(r.transient_lower) << ',' << format_double(r.transient_upper) << ','
        << format_double(r.cramer_rao) << '\n';
  }
}

void write_prediction_csv(const std::vector<PredictionRow>& rows, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_prediction_csv(rows, f);
}

}  // namespace difflab::harness
