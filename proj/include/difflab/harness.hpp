#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "difflab/models.hpp"
#include "difflab/netgraph.hpp"
#include "difflab/strategies.hpp"
#include "difflab/theory.hpp"

namespace difflab::harness {

enum class ModelKind { Quadratic, Logistic };
enum class CombinerKind { Metropolis, Uniform, Identity };

struct InitSpec {
  /// Zero start when false; otherwise i.i.d. N(0, radius²/M) entries per node
  /// so that E‖w_{k,0}‖² = radius².
  bool gaussian = false;
  double radius = 0.0;
};

struct ExperimentConfig {
  ModelKind model = ModelKind::Quadratic;
  std::size_t n_nodes = 20;
  std::size_t dim = 2;
  double mu = 1.5;
  double sigma_v_sq = 1.0;
  double regularizer = 1.0;
  std::size_t iterations = 10'000;
  std::size_t runs = 100;
  std::vector<strategies::StrategyKind> strategies{strategies::kAllStrategies.begin(),
                                                   strategies::kAllStrategies.end()};
  CombinerKind combiner = CombinerKind::Metropolis;
  double topology_edge_prob = 0.3;
  bool topology_per_run = true;
  std::uint64_t master_seed = 1;
  /// Minimum spacing between recorded iterations.
  std::size_t record_stride = 1;
  /// Geometric growth of the recording grid; 1 records every stride-th iteration.
  double record_growth = 1.25;
  InitSpec init;

  // Quadratic model.
  models::FeatureDistribution features = models::FeatureDistribution::Gaussian;
  /// w°; empty means the all-ones vector.
  std::vector<double> w_opt;
  /// Diagonal of R_h; empty means identity.
  std::vector<double> feature_cov_diag;

  // Logistic model.
  /// CSV dataset; empty means synthetic data.
  std::string dataset_csv;
  std::size_t dataset_size = 5'000;
  double label_noise = 0.5;
  std::size_t noise_samples = 20'000;

  /// Throws ConfigError when an invariant fails.
  void validate() const;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Model and derived quantities shared by every run of an experiment.
struct Experiment {
  ExperimentConfig config;
  models::RiskModel model;
  models::HessianSpectrum spectrum;
  models::NoiseStats noise;
  /// Topology used when topology_per_run is false, and for predictions.
  netgraph::Topology reference_topology;
  netgraph::CombinationMatrix reference_combiner;
  netgraph::SpectralSummary reference_spectral;
};

Experiment prepare_experiment(const ExperimentConfig& config);

netgraph::CombinationMatrix build_combiner(CombinerKind kind, const netgraph::Topology& t);

/// J(w) − J(w°): exact quadratic form for the quadratic model, empirical
/// risk difference (floored at zero) for the logistic model.
double excess_risk(const models::RiskModel& model, const Eigen::VectorXd& w);

/// ½ w̃ᵀ Φ Λ Φᵀ w̃.
double weighted_er_approx(const Eigen::VectorXd& w_tilde, const models::HessianSpectrum& spectrum);

/// Recorded iterations: 1, then max(i + stride, round(i·growth)), always
/// ending at `iterations`.
std::vector<std::size_t> recording_grid(std::size_t iterations, std::size_t stride, double growth);

/// Excess-risk values of one strategy on a shared iteration grid.
struct Curve {
  std::vector<std::size_t> iterations;
  std::vector<double> er;
};

struct CurveSeries {
  strategies::StrategyKind strategy{};
  std::vector<double> er_mean;
  std::vector<double> er_stderr;
  std::vector<double> er_db;
  /// Network-average ‖w° − w_k‖².
  std::vector<double> msd_mean;
  std::vector<double> msd_stderr;
};

struct CurveMetadata {
  std::uint64_t master_seed = 0;
  std::string config_hash;
  bool common_random_numbers = true;
};

struct LearningCurve {
  std::vector<std::size_t> iterations;
  std::vector<CurveSeries> series;
  std::size_t runs = 0;
  CurveMetadata metadata;

  /// Throws std::out_of_range when the strategy was not simulated.
  const CurveSeries& get(strategies::StrategyKind k) const;
  Curve curve(strategies::StrategyKind k) const;
};

/// Thrown when a run produces a non-finite estimate or an unusable combiner.
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs every strategy for every run with common random numbers inside a
/// run, then averages. The result does not depend on `threads`.
LearningCurve run_monte_carlo(const Experiment& experiment, std::size_t threads = 1);
LearningCurve run_monte_carlo(const ExperimentConfig& config, std::size_t threads = 1);

/// Mean of (10log₁₀ a − 10log₁₀ b) over recorded iterations in [i_lo, i_hi].
double gap_db(const Curve& a, const Curve& b, std::size_t i_lo, std::size_t i_hi);

/// Least-squares slope of 10log₁₀(er) against log₁₀(i) over [i_lo, i_hi], in
/// dB per decade. Requires i_hi ≥ 10·i_lo inside the recorded grid.
double fit_decade_slope(const Curve& c, std::size_t i_lo, std::size_t i_hi);

double to_db(double x);

// CSV persistence.

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kCurveCsvHeader = "iteration,strategy,er_mean,er_db,er_stderr,runs";

/// 17 significant digits ("%.17g"); round-trips every double.
std::string format_double(double x);

void write_curve_csv(const LearningCurve& curve, std::ostream& out);
void write_curve_csv(const LearningCurve& curve, const std::filesystem::path& path);

/// One row per sample: label (+1/−1) then M features. An optional header
/// row is recognized by a non-numeric first token.
models::Dataset read_dataset_csv(const std::filesystem::path& path);
models::Dataset read_dataset_csv(std::istream& in);
void write_dataset_csv(const models::Dataset& data, const std::filesystem::path& path);

/// Canonical JSON echo of a config (keys sorted).
std::string config_to_json(const ExperimentConfig& config);
/// Hex FNV-1a digest of config_to_json.
std::string config_hash(const ExperimentConfig& config);

/// Sidecar with the config echo, seed, version string and CRN flag.
void write_metadata_json(const ExperimentConfig& config, const LearningCurve& curve,
                         const std::filesystem::path& path);

std::string version_string();

// Theory side by side with simulation.

struct PredictionRow {
  std::size_t i = 0;
  double predictor_exact = 0.0;
  double predictor_mlsp = 0.0;
  /// NaN below the transient validity threshold.
  double transient_lower = 0.0;
  double transient_upper = 0.0;
  /// NaN for models without a closed-form Fisher information.
  double cramer_rao = 0.0;
};

theory::RateParams rate_params(const Experiment& experiment);
theory::TransientParams transient_params(const Experiment& experiment);
std::vector<PredictionRow> predict(const Experiment& experiment, const std::vector<std::size_t>& grid);

inline constexpr const char* kPredictionCsvHeader =
    "i,predictor_exact,predictor_mlsp,transient_lower,transient_upper,cramer_rao";
void write_prediction_csv(const std::vector<PredictionRow>& rows, std::ostream& out);
void write_prediction_csv(const std::vector<PredictionRow>& rows, const std::filesystem::path& path);

}  // namespace difflab::harness
