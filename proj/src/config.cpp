#include "difflab/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace difflab::cli {

using harness::ConfigError;
using nlohmann::json;

namespace {

const std::set<std::string> kKnownKeys = {
    "model",        "n_nodes",          "dim",           "mu",           "sigma_v_sq",     "regularizer",
    "iterations",   "runs",             "strategies",    "combiner",     "topology_edge_prob",
    "topology_per_run", "master_seed",  "record_stride", "record_growth", "init",          "features",
    "w_opt",        "feature_cov_diag", "dataset_csv",   "dataset_size", "label_noise",    "noise_samples",
    "output",       "threads"};

double get_number(const json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError("'" + key + "' must be a number");
  return j.get<double>();
}

std::uint64_t get_count(const json& j, const std::string& key) {
  if (!j.is_number_unsigned()) {
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return j.get<std::uint64_t>();
    throw ConfigError("'" + key + "' must be a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

std::string get_string(const json& j, const std::string& key) {
  if (!j.is_string()) throw ConfigError("'" + key + "' must be a string");
  return j.get<std::string>();
}

std::vector<double> get_vector(const json& j, const std::string& key) {
  if (!j.is_array()) throw ConfigError("'" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(get_number(v, key));
  return out;
}

std::vector<strategies::StrategyKind> parse_strategy_list(const std::vector<std::string>& names) {
  std::vector<strategies::StrategyKind> out;
  for (const auto& name : names) {
    const auto k = strategies::parse_strategy(name);
    if (!k) throw ConfigError("unknown strategy '" + name + "'");
    out.push_back(*k);
  }
  return out;
}

harness::InitSpec parse_init(const json& j) {
  if (j.is_string() && j.get<std::string>() == "zero") return {};
  if (j.is_object() && j.size() == 1 && j.contains("gaussian")) {
    const double r = get_number(j.at("gaussian"), "init.gaussian");
    if (!(r >= 0.0)) throw ConfigError("init gaussian radius must be >= 0");
    return {true, r};
  }
  throw ConfigError("'init' must be \"zero\" or {\"gaussian\": radius}");
}

}  // namespace

CliConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (kKnownKeys.count(key) == 0) throw ConfigError("unknown config key '" + key + "'");
  }

  CliConfig c;
  auto& e = c.experiment;
  for (const auto& [key, v] : j.items()) {
    if (key == "model") {
      const auto s = get_string(v, key);
      if (s == "quadratic") e.model = harness::ModelKind::Quadratic;
      else if (s == "logistic") e.model = harness::ModelKind::Logistic;
      else throw ConfigError("unknown model '" + s + "'");
    } else if (key == "n_nodes") {
      e.n_nodes = get_count(v, key);
    } else if (key == "dim") {
      e.dim = get_count(v, key);
    } else if (key == "mu") {
      e.mu = get_number(v, key);
    } else if (key == "sigma_v_sq") {
      e.sigma_v_sq = get_number(v, key);
    } else if (key == "regularizer") {
      e.regularizer = get_number(v, key);
    } else if (key == "iterations") {
      e.iterations = get_count(v, key);
    } else if (key == "runs") {
      e.runs = get_count(v, key);
    } else if (key == "strategies") {
      if (!v.is_array()) throw ConfigError("'strategies' must be an array of names");
      std::vector<std::string> names;
      for (const auto& s : v) names.push_back(get_string(s, key));
      e.strategies = parse_strategy_list(names);
    } else if (key == "combiner") {
      const auto s = get_string(v, key);
      if (s == "metropolis") e.combiner = harness::CombinerKind::Metropolis;
      else if (s == "uniform") e.combiner = harness::CombinerKind::Uniform;
      else if (s == "identity") e.combiner = harness::CombinerKind::Identity;
      else throw ConfigError("unknown combiner '" + s + "'");
    } else if (key == "topology_edge_prob") {
      e.topology_edge_prob = get_number(v, key);
    } else if (key == "topology_per_run") {
      if (!v.is_boolean()) throw ConfigError("'topology_per_run' must be a boolean");
      e.topology_per_run = v.get<bool>();
    } else if (key == "master_seed") {
      e.master_seed = get_count(v, key);
    } else if (key == "record_stride") {
      e.record_stride = get_count(v, key);
    } else if (key == "record_growth") {
      e.record_growth = get_number(v, key);
    } else if (key == "init") {
      e.init = parse_init(v);
    } else if (key == "features") {
      const auto s = get_string(v, key);
      if (s == "gaussian") e.features = models::FeatureDistribution::Gaussian;
      else if (s == "rademacher") e.features = models::FeatureDistribution::Rademacher;
      else throw ConfigError("unknown feature distribution '" + s + "'");
    } else if (key == "w_opt") {
      e.w_opt = get_vector(v, key);
    } else if (key == "feature_cov_diag") {
      e.feature_cov_diag = get_vector(v, key);
    } else if (key == "dataset_csv") {
      e.dataset_csv = get_string(v, key);
    } else if (key == "dataset_size") {
      e.dataset_size = get_count(v, key);
    } else if (key == "label_noise") {
      e.label_noise = get_number(v, key);
    } else if (key == "noise_samples") {
      e.noise_samples = get_count(v, key);
    } else if (key == "output") {
      c.output = get_string(v, key);
    } else if (key == "threads") {
      c.threads = get_count(v, key);
    }
  }
  if (c.threads < 1) throw ConfigError("threads must be >= 1");
  e.validate();
  return c;
}

CliConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << f.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ConfigError& err) {
    throw ConfigError(path.string() + ": " + err.what());
  }
}

void apply_overrides(CliConfig& c, const Overrides& o, const char* env_threads) {
  if (o.seed) c.experiment.master_seed = *o.seed;
  if (o.runs) c.experiment.runs = *o.runs;
  if (o.iterations) c.experiment.iterations = *o.iterations;
  if (o.output) c.output = *o.output;
  if (o.strategies) {
    std::vector<std::string> names;
    std::stringstream ss(*o.strategies);
    std::string item;
    while (std::getline(ss, item, ',')) names.push_back(item);
    c.experiment.strategies = parse_strategy_list(names);
  }
  if (o.threads) {
    c.threads = *o.threads;
  } else if (env_threads != nullptr && *env_threads != '\0') {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(env_threads, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || env_threads[pos] != '\0') {
      throw ConfigError(std::string("DIFFLAB_THREADS must be a positive integer, got '") + env_threads + "'");
    }
    c.threads = v;
  }
  if (c.threads < 1) throw ConfigError("threads must be >= 1");
  c.experiment.validate();
}

}  // namespace difflab::cli
