#include "difflab/strategies.hpp"

#include <cmath>
#include <stdexcept>

namespace difflab::strategies {

std::string_view to_string(StrategyKind k) noexcept {
  switch (k) {
    case StrategyKind::NonCooperative: return "noncoop";
    case StrategyKind::Centralized: return "centralized";
    case StrategyKind::Consensus: return "consensus";
    case StrategyKind::Diffusion: return "diffusion";
  }
  return "unknown";
}

std::optional<StrategyKind> parse_strategy(std::string_view name) noexcept {
  for (auto k : kAllStrategies)
    if (to_string(k) == name) return k;
  return std::nullopt;
}

StepSchedule::StepSchedule(double mu) : mu_(mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw std::invalid_argument("step-size constant mu must be positive");
}

double StepSchedule::operator()(std::size_t i) const {
  if (i == 0) throw std::invalid_argument("step-size schedule starts at i = 1");
  return mu_ / static_cast<double>(i);
}

NetworkState NetworkState::uniform(std::size_t n_nodes, const Eigen::VectorXd& w0) {
  NetworkState s;
  s.estimates.assign(n_nodes, w0);
  s.psi.assign(n_nodes, Eigen::VectorXd::Zero(w0.size()));
  return s;
}

namespace {

void check_shapes(const NetworkState& state, const models::RiskModel& model, std::span<Stream> streams,
                  const netgraph::CombinationMatrix* a) {
  const std::size_t n = state.n_nodes();
  if (n == 0) throw std::invalid_argument("network state has no nodes");
  if (streams.size() != n) throw std::invalid_argument("one random stream per node is required");
  if (state.psi.size() != n) throw std::invalid_argument("psi buffer size does not match node count");
  if (a != nullptr && a->n_nodes() != n) throw std::invalid_argument("combination matrix size does not match node count");
  const auto m = static_cast<Eigen::Index>(models::dim(model));
  for (const auto& w : state.estimates)
    if (w.size() != m) throw std::invalid_argument("estimate dimension does not match model");
}

// out_k = Σ_l a_{lk} in_l over the column support, ascending l.
void combine(const netgraph::CombinationMatrix& a, const std::vector<Eigen::VectorXd>& in,
             std::vector<Eigen::VectorXd>& out, StepCounters* counters) {
  const auto m = in.front().size();
  for (std::size_t k = 0; k < in.size(); ++k) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(m);
    for (const auto& e : a.column(k)) acc += e.weight * in[e.from];
    if (counters != nullptr) counters->combine_macs += a.column(k).size() * static_cast<std::uint64_t>(m);
    out[k] = std::move(acc);
  }
}

}  // namespace

void noncoop_step(NetworkState& state, const models::RiskModel& model, const StepSchedule& schedule,
                  std::span<Stream> streams, StepCounters* counters) {
  check_shapes(state, model, streams, nullptr);
  const double mu_i = schedule(state.iteration + 1);
  for (std::size_t k = 0; k < state.n_nodes(); ++k) {
    const auto s = models::sample(model, streams[k]);
    const Eigen::VectorXd g = models::gradient(model, state.estimates[k], s);
    state.estimates[k] = state.estimates[k] - mu_i * g;
  }
  if (counters != nullptr) counters->gradient_evals += state.n_nodes();
  ++state.iteration;
}

void diffusion_step(NetworkState& state, const netgraph::CombinationMatrix& a, const models::RiskModel& model,
                    const StepSchedule& schedule, std::span<Stream> streams, StepCounters* counters) {
  check_shapes(state, model, streams, &a);
  const double mu_i = schedule(state.iteration + 1);
  for (std::size_t k = 0; k < state.n_nodes(); ++k) {
    const auto s = models::sample(model, streams[k]);
    const Eigen::VectorXd g = models::gradient(model, state.estimates[k], s);
    state.psi[k] = state.estimates[k] - mu_i * g;
  }
  if (counters != nullptr) counters->gradient_evals += state.n_nodes();
  combine(a, state.psi, state.estimates, counters);
  ++state.iteration;
}

void consensus_step(NetworkState& state, const netgraph::CombinationMatrix& a, const models::RiskModel& model,
                    const StepSchedule& schedule, std::span<Stream> streams, StepCounters* counters) {
  check_shapes(state, model, streams, &a);
  const double mu_i = schedule(state.iteration + 1);
  combine(a, state.estimates, state.psi, counters);
  for (std::size_t k = 0; k < state.n_nodes(); ++k) {
    const auto s = models::sample(model, streams[k]);
    const Eigen::VectorXd g = models::gradient(model, state.estimates[k], s);
    state.psi[k] = state.psi[k] - mu_i * g;
  }
  if (counters != nullptr) counters->gradient_evals += state.n_nodes();
  std::swap(state.estimates, state.psi);
  ++state.iteration;
}

Eigen::VectorXd centralized_step(const Eigen::VectorXd& w, std::size_t i, const models::RiskModel& model,
                                 const StepSchedule& schedule, std::span<Stream> streams, StepCounters* counters) {
  if (streams.empty()) throw std::invalid_argument("centralized_step needs at least one stream");
  if (static_cast<std::size_t>(w.size()) != models::dim(model)) {
    throw std::invalid_argument("estimate dimension does not match model");
  }
  const double n = static_cast<double>(streams.size());
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(w.size());
  for (auto& stream : streams) sum += models::gradient(model, w, models::sample(model, stream));
  if (counters != nullptr) counters->gradient_evals += streams.size();
  return w - (schedule(i) / n) * sum;
}

}  // namespace difflab::strategies
