#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "difflab/models.hpp"
#include "difflab/netgraph.hpp"
#include "difflab/rng.hpp"

namespace difflab::strategies {

enum class StrategyKind { NonCooperative, Centralized, Consensus, Diffusion };

inline constexpr std::array<StrategyKind, 4> kAllStrategies = {
    StrategyKind::NonCooperative, StrategyKind::Centralized, StrategyKind::Consensus, StrategyKind::Diffusion};

/// Short names used in configs and CSV files: noncoop, centralized, consensus, diffusion.
std::string_view to_string(StrategyKind k) noexcept;
std::optional<StrategyKind> parse_strategy(std::string_view name) noexcept;

/// μ(i) = μ/i for i ≥ 1.
class StepSchedule {
 public:
  explicit StepSchedule(double mu);
  double mu() const noexcept { return mu_; }
  /// Throws std::invalid_argument for i == 0.
  double operator()(std::size_t i) const;

 private:
  double mu_;
};

/// Estimates of all N learners after `iteration` updates.
struct NetworkState {
  std::vector<Eigen::VectorXd> estimates;
  std::vector<Eigen::VectorXd> psi;
  std::size_t iteration = 0;

  static NetworkState uniform(std::size_t n_nodes, const Eigen::VectorXd& w0);
  std::size_t n_nodes() const noexcept { return estimates.size(); }
};

/// Work performed by step operations; used to check cost parity between
/// diffusion and consensus.
struct StepCounters {
  std::uint64_t gradient_evals = 0;
  std::uint64_t combine_macs = 0;
};

// Each step advances state.iteration from i−1 to i using μ(i). Node k draws
// its sample from streams[k]; streams.size() must equal the node count.

void noncoop_step(NetworkState& state, const models::RiskModel& model, const StepSchedule& schedule,
                  std::span<Stream> streams, StepCounters* counters = nullptr);

/// Adapt-then-combine: every ψ_k is formed before any combine.
void diffusion_step(NetworkState& state, const netgraph::CombinationMatrix& a, const models::RiskModel& model,
                    const StepSchedule& schedule, std::span<Stream> streams, StepCounters* counters = nullptr);

/// Combines previous iterates and subtracts the gradient at the node's own
/// previous iterate in the same update.
void consensus_step(NetworkState& state, const netgraph::CombinationMatrix& a, const models::RiskModel& model,
                    const StepSchedule& schedule, std::span<Stream> streams, StepCounters* counters = nullptr);

/// One fusion-center update at iteration i: w − (μ(i)/N)·Σ_k ∇Q(w, x_k) with
/// one sample from each of the N = streams.size() streams, summed in
/// ascending k.
Eigen::VectorXd centralized_step(const Eigen::VectorXd& w, std::size_t i, const models::RiskModel& model,
                                 const StepSchedule& schedule, std::span<Stream> streams,
                                 StepCounters* counters = nullptr);

}  // namespace difflab::strategies
