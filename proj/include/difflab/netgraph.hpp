#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "difflab/rng.hpp"

namespace difflab::netgraph {

/// Undirected graph over N nodes where every node is its own neighbor.
/// Neighbor lists are sorted ascending. Construction validates symmetry and
/// self-loops; connectivity is checked separately (see is_connected).
class Topology {
 public:
  /// Builds from an undirected edge list. Self-loops are added automatically;
  /// duplicate edges are ignored. Throws std::invalid_argument on n == 0 or
  /// out-of-range endpoints.
  static Topology from_edges(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges);

  std::size_t size() const noexcept { return adj_.size(); }
  const std::vector<std::size_t>& neighbors(std::size_t k) const { return adj_.at(k); }
  /// |N_k|, counting k itself.
  std::size_t degree(std::size_t k) const { return adj_.at(k).size(); }
  bool has_edge(std::size_t l, std::size_t k) const;
  bool is_connected() const;

 private:
  explicit Topology(std::vector<std::vector<std::size_t>> adj) : adj_(std::move(adj)) {}
  std::vector<std::vector<std::size_t>> adj_;
};

Topology path_topology(std::size_t n);
Topology complete_topology(std::size_t n);
/// Node 0 is the hub.
Topology star_topology(std::size_t n);

/// Erdős–Rényi draw with forced self-loops, redrawn until connected.
/// Throws std::runtime_error after kMaxTopologyAttempts failed draws.
Topology random_connected_topology(std::size_t n, double edge_prob, Stream& rng);

inline constexpr int kMaxTopologyAttempts = 10'000;

/// Left-stochastic weight matrix: a(l, k) is the weight node k assigns to
/// the estimate coming from node l, and every column sums to one.
class CombinationMatrix {
 public:
  struct Entry {
    std::size_t from;
    double weight;
  };

  /// Validates non-negativity and unit column sums (1e-12).
  static CombinationMatrix from_matrix(Eigen::MatrixXd a);
  static CombinationMatrix identity(std::size_t n);

  std::size_t n_nodes() const noexcept { return static_cast<std::size_t>(a_.rows()); }
  double operator()(std::size_t l, std::size_t k) const { return a_(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)); }
  const Eigen::MatrixXd& matrix() const noexcept { return a_; }
  /// Non-zero entries of column k, ascending in `from`. This fixes the
  /// floating-point order of every combine step.
  const std::vector<Entry>& column(std::size_t k) const { return columns_.at(k); }

 private:
  explicit CombinationMatrix(Eigen::MatrixXd a);
  Eigen::MatrixXd a_;
  std::vector<std::vector<Entry>> columns_;
};

/// a_{lk} = min(1/|N_l|, 1/|N_k|) off the diagonal; diagonal absorbs the rest.
CombinationMatrix metropolis_weights(const Topology& t);
/// a_{lk} = 1/|N_k| for l in N_k.
CombinationMatrix uniform_weights(const Topology& t);

struct SpectralSummary {
  Eigen::VectorXd perron;
  double second_magnitude = 0.0;
  bool is_primitive = false;
  bool is_doubly_stochastic = false;
  /// Magnitudes of all eigenvalues, descending.
  std::vector<double> eigenvalues;

  double perron_norm_sq() const { return perron.squaredNorm(); }
};

SpectralSummary spectral_summary(const CombinationMatrix& a);

}  // namespace difflab::netgraph
