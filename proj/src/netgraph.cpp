#include "difflab/netgraph.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <queue>
#include <stdexcept>
#include <string>

namespace difflab::netgraph {

namespace {

using Adjacency = std::vector<std::vector<std::size_t>>;

std::vector<bool> reachable_from_zero(const Adjacency& adj) {
  std::vector<bool> seen(adj.size(), false);
  if (adj.empty()) return seen;
  std::queue<std::size_t> frontier;
  frontier.push(0);
  seen[0] = true;
  while (!frontier.empty()) {
    const std::size_t k = frontier.front();
    frontier.pop();
    for (std::size_t l : adj[k]) {
      if (!seen[l]) {
        seen[l] = true;
        frontier.push(l);
      }
    }
  }
  return seen;
}

bool all_true(const std::vector<bool>& v) {
  return std::all_of(v.begin(), v.end(), [](bool b) { return b; });
}

}  // namespace

Topology Topology::from_edges(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  if (n == 0) throw std::invalid_argument("topology needs at least one node");
  Adjacency adj(n);
  for (std::size_t k = 0; k < n; ++k) adj[k].push_back(k);
  for (const auto& [u, v] : edges) {
    if (u >= n || v >= n) {
      throw std::invalid_argument("edge (" + std::to_string(u) + "," + std::to_string(v) +
                                  ") out of range for " + std::to_string(n) + " nodes");
    }
    if (u == v) continue;
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return Topology(std::move(adj));
}

bool Topology::has_edge(std::size_t l, std::size_t k) const {
  const auto& list = adj_.at(k);
  return std::binary_search(list.begin(), list.end(), l);
}

bool Topology::is_connected() const { return all_true(reachable_from_zero(adj_)); }

Topology path_topology(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t k = 1; k < n; ++k) edges.emplace_back(k - 1, k);
  return Topology::from_edges(n, edges);
}

Topology complete_topology(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v) edges.emplace_back(u, v);
  return Topology::from_edges(n, edges);
}

Topology star_topology(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t k = 1; k < n; ++k) edges.emplace_back(0, k);
  return Topology::from_edges(n, edges);
}

Topology random_connected_topology(std::size_t n, double edge_prob, Stream& rng) {
  if (n == 0) throw std::invalid_argument("random_connected_topology: n must be >= 1");
  if (!(edge_prob > 0.0 && edge_prob <= 1.0)) {
    throw std::invalid_argument("random_connected_topology: edge_prob must lie in (0, 1]");
  }
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (int attempt = 0; attempt < kMaxTopologyAttempts; ++attempt) {
    edges.clear();
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v = u + 1; v < n; ++v)
        if (rng.bernoulli(edge_prob)) edges.emplace_back(u, v);
    auto t = Topology::from_edges(n, edges);
    if (t.is_connected()) return t;
  }
  throw std::runtime_error("random_connected_topology: no connected graph after " +
                           std::to_string(kMaxTopologyAttempts) + " draws (n=" + std::to_string(n) +
                           ", edge_prob=" + std::to_string(edge_prob) + "); raise edge_prob");
}

CombinationMatrix::CombinationMatrix(Eigen::MatrixXd a) : a_(std::move(a)), columns_(static_cast<std::size_t>(a_.cols())) {
  for (Eigen::Index k = 0; k < a_.cols(); ++k) {
    auto& col = columns_[static_cast<std::size_t>(k)];
    for (Eigen::Index l = 0; l < a_.rows(); ++l) {
      if (a_(l, k) != 0.0) col.push_back({static_cast<std::size_t>(l), a_(l, k)});
    }
  }
}

CombinationMatrix CombinationMatrix::from_matrix(Eigen::MatrixXd a) {
  if (a.rows() == 0 || a.rows() != a.cols()) {
    throw std::invalid_argument("combination matrix must be square and non-empty");
  }
  if ((a.array() < 0.0).any() || !a.allFinite()) {
    throw std::invalid_argument("combination matrix entries must be finite and non-negative");
  }
  for (Eigen::Index k = 0; k < a.cols(); ++k) {
    const double s = a.col(k).sum();
    if (std::abs(s - 1.0) > 1e-12) {
      throw std::invalid_argument("combination matrix column " + std::to_string(k) +
                                  " sums to " + std::to_string(s) + ", not 1");
    }
  }
  return CombinationMatrix(std::move(a));
}

CombinationMatrix CombinationMatrix::identity(std::size_t n) {
  return from_matrix(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)));
}

CombinationMatrix metropolis_weights(const Topology& t) {
  const auto n = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < t.size(); ++k) {
    double off = 0.0;
    for (std::size_t l : t.neighbors(k)) {
      if (l == k) continue;
      const double w = std::min(1.0 / static_cast<double>(t.degree(l)), 1.0 / static_cast<double>(t.degree(k)));
      a(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) = w;
      off += w;
    }
    a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = 1.0 - off;
  }
  return CombinationMatrix::from_matrix(std::move(a));
}

CombinationMatrix uniform_weights(const Topology& t) {
  const auto n = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double w = 1.0 / static_cast<double>(t.degree(k));
    for (std::size_t l : t.neighbors(k)) a(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) = w;
  }
  return CombinationMatrix::from_matrix(std::move(a));
}

SpectralSummary spectral_summary(const CombinationMatrix& a) {
  const Eigen::MatrixXd& m = a.matrix();
  const Eigen::Index n = m.rows();
  SpectralSummary out;

  // Primitivity: strongly connected support plus a positive diagonal entry.
  Adjacency forward(static_cast<std::size_t>(n)), backward(static_cast<std::size_t>(n));
  bool self_loop = false;
  for (Eigen::Index l = 0; l < n; ++l) {
    for (Eigen::Index k = 0; k < n; ++k) {
      if (m(l, k) > 0.0) {
        forward[static_cast<std::size_t>(l)].push_back(static_cast<std::size_t>(k));
        backward[static_cast<std::size_t>(k)].push_back(static_cast<std::size_t>(l));
        if (l == k) self_loop = true;
      }
    }
  }
  out.is_primitive = self_loop && all_true(reachable_from_zero(forward)) && all_true(reachable_from_zero(backward));

  out.is_doubly_stochastic = true;
  for (Eigen::Index l = 0; l < n; ++l) {
    if (std::abs(m.row(l).sum() - 1.0) > 1e-12) {
      out.is_doubly_stochastic = false;
      break;
    }
  }

  // Power iteration from the uniform vector. Column sums of one keep the
  // entry sum fixed, so no renormalization is needed inside the loop.
  Eigen::VectorXd p = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  bool converged = false;
  for (int it = 0; it < 100'000; ++it) {
    Eigen::VectorXd next = m * p;
    const double delta = (next - p).lpNorm<Eigen::Infinity>();
    p = std::move(next);
    if (delta < 1e-12) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m - Eigen::MatrixXd::Identity(n, n));
    Eigen::MatrixXd kernel = lu.kernel();
    p = kernel.col(0);
  }
  p /= p.sum();
  out.perron = p;

  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  const Eigen::VectorXcd ev = es.eigenvalues();
  std::vector<double> mags(static_cast<std::size_t>(n));
  Eigen::Index unit_idx = 0;
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    mags[static_cast<std::size_t>(i)] = std::abs(ev(i));
    const double d = std::abs(ev(i) - std::complex<double>(1.0, 0.0));
    if (d < best) {
      best = d;
      unit_idx = i;
    }
  }
  double second = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (i != unit_idx) second = std::max(second, mags[static_cast<std::size_t>(i)]);
  out.second_magnitude = second;
  std::sort(mags.begin(), mags.end(), std::greater<>());
  out.eigenvalues = std::move(mags);
  return out;
}

}  // namespace difflab::netgraph
