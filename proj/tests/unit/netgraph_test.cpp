#include <cmath>
#include <queue>

#include "doctest.h"
#include "difflab/netgraph.hpp"
#include "gen.hpp"

using namespace difflab;
using namespace difflab::netgraph;

namespace {

bool reaches_all(const Topology& t) {
  std::vector<bool> seen(t.size(), false);
  std::queue<std::size_t> q;
  q.push(0);
  seen[0] = true;
  std::size_t count = 1;
  while (!q.empty()) {
    const std::size_t k = q.front();
    q.pop();
    for (std::size_t l = 0; l < t.size(); ++l) {
      if (!seen[l] && t.has_edge(l, k)) {
        seen[l] = true;
        ++count;
        q.push(l);
      }
    }
  }
  return count == t.size();
}

void check_combiner(const Topology& t, const CombinationMatrix& a) {
  const auto n = static_cast<Eigen::Index>(t.size());
  for (Eigen::Index k = 0; k < n; ++k) {
    double col = 0.0;
    for (Eigen::Index l = 0; l < n; ++l) {
      const double w = a.matrix()(l, k);
      CHECK(w >= 0.0);
      if (!t.has_edge(static_cast<std::size_t>(l), static_cast<std::size_t>(k))) CHECK(w == 0.0);
      col += w;
    }
    CHECK(std::abs(col - 1.0) < 1e-12);
    CHECK(a.matrix()(k, k) > 0.0);
  }
}

}  // namespace

TEST_CASE("random topology: single node and forced complete graph") {
  Stream rng(derive_seed(1, 0, 0));
  const auto one = random_connected_topology(1, 0.1, rng);
  REQUIRE(one.size() == 1);
  CHECK(one.neighbors(0) == std::vector<std::size_t>{0});

  const auto two = random_connected_topology(2, 1.0, rng);
  CHECK(two.neighbors(0) == std::vector<std::size_t>{0, 1});
  CHECK(two.neighbors(1) == std::vector<std::size_t>{0, 1});
}

TEST_CASE("random topology: seeded draw is connected by BFS and reproducible") {
  Stream a(7), b(7);
  const auto t1 = random_connected_topology(20, 0.3, a);
  const auto t2 = random_connected_topology(20, 0.3, b);
  CHECK(reaches_all(t1));
  CHECK(t1.is_connected());
  for (std::size_t k = 0; k < 20; ++k) CHECK(t1.neighbors(k) == t2.neighbors(k));
}

TEST_CASE("topology invariants over random draws") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    gen::Rng g(seed);
    const std::size_t n = gen::integer(g, 1, 30);
    Stream rng(seed);
    const auto t = random_connected_topology(n, gen::uniform(g, 0.05, 1.0), rng);
    CHECK(reaches_all(t));
    for (std::size_t k = 0; k < n; ++k) {
      CHECK(t.has_edge(k, k));
      for (std::size_t l : t.neighbors(k)) CHECK(t.has_edge(k, l));
    }
  }
}

TEST_CASE("topology construction errors") {
  CHECK_THROWS_AS(Topology::from_edges(0, {}), std::invalid_argument);
  CHECK_THROWS_AS(Topology::from_edges(3, {{0, 3}}), std::invalid_argument);
  Stream rng(3);
  CHECK_THROWS_AS(random_connected_topology(0, 0.5, rng), std::invalid_argument);
  CHECK_FALSE(Topology::from_edges(3, {{0, 1}}).is_connected());
}

TEST_CASE("metropolis weights on a 3-node path") {
  const auto a = metropolis_weights(path_topology(3));
  CHECK(a(0, 1) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(a(1, 0) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(a(1, 2) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(a(2, 1) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(a(0, 2) == 0.0);
  CHECK(a(2, 0) == 0.0);
  CHECK(a(0, 0) == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(a(1, 1) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(a(2, 2) == doctest::Approx(2.0 / 3).epsilon(1e-15));
}

TEST_CASE("metropolis weights: single node and complete graph") {
  CHECK(metropolis_weights(path_topology(1)).matrix()(0, 0) == 1.0);
  const auto a = metropolis_weights(complete_topology(3));
  for (std::size_t l = 0; l < 3; ++l)
    for (std::size_t k = 0; k < 3; ++k) CHECK(a(l, k) == doctest::Approx(1.0 / 3).epsilon(1e-15));
}

TEST_CASE("uniform weights") {
  CHECK(uniform_weights(path_topology(1)).matrix()(0, 0) == 1.0);
  const auto a = uniform_weights(path_topology(3));
  for (std::size_t l = 0; l < 3; ++l) CHECK(a(l, 1) == doctest::Approx(1.0 / 3));
  const auto s = spectral_summary(uniform_weights(star_topology(4)));
  CHECK(s.perron_norm_sq() > 0.25);

  // Independent eigen-solve: kernel of (A - I) for the star.
  const Eigen::MatrixXd m = uniform_weights(star_topology(4)).matrix();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m - Eigen::MatrixXd::Identity(4, 4));
  Eigen::VectorXd k = lu.kernel().col(0);
  k /= k.sum();
  CHECK((k - s.perron).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("spectral summary of hand examples") {
  Eigen::MatrixXd m(2, 2);
  m << 0.5, 0.25, 0.5, 0.75;
  const auto s = spectral_summary(CombinationMatrix::from_matrix(m));
  CHECK(s.perron(0) == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(s.perron(1) == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(s.is_primitive);
  CHECK_FALSE(s.is_doubly_stochastic);
  CHECK(s.second_magnitude == doctest::Approx(0.25));

  Eigen::MatrixXd perm(2, 2);
  perm << 0, 1, 1, 0;
  CHECK_FALSE(spectral_summary(CombinationMatrix::from_matrix(perm)).is_primitive);

  const auto single = spectral_summary(metropolis_weights(path_topology(1)));
  CHECK(single.perron(0) == 1.0);
  CHECK(single.is_primitive);
}

TEST_CASE("combination matrix validation") {
  Eigen::MatrixXd bad(2, 2);
  bad << 0.5, 0.5, 0.4, 0.5;
  CHECK_THROWS_AS(CombinationMatrix::from_matrix(bad), std::invalid_argument);
  Eigen::MatrixXd neg(2, 2);
  neg << 1.5, 0.0, -0.5, 1.0;
  CHECK_THROWS_AS(CombinationMatrix::from_matrix(neg), std::invalid_argument);
  const auto id = CombinationMatrix::identity(3);
  REQUIRE(id.column(1).size() == 1);
  CHECK(id.column(1).front().from == 1);
}

TEST_CASE("columns list entries in ascending order") {
  gen::Rng g(11);
  const auto t = Topology::from_edges(8, gen::connected_edges(g, 8, 0.4));
  const auto a = metropolis_weights(t);
  for (std::size_t k = 0; k < 8; ++k) {
    const auto& col = a.column(k);
    CHECK(col.size() == t.degree(k));
    for (std::size_t e = 1; e < col.size(); ++e) CHECK(col[e - 1].from < col[e].from);
  }
}

TEST_CASE("property: generated combiners over random graphs") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    gen::Rng g(seed);
    const std::size_t n = gen::integer(g, 1, 25);
    const auto t = Topology::from_edges(n, gen::connected_edges(g, n, gen::uniform(g, 0.0, 0.6)));
    const auto met = metropolis_weights(t);
    const auto uni = uniform_weights(t);
    check_combiner(t, met);
    check_combiner(t, uni);
    CHECK(met.matrix() == met.matrix().transpose());

    const auto sm = spectral_summary(met);
    CHECK(sm.is_doubly_stochastic);
    CHECK(sm.is_primitive);
    CHECK(std::abs(sm.perron_norm_sq() - 1.0 / static_cast<double>(n)) < 1e-12);
    for (Eigen::Index k = 0; k < sm.perron.size(); ++k)
      CHECK(sm.perron(k) == doctest::Approx(1.0 / static_cast<double>(n)).epsilon(1e-10));

    const auto su = spectral_summary(uni);
    CHECK(((uni.matrix() * su.perron) - su.perron).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(std::abs(su.perron.sum() - 1.0) < 1e-12);
    CHECK(su.perron_norm_sq() >= 1.0 / static_cast<double>(n) - 1e-12);
    CHECK(su.second_magnitude < 1.0);
    CHECK((su.perron.array() > 0.0).all());
  }
}
