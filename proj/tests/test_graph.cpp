#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "bec/graph.hpp"
#include "bec/linalg.hpp"

using namespace bec;
using graph::GraphSchedule;
using graph::Matrix;
using graph::Vector;
using graph::WeightedAdjacency;

namespace {

Matrix path3() {
  Matrix a(3, 3);
  a << 0, 1, 0,
       1, 0, 1,
       0, 1, 0;
  return a;
}

Matrix triangle() {
  Matrix a(3, 3);
  a << 0, 1, 1,
       1, 0, 1,
       1, 1, 0;
  return a;
}

// Connected Erdos-Renyi-ish graph with random weights; retries until
// connected. Deterministic via the caller's engine.
WeightedAdjacency random_connected(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> weight(0.2, 2.0);
  std::bernoulli_distribution edge(0.5);
  for (;;) {
    Matrix a = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (edge(rng)) {
          a(i, j) = a(j, i) = weight(rng);
        }
      }
    }
    WeightedAdjacency adj(std::move(a));
    if (graph::is_connected(adj)) return adj;
  }
}

} // namespace

TEST_CASE("adjacency validation") {
  CHECK_THROWS(WeightedAdjacency(Matrix::Zero(2, 3)));
  CHECK_THROWS(WeightedAdjacency(Matrix::Identity(3, 3)));

  Matrix neg = Matrix::Zero(2, 2);
  neg(0, 1) = neg(1, 0) = -1.0;
  CHECK_THROWS(WeightedAdjacency(neg));

  Matrix asym = Matrix::Zero(2, 2);
  asym(0, 1) = 1.0;
  CHECK_THROWS(WeightedAdjacency(asym));

  Matrix heavy = Matrix::Zero(2, 2);
  heavy(0, 1) = heavy(1, 0) = 3.0;
  CHECK_THROWS(WeightedAdjacency(heavy, 2.0));
  CHECK_NOTHROW((void)WeightedAdjacency(heavy));
}

TEST_CASE("edge indexing is lexicographic and invertible") {
  graph::EdgeIndexing idx(5);
  CHECK(idx.edge_count() == 10);
  CHECK(idx.column(0, 1) == 0);
  CHECK(idx.column(0, 4) == 3);
  CHECK(idx.column(1, 2) == 4);
  CHECK(idx.column(3, 4) == 9);
  for (int c = 0; c < idx.edge_count(); ++c) {
    const auto [i, j] = idx.pair_of(c);
    CHECK(idx.column(i, j) == c);
  }
  CHECK_THROWS(idx.column(2, 2));
}

TEST_CASE("laplacians of the 3-path") {
  const WeightedAdjacency adj(path3());
  const auto set = graph::laplacian_matrices(adj);

  Matrix l(3, 3);
  l << 1, -1, 0,
      -1, 2, -1,
       0, -1, 1;
  CHECK((set.laplacian - l).norm() == doctest::Approx(0.0));
  CHECK((set.laplacian - (set.degree - adj.weights())).norm() == 0.0);
  CHECK((set.signless - (set.degree + adj.weights())).norm() == 0.0);

  // signless-Laplacian spectrum of the path: {0, 1, 3}
  Eigen::SelfAdjointEigenSolver<Matrix> es(set.signless);
  CHECK(es.eigenvalues()(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(es.eigenvalues()(1) == doctest::Approx(1.0));
  CHECK(es.eigenvalues()(2) == doctest::Approx(3.0));
}

TEST_CASE("incidence factorization H H^T = L") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto adj = random_connected(rng, 3 + trial % 4);
    const Matrix h = graph::weighted_incidence(adj);
    const Matrix l = graph::laplacian_matrices(adj).laplacian;
    CHECK((h * h.transpose() - l).norm() <= 1e-12 * std::max(1.0, l.norm()));
  }
}

TEST_CASE("bipartiteness verdicts") {
  const auto path = graph::is_bipartite(WeightedAdjacency(path3()));
  CHECK(path.bipartite);
  REQUIRE(path.side.size() == 3);
  CHECK(path.side[0] != path.side[1]);
  CHECK(path.side[1] != path.side[2]);

  CHECK_FALSE(graph::is_bipartite(WeightedAdjacency(triangle())).bipartite);

  // disconnected graph with one odd component
  Matrix two = Matrix::Zero(5, 5);
  two.topLeftCorner(3, 3) = triangle();
  two(3, 4) = two(4, 3) = 1.0;
  CHECK_FALSE(graph::is_bipartite(WeightedAdjacency(two)).bipartite);
}

TEST_CASE("bipartite iff zero signless eigenvalue, connected graphs") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto adj = random_connected(rng, 3 + trial % 4);
    const Matrix q = graph::laplacian_matrices(adj).signless;
    const double lam = linalg::min_eigenvalue(q);
    const bool combinatorial = graph::is_bipartite(adj).bipartite;
    const bool spectral = lam <= 1e-8 * std::max(1.0, q.norm());
    CHECK(combinatorial == spectral);
  }
}

TEST_CASE("connectivity") {
  CHECK(graph::is_connected(WeightedAdjacency(path3())));
  Matrix split = Matrix::Zero(4, 4);
  split(0, 1) = split(1, 0) = 1.0;
  split(2, 3) = split(3, 2) = 1.0;
  CHECK_FALSE(graph::is_connected(WeightedAdjacency(split)));
}

TEST_CASE("schedule lookup and union integrals") {
  std::vector<GraphSchedule::Segment> segs;
  segs.push_back({0.0, 1.0, WeightedAdjacency(path3())});
  segs.push_back({1.0, 3.0, WeightedAdjacency(triangle())});
  const GraphSchedule sched(std::move(segs));

  CHECK(sched.horizon() == 3.0);
  CHECK(sched.at(0.5)(0, 2) == 0.0);
  CHECK(sched.at(1.0)(0, 2) == 1.0);  // half-open: second segment at t = 1
  CHECK(sched.at(3.0)(0, 2) == 1.0);  // closed at the horizon
  CHECK_THROWS(sched.at(3.5));

  // exact piecewise integral across the switch
  const auto u = graph::union_graph(sched, 0.5, 1.75);
  CHECK(u(0, 1) == doctest::Approx(1.25).epsilon(1e-14));
  CHECK(u(0, 2) == doctest::Approx(0.75).epsilon(1e-14));

  const auto bounds = sched.boundaries_in(0.5, 1.75);
  REQUIRE(bounds.size() == 1);
  CHECK(bounds[0] == 1.0);

  // ordering violations rejected
  std::vector<GraphSchedule::Segment> bad;
  bad.push_back({0.0, 1.0, WeightedAdjacency(path3())});
  bad.push_back({1.5, 2.0, WeightedAdjacency(path3())});
  CHECK_THROWS(GraphSchedule(std::move(bad)));
}

TEST_CASE("joint connectivity over single-edge switching") {
  // edges of the triangle, one at a time, 1 s each, repeated
  std::vector<GraphSchedule::Segment> segs;
  const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (int r = 0; r < 4; ++r) {
    for (int e = 0; e < 3; ++e) {
      Matrix a = Matrix::Zero(3, 3);
      a(pairs[e][0], pairs[e][1]) = a(pairs[e][1], pairs[e][0]) = 1.0;
      const double t0 = 3.0 * r + e;
      segs.push_back({t0, t0 + 1.0, WeightedAdjacency(std::move(a))});
    }
  }
  const GraphSchedule sched(std::move(segs));
  CHECK(graph::is_jointly_connected(sched, 0.5, 3.0));
  CHECK_FALSE(graph::is_jointly_connected(sched, 1.5, 3.0)); // threshold kills edges
  CHECK_FALSE(graph::is_jointly_connected(sched, 0.5, 1.5)); // window too short
  CHECK_THROWS(graph::is_jointly_connected(sched, 0.0, 3.0));
}

TEST_CASE("kernel vector of the triangle incidence") {
  const Matrix h = graph::weighted_incidence(WeightedAdjacency(triangle()));
  const Vector k = graph::kernel_unit_vector(h);
  CHECK((h * k).norm() <= 1e-12);
  CHECK(k.norm() == doctest::Approx(1.0));
  // sign convention: first significant entry positive
  const double r = 1.0 / std::sqrt(3.0);
  CHECK(k(0) == doctest::Approx(r));
  CHECK(k(1) == doctest::Approx(-r));
  CHECK(k(2) == doctest::Approx(r));
}

TEST_CASE("pe factor satisfies N N^T = L + 1 1^T / n") {
  std::mt19937 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + trial % 4;
    const auto adj = random_connected(rng, n);
    const Matrix nmat = graph::pe_factor(adj);
    const Matrix l = graph::laplacian_matrices(adj).laplacian;
    const Matrix target =
        l + Matrix::Ones(n, n) / double(n);
    CHECK((nmat * nmat.transpose() - target).norm() <= 1e-10);
  }
}
