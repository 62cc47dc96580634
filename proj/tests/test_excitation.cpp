#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "bec/excitation.hpp"
#include "bec/graph.hpp"

using namespace bec;
using excitation::MatrixSignal;
using excitation::Side;
using graph::Matrix;
using graph::Vector;

namespace {

MatrixSignal scalar_signal(double t0, double t1, double dt,
                           double (*f)(double)) {
  std::vector<double> times;
  std::vector<Matrix> values;
  for (double t = t0; t <= t1 + 1e-12; t += dt) {
    times.push_back(t);
    values.push_back(Matrix::Constant(1, 1, f(t)));
  }
  return MatrixSignal(std::move(times), std::move(values));
}

} // namespace

TEST_CASE("signal validation") {
  CHECK_THROWS(MatrixSignal({0.0}, {Matrix::Zero(1, 1)}));
  CHECK_THROWS(
      MatrixSignal({0.0, 0.0}, {Matrix::Zero(1, 1), Matrix::Zero(1, 1)}));
  CHECK_THROWS(
      MatrixSignal({0.0, 1.0}, {Matrix::Zero(1, 1), Matrix::Zero(2, 1)}));
  CHECK_NOTHROW(
      MatrixSignal({0.0, 1.0}, {Matrix::Zero(1, 2), Matrix::Zero(1, 2)}));
}

TEST_CASE("gramian of a constant signal is exact") {
  Matrix phi(2, 1);
  phi << 1.0, 2.0;
  const MatrixSignal sig({0.0, 1.0, 2.0}, {phi, phi, phi});

  const Matrix left = excitation::gramian(sig, 0.25, 1.75, Side::Left);
  CHECK((left - 1.5 * phi * phi.transpose()).norm() <= 1e-12);

  const Matrix right = excitation::gramian(sig, 0.25, 1.75, Side::Right);
  CHECK(right(0, 0) == doctest::Approx(1.5 * 5.0).epsilon(1e-12));
}

TEST_CASE("gramian converges under refinement") {
  // phi(t) = t on [0,1]: integral of phi^2 is 1/3
  const auto fine =
      scalar_signal(0.0, 1.0, 1e-4, [](double t) { return t; });
  const Matrix g = excitation::gramian(fine, 0.0, 1.0, Side::Left);
  CHECK(g(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-6));

  // interior endpoints interpolate the integrand
  const Matrix part = excitation::gramian(fine, 0.5, 1.0, Side::Left);
  CHECK(part(0, 0) == doctest::Approx((1.0 - 0.125) / 3.0).epsilon(1e-6));
}

TEST_CASE("pe verdict for a sinusoid") {
  const auto sig =
      scalar_signal(0.0, 6.0 * M_PI, 1e-3, [](double t) { return std::sin(t); });
  const auto rep = excitation::check_pe(sig, 2.0 * M_PI);
  CHECK(rep.verdict);
  // every 2*pi window integrates sin^2 to pi exactly
  CHECK(rep.level == doctest::Approx(M_PI).epsilon(1e-4));
  // window ends snap to the sample grid, so the largest window can exceed
  // 2*pi by up to one step
  CHECK(rep.upper_level == doctest::Approx(M_PI).epsilon(1e-3));

  const auto dead =
      scalar_signal(0.0, 10.0, 1e-2, [](double) { return 0.0; });
  CHECK_FALSE(excitation::check_pe(dead, 2.0).verdict);
}

TEST_CASE("vanishing signal is not pe but is ie") {
  const auto sig =
      scalar_signal(0.0, 40.0, 1e-2, [](double t) { return std::exp(-t); });
  CHECK_FALSE(excitation::check_pe(sig, 4.0).verdict);
  CHECK(excitation::check_ie(sig, 4.0).verdict);
}

TEST_CASE("parallel and serial pe scans agree exactly") {
  std::mt19937 rng(3);
  std::normal_distribution<double> g;
  std::vector<double> times;
  std::vector<Matrix> values;
  for (int i = 0; i <= 2000; ++i) {
    times.push_back(0.01 * i);
    Matrix v(2, 3);
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 3; ++c) v(r, c) = g(rng);
    }
    values.push_back(v);
  }
  const MatrixSignal sig(std::move(times), std::move(values));
  const auto par = excitation::check_pe(sig, 3.0);
  const auto ser = excitation::check_pe_serial(sig, 3.0);
  CHECK(par.verdict == ser.verdict);
  CHECK(par.level == ser.level);
  CHECK(par.t0 == ser.t0);
  CHECK(par.upper_level == ser.upper_level);
}

TEST_CASE("collective excitation from complementary agents") {
  Matrix y1(1, 2), y2(1, 2);
  y1 << 1.0, 0.0;
  y2 << 0.0, 1.0;
  std::vector<double> times{0.0, 1.0, 2.0};
  const MatrixSignal s1(times, {y1, y1, y1});
  const MatrixSignal s2(times, {y2, y2, y2});

  CHECK_FALSE(excitation::check_ie(s1, 2.0).verdict);
  CHECK_FALSE(excitation::check_ie(s2, 2.0).verdict);

  const auto cie = excitation::check_cie({s1, s2}, 2.0);
  CHECK(cie.verdict);
  CHECK(cie.level == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("necie blocks on a constant hand case") {
  // one agent view: qdot = (2, 0), qddot = (1, 0), k = 2, m = 1, n = 2,
  // triangle impossible at n=2 so the union stays bipartite
  Matrix a = Matrix::Zero(2, 2);
  a(0, 1) = a(1, 0) = 1.0;
  std::vector<graph::GraphSchedule::Segment> segs;
  segs.push_back({0.0, 2.0, graph::WeightedAdjacency(a)});
  const graph::GraphSchedule sched(std::move(segs));

  std::vector<double> times;
  std::vector<Vector> qdot, qddot;
  std::vector<double> kvals;
  for (double t = 0.0; t <= 2.0 + 1e-12; t += 1e-3) {
    times.push_back(t);
    Vector v(2), acc(2);
    v << 2.0, 0.0;
    acc << 1.0, 0.0;
    qdot.push_back(v);
    qddot.push_back(acc);
    kvals.push_back(2.0);
  }
  const auto blocks =
      excitation::necie_blocks(times, qdot, qddot, kvals, sched, 1, 2.0, 2.0);

  // A = int [qddot.qddot, k qddot.qdot; ., k^2 qdot.qdot]
  CHECK(blocks.int_a(0, 0) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(blocks.int_a(0, 1) == doctest::Approx(8.0).epsilon(1e-9));
  CHECK(blocks.int_a(1, 1) == doctest::Approx(32.0).epsilon(1e-9));
  CHECK_FALSE(blocks.a_pd); // determinant zero: qddot parallel to qdot

  // integrand (k^2/4) Q^T Q = [[2,2],[2,2]] over two seconds
  Matrix q(2, 2);
  q << 1.0, 1.0, 1.0, 1.0;
  const Matrix expect_c = 2.0 * q.transpose() * q;
  CHECK((blocks.int_c - expect_c).norm() <= 1e-6);
  CHECK_FALSE(blocks.c_pd);
  CHECK_FALSE(blocks.union_nonbipartite);
}

TEST_CASE("necie graph block positive definite on the triangle") {
  Matrix a(3, 3);
  a << 0, 1, 1,
       1, 0, 1,
       1, 1, 0;
  std::vector<graph::GraphSchedule::Segment> segs;
  segs.push_back({0.0, 1.0, graph::WeightedAdjacency(a)});
  const graph::GraphSchedule sched(std::move(segs));

  std::vector<double> times{0.0, 0.5, 1.0};
  std::vector<Vector> qdot(3, Vector::Ones(3)), qddot(3, Vector::Ones(3));
  std::vector<double> kvals(3, 1.0);
  const auto blocks =
      excitation::necie_blocks(times, qdot, qddot, kvals, sched, 1, 1.0, 1.0);
  CHECK(blocks.c_pd);
  CHECK(blocks.union_nonbipartite);
}
