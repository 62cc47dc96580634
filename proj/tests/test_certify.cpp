#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bec/certify.hpp"
#include "bec/linalg.hpp"
#include "bec/plant.hpp"

using namespace bec;
using certify::Matrix;
using certify::Vector;
using graph::GraphSchedule;
using graph::WeightedAdjacency;

namespace {

WeightedAdjacency triangle() {
  Matrix a(3, 3);
  a << 0, 1, 1,
       1, 0, 1,
       1, 1, 0;
  return WeightedAdjacency(std::move(a));
}

GraphSchedule constant_triangle(double horizon) {
  std::vector<GraphSchedule::Segment> segs;
  segs.push_back({0.0, horizon, triangle()});
  return GraphSchedule(std::move(segs));
}

// triangle edges one at a time, 0.5 s dwell
GraphSchedule rotating_triangle(double horizon) {
  const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  std::vector<GraphSchedule::Segment> segs;
  double t = 0.0;
  int e = 0;
  while (t < horizon - 1e-12) {
    Matrix a = Matrix::Zero(3, 3);
    a(pairs[e][0], pairs[e][1]) = a(pairs[e][1], pairs[e][0]) = 1.0;
    segs.push_back({t, std::min(t + 0.5, horizon),
                    WeightedAdjacency(std::move(a))});
    t += 0.5;
    e = (e + 1) % 3;
  }
  return GraphSchedule(std::move(segs));
}

plant::SimConfig small_config(double horizon) {
  plant::SimConfig cfg;
  cfg.n = 3;
  cfg.m = 1;
  cfg.gains = {0.2, 0.5, 0.5, 0.020, 15.0};
  cfg.k = plant::KSpec{1.0,
                       {{0.5, plant::KSpec::Fn::Cos2, 1.0},
                        {0.5, plant::KSpec::Fn::Sin2, 2.0}}};
  cfg.sched = rotating_triangle(horizon + 2.0);
  cfg.bias = Vector(3);
  cfg.bias << 0.3, -0.2, 0.5;
  cfg.q0 = Vector(3);
  cfg.q0 << 1.0, 0.0, -1.0;
  cfg.qdot0 = Vector(3);
  cfg.qdot0 << 0.1, -0.2, 0.3;
  cfg.horizon = horizon;
  cfg.mat_stride = 200;
  return cfg;
}

} // namespace

TEST_CASE("epsilon transform") {
  Vector equal(6);
  equal << 2, -1, 2, -1, 2, -1; // three identical (2,-1) blocks
  CHECK(certify::epsilon_transform(equal, 3, 2).norm() <= 1e-15);

  Vector s2(2);
  s2 << 1, -1;
  CHECK((certify::epsilon_transform(s2, 2, 1) - s2).norm() <= 1e-15);

  Vector s(6);
  s << 1, 2, 3, 4, 5, 6;
  const Vector once = certify::epsilon_transform(s, 3, 2);
  const Vector twice = certify::epsilon_transform(once, 3, 2);
  CHECK((once - twice).norm() <= 1e-14);
  // block mean removed
  CHECK(std::abs(once(0) + once(2) + once(4)) <= 1e-14);

  CHECK_THROWS(certify::epsilon_transform(s, 2, 2));
}

TEST_CASE("lyapunov matrix for a constant graph") {
  const double T = 1.5;
  const int m = 2;
  const auto sched = constant_triangle(4.0);
  const Matrix p =
      graph::laplacian_matrices(triangle()).laplacian +
      Matrix::Ones(3, 3) / 3.0;
  const double delta_T = T * linalg::max_eigenvalue(p);

  // nested integral of a constant P over [t, t+T] is P T^2 / 2
  const Matrix s = certify::lyapunov_S(sched, 1.0, T, m, delta_T);
  const Matrix expect =
      2.0 * delta_T * Matrix::Identity(6, 6) -
      T * linalg::kron_identity(p, m);
  CHECK((s - expect).norm() <= 1e-10);

  CHECK(linalg::min_eigenvalue(s) >= -1e-9);
  CHECK(linalg::max_eigenvalue(s) <= 2.0 * delta_T + 1e-9);

  CHECK_THROWS(certify::lyapunov_S(sched, 3.0, T, m, delta_T));
}

TEST_CASE("lyapunov matrix bounds along a switching schedule") {
  const double T = 1.5;
  const auto sched = rotating_triangle(6.0);
  double nn_sup = 0.0;
  for (const auto& seg : sched.segments()) {
    const Matrix n = graph::pe_factor(seg.adj);
    nn_sup = std::max(nn_sup, linalg::max_eigenvalue(n * n.transpose()));
  }
  const double delta_T = T * nn_sup;
  for (double t = 0.0; t <= 4.5; t += 0.31) {
    const Matrix s = certify::lyapunov_S(sched, t, T, 1, delta_T);
    CHECK(linalg::min_eigenvalue(s) >= -1e-9);
    CHECK(linalg::max_eigenvalue(s) <= 2.0 * delta_T + 1e-9);
  }
}

TEST_CASE("m matrix minimum eigenvalue") {
  const Matrix l = graph::laplacian_matrices(triangle()).laplacian;
  std::vector<Matrix> zero(3, Matrix::Zero(4, 4));
  CHECK(certify::m_matrix_mineig(l, zero, 15.0) ==
        doctest::Approx(0.0).epsilon(1e-12));

  std::vector<Matrix> eye(3, Matrix::Identity(4, 4));
  CHECK(certify::m_matrix_mineig(l, eye, 2.0) == doctest::Approx(2.0));
}

TEST_CASE("theorem constants on a small jointly connected run") {
  const auto cfg = small_config(6.0);
  const auto log = plant::integrate(cfg);

  const auto c = certify::theorem_constants(log, cfg.sched, 1.5,
                                            cfg.gains.sigma, cfg.gains.mu_IF,
                                            1.5);
  CHECK(c.n_is_pe);
  CHECK(c.mu1 > 0.0);
  CHECK(c.mu2 >= c.mu1);
  CHECK(c.delta_T > 0.0);
  CHECK(c.pi_const > 1.0 / cfg.gains.sigma);
  CHECK(c.z_M > 0.0);
  CHECK(c.beta_c == doctest::Approx(c.z_M * (c.pi_const + 2.0 * c.delta_T)));

  // gamma is linear in sigma with the excitation quantities fixed
  const auto c2 = certify::theorem_constants(log, cfg.sched, 1.5,
                                             2.0 * cfg.gains.sigma,
                                             cfg.gains.mu_IF, 1.5);
  CHECK(c2.gamma_young == doctest::Approx(2.0 * c.gamma_young));
}

TEST_CASE("lyapunov series: parallel equals serial, values positive") {
  const auto cfg = small_config(4.0);
  const auto log = plant::integrate(cfg);
  const auto c = certify::theorem_constants(log, cfg.sched, 1.5,
                                            cfg.gains.sigma, cfg.gains.mu_IF,
                                            1.5);
  REQUIRE(c.n_is_pe);

  const auto par = certify::lyapunov_series(log, cfg.sched, 1.5,
                                            cfg.gains.lambda, c.pi_const,
                                            c.delta_T);
  const auto ser = certify::lyapunov_series_serial(log, cfg.sched, 1.5,
                                                   cfg.gains.lambda,
                                                   c.pi_const, c.delta_T);
  REQUIRE(par.times.size() == ser.times.size());
  REQUIRE(!par.times.empty());
  for (size_t i = 0; i < par.times.size(); ++i) {
    CHECK(par.times[i] == ser.times[i]);
    CHECK(par.v[i] == ser.v[i]);
    CHECK(par.s_min[i] == ser.s_min[i]);
    CHECK(par.v[i] > 0.0);
    CHECK(par.s_min[i] >= -1e-9);
    CHECK(par.s_max[i] <= 2.0 * c.delta_T + 1e-9);
  }
}

TEST_CASE("log-linear fit recovers an exact exponential") {
  std::vector<double> times, values;
  for (double t = 0.0; t <= 10.0; t += 0.25) {
    times.push_back(t);
    values.push_back(3.0 * std::exp(-0.7 * t));
  }
  const auto fit = certify::log_linear_fit(times, values);
  CHECK(fit.slope == doctest::Approx(-0.7).epsilon(1e-10));
  CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-10));

  CHECK_THROWS(certify::log_linear_fit({0.0, 1.0}, {1.0, 1.0}));
}
