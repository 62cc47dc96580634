#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bec/controller.hpp"
#include "bec/graph.hpp"

// Double-integrator network dynamics with biased relative-position
// measurements, and deterministic fixed-step integration of the closed loop.

namespace bec::plant {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// k(t) = c0 + sum coef * fn(freq * t)^2 with fn in {cos, sin}.
struct KSpec {
  enum class Fn { Cos2, Sin2 };
  struct Term {
    double coef;
    Fn fn;
    double freq;
  };

  double c0 = 1.0;
  std::vector<Term> terms;

  double operator()(double t) const;
  static KSpec constant(double value) { return {value, {}}; }
};

struct SimConfig {
  int n = 0;
  int m = 0;
  controller::GainSet gains{};
  KSpec k;
  graph::GraphSchedule sched;
  Vector bias;                 // mn, constant over the run
  Vector q0;                   // mn
  Vector qdot0;                // mn
  std::vector<Vector> theta0;  // per agent; empty means all-zero
  double dt = 1e-3;
  double horizon = 100.0;
  int log_stride = 10;   // steps between time-series log points
  int mat_stride = 500;  // steps between heavy matrix log points
  double blowup = 1e9;

  void validate() const;
};

struct NetworkState {
  double t = 0.0;
  Vector q;    // mn stacked positions
  Vector qdot; // mn stacked velocities
  std::vector<controller::ControllerState> ctrl;
};

NetworkState initial_state(const SimConfig& cfg);

// What each agent can actually see at this state under the active graph.
std::vector<controller::MeasurementSet> measurements(
    const NetworkState& state, const Vector& bias,
    const graph::WeightedAdjacency& adj);

struct StateDerivative {
  Vector qddot; // mn, equals u
  std::vector<Vector> theta_dot;
  std::vector<controller::FilterDerivatives> filters;
  Vector u; // mn
  Vector w; // mn
};

// Evaluation order: active graph and k(t); Y_F per agent; adaptation
// derivatives; w and u from measurements; filter derivatives. No algebraic
// loop: u consumes theta_dot, which never reads u.
StateDerivative closed_loop_derivative(const NetworkState& state,
                                       const SimConfig& cfg);
StateDerivative closed_loop_derivative(const NetworkState& state,
                                       const SimConfig& cfg,
                                       const graph::WeightedAdjacency& adj);

struct TrajectoryLog {
  int n = 0;
  int m = 0;
  Vector bias;

  std::vector<double> times;
  std::vector<Vector> q;      // mn
  std::vector<Vector> qdot;   // mn
  std::vector<Vector> u;      // mn
  std::vector<Vector> theta;  // stacked n*(mn+2)
  std::vector<double> k_values;
  std::vector<std::vector<Matrix>> y_f;  // per point, per agent (m x mn+2)
  std::vector<double> gramian_min_eig;   // lambda_min(sum_i Y_IF_i)

  std::vector<double> mat_times;
  std::vector<std::vector<Matrix>> y_if;  // per mat point, per agent
  std::vector<std::vector<Vector>> w_if;

  int param_dim() const { return m * n + 2; }
  Vector theta_agent(size_t point, int agent) const {
    return theta[point].segment(
        static_cast<Eigen::Index>(agent) * param_dim(), param_dim());
  }
  // Stacked b_i - bhat_i^k over all agents k, length n*mn.
  Vector btilde(size_t point) const;
};

// Classical fixed-step RK4, steps shortened to land exactly on schedule
// switch instants and the horizon. Throws on state blow-up.
TrajectoryLog integrate(const SimConfig& cfg);

struct ConsensusMetrics {
  std::vector<double> max_pairwise_pos;
  std::vector<double> vel_norm;
  std::vector<double> bias_err_norm;
};

ConsensusMetrics consensus_metrics(const TrajectoryLog& log);

} // namespace bec::plant
