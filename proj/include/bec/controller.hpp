#pragma once

#include <Eigen/Dense>
#include <vector>

// Distributed adaptive control law: s-difference reconstruction, auxiliary
// control w_i, total control u_i, regressor filtering, and the estimate
// update. Every operation here consumes measurements and local controller
// state only; no ground-truth bias or absolute neighbor positions appear.

namespace bec::controller {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct GainSet {
  double sigma;  // s-difference coupling
  double lambda; // s-variable position weight
  double beta;   // first-order filter pole
  double mu_F;   // instantaneous adaptation gain
  double mu_IF;  // integral adaptation gain

  void validate() const;
};

// theta_hat = [p, l, b_hat] with b_hat stacking n blocks of R^m.
// True parameter is theta = [1, 1, b].
struct ParameterEstimate {
  Vector theta_hat;

  double p() const { return theta_hat(0); }
  double l() const { return theta_hat(1); }
  Vector bias() const { return theta_hat.tail(theta_hat.size() - 2); }

  static ParameterEstimate assemble(double p, double l, const Vector& bias);
};

Vector true_parameter(const Vector& bias); // [1, 1, b]

// Per-agent dynamic state of the controller.
struct ControllerState {
  int n = 0;     // network size
  int m = 0;     // coordinate dimension
  int agent = 0; // own index, 0-based

  Vector theta_hat; // mn+2
  Matrix y_f2;      // m x (mn+2), filtered measured regressor part
  Vector h;         // m, velocity filter state
  Vector w_f;       // m, filtered control
  Matrix y_if;      // (mn+2) x (mn+2), integral of Y_F^T Y_F
  Vector w_if;      // mn+2, integral of Y_F^T w_F
  Vector qdot0;     // m, velocity recorded at t = 0

  static ControllerState initial(int n, int m, int agent,
                                 const Vector& theta0, const Vector& qdot0);

  int param_dim() const { return m * n + 2; }
  // Own bias estimate block b_hat_i^i.
  Vector own_bias_estimate() const {
    return theta_hat.segment(2 + agent * m, m);
  }
};

struct NeighborData {
  int index;        // neighbor id j
  double weight;    // a_ij
  Vector z_ij;      // q_i - q_j + b_i (own biased measurement)
  Vector z_ji;      // q_j - q_i + b_j (exchanged)
  Vector relvel;    // qdot_i - qdot_j
  Vector bhat_j;    // neighbor's full bias estimate b_hat^j (mn)
  Vector theta_hat_j; // neighbor's parameter estimate (mn+2)
};

struct MeasurementSet {
  Vector own_vel; // qdot_i
  std::vector<NeighborData> neighbors;
  Vector q_row; // active signless-Laplacian row Q_i. (length n)
};

// Measured regressor part Y_2 = [0, k qdot_i, (k/2) Q_row kron I_m].
Matrix regressor_y2(const Vector& qdot_i, const Vector& q_row, double k_t);

// Full regressor Y = [qddot_i, k qdot_i, (k/2) Q_row kron I_m]; used by the
// oracle path and the excitation analysis, never by the control path.
Matrix regressor_full(const Vector& qddot_i, const Vector& qdot_i,
                      const Vector& q_row, double k_t);

// Y_F = Y_F1 + Y_F2 with the acceleration block recovered analytically as
// qdot_i(t) - e^{-beta t} qdot_i(0) - h_i(t).
Matrix filtered_regressor(const ControllerState& cs, const Vector& qdot_i,
                          double t, double beta);

// s_i - s_j reconstructed from measurements only.
Vector s_difference(const NeighborData& nb, const ControllerState& cs,
                    const Vector& own_vel, double lambda);

struct ControlPair {
  Vector w; // auxiliary control
  Vector u; // total control
};

// theta_dot is this agent's own adaptation derivative (needed for the
// d/dt b_hat_i^i term).
ControlPair control_w_u(const MeasurementSet& meas, const ControllerState& cs,
                        const Vector& theta_dot, const GainSet& gains,
                        double k_t);

// mu_F Y_F^T (w_F - Y_F th) + mu_IF (w_IF - Y_IF th) - sum a_ij (th^i - th^j).
Vector adaptation_derivative(const MeasurementSet& meas,
                             const ControllerState& cs, const Matrix& y_f,
                             const GainSet& gains);

struct FilterDerivatives {
  Matrix y_f2_dot;
  Vector h_dot;
  Vector w_f_dot;
  Matrix y_if_dot;
  Vector w_if_dot;
};

FilterDerivatives filter_derivatives(const ControllerState& cs,
                                     const Vector& w_i, const Matrix& y_f,
                                     const Vector& qdot_i, const Vector& q_row,
                                     double k_t, double beta);

// Drops the two scalar slots and reshapes to n per-agent blocks.
std::vector<Vector> extract_bias(const ParameterEstimate& est, int n, int m);

} // namespace bec::controller
