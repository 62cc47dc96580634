#include "bec/controller.hpp"

#include <cmath>
#include <stdexcept>

namespace bec::controller {

void GainSet::validate() const {
  if (sigma <= 0.0 || lambda <= 0.0 || beta <= 0.0 || mu_F <= 0.0 ||
      mu_IF <= 0.0) {
    throw std::invalid_argument("all gains must be strictly positive");
  }
}

ParameterEstimate ParameterEstimate::assemble(double p, double l,
                                              const Vector& bias) {
  Vector theta(bias.size() + 2);
  theta(0) = p;
  theta(1) = l;
  theta.tail(bias.size()) = bias;
  return {theta};
}

Vector true_parameter(const Vector& bias) {
  return ParameterEstimate::assemble(1.0, 1.0, bias).theta_hat;
}

ControllerState ControllerState::initial(int n, int m, int agent,
                                         const Vector& theta0,
                                         const Vector& qdot0) {
  const int p = m * n + 2;
  if (theta0.size() != p) {
    throw std::invalid_argument("theta0 has wrong length");
  }
  ControllerState cs;
  cs.n = n;
  cs.m = m;
  cs.agent = agent;
  cs.theta_hat = theta0;
  cs.y_f2 = Matrix::Zero(m, p);
  cs.h = Vector::Zero(m);
  cs.w_f = Vector::Zero(m);
  cs.y_if = Matrix::Zero(p, p);
  cs.w_if = Vector::Zero(p);
  cs.qdot0 = qdot0;
  return cs;
}

Matrix regressor_y2(const Vector& qdot_i, const Vector& q_row, double k_t) {
  const int m = static_cast<int>(qdot_i.size());
  const int n = static_cast<int>(q_row.size());
  Matrix y2 = Matrix::Zero(m, m * n + 2);
  y2.col(1) = k_t * qdot_i;
  for (int j = 0; j < n; ++j) {
    y2.block(0, 2 + j * m, m, m) =
        0.5 * k_t * q_row(j) * Matrix::Identity(m, m);
  }
  return y2;
}

Matrix regressor_full(const Vector& qddot_i, const Vector& qdot_i,
                      const Vector& q_row, double k_t) {
  Matrix y = regressor_y2(qdot_i, q_row, k_t);
  y.col(0) = qddot_i;
  return y;
}

Matrix filtered_regressor(const ControllerState& cs, const Vector& qdot_i,
                          double t, double beta) {
  Matrix y_f = cs.y_f2;
  y_f.col(0) += qdot_i - std::exp(-beta * t) * cs.qdot0 - cs.h;
  return y_f;
}

Vector s_difference(const NeighborData& nb, const ControllerState& cs,
                    const Vector& own_vel, double lambda) {
  (void)own_vel; // relative velocity is measured directly
  const Vector bhat_jj = nb.bhat_j.segment(nb.index * cs.m, cs.m);
  return nb.relvel +
         0.5 * lambda * (nb.z_ij - nb.z_ji -
                         (cs.own_bias_estimate() - bhat_jj));
}

ControlPair control_w_u(const MeasurementSet& meas, const ControllerState& cs,
                        const Vector& theta_dot, const GainSet& gains,
                        double k_t) {
  const int m = cs.m;
  const Vector bhat_ii = cs.own_bias_estimate();
  const Vector bhat_ii_dot = theta_dot.segment(2 + cs.agent * m, m);

  Vector w = (k_t - gains.lambda) * meas.own_vel +
             0.5 * gains.lambda * bhat_ii_dot; // -lambda/2 * d/dt btilde_i^i
  Vector zsum = Vector::Zero(m);
  for (const auto& nb : meas.neighbors) {
    const Vector bhat_ji = cs.theta_hat.segment(2 + nb.index * m, m);
    w += k_t * nb.weight * bhat_ii;
    w -= gains.sigma * nb.weight * s_difference(nb, cs, meas.own_vel,
                                                gains.lambda);
    w -= 0.5 * k_t * nb.weight * (bhat_ii - bhat_ji);
    zsum += nb.weight * (nb.z_ij + nb.z_ji);
  }
  Vector u = k_t * (-meas.own_vel - 0.5 * zsum) + w;
  return {std::move(w), std::move(u)};
}

Vector adaptation_derivative(const MeasurementSet& meas,
                             const ControllerState& cs, const Matrix& y_f,
                             const GainSet& gains) {
  Vector dot = gains.mu_F * (y_f.transpose() * (cs.w_f - y_f * cs.theta_hat)) +
               gains.mu_IF * (cs.w_if - cs.y_if * cs.theta_hat);
  for (const auto& nb : meas.neighbors) {
    dot -= nb.weight * (cs.theta_hat - nb.theta_hat_j);
  }
  return dot;
}

FilterDerivatives filter_derivatives(const ControllerState& cs,
                                     const Vector& w_i, const Matrix& y_f,
                                     const Vector& qdot_i, const Vector& q_row,
                                     double k_t, double beta) {
  FilterDerivatives d;
  d.y_f2_dot = -beta * cs.y_f2 + regressor_y2(qdot_i, q_row, k_t);
  d.h_dot = beta * (qdot_i - cs.h);
  d.w_f_dot = -beta * cs.w_f + w_i;
  d.y_if_dot = y_f.transpose() * y_f;
  d.w_if_dot = y_f.transpose() * cs.w_f;
  return d;
}

std::vector<Vector> extract_bias(const ParameterEstimate& est, int n, int m) {
  if (est.theta_hat.size() != n * m + 2) {
    throw std::invalid_argument("parameter estimate length mismatch");
  }
  std::vector<Vector> blocks;
  blocks.reserve(n);
  for (int i = 0; i < n; ++i) {
    blocks.push_back(est.theta_hat.segment(2 + i * m, m));
  }
  return blocks;
}

} // namespace bec::controller
