#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bec/graph.hpp"
#include "bec/plant.hpp"

// Post-hoc numerical evaluation of the Lyapunov certificate and the gain
// conditions behind the exponential-convergence claim. Pure analysis over
// immutable trajectory logs.

namespace bec::certify {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Projection of the stacked s-variable onto the zero-block-mean subspace:
// (I - (1 1^T / n) kron I_m) s.
Vector epsilon_transform(const Vector& s, int n, int m);

// S(t) = 2 delta_T I - (2/T) int_t^{t+T} int_t^r N Nbar^T dtau dr, lifted by
// kron with I_m. The inner integrand is piecewise constant on the schedule,
// so the nested quadrature is evaluated exactly at the switch instants.
// delta_T must be T * sup_t ||N N^T|| for the same schedule.
Matrix lyapunov_S(const graph::GraphSchedule& sched, double t, double T,
                  int m, double delta_T);

struct CertificateConstants {
  bool n_is_pe = false;
  double mu1 = 0.0;          // PE level of N over windows of length T
  double mu2 = 0.0;          // largest window Gramian eigenvalue
  double n_sup = 0.0;        // sup_t ||N(t)||
  double delta_T = 0.0;      // T * sup_t ||N N^T||
  double pi_const = 0.0;     // 1/sigma + 2 sigma T delta_T^2 ||N||^2 / mu1
  double gamma_young = 0.0;  // 4 sigma T delta_T^2 ||N||^2 / mu1
  double z_M = 0.0;          // sup_t ||Z_new|| along the trajectory
  double beta_c = 0.0;       // z_M (pi + 2 delta_T)
  double gamma_o = 0.0;      // beta_c T / mu1 (lower bound on gamma^o)
  double lambda_min_M = 0.0; // min over t >= Tbar of lambda_min(M(t))
  double mu_IF_lower = 0.0;  // beta_c^2 T / (2 mu1 lambda_min_M)
  bool mu_if_ok = false;     // configured mu_IF exceeds the bound
};

// N(t) is sampled per schedule segment; mu1 comes from the PE scan, z_M from
// the logged trajectory (Z depends on k(t) and the active graph only).
CertificateConstants theorem_constants(const plant::TrajectoryLog& traj,
                                       const graph::GraphSchedule& sched,
                                       double T, double sigma, double mu_IF,
                                       double Tbar);

// lambda_min(L kron I_p + mu_IF * blockdiag(Y_IF_i)).
double m_matrix_mineig(const Matrix& laplacian,
                       const std::vector<Matrix>& y_if_blocks, double mu_IF);

struct LyapunovSeries {
  std::vector<double> times;
  std::vector<double> v;       // V(t, eps, theta_tilde)
  std::vector<double> s_min;   // lambda_min(S(t))
  std::vector<double> s_max;   // lambda_max(S(t))
};

// V = 0.5 eps^T (pi I + S(t)) eps + 0.5 ||theta_tilde||^2 at every logged
// instant with t + T inside the schedule horizon. Parallel over instants;
// the serial version is the testing reference.
LyapunovSeries lyapunov_series(const plant::TrajectoryLog& traj,
                               const graph::GraphSchedule& sched, double T,
                               double lambda, double pi_const, double delta_T);
LyapunovSeries lyapunov_series_serial(const plant::TrajectoryLog& traj,
                                      const graph::GraphSchedule& sched,
                                      double T, double lambda,
                                      double pi_const, double delta_T);

// Least-squares slope and R^2 of log(values) against times; used for the
// exponential-decay diagnostic.
struct LogFit {
  double slope = 0.0;
  double r2 = 0.0;
};
LogFit log_linear_fit(const std::vector<double>& times,
                      const std::vector<double>& values);

} // namespace bec::certify
