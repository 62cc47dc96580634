#include "bec/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bec/excitation.hpp"
#include "bec/linalg.hpp"

namespace bec::certify {

using linalg::kron_identity;

Vector epsilon_transform(const Vector& s, int n, int m) {
  if (s.size() != static_cast<Eigen::Index>(n) * m) {
    throw std::invalid_argument("s must have length n*m");
  }
  Vector mean = Vector::Zero(m);
  for (int i = 0; i < n; ++i) {
    mean += s.segment(i * m, m);
  }
  mean /= double(n);
  Vector eps = s;
  for (int i = 0; i < n; ++i) {
    eps.segment(i * m, m) -= mean;
  }
  return eps;
}

namespace {

// N N^T per schedule segment, cached in segment order.
std::vector<Matrix> segment_pe_products(const graph::GraphSchedule& sched) {
  std::vector<Matrix> out;
  out.reserve(sched.segments().size());
  for (const auto& seg : sched.segments()) {
    const Matrix n = graph::pe_factor(seg.adj);
    out.push_back(n * n.transpose());
  }
  return out;
}

const Matrix& product_at(const graph::GraphSchedule& sched,
                         const std::vector<Matrix>& products, double t) {
  const auto& segs = sched.segments();
  auto it = std::upper_bound(
      segs.begin(), segs.end(), t,
      [](double v, const graph::GraphSchedule::Segment& s) {
        return v < s.t_end;
      });
  const size_t idx =
      it == segs.end() ? segs.size() - 1 : size_t(it - segs.begin());
  return products[idx];
}

Matrix nested_integral(const graph::GraphSchedule& sched,
                       const std::vector<Matrix>& products, double t,
                       double T) {
  // Breakpoints of the piecewise-constant integrand inside [t, t+T].
  std::vector<double> pts = sched.boundaries_in(t, t + T);
  pts.insert(pts.begin(), t);
  pts.push_back(t + T);

  const int n = sched.node_count();
  Matrix inner = Matrix::Zero(n, n);  // F(r) = int_t^r P
  Matrix acc = Matrix::Zero(n, n);    // int_t^{t+T} F(r) dr, exact: F linear
  for (size_t k = 0; k + 1 < pts.size(); ++k) {
    const double dt = pts[k + 1] - pts[k];
    if (dt <= 0.0) continue;
    const Matrix& p = product_at(sched, products, 0.5 * (pts[k] + pts[k + 1]));
    acc += dt * inner + 0.5 * dt * dt * p;
    inner += dt * p;
  }
  return acc;
}

} // namespace

Matrix lyapunov_S(const graph::GraphSchedule& sched, double t, double T,
                  int m, double delta_T) {
  if (t < 0.0 || t + T > sched.horizon() + 1e-9) {
    throw std::out_of_range("[t, t+T] outside schedule horizon");
  }
  const auto products = segment_pe_products(sched);
  const Matrix nested = nested_integral(sched, products, t, T);
  const int mn = sched.node_count() * m;
  return 2.0 * delta_T * Matrix::Identity(mn, mn) -
         (2.0 / T) * kron_identity(nested, m);
}

double m_matrix_mineig(const Matrix& laplacian,
                       const std::vector<Matrix>& y_if_blocks, double mu_IF) {
  const int p = static_cast<int>(y_if_blocks.front().rows());
  const int n = static_cast<int>(laplacian.rows());
  Matrix m_mat = kron_identity(laplacian, p);
  for (int i = 0; i < n; ++i) {
    m_mat.block(i * p, i * p, p, p) += mu_IF * y_if_blocks[i];
  }
  return linalg::min_eigenvalue(m_mat);
}

CertificateConstants theorem_constants(const plant::TrajectoryLog& traj,
                                       const graph::GraphSchedule& sched,
                                       double T, double sigma, double mu_IF,
                                       double Tbar) {
  CertificateConstants c;

  // PE level of N over windows of length T; N is piecewise constant, so a
  // fine uniform grid with segment products cached suffices.
  std::vector<Matrix> n_per_segment;
  double n_sup = 0.0;
  for (const auto& seg : sched.segments()) {
    const Matrix n_mat = graph::pe_factor(seg.adj);
    n_sup = std::max(n_sup, linalg::spectral_norm(n_mat));
    n_per_segment.push_back(n_mat);
  }
  c.n_sup = n_sup;
  c.delta_T = T * n_sup * n_sup;

  const double step = std::min(T / 200.0, 0.05);
  std::vector<double> times;
  std::vector<Matrix> values;
  const auto& segs = sched.segments();
  size_t seg_idx = 0;
  for (double t = 0.0; t <= sched.horizon() + 1e-12; t += step) {
    while (seg_idx + 1 < segs.size() && t >= segs[seg_idx].t_end) ++seg_idx;
    times.push_back(t);
    values.push_back(n_per_segment[seg_idx]);
  }
  const auto pe = excitation::check_pe(
      excitation::MatrixSignal(std::move(times), std::move(values)), T);
  c.n_is_pe = pe.verdict;
  c.mu1 = pe.level;
  c.mu2 = pe.upper_level;
  if (!c.n_is_pe) {
    return c; // no certificate without persistent excitation
  }

  c.pi_const = 1.0 / sigma +
               2.0 * sigma * T * c.delta_T * c.delta_T * n_sup * n_sup / c.mu1;
  c.gamma_young =
      4.0 * sigma * T * c.delta_T * c.delta_T * n_sup * n_sup / c.mu1;

  // z_M: ||Z_new|| = (k/2) max_i ||Q_i.||_2 for the block-diagonal regressor.
  double z_m = 0.0;
  for (size_t pt = 0; pt < traj.times.size(); ++pt) {
    const double t = std::min(traj.times[pt], sched.horizon());
    const Matrix q = graph::laplacian_matrices(sched.at(t)).signless;
    double row_max = 0.0;
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
      row_max = std::max(row_max, q.row(i).norm());
    }
    z_m = std::max(z_m, 0.5 * traj.k_values[pt] * row_max);
  }
  c.z_M = z_m;
  c.beta_c = z_m * (c.pi_const + 2.0 * c.delta_T); // ||Ibar|| = 1 exactly
  c.gamma_o = c.beta_c * T / c.mu1;

  double lam_min = std::numeric_limits<double>::infinity();
  for (size_t pt = 0; pt < traj.mat_times.size(); ++pt) {
    if (traj.mat_times[pt] + 1e-9 < Tbar) continue;
    const double t = std::min(traj.mat_times[pt], sched.horizon());
    const Matrix lap = graph::laplacian_matrices(sched.at(t)).laplacian;
    lam_min =
        std::min(lam_min, m_matrix_mineig(lap, traj.y_if[pt], mu_IF));
  }
  c.lambda_min_M = std::isfinite(lam_min) ? lam_min : 0.0;
  if (c.lambda_min_M > 0.0) {
    c.mu_IF_lower = c.beta_c * c.beta_c * T / (2.0 * c.mu1 * c.lambda_min_M);
    c.mu_if_ok = mu_IF > c.mu_IF_lower;
  }
  return c;
}

namespace {

template <bool Parallel>
LyapunovSeries lyapunov_series_impl(const plant::TrajectoryLog& traj,
                                    const graph::GraphSchedule& sched,
                                    double T, double lambda, double pi_const,
                                    double delta_T) {
  const int n = traj.n;
  const int m = traj.m;
  const int mn = n * m;
  const Vector theta_true = controller::true_parameter(traj.bias);

  std::vector<size_t> points;
  for (size_t pt = 0; pt < traj.times.size(); ++pt) {
    if (traj.times[pt] + T <= sched.horizon() + 1e-9) points.push_back(pt);
  }

  const auto products = segment_pe_products(sched);
  LyapunovSeries out;
  out.times.resize(points.size());
  out.v.resize(points.size());
  out.s_min.resize(points.size());
  out.s_max.resize(points.size());

  const int count = static_cast<int>(points.size());
#pragma omp parallel for schedule(static) if (Parallel)
  for (int idx = 0; idx < count; ++idx) {
    const size_t pt = points[idx];
    const double t = traj.times[pt];

    Vector btilde_new(mn);
    Vector theta_tilde(static_cast<Eigen::Index>(n) * traj.param_dim());
    for (int i = 0; i < n; ++i) {
      const Vector th = traj.theta_agent(pt, i);
      btilde_new.segment(i * m, m) =
          traj.bias.segment(i * m, m) - th.segment(2 + i * m, m);
      theta_tilde.segment(static_cast<Eigen::Index>(i) * traj.param_dim(),
                          traj.param_dim()) = theta_true - th;
    }
    const Vector s = traj.qdot[pt] + lambda * (traj.q[pt] + 0.5 * btilde_new);
    const Vector eps = epsilon_transform(s, n, m);

    const Matrix nested = nested_integral(sched, products, t, T);
    const Matrix s_small =
        2.0 * delta_T * Matrix::Identity(n, n) - (2.0 / T) * nested;
    Eigen::SelfAdjointEigenSolver<Matrix> es(s_small, Eigen::EigenvaluesOnly);
    out.s_min[idx] = es.eigenvalues().minCoeff();
    out.s_max[idx] = es.eigenvalues().maxCoeff();

    const Matrix s_mat = kron_identity(s_small, m);
    out.times[idx] = t;
    out.v[idx] = 0.5 * eps.dot((pi_const * Matrix::Identity(mn, mn) + s_mat) *
                               eps) +
                 0.5 * theta_tilde.squaredNorm();
  }
  return out;
}

} // namespace

LyapunovSeries lyapunov_series(const plant::TrajectoryLog& traj,
                               const graph::GraphSchedule& sched, double T,
                               double lambda, double pi_const,
                               double delta_T) {
  return lyapunov_series_impl<true>(traj, sched, T, lambda, pi_const, delta_T);
}

LyapunovSeries lyapunov_series_serial(const plant::TrajectoryLog& traj,
                                      const graph::GraphSchedule& sched,
                                      double T, double lambda, double pi_const,
                                      double delta_T) {
  return lyapunov_series_impl<false>(traj, sched, T, lambda, pi_const,
                                     delta_T);
}

LogFit log_linear_fit(const std::vector<double>& times,
                      const std::vector<double>& values) {
  if (times.size() != values.size() || times.size() < 3) {
    throw std::invalid_argument("fit needs >= 3 matched samples");
  }
  const size_t n = times.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    const double y = std::log(std::max(values[i], 1e-300));
    sx += times[i];
    sy += y;
    sxx += times[i] * times[i];
    sxy += times[i] * y;
    syy += y * y;
  }
  const double denom = n * sxx - sx * sx;
  LogFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  const double ss_tot = syy - sy * sy / double(n);
  const double ss_res =
      ss_tot - fit.slope * fit.slope * denom / double(n);
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

} // namespace bec::certify
