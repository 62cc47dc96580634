#include "bec/excitation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bec/linalg.hpp"

namespace bec::excitation {

using linalg::kron_identity;
using linalg::min_eigenvalue;
using linalg::symmetrized;

MatrixSignal::MatrixSignal(std::vector<double> t, std::vector<Matrix> v)
    : times(std::move(t)), values(std::move(v)) {
  if (times.size() != values.size() || times.size() < 2) {
    throw std::invalid_argument("signal needs >= 2 matched samples");
  }
  for (size_t i = 1; i < times.size(); ++i) {
    if (times[i] <= times[i - 1]) {
      throw std::invalid_argument("sample times must be strictly increasing");
    }
    if (values[i].rows() != values[0].rows() ||
        values[i].cols() != values[0].cols()) {
      throw std::invalid_argument("signal samples must share one shape");
    }
  }
}

std::string to_string(Kind k) {
  switch (k) {
    case Kind::PE: return "PE";
    case Kind::IE: return "IE";
    case Kind::CPE: return "C-PE";
    case Kind::CIE: return "C-IE";
  }
  return "?";
}

bool positive_definite(const Matrix& sym) {
  const double lo = min_eigenvalue(sym);
  const double hi = linalg::max_eigenvalue(sym);
  return lo > kPsdTol * std::max(1.0, hi);
}

namespace {

Matrix product(const Matrix& phi, Side side) {
  return side == Side::Left ? Matrix(phi * phi.transpose())
                            : Matrix(phi.transpose() * phi);
}

Matrix interpolate(const MatrixSignal& sig, double t) {
  auto it = std::lower_bound(sig.times.begin(), sig.times.end(), t);
  if (it == sig.times.end()) return sig.values.back();
  size_t j = size_t(it - sig.times.begin());
  if (j == 0 || sig.times[j] == t) return sig.values[j];
  const double w = (t - sig.times[j - 1]) / (sig.times[j] - sig.times[j - 1]);
  return (1.0 - w) * sig.values[j - 1] + w * sig.values[j];
}

} // namespace

Matrix gramian(const MatrixSignal& sig, double t0, double t1, Side side) {
  if (t0 < sig.span_start() - 1e-9 || t1 > sig.span_end() + 1e-9 || t0 >= t1) {
    throw std::out_of_range("gramian window outside sample span");
  }
  const int dim = side == Side::Left ? sig.rows() : sig.cols();
  Matrix acc = Matrix::Zero(dim, dim);
  Matrix prev_val = product(interpolate(sig, t0), side);
  double prev_t = t0;
  auto lo = std::upper_bound(sig.times.begin(), sig.times.end(), t0);
  for (auto it = lo; it != sig.times.end() && *it < t1; ++it) {
    const size_t j = size_t(it - sig.times.begin());
    Matrix cur = product(sig.values[j], side);
    acc += 0.5 * (*it - prev_t) * (prev_val + cur);
    prev_val.swap(cur);
    prev_t = *it;
  }
  Matrix last = product(interpolate(sig, t1), side);
  acc += 0.5 * (t1 - prev_t) * (prev_val + last);
  return symmetrized(acc);
}

namespace {

// Trapezoid prefix sums of the left product on the sample grid; a window
// [times[i], times[j]] Gramian is prefix[j] - prefix[i], exactly.
std::vector<Matrix> left_prefix(const MatrixSignal& sig) {
  std::vector<Matrix> prefix(sig.times.size());
  prefix[0] = Matrix::Zero(sig.rows(), sig.rows());
  Matrix prev = product(sig.values[0], Side::Left);
  for (size_t j = 1; j < sig.times.size(); ++j) {
    Matrix cur = product(sig.values[j], Side::Left);
    prefix[j] = prefix[j - 1] +
                0.5 * (sig.times[j] - sig.times[j - 1]) * (prev + cur);
    prev.swap(cur);
  }
  return prefix;
}

template <bool Parallel>
ExcitationReport pe_scan(const MatrixSignal& sig, double T) {
  if (T <= 0.0 || T > sig.span_end() - sig.span_start() + 1e-9) {
    throw std::invalid_argument("PE window must fit inside the sample span");
  }
  const auto prefix = left_prefix(sig);
  const auto& times = sig.times;
  const int count = static_cast<int>(times.size());

  // window start index -> index of the first sample covering start + T
  std::vector<std::pair<int, int>> windows;
  for (int i = 0; i < count; ++i) {
    auto it = std::lower_bound(times.begin(), times.end(),
                               times[i] + T - 1e-12);
    if (it == times.end()) break;
    windows.emplace_back(i, int(it - times.begin()));
  }

  const int w = static_cast<int>(windows.size());
  std::vector<double> lo(w), hi(w);
#pragma omp parallel for schedule(static) if (Parallel)
  for (int idx = 0; idx < w; ++idx) {
    const auto [i, j] = windows[idx];
    const Matrix g = symmetrized(prefix[j] - prefix[i]);
    Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
    lo[idx] = es.eigenvalues().minCoeff();
    hi[idx] = es.eigenvalues().maxCoeff();
  }

  ExcitationReport rep{Kind::PE, false, 0.0, times[0], T, 0.0};
  double level = std::numeric_limits<double>::infinity();
  for (int idx = 0; idx < w; ++idx) {
    if (lo[idx] < level) {
      level = lo[idx];
      rep.t0 = times[windows[idx].first];
    }
    rep.upper_level = std::max(rep.upper_level, hi[idx]);
  }
  rep.level = level;
  rep.verdict = level > kPsdTol * std::max(1.0, rep.upper_level);
  return rep;
}

} // namespace

ExcitationReport check_pe(const MatrixSignal& sig, double T) {
  return pe_scan<true>(sig, T);
}

ExcitationReport check_pe_serial(const MatrixSignal& sig, double T) {
  return pe_scan<false>(sig, T);
}

ExcitationReport check_ie(const MatrixSignal& sig, double Tbar, double t0) {
  const Matrix g = gramian(sig, t0, t0 + Tbar, Side::Right);
  const double level = min_eigenvalue(g);
  const double hi = linalg::max_eigenvalue(g);
  return {Kind::IE, level > kPsdTol * std::max(1.0, hi), level, t0, Tbar, hi};
}

ExcitationReport check_cie(const std::vector<MatrixSignal>& sigs, double Tbar,
                           double t0) {
  if (sigs.empty()) {
    throw std::invalid_argument("C-IE needs at least one signal");
  }
  const int v = sigs.front().cols();
  Matrix sum = Matrix::Zero(v, v);
  for (const auto& sig : sigs) {
    if (sig.cols() != v) {
      throw std::invalid_argument("C-IE signals must share column dimension");
    }
    sum += gramian(sig, t0, t0 + Tbar, Side::Right);
  }
  const double level = min_eigenvalue(sum);
  const double hi = linalg::max_eigenvalue(sum);
  return {Kind::CIE, level > kPsdTol * std::max(1.0, hi), level, t0, Tbar, hi};
}

NecieBlocks necie_blocks(const std::vector<double>& times,
                         const std::vector<Vector>& qdot,
                         const std::vector<Vector>& qddot,
                         const std::vector<double>& k_values,
                         const graph::GraphSchedule& sched, int m, double Tbar,
                         double T) {
  if (times.size() < 2 || times.size() != qdot.size() ||
      times.size() != qddot.size() || times.size() != k_values.size()) {
    throw std::invalid_argument("necie_blocks needs matched samples");
  }
  if (times.back() + 1e-9 < Tbar) {
    throw std::invalid_argument("trajectory does not cover [0, Tbar]");
  }
  const int mn = static_cast<int>(qdot.front().size());

  auto a_block = [&](size_t i) {
    const double k = k_values[i];
    Eigen::Matrix2d a;
    a(0, 0) = qddot[i].squaredNorm();
    a(0, 1) = k * qddot[i].dot(qdot[i]);
    a(1, 0) = a(0, 1);
    a(1, 1) = k * k * qdot[i].squaredNorm();
    return a;
  };
  auto q_lifted = [&](double t) {
    return kron_identity(
        graph::laplacian_matrices(sched.at(std::min(t, sched.horizon())))
            .signless,
        m);
  };
  auto b_block = [&](size_t i, const Matrix& qbar) {
    const double k = k_values[i];
    Matrix b(2, mn);
    b.row(0) = (k / 2.0) * (qbar * qddot[i]).transpose();
    b.row(1) = (k * k / 2.0) * (qbar * qdot[i]).transpose();
    return b;
  };
  auto c_block = [&](size_t i, const Matrix& qbar) {
    const double k = k_values[i];
    return Matrix((k * k / 4.0) * qbar.transpose() * qbar);
  };

  NecieBlocks out;
  out.int_a.setZero();
  out.int_b = Matrix::Zero(2, mn);
  out.int_c = Matrix::Zero(mn, mn);

  for (size_t i = 1; i < times.size() && times[i - 1] < Tbar; ++i) {
    const double hi = std::min(times[i], Tbar);
    const double dt = hi - times[i - 1];
    if (dt <= 0.0) continue;
    const Matrix qbar_prev = q_lifted(times[i - 1]);
    const Matrix qbar_cur = q_lifted(hi);
    out.int_a += 0.5 * dt * (a_block(i - 1) + a_block(i));
    out.int_b += 0.5 * dt * (b_block(i - 1, qbar_prev) + b_block(i, qbar_cur));
    out.int_c += 0.5 * dt * (c_block(i - 1, qbar_prev) + c_block(i, qbar_cur));
  }

  out.a_pd = positive_definite(out.int_a);
  out.c_pd = positive_definite(out.int_c);
  const auto u = graph::union_graph(sched, 0.0, std::max(T, Tbar));
  out.union_nonbipartite = !graph::is_bipartite(u).bipartite;
  return out;
}

} // namespace bec::excitation
