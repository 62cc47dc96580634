#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "bec/graph.hpp"

// Gramian accumulation and excitation verdicts (PE / IE / C-IE) on sampled
// matrix signals. Window scans run in parallel; serial reference versions are
// kept for testing and benchmarking.

namespace bec::excitation {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Fixed-shape matrix samples on a strictly increasing time grid.
struct MatrixSignal {
  std::vector<double> times;
  std::vector<Matrix> values;

  MatrixSignal(std::vector<double> t, std::vector<Matrix> v);

  int rows() const { return static_cast<int>(values.front().rows()); }
  int cols() const { return static_cast<int>(values.front().cols()); }
  double span_start() const { return times.front(); }
  double span_end() const { return times.back(); }
};

enum class Kind { PE, IE, CPE, CIE };

struct ExcitationReport {
  Kind kind;
  bool verdict;
  double level;       // smallest Gramian eigenvalue found
  double t0;          // window start
  double window;      // T (PE) or T-bar (IE / C-IE)
  double upper_level; // largest Gramian eigenvalue over windows (PE only)
};

std::string to_string(Kind k);

enum class Side { Left, Right }; // Left: integral of phi phi^T, Right: phi^T phi

// Trapezoidal quadrature of the Gramian over [t0, t1]; endpoints inside the
// sample span are handled by linear interpolation of the integrand.
// Symmetrized on return.
Matrix gramian(const MatrixSignal& sig, double t0, double t1, Side side);

// Persistent excitation: scans every window [t, t+T] with starts on the
// sample grid; level is the minimum over windows of lambda_min of the left
// Gramian. Parallel over windows.
ExcitationReport check_pe(const MatrixSignal& sig, double T);
ExcitationReport check_pe_serial(const MatrixSignal& sig, double T);

// Initial excitation: single right-Gramian window [t0, t0+Tbar].
ExcitationReport check_ie(const MatrixSignal& sig, double Tbar,
                          double t0 = 0.0);

// Collective initial excitation: lambda_min of the summed right Gramians.
ExcitationReport check_cie(const std::vector<MatrixSignal>& sigs, double Tbar,
                           double t0 = 0.0);

// Scale-free positive-definiteness cutoff used by the verdicts.
inline constexpr double kPsdTol = 1e-8;
bool positive_definite(const Matrix& sym);

// Block analysis behind the C-IE necessary condition: integrals of the
// velocity/acceleration block A, the cross block B, and the graph block
// C = (k^2/4) Qbar^T Qbar over [0, Tbar], plus joint non-bipartiteness of the
// union graph over [0, max(T, Tbar)].
struct NecieBlocks {
  Eigen::Matrix2d int_a;
  Matrix int_b; // 2 x mn, exposed for inspection only
  Matrix int_c; // mn x mn
  bool a_pd = false;
  bool c_pd = false;
  bool union_nonbipartite = false;
};

NecieBlocks necie_blocks(const std::vector<double>& times,
                         const std::vector<Vector>& qdot,
                         const std::vector<Vector>& qddot,
                         const std::vector<double>& k_values,
                         const graph::GraphSchedule& sched, int m, double Tbar,
                         double T);

} // namespace bec::excitation
