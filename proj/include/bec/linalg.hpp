#pragma once

#include <Eigen/Dense>

namespace bec::linalg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix kron_identity(const Matrix& a, int m) {
  Matrix out = Matrix::Zero(a.rows() * m, a.cols() * m);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (a(i, j) != 0.0) {
        out.block(i * m, j * m, m, m) =
            a(i, j) * Matrix::Identity(m, m);
      }
    }
  }
  return out;
}

inline double min_eigenvalue(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym,
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline double max_eigenvalue(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym,
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

inline Matrix symmetrized(const Matrix& a) {
  return 0.5 * (a + a.transpose());
}

inline double spectral_norm(const Matrix& a) {
  return a.jacobiSvd().singularValues()(0);
}

} // namespace bec::linalg
