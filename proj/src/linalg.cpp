#include "gdp/linalg.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace gdp::num {

namespace {

bool is_symmetric(const Mat& m, double tol) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

}  // namespace

SpectralDecomposition sym_eig(const Mat& m, double sym_tol) {
  if (m.rows() != m.cols()) throw DataError("sym_eig: matrix is not square");
  if (m.size() == 0) throw DataError("sym_eig: empty matrix");
  if (!m.allFinite()) throw NumericError("sym_eig: non-finite entries");
  if (!is_symmetric(m, sym_tol))
    throw DataError("sym_eig: matrix is not symmetric within tolerance");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.cast<double>());
  if (solver.info() != Eigen::Success)
    throw NumericError("sym_eig: eigensolver failed to converge");
  SpectralDecomposition out;
  out.eigenvalues = solver.eigenvalues();
  out.eigenvectors = solver.eigenvectors();
  return out;
}

Mat mat_exp(const Mat& m, double scale, bool force_series) {
  if (m.rows() != m.cols()) throw DataError("mat_exp: matrix is not square");
  if (!m.allFinite()) throw NumericError("mat_exp: non-finite entries");

  if (!force_series && is_symmetric(m, 1e-10)) {
    SpectralDecomposition d = sym_eig(m);
    Vec e = (scale * d.eigenvalues.array()).exp();
    return d.eigenvectors * e.asDiagonal() * d.eigenvectors.transpose();
  }

  // Scaling and squaring over the truncated series: halve until the scaled
  // norm is small, run the Taylor series, square back up.
  Mat a = scale * m;
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();  // inf-norm
  int squarings = 0;
  if (norm > 0.5)
    squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / 0.5))));
  a /= std::pow(2.0, squarings);

  const Eigen::Index n = m.rows();
  Mat result = Mat::Identity(n, n);
  Mat term = Mat::Identity(n, n);
  for (int k = 1; k <= 30; ++k) {
    term = (term * a) / static_cast<double>(k);
    result += term;
    if (term.cwiseAbs().maxCoeff() < 1e-16 * result.cwiseAbs().maxCoeff())
      break;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  if (!result.allFinite()) throw NumericError("mat_exp: overflow in series");
  return result;
}

Mat mat_pow(const Mat& m, int k) {
  if (m.rows() != m.cols()) throw DataError("mat_pow: matrix is not square");
  if (k < 0) throw DataError("mat_pow: negative exponent");
  if (k > 64) throw DataError("mat_pow: exponent exceeds cap of 64");
  Mat result = Mat::Identity(m.rows(), m.cols());
  for (int i = 0; i < k; ++i) result = result * m;
  if (!result.allFinite()) throw NumericError("mat_pow: overflow");
  return result;
}

}  // namespace gdp::num
