#include "rabeam/hermitian.hpp"

#include <Eigen/Eigenvalues>
#include <stdexcept>

namespace rabeam {

HermitianMatrix::HermitianMatrix(const Eigen::MatrixXcd& m) {
  if (m.rows() == 0 || m.rows() != m.cols())
    throw std::invalid_argument("HermitianMatrix: need a nonempty square matrix");
  m_ = 0.5 * (m + m.adjoint());
}

EigenDecomposition eigh(const HermitianMatrix& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h.mat());
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigh: eigensolver failed to converge");
  const int n = h.dim();
  EigenDecomposition d;
  d.values.resize(n);
  d.vectors.resize(n, n);
  for (int k = 0; k < n; ++k) { // Eigen returns ascending order
    d.values[k] = es.eigenvalues()[n - 1 - k];
    d.vectors.col(k) = es.eigenvectors().col(n - 1 - k);
  }
  return d;
}

Eigen::MatrixXd real_embedding(const HermitianMatrix& h) {
  const int n = h.dim();
  Eigen::MatrixXd e(2 * n, 2 * n);
  const Eigen::MatrixXd re = h.mat().real();
  const Eigen::MatrixXd im = h.mat().imag();
  e.topLeftCorner(n, n) = re;
  e.topRightCorner(n, n) = -im;
  e.bottomLeftCorner(n, n) = im;
  e.bottomRightCorner(n, n) = re;
  return e;
}

HermitianMatrix unembed_hermitian(const Eigen::MatrixXd& e) {
  if (e.rows() != e.cols() || e.rows() % 2 != 0 || e.rows() == 0)
    throw std::invalid_argument("unembed_hermitian: need a 2n x 2n matrix");
  const int n = static_cast<int>(e.rows()) / 2;
  Eigen::MatrixXcd m(n, n);
  m.real() = 0.5 * (e.topLeftCorner(n, n) + e.bottomRightCorner(n, n));
  m.imag() = 0.5 * (e.bottomLeftCorner(n, n) - e.topRightCorner(n, n));
  return HermitianMatrix(m);
}

double trace_re(const Eigen::MatrixXcd& m) { return m.trace().real(); }

double frobenius_norm(const Eigen::MatrixXcd& m) { return m.norm(); }

double spectral_norm(const HermitianMatrix& h) {
  const EigenDecomposition d = eigh(h);
  return d.values.cwiseAbs().maxCoeff();
}

double min_eigenvalue(const HermitianMatrix& h) {
  return eigh(h).values[h.dim() - 1];
}

bool is_psd(const HermitianMatrix& h, double tol) {
  const EigenDecomposition d = eigh(h);
  const double top = d.values.cwiseAbs().maxCoeff();
  if (tol < 0.0) tol = 1e-9 * (1.0 + top);
  return d.values[h.dim() - 1] >= -tol;
}

Eigen::MatrixXcd herm_basis_diag(int n, int k) {
  Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(n, n);
  b(k, k) = 1.0;
  return b;
}

Eigen::MatrixXcd herm_basis_re(int n, int k, int l) {
  if (k >= l) throw std::invalid_argument("herm_basis_re: need k < l");
  Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(n, n);
  b(k, l) = 0.5;
  b(l, k) = 0.5;
  return b;
}

Eigen::MatrixXcd herm_basis_im(int n, int k, int l) {
  if (k >= l) throw std::invalid_argument("herm_basis_im: need k < l");
  Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(n, n);
  b(k, l) = Complex(0.0, 0.5);
  b(l, k) = Complex(0.0, -0.5);
  return b;
}

} // namespace rabeam
