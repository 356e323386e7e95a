#pragma once

#include <Eigen/Dense>
#include <complex>

namespace rabeam {

using Complex = std::complex<double>;

// Square complex matrix kept exactly Hermitian: the constructor replaces its
// argument by (M + M^H)/2, so every instance satisfies H == H^H to the last bit.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(const Eigen::MatrixXcd& m);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXcd& mat() const { return m_; }

 private:
  Eigen::MatrixXcd m_;
};

// Spectral factorization H = V diag(values) V^H.
struct EigenDecomposition {
  Eigen::VectorXd values;   // real eigenvalues, descending
  Eigen::MatrixXcd vectors; // unitary, column k pairs with values[k]
};

// Full Hermitian eigendecomposition; throws std::runtime_error on non-convergence.
EigenDecomposition eigh(const HermitianMatrix& h);

// [[Re H, -Im H], [Im H, Re H]]: real symmetric, each eigenvalue of H doubled.
Eigen::MatrixXd real_embedding(const HermitianMatrix& h);

// Inverse of real_embedding up to block averaging; accepts any real 2n x 2n matrix.
HermitianMatrix unembed_hermitian(const Eigen::MatrixXd& e);

double trace_re(const Eigen::MatrixXcd& m);
double frobenius_norm(const Eigen::MatrixXcd& m);
double spectral_norm(const HermitianMatrix& h); // max |eigenvalue|
double min_eigenvalue(const HermitianMatrix& h);

// min_eig(H) >= -tol with tol = 1e-9 * (1 + ||H||_2) when tol < 0 (sentinel default).
bool is_psd(const HermitianMatrix& h, double tol = -1.0);

// Hermitian basis elements: <basis, X> = tr(basis * X) picks out entries of X.
// diag(k): X_kk; re(k,l): Re X_kl; im(k,l): Im X_kl (k < l required for re/im).
Eigen::MatrixXcd herm_basis_diag(int n, int k);
Eigen::MatrixXcd herm_basis_re(int n, int k, int l);
Eigen::MatrixXcd herm_basis_im(int n, int k, int l);

} // namespace rabeam
