#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Cholesky>

#include "rabeam/hermitian.hpp"
#include "test_support.hpp"

using namespace rabeam;
using testsup::random_cmatrix;
using testsup::random_hermitian;

TEST_CASE("construction symmetrizes and validates") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXcd raw = random_cmatrix(rng, 5, 5);
    const HermitianMatrix h(raw);
    CHECK(frobenius_norm(h.mat() - h.mat().adjoint()) <= 1e-12);
    CHECK(frobenius_norm(h.mat() - 0.5 * (raw + raw.adjoint())) <= 1e-14);
  }
  CHECK_THROWS_AS(HermitianMatrix(Eigen::MatrixXcd::Zero(2, 3)), std::invalid_argument);
  CHECK_THROWS_AS(HermitianMatrix(Eigen::MatrixXcd::Zero(0, 0)), std::invalid_argument);
}

TEST_CASE("eigh identity and ordering") {
  const HermitianMatrix id(Eigen::MatrixXcd::Identity(3, 3));
  const EigenDecomposition d = eigh(id);
  for (int i = 0; i < 3; ++i) CHECK(d.values[i] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(frobenius_norm(d.vectors.adjoint() * d.vectors -
                       Eigen::MatrixXcd::Identity(3, 3)) <= 1e-12);

  Eigen::MatrixXcd dm = Eigen::MatrixXcd::Zero(3, 3);
  dm(0, 0) = 3.0; dm(1, 1) = 1.0; dm(2, 2) = 2.0;
  const EigenDecomposition dd = eigh(HermitianMatrix(dm));
  CHECK(dd.values[0] == doctest::Approx(3.0));
  CHECK(dd.values[1] == doctest::Approx(2.0));
  CHECK(dd.values[2] == doctest::Approx(1.0));
}

TEST_CASE("eigh reconstruction oracle on random 12x12") {
  Rng rng(12);
  for (int trial = 0; trial < 25; ++trial) {
    const HermitianMatrix h = random_hermitian(rng, 12);
    const EigenDecomposition d = eigh(h);
    const Eigen::MatrixXcd rec =
        d.vectors * d.values.asDiagonal().toDenseMatrix().cast<Complex>() * d.vectors.adjoint();
    CHECK(frobenius_norm(rec - h.mat()) <= 1e-9 * std::max(1.0, frobenius_norm(h.mat())));
    CHECK(frobenius_norm(d.vectors.adjoint() * d.vectors -
                         Eigen::MatrixXcd::Identity(12, 12)) <= 1e-10);
    for (int i = 0; i + 1 < 12; ++i) CHECK(d.values[i] >= d.values[i + 1]);
  }
}

TEST_CASE("real embedding doubles the spectrum") {
  Eigen::MatrixXcd pauli(2, 2); // eigenvalues +1, -1
  pauli << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  const Eigen::MatrixXd e = real_embedding(HermitianMatrix(pauli));
  CHECK(e.rows() == 4);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e);
  CHECK(es.eigenvalues()[0] == doctest::Approx(-1.0));
  CHECK(es.eigenvalues()[1] == doctest::Approx(-1.0));
  CHECK(es.eigenvalues()[2] == doctest::Approx(1.0));
  CHECK(es.eigenvalues()[3] == doctest::Approx(1.0));

  Rng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const HermitianMatrix h = random_hermitian(rng, 6);
    const Eigen::MatrixXd emb = real_embedding(h);
    CHECK((emb - emb.transpose()).norm() <= 1e-14);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> er(emb);
    const EigenDecomposition d = eigh(h);
    for (int i = 0; i < 6; ++i) { // each complex eigenvalue appears twice
      CHECK(er.eigenvalues()[2 * i] == doctest::Approx(d.values[5 - i]).epsilon(1e-10));
      CHECK(er.eigenvalues()[2 * i + 1] == doctest::Approx(d.values[5 - i]).epsilon(1e-10));
    }
    CHECK(frobenius_norm(unembed_hermitian(emb).mat() - h.mat()) <= 1e-13);
  }
}

TEST_CASE("embedding preserves positive semidefiniteness both ways") {
  Rng rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    const HermitianMatrix h = random_hermitian(rng, 5);
    const Eigen::MatrixXd e = real_embedding(h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e);
    const bool emb_psd = es.eigenvalues()[0] >= -1e-10;
    CHECK(emb_psd == is_psd(h, 1e-10));
  }
}

TEST_CASE("is_psd agrees with Cholesky on well-separated instances") {
  Rng rng(15);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform() * 7);
    HermitianMatrix h = random_hermitian(rng, n);
    // Shift to make the verdict unambiguous: half clearly PD, half clearly not.
    const double shift = (trial % 2 == 0) ? (-min_eigenvalue(h) + 0.05)
                                          : (-min_eigenvalue(h) - 0.05);
    h = HermitianMatrix(h.mat() + shift * Eigen::MatrixXcd::Identity(n, n));
    Eigen::LLT<Eigen::MatrixXcd> llt(h.mat());
    const bool chol_ok = (llt.info() == Eigen::Success);
    CHECK(is_psd(h) == chol_ok);
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("norms") {
  const HermitianMatrix id(Eigen::MatrixXcd::Identity(4, 4));
  CHECK(trace_re(id.mat()) == doctest::Approx(4.0));
  CHECK(frobenius_norm(id.mat()) == doctest::Approx(2.0));
  CHECK(spectral_norm(id) == doctest::Approx(1.0));
  CHECK(min_eigenvalue(id) == doctest::Approx(1.0));

  Rng rng(16);
  const Eigen::MatrixXcd g = random_cmatrix(rng, 5, 5);
  Eigen::MatrixXcd q = Eigen::HouseholderQR<Eigen::MatrixXcd>(g).householderQ();
  Eigen::VectorXd ev(5);
  ev << 4.0, 1.0, 0.5, -0.25, -3.0;
  const HermitianMatrix h(q * ev.asDiagonal() * q.adjoint());
  CHECK(spectral_norm(h) == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(min_eigenvalue(h) == doctest::Approx(-3.0).epsilon(1e-10));
  CHECK(trace_re(h.mat()) == doctest::Approx(ev.sum()).epsilon(1e-10));
  CHECK(frobenius_norm(h.mat()) == doctest::Approx(ev.norm()).epsilon(1e-10));
}

TEST_CASE("hermitian basis elements pick out entries") {
  Rng rng(17);
  const HermitianMatrix h = random_hermitian(rng, 4);
  for (int k = 0; k < 4; ++k)
    CHECK(trace_re((herm_basis_diag(4, k) * h.mat()).eval()) ==
          doctest::Approx(h.mat()(k, k).real()).epsilon(1e-12));
  for (int k = 0; k < 4; ++k)
    for (int l = k + 1; l < 4; ++l) {
      CHECK(trace_re((herm_basis_re(4, k, l) * h.mat()).eval()) ==
            doctest::Approx(h.mat()(k, l).real()).epsilon(1e-12));
      CHECK(trace_re((herm_basis_im(4, k, l) * h.mat()).eval()) ==
            doctest::Approx(h.mat()(k, l).imag()).epsilon(1e-12));
    }
}
