#pragma once

// Shared helpers for the test suite: deterministic random matrix generators and
// small numeric utilities. Oracles specific to one module live in that module's
// test file; anything reused lands here.

#include <Eigen/Dense>

#include "rabeam/hermitian.hpp"
#include "rabeam/rng.hpp"

namespace testsup {

inline Eigen::VectorXcd random_cvector(rabeam::Rng& rng, int n) {
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.cnormal();
  return v;
}

inline Eigen::MatrixXcd random_cmatrix(rabeam::Rng& rng, int rows, int cols) {
  Eigen::MatrixXcd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = rng.cnormal();
  return m;
}

inline rabeam::HermitianMatrix random_hermitian(rabeam::Rng& rng, int n) {
  return rabeam::HermitianMatrix(random_cmatrix(rng, n, n));
}

// Positive definite with eigenvalues in [floor, floor + spread].
inline rabeam::HermitianMatrix random_pd(rabeam::Rng& rng, int n, double floor = 0.1,
                                         double spread = 1.0) {
  const Eigen::MatrixXcd g = random_cmatrix(rng, n, n);
  Eigen::MatrixXcd q = Eigen::HouseholderQR<Eigen::MatrixXcd>(g).householderQ();
  Eigen::VectorXd ev(n);
  for (int i = 0; i < n; ++i) ev[i] = floor + spread * rng.uniform();
  return rabeam::HermitianMatrix(q * ev.asDiagonal() * q.adjoint());
}

// PSD with a prescribed rank (remaining eigenvalues exactly zero).
inline rabeam::HermitianMatrix random_psd_rank(rabeam::Rng& rng, int n, int rank,
                                               double floor = 0.1, double spread = 1.0) {
  const Eigen::MatrixXcd g = random_cmatrix(rng, n, n);
  Eigen::MatrixXcd q = Eigen::HouseholderQR<Eigen::MatrixXcd>(g).householderQ();
  Eigen::VectorXd ev = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < rank; ++i) ev[i] = floor + spread * rng.uniform();
  return rabeam::HermitianMatrix(q * ev.asDiagonal() * q.adjoint());
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

} // namespace testsup

#include "rabeam/conic.hpp"

namespace testsup {

struct ConstructedInstance {
  rabeam::conic::Program prog;
  double value = 0.0; // optimal value, exact by strong duality of the construction
};

// Builds a random mixed-block program with a known optimum: pick a strictly
// complementary primal-dual pair (X*, y*, S*) and derive b and C from it. Both
// sides are feasible with zero gap, so the optimal value is <C, X*> exactly.
inline ConstructedInstance make_constructed_instance(rabeam::Rng& rng, int ncomplex, int nreal,
                                                     int nlin, bool with_free, int m) {
  using namespace rabeam;
  using namespace rabeam::conic;
  ConstructedInstance ci;
  Program& p = ci.prog;

  struct PsdSpec {
    int block;
    bool cplx;
    int n;
    Eigen::MatrixXcd xstar, sstar;
  };
  std::vector<PsdSpec> psd;
  if (ncomplex > 0) {
    const int b = p.add_psd_complex(ncomplex, "Xc");
    const int rank = 1 + static_cast<int>(rng.uniform() * ncomplex); // 1..n
    const Eigen::MatrixXcd g = random_cmatrix(rng, ncomplex, ncomplex);
    Eigen::MatrixXcd q = Eigen::HouseholderQR<Eigen::MatrixXcd>(g).householderQ();
    Eigen::VectorXd ex = Eigen::VectorXd::Zero(ncomplex), es = Eigen::VectorXd::Zero(ncomplex);
    for (int i = 0; i < ncomplex; ++i)
      (i < rank ? ex[i] : es[i]) = 0.3 + rng.uniform();
    psd.push_back({b, true, ncomplex, q * ex.asDiagonal() * q.adjoint(),
                   q * es.asDiagonal() * q.adjoint()});
  }
  if (nreal > 0) {
    const int b = p.add_psd_real(nreal, "Xr");
    const int rank = 1 + static_cast<int>(rng.uniform() * nreal);
    Eigen::MatrixXd g(nreal, nreal);
    for (int j = 0; j < nreal; ++j)
      for (int i = 0; i < nreal; ++i) g(i, j) = rng.normal();
    Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    Eigen::VectorXd ex = Eigen::VectorXd::Zero(nreal), es = Eigen::VectorXd::Zero(nreal);
    for (int i = 0; i < nreal; ++i)
      (i < rank ? ex[i] : es[i]) = 0.3 + rng.uniform();
    psd.push_back({b, false, nreal, (q * ex.asDiagonal() * q.transpose()).cast<rabeam::Complex>(),
                   (q * es.asDiagonal() * q.transpose()).cast<rabeam::Complex>()});
  }
  std::vector<int> lin_blocks;
  Eigen::VectorXd xlin(nlin), slin(nlin);
  for (int k = 0; k < nlin; ++k) {
    lin_blocks.push_back(p.add_nonneg("u" + std::to_string(k)));
    const bool active = rng.uniform() < 0.5;
    xlin[k] = active ? 0.0 : 0.3 + rng.uniform();
    slin[k] = active ? 0.3 + rng.uniform() : 0.0;
  }
  int free_block = -1;
  double xfree = 0.0;
  if (with_free) {
    free_block = p.add_free("f");
    xfree = rng.normal();
  }

  Eigen::VectorXd ystar(m);
  for (int i = 0; i < m; ++i) ystar[i] = rng.normal();

  std::vector<Constraint> rows(static_cast<size_t>(m));
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  std::vector<Eigen::MatrixXcd> costs;
  for (const auto& ps : psd) costs.push_back(ps.sstar); // C = sum y A + S*, accumulate below
  Eigen::VectorXd clin = slin;
  double cfree = 0.0;

  for (int i = 0; i < m; ++i) {
    Constraint& c = rows[static_cast<size_t>(i)];
    c.sense = Sense::Eq;
    c.name = "r" + std::to_string(i);
    for (size_t pi = 0; pi < psd.size(); ++pi) {
      const auto& ps = psd[pi];
      Eigen::MatrixXcd a = ps.cplx ? Eigen::MatrixXcd(0.5 * (random_cmatrix(rng, ps.n, ps.n) +
                                                             Eigen::MatrixXcd::Zero(ps.n, ps.n)))
                                   : Eigen::MatrixXcd::Zero(ps.n, ps.n);
      if (ps.cplx) {
        a = 0.5 * (a + a.adjoint());
      } else {
        Eigen::MatrixXd ar(ps.n, ps.n);
        for (int jj = 0; jj < ps.n; ++jj)
          for (int ii = 0; ii < ps.n; ++ii) ar(ii, jj) = rng.normal();
        a = (0.5 * (ar + ar.transpose())).cast<rabeam::Complex>();
      }
      c.terms.push_back(Term{ps.block, a});
      b[i] += rabeam::trace_re(a * ps.xstar);
      costs[pi] += ystar[i] * a;
    }
    for (int k = 0; k < nlin; ++k) {
      const double v = rng.normal();
      c.terms.push_back(Term{lin_blocks[static_cast<size_t>(k)],
                             Eigen::MatrixXcd::Constant(1, 1, v)});
      b[i] += v * xlin[k];
      clin[k] += ystar[i] * v;
    }
    if (with_free) {
      const double v = rng.normal();
      c.terms.push_back(Term{free_block, Eigen::MatrixXcd::Constant(1, 1, v)});
      b[i] += v * xfree;
      cfree += ystar[i] * v;
    }
    c.rhs = b[i];
  }
  for (auto& c : rows) p.add_constraint(std::move(c));
  for (size_t pi = 0; pi < psd.size(); ++pi) p.add_cost(psd[pi].block, costs[pi]);
  for (int k = 0; k < nlin; ++k) p.add_cost_scalar(lin_blocks[static_cast<size_t>(k)], clin[k]);
  if (with_free) p.add_cost_scalar(free_block, cfree);

  ci.value = 0.0;
  for (size_t pi = 0; pi < psd.size(); ++pi)
    ci.value += rabeam::trace_re(costs[pi] * psd[pi].xstar);
  ci.value += clin.dot(xlin) + cfree * xfree;
  return ci;
}

} // namespace testsup
