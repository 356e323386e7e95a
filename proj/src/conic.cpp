#include "rabeam/conic.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace rabeam::conic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool finite(double v) { return std::isfinite(v); }

Eigen::MatrixXcd validated_coeff(const Block& blk, const Eigen::MatrixXcd& c,
                                 const char* where) {
  if (blk.kind == BlockKind::Nonneg || blk.kind == BlockKind::Free) {
    if (c.rows() != 1 || c.cols() != 1)
      throw std::invalid_argument(std::string(where) + ": scalar block wants a 1x1 coefficient");
    if (std::abs(c(0, 0).imag()) > 1e-12)
      throw std::invalid_argument(std::string(where) + ": scalar coefficient must be real");
    return c;
  }
  if (c.rows() != blk.dim || c.cols() != blk.dim)
    throw std::invalid_argument(std::string(where) + ": coefficient dimension mismatch");
  const double scale = 1.0 + c.norm();
  if ((c - c.adjoint()).norm() > 1e-12 * scale)
    throw std::invalid_argument(std::string(where) + ": coefficient must be Hermitian");
  if (blk.kind == BlockKind::PsdReal && c.imag().norm() > 1e-12 * scale)
    throw std::invalid_argument(std::string(where) + ": real PSD block wants a real coefficient");
  return 0.5 * (c + c.adjoint());
}

} // namespace

int Program::add_block(BlockKind kind, int dim, std::string name) {
  if (dim < 1) throw std::invalid_argument("add_block: dim must be >= 1");
  if ((kind == BlockKind::Nonneg || kind == BlockKind::Free) && dim != 1)
    throw std::invalid_argument("add_block: scalar blocks have dim 1");
  blocks_.push_back(Block{kind, dim, std::move(name)});
  const int d = (kind == BlockKind::PsdComplex || kind == BlockKind::PsdReal) ? dim : 1;
  costs_.push_back(Eigen::MatrixXcd::Zero(d, d));
  return static_cast<int>(blocks_.size()) - 1;
}

void Program::add_cost(int block, const Eigen::MatrixXcd& c) {
  if (block < 0 || block >= num_blocks()) throw std::invalid_argument("add_cost: bad block");
  costs_[static_cast<size_t>(block)] += validated_coeff(blocks_[static_cast<size_t>(block)], c, "add_cost");
}

void Program::add_cost_scalar(int block, double c) {
  add_cost(block, Eigen::MatrixXcd::Constant(1, 1, c));
}

int Program::add_constraint(Constraint c) {
  if (c.terms.empty()) throw std::invalid_argument("add_constraint: empty row");
  if (!finite(c.rhs)) throw std::invalid_argument("add_constraint: non-finite rhs");
  for (auto& t : c.terms) {
    if (t.block < 0 || t.block >= num_blocks())
      throw std::invalid_argument("add_constraint: bad block index");
    t.coeff = validated_coeff(blocks_[static_cast<size_t>(t.block)], t.coeff, "add_constraint");
  }
  // Merge duplicate block references so the compiled form sees one term per block.
  std::vector<Term> merged;
  for (auto& t : c.terms) {
    bool hit = false;
    for (auto& m : merged)
      if (m.block == t.block) {
        m.coeff += t.coeff;
        hit = true;
        break;
      }
    if (!hit) merged.push_back(std::move(t));
  }
  c.terms = std::move(merged);
  constraints_.push_back(std::move(c));
  return static_cast<int>(constraints_.size()) - 1;
}

int Program::add_scalar_row(const std::vector<std::pair<int, double>>& weights, Sense sense,
                            double rhs, std::string name) {
  Constraint c;
  c.sense = sense;
  c.rhs = rhs;
  c.name = std::move(name);
  for (const auto& [blk, w] : weights)
    c.terms.push_back(Term{blk, Eigen::MatrixXcd::Constant(1, 1, w)});
  return add_constraint(std::move(c));
}

void add_hermitian_link(Program& p, int n, const std::vector<HermTerm>& psd_terms,
                        const std::vector<ScalarMatTerm>& scalar_terms,
                        const Eigen::MatrixXcd& constant, const std::string& name_prefix) {
  if (constant.rows() != n || constant.cols() != n)
    throw std::invalid_argument("add_hermitian_link: constant dimension mismatch");
  auto row = [&](const Eigen::MatrixXcd& probe, double rhs, const std::string& tag) {
    Constraint c;
    c.sense = Sense::Eq;
    c.rhs = rhs;
    c.name = name_prefix + tag;
    for (const auto& t : psd_terms) {
      const int big = p.block(t.block).dim;
      Eigen::MatrixXcd coeff = Eigen::MatrixXcd::Zero(big, big);
      coeff.block(t.offset, t.offset, n, n) = t.sign * probe;
      c.terms.push_back(Term{t.block, coeff});
    }
    for (const auto& s : scalar_terms) {
      // <probe, M> is the scalar's weight in this row.
      const double w = trace_re(probe * s.m);
      c.terms.push_back(Term{s.block, Eigen::MatrixXcd::Constant(1, 1, w)});
    }
    p.add_constraint(std::move(c));
  };
  for (int k = 0; k < n; ++k)
    row(herm_basis_diag(n, k), -constant(k, k).real(),
        "[" + std::to_string(k) + "," + std::to_string(k) + "]");
  for (int k = 0; k < n; ++k)
    for (int l = k + 1; l < n; ++l) {
      const std::string kl = "[" + std::to_string(k) + "," + std::to_string(l) + "]";
      row(herm_basis_re(n, k, l), -constant(k, l).real(), kl + "re");
      row(herm_basis_im(n, k, l), -constant(k, l).imag(), kl + "im");
    }
}

void Program::dump(std::ostream& os) const {
  os << "conic program: " << num_blocks() << " blocks, " << num_constraints() << " rows\n";
  for (int b = 0; b < num_blocks(); ++b) {
    const Block& blk = block(b);
    const char* kind = blk.kind == BlockKind::PsdComplex ? "psd-complex"
                       : blk.kind == BlockKind::PsdReal  ? "psd-real"
                       : blk.kind == BlockKind::Nonneg   ? "nonneg"
                                                         : "free";
    os << "  block " << b << " [" << kind << " dim " << blk.dim << "] " << blk.name
       << "  cost_norm=" << costs_[static_cast<size_t>(b)].norm() << "\n";
  }
  for (int i = 0; i < num_constraints(); ++i) {
    const Constraint& c = constraint(i);
    const char* sense = c.sense == Sense::Eq ? "=" : (c.sense == Sense::Le ? "<=" : ">=");
    os << "  row " << i << " (" << c.name << "): ";
    for (const auto& t : c.terms) os << "<A,blk" << t.block << "|" << t.coeff.norm() << "> ";
    os << sense << " " << c.rhs << "\n";
  }
}

const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::PrimalInfeasible: return "primal-infeasible";
    case Status::DualInfeasible: return "dual-infeasible";
    case Status::MaxIterations: return "max-iterations";
    case Status::NumericalTrouble: return "numerical-trouble";
  }
  return "unknown";
}

double KktReport::max_residual() const {
  return std::max({primal_residual, dual_residual, complementarity, cone_violation});
}

// ---------------------------------------------------------------------------
// Compiled real form and the interior-point loop
// ---------------------------------------------------------------------------

namespace {

struct Trip {
  int r, c;
  double v;
};

struct RowCoeff {
  int row = -1;
  Eigen::MatrixXd a;      // embedded real symmetric coefficient
  std::vector<Trip> trip; // upper-triangle nonzeros of `a`
};

struct PsdBlock {
  int prog_block = -1;
  bool complex_embedded = false;
  int n = 0; // real dimension after embedding
  Eigen::MatrixXd cost;
  std::vector<RowCoeff> rows;
};

struct LinEntry {
  int row;
  double v;
};

struct Compiled {
  std::vector<PsdBlock> psd;
  // nonnegative scalars: original Nonneg blocks first, then one slack per inequality row
  int nl = 0;
  Eigen::VectorXd c_lin;
  std::vector<std::vector<LinEntry>> lin_cols; // per lin var: rows it appears in
  std::vector<int> lin_prog_block;             // -1 for slacks
  std::vector<int> slack_row;                  // per lin var: inequality row it slacks (-1 otherwise)
  // free scalars
  int nf = 0;
  Eigen::MatrixXd af; // m x nf
  Eigen::VectorXd c_free;
  std::vector<int> free_prog_block;
  Eigen::VectorXd b;
  int m = 0;
  double norm_data = 1.0; // max coefficient magnitude, for certificate scaling
};

Eigen::MatrixXd embed_half(const Eigen::MatrixXcd& a) {
  const int n = static_cast<int>(a.rows());
  Eigen::MatrixXd e(2 * n, 2 * n);
  const Eigen::MatrixXd re = 0.5 * a.real();
  const Eigen::MatrixXd im = 0.5 * a.imag();
  e.topLeftCorner(n, n) = re;
  e.topRightCorner(n, n) = -im;
  e.bottomLeftCorner(n, n) = im;
  e.bottomRightCorner(n, n) = re;
  return e;
}

std::vector<Trip> upper_trips(const Eigen::MatrixXd& a) {
  std::vector<Trip> t;
  for (int c = 0; c < a.cols(); ++c)
    for (int r = 0; r <= c; ++r)
      if (a(r, c) != 0.0) t.push_back(Trip{r, c, a(r, c)});
  return t;
}

double trip_dot(const std::vector<Trip>& t, const Eigen::MatrixXd& k) {
  double acc = 0.0;
  for (const Trip& e : t)
    acc += (e.r == e.c) ? e.v * k(e.r, e.r) : e.v * (k(e.r, e.c) + k(e.c, e.r));
  return acc;
}

Compiled compile(const Program& p) {
  if (p.num_constraints() == 0)
    throw std::invalid_argument("solve: program needs at least one constraint");
  Compiled cm;
  cm.m = p.num_constraints();
  cm.b.resize(cm.m);

  std::vector<int> psd_index(static_cast<size_t>(p.num_blocks()), -1);
  std::vector<int> lin_index(static_cast<size_t>(p.num_blocks()), -1);
  std::vector<int> free_index(static_cast<size_t>(p.num_blocks()), -1);

  for (int b = 0; b < p.num_blocks(); ++b) {
    const Block& blk = p.block(b);
    switch (blk.kind) {
      case BlockKind::PsdComplex: {
        PsdBlock pb;
        pb.prog_block = b;
        pb.complex_embedded = true;
        pb.n = 2 * blk.dim;
        pb.cost = embed_half(p.cost(b));
        psd_index[static_cast<size_t>(b)] = static_cast<int>(cm.psd.size());
        cm.psd.push_back(std::move(pb));
        break;
      }
      case BlockKind::PsdReal: {
        PsdBlock pb;
        pb.prog_block = b;
        pb.complex_embedded = false;
        pb.n = blk.dim;
        pb.cost = p.cost(b).real();
        psd_index[static_cast<size_t>(b)] = static_cast<int>(cm.psd.size());
        cm.psd.push_back(std::move(pb));
        break;
      }
      case BlockKind::Nonneg:
        lin_index[static_cast<size_t>(b)] = cm.nl++;
        cm.lin_prog_block.push_back(b);
        cm.slack_row.push_back(-1);
        break;
      case BlockKind::Free:
        free_index[static_cast<size_t>(b)] = cm.nf++;
        cm.free_prog_block.push_back(b);
        break;
    }
  }
  for (int i = 0; i < cm.m; ++i)
    if (p.constraint(i).sense != Sense::Eq) {
      cm.lin_prog_block.push_back(-1);
      cm.slack_row.push_back(i);
      ++cm.nl;
    }

  cm.c_lin = Eigen::VectorXd::Zero(cm.nl);
  cm.lin_cols.assign(static_cast<size_t>(cm.nl), {});
  cm.c_free = Eigen::VectorXd::Zero(std::max(cm.nf, 0));
  cm.af = Eigen::MatrixXd::Zero(cm.m, cm.nf);

  for (int b = 0; b < p.num_blocks(); ++b) {
    const Block& blk = p.block(b);
    if (blk.kind == BlockKind::Nonneg)
      cm.c_lin[lin_index[static_cast<size_t>(b)]] = p.cost(b)(0, 0).real();
    else if (blk.kind == BlockKind::Free)
      cm.c_free[free_index[static_cast<size_t>(b)]] = p.cost(b)(0, 0).real();
  }

  int next_slack = 0;
  for (int bb = 0; bb < p.num_blocks(); ++bb)
    if (p.block(bb).kind == BlockKind::Nonneg) ++next_slack; // slacks come after real vars

  for (int i = 0; i < cm.m; ++i) {
    const Constraint& c = p.constraint(i);
    cm.b[i] = c.rhs;
    cm.norm_data = std::max(cm.norm_data, std::abs(c.rhs));
    for (const Term& t : c.terms) {
      const Block& blk = p.block(t.block);
      switch (blk.kind) {
        case BlockKind::PsdComplex:
        case BlockKind::PsdReal: {
          PsdBlock& pb = cm.psd[static_cast<size_t>(psd_index[static_cast<size_t>(t.block)])];
          RowCoeff rc;
          rc.row = i;
          rc.a = blk.kind == BlockKind::PsdComplex ? embed_half(t.coeff)
                                                   : Eigen::MatrixXd(t.coeff.real());
          rc.trip = upper_trips(rc.a);
          cm.norm_data = std::max(cm.norm_data, rc.a.cwiseAbs().maxCoeff());
          pb.rows.push_back(std::move(rc));
          break;
        }
        case BlockKind::Nonneg: {
          const double v = t.coeff(0, 0).real();
          cm.lin_cols[static_cast<size_t>(lin_index[static_cast<size_t>(t.block)])].push_back(
              LinEntry{i, v});
          cm.norm_data = std::max(cm.norm_data, std::abs(v));
          break;
        }
        case BlockKind::Free: {
          cm.af(i, free_index[static_cast<size_t>(t.block)]) = t.coeff(0, 0).real();
          cm.norm_data = std::max(cm.norm_data, std::abs(t.coeff(0, 0).real()));
          break;
        }
      }
    }
    if (c.sense != Sense::Eq) {
      const double v = (c.sense == Sense::Le) ? 1.0 : -1.0;
      cm.lin_cols[static_cast<size_t>(next_slack)].push_back(LinEntry{i, v});
      ++next_slack;
    }
  }
  return cm;
}

struct State {
  std::vector<Eigen::MatrixXd> X, S;
  Eigen::VectorXd xl, sl, xf, y;
};

double psd_max_step(const Eigen::MatrixXd& v, const Eigen::MatrixXd& dv) {
  Eigen::LLT<Eigen::MatrixXd> llt(v);
  if (llt.info() != Eigen::Success) return 0.0;
  Eigen::MatrixXd w = llt.matrixL().solve(dv);
  w = llt.matrixL().solve(w.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (w + w.transpose()),
                                                    Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  if (lmin >= -1e-14) return kInf;
  return -1.0 / lmin;
}

} // namespace

Solution solve(const Program& prog, const Settings& cfg) {
  Compiled cm = compile(prog);
  const int m = cm.m;
  const int nb = static_cast<int>(cm.psd.size());

  double nu = cm.nl;
  for (const PsdBlock& pb : cm.psd) nu += pb.n;
  if (nu <= 0.0) throw std::invalid_argument("solve: program has no cone variables");

  const double tau = 1.0 + cm.b.cwiseAbs().maxCoeff();
  State st;
  st.X.reserve(static_cast<size_t>(nb));
  st.S.reserve(static_cast<size_t>(nb));
  for (const PsdBlock& pb : cm.psd) {
    st.X.push_back(Eigen::MatrixXd::Identity(pb.n, pb.n) * tau);
    st.S.push_back(Eigen::MatrixXd::Identity(pb.n, pb.n) * tau);
  }
  st.xl = Eigen::VectorXd::Constant(cm.nl, tau);
  st.sl = Eigen::VectorXd::Constant(cm.nl, tau);
  st.xf = Eigen::VectorXd::Zero(cm.nf);
  st.y = Eigen::VectorXd::Zero(m);

  Solution sol;
  sol.x.resize(static_cast<size_t>(prog.num_blocks()));
  sol.s.resize(static_cast<size_t>(prog.num_blocks()));

  auto extract = [&](Status status) {
    sol.status = status;
    sol.y = st.y;
    sol.gap = std::abs(sol.primal_obj - sol.dual_obj) /
              (1.0 + std::abs(sol.primal_obj) + std::abs(sol.dual_obj));
    for (int b = 0; b < nb; ++b) {
      const PsdBlock& pb = cm.psd[static_cast<size_t>(b)];
      const size_t pbk = static_cast<size_t>(pb.prog_block);
      if (pb.complex_embedded) {
        sol.x[pbk] = unembed_hermitian(st.X[static_cast<size_t>(b)]).mat();
        sol.s[pbk] = unembed_hermitian(2.0 * st.S[static_cast<size_t>(b)]).mat();
      } else {
        sol.x[pbk] = st.X[static_cast<size_t>(b)].cast<Complex>();
        sol.s[pbk] = st.S[static_cast<size_t>(b)].cast<Complex>();
      }
    }
    for (int k = 0; k < cm.nl; ++k)
      if (cm.lin_prog_block[static_cast<size_t>(k)] >= 0) {
        const size_t pbk = static_cast<size_t>(cm.lin_prog_block[static_cast<size_t>(k)]);
        sol.x[pbk] = Eigen::MatrixXcd::Constant(1, 1, st.xl[k]);
        sol.s[pbk] = Eigen::MatrixXcd::Constant(1, 1, st.sl[k]);
      }
    for (int k = 0; k < cm.nf; ++k) {
      const size_t pbk = static_cast<size_t>(cm.free_prog_block[static_cast<size_t>(k)]);
      sol.x[pbk] = Eigen::MatrixXcd::Constant(1, 1, st.xf[k]);
      sol.s[pbk] = Eigen::MatrixXcd::Zero(1, 1);
    }
    sol.kkt = verify_kkt(prog, sol);
  };

  // Residual work space
  Eigen::VectorXd rp(m), rdl(cm.nl), rdf(cm.nf);
  std::vector<Eigen::MatrixXd> Rd(static_cast<size_t>(nb));

  auto apply_primal = [&](const std::vector<Eigen::MatrixXd>& X, const Eigen::VectorXd& xl,
                          const Eigen::VectorXd& xf) {
    Eigen::VectorXd ax = Eigen::VectorXd::Zero(m);
    for (int b = 0; b < nb; ++b)
      for (const RowCoeff& rc : cm.psd[static_cast<size_t>(b)].rows)
        ax[rc.row] += trip_dot(rc.trip, X[static_cast<size_t>(b)]);
    for (int k = 0; k < cm.nl; ++k)
      for (const LinEntry& e : cm.lin_cols[static_cast<size_t>(k)]) ax[e.row] += e.v * xl[k];
    if (cm.nf > 0) ax += cm.af * xf;
    return ax;
  };

  double best_merit = kInf;
  int stall = 0;

  auto try_primal_cert = [&](double quality_tol) -> bool {
    const double by = cm.b.dot(st.y);
    if (!(by > 1e-12 * (1.0 + st.y.norm()))) return false;
    const Eigen::VectorXd yn = st.y / by; // b^T yn = 1
    double viol = 0.0;
    for (int b = 0; b < nb; ++b) {
      const PsdBlock& pb = cm.psd[static_cast<size_t>(b)];
      Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(pb.n, pb.n);
      for (const RowCoeff& rc : pb.rows) acc -= yn[rc.row] * rc.a;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(acc, Eigen::EigenvaluesOnly);
      viol = std::max(viol, std::max(0.0, -es.eigenvalues()(0)));
    }
    for (int k = 0; k < cm.nl; ++k) {
      double acc = 0.0;
      for (const LinEntry& e : cm.lin_cols[static_cast<size_t>(k)]) acc -= e.v * yn[e.row];
      viol = std::max(viol, std::max(0.0, -acc));
    }
    if (cm.nf > 0) viol = std::max(viol, (cm.af.transpose() * yn).cwiseAbs().maxCoeff());
    const double q = viol / (1.0 + cm.norm_data * yn.cwiseAbs().maxCoeff());
    if (q <= quality_tol) {
      sol.cert_y = yn;
      return true;
    }
    return false;
  };

  Eigen::LLT<Eigen::MatrixXd> mllt;
  Eigen::MatrixXd M(m, m);

  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    // --- residuals and objective values ---
    rp = cm.b - apply_primal(st.X, st.xl, st.xf);
    double pobj = cm.c_lin.dot(st.xl) + cm.c_free.dot(st.xf);
    for (int b = 0; b < nb; ++b)
      pobj += (cm.psd[static_cast<size_t>(b)].cost.array() * st.X[static_cast<size_t>(b)].array())
                  .sum();
    const double dobj = cm.b.dot(st.y);

    for (int b = 0; b < nb; ++b) {
      const PsdBlock& pb = cm.psd[static_cast<size_t>(b)];
      Eigen::MatrixXd acc = pb.cost - st.S[static_cast<size_t>(b)];
      for (const RowCoeff& rc : pb.rows) acc -= st.y[rc.row] * rc.a;
      Rd[static_cast<size_t>(b)] = acc;
    }
    rdl = cm.c_lin - st.sl;
    for (int k = 0; k < cm.nl; ++k)
      for (const LinEntry& e : cm.lin_cols[static_cast<size_t>(k)]) rdl[k] -= e.v * st.y[e.row];
    if (cm.nf > 0) rdf = cm.c_free - cm.af.transpose() * st.y;

    double ip = st.xl.dot(st.sl);
    for (int b = 0; b < nb; ++b)
      ip += (st.X[static_cast<size_t>(b)].array() * st.S[static_cast<size_t>(b)].array()).sum();
    const double mu = ip / nu;
    double pinf = 0.0; // per-row max, matching verify_kkt's normalization
    for (int i = 0; i < m; ++i) pinf = std::max(pinf, std::abs(rp[i]) / (1.0 + std::abs(cm.b[i])));
    double dinf = 0.0;
    for (int b = 0; b < nb; ++b) {
      // complex-unit Frobenius norms: the half-scaled embedding shrinks both by sqrt(2)
      const double f = cm.psd[static_cast<size_t>(b)].complex_embedded ? std::sqrt(2.0) : 1.0;
      dinf = std::max(dinf, f * Rd[static_cast<size_t>(b)].norm() /
                                (1.0 + f * cm.psd[static_cast<size_t>(b)].cost.norm()));
    }
    for (int k = 0; k < cm.nl; ++k)
      dinf = std::max(dinf, std::abs(rdl[k]) / (1.0 + std::abs(cm.c_lin[k])));
    for (int k = 0; k < cm.nf; ++k)
      dinf = std::max(dinf, std::abs(rdf[k]) / (1.0 + std::abs(cm.c_free[k])));
    const double relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    const double cgap = ip / (1.0 + std::abs(pobj) + std::abs(dobj));

    sol.primal_obj = pobj;
    sol.dual_obj = dobj;
    sol.iterations = iter;
    if (cfg.trace_iterates)
      sol.trace.push_back(IterateInfo{iter, pobj, dobj, pinf, dinf, cgap, mu, 0.0, 0.0});

    if (!finite(pobj) || !finite(dobj) || !finite(mu)) {
      if (try_primal_cert(1e-8)) return extract(Status::PrimalInfeasible), sol;
      return extract(Status::NumericalTrouble), sol;
    }

    if (pinf <= cfg.feas_tol && dinf <= cfg.feas_tol &&
        (relgap <= cfg.gap_tol || cgap <= cfg.gap_tol))
      return extract(Status::Optimal), sol;

    const double merit = std::max({pinf, dinf, std::min(relgap, cgap)});
    if (merit < best_merit * (1.0 - 1e-4)) {
      best_merit = merit;
      stall = 0;
    } else if (merit > 1e-6) { // near-converged dawdling is not evidence of infeasibility
      ++stall;
    }
    const bool diverging = std::abs(dobj) > 1e13 || st.y.norm() > 1e13;
    if (stall >= cfg.stall_limit || diverging) {
      if (try_primal_cert(diverging ? 1e-8 : 1e-7))
        return extract(Status::PrimalInfeasible), sol;
      // Dual-infeasibility (primal improving ray): A(X)~0 with <C,X> < 0.
      const double xnorm = st.xl.norm() + st.xf.norm() +
                           [&] {
                             double a = 0;
                             for (const auto& Xb : st.X) a += Xb.norm();
                             return a;
                           }();
      if (xnorm > 1e6) {
        Eigen::VectorXd ax = apply_primal(st.X, st.xl, st.xf) / xnorm;
        if (ax.cwiseAbs().maxCoeff() <= 1e-7 * (1.0 + cm.norm_data) && pobj / xnorm < -1e-10)
          return extract(Status::DualInfeasible), sol;
      }
      if (diverging) return extract(Status::NumericalTrouble), sol;
      if (stall >= cfg.stall_limit) return extract(Status::NumericalTrouble), sol;
    }

    // --- factorizations of the current iterate ---
    std::vector<Eigen::LLT<Eigen::MatrixXd>> slt(static_cast<size_t>(nb));
    bool fact_ok = true;
    for (int b = 0; b < nb && fact_ok; ++b) {
      slt[static_cast<size_t>(b)].compute(st.S[static_cast<size_t>(b)]);
      if (slt[static_cast<size_t>(b)].info() != Eigen::Success) fact_ok = false;
    }
    if (!fact_ok) return extract(Status::NumericalTrouble), sol;

    // --- Schur complement M_ij = sum_b tr(A_i X A_j S^-1) + sum_k a_ik a_jk x_k/s_k ---
    M.setZero();
    std::vector<std::vector<Eigen::MatrixXd>> K(static_cast<size_t>(nb));
    for (int b = 0; b < nb; ++b) {
      const PsdBlock& pb = cm.psd[static_cast<size_t>(b)];
      auto& Kb = K[static_cast<size_t>(b)];
      Kb.reserve(pb.rows.size());
      for (const RowCoeff& rc : pb.rows) {
        // A_j S^-1 = (S^-1 A_j)^T for symmetric S, A_j
        Eigen::MatrixXd t = slt[static_cast<size_t>(b)].solve(rc.a).transpose();
        Kb.emplace_back(st.X[static_cast<size_t>(b)] * t);
      }
      for (size_t j = 0; j < pb.rows.size(); ++j)
        for (size_t i = 0; i < pb.rows.size(); ++i)
          M(pb.rows[i].row, pb.rows[j].row) += trip_dot(pb.rows[i].trip, Kb[j]);
    }
    for (int k = 0; k < cm.nl; ++k) {
      const double w = st.xl[k] / st.sl[k];
      const auto& col = cm.lin_cols[static_cast<size_t>(k)];
      for (const LinEntry& ei : col)
        for (const LinEntry& ej : col) M(ei.row, ej.row) += w * ei.v * ej.v;
    }
    M = 0.5 * (M + M.transpose());

    double reg = 0.0;
    for (int attempt = 0;; ++attempt) {
      mllt.compute(reg == 0.0 ? M : Eigen::MatrixXd(M + reg * Eigen::MatrixXd::Identity(m, m)));
      if (mllt.info() == Eigen::Success) break;
      if (attempt >= 5) return extract(Status::NumericalTrouble), sol;
      reg = (reg == 0.0) ? 1e-13 * (1.0 + M.diagonal().cwiseAbs().maxCoeff()) : reg * 100.0;
    }

    Eigen::MatrixXd mf;     // M^-1 Af
    Eigen::LDLT<Eigen::MatrixXd> gf; // Af^T M^-1 Af
    if (cm.nf > 0) {
      mf = mllt.solve(cm.af);
      gf.compute(cm.af.transpose() * mf);
      if (gf.info() != Eigen::Success) return extract(Status::NumericalTrouble), sol;
    }

    // --- one Newton solve for a given complementarity right-hand side ---
    std::vector<Eigen::MatrixXd> Rc(static_cast<size_t>(nb));
    Eigen::VectorXd rcl(cm.nl);
    std::vector<Eigen::MatrixXd> dX(static_cast<size_t>(nb)), dS(static_cast<size_t>(nb));
    Eigen::VectorXd dxl(cm.nl), dsl(cm.nl), dxf(cm.nf), dy(m);

    auto newton = [&]() {
      Eigen::VectorXd h = rp;
      for (int b = 0; b < nb; ++b) {
        const PsdBlock& pb = cm.psd[static_cast<size_t>(b)];
        // E = (Rc - X Rd) S^-1
        Eigen::MatrixXd t = Rc[static_cast<size_t>(b)] -
                            st.X[static_cast<size_t>(b)] * Rd[static_cast<size_t>(b)];
        Eigen::MatrixXd e = slt[static_cast<size_t>(b)].solve(t.transpose()).transpose();
        for (const RowCoeff& rc : pb.rows) h[rc.row] -= trip_dot(rc.trip, e);
      }
      for (int k = 0; k < cm.nl; ++k) {
        const double v = (rcl[k] - st.xl[k] * rdl[k]) / st.sl[k];
        for (const LinEntry& e : cm.lin_cols[static_cast<size_t>(k)]) h[e.row] -= e.v * v;
      }
      if (cm.nf > 0) {
        dxf = gf.solve(mf.transpose() * h - rdf);
        dy = mllt.solve(h - cm.af * dxf);
      } else {
        dy = mllt.solve(h);
      }
      for (int b = 0; b < nb; ++b) {
        const PsdBlock& pb = cm.psd[static_cast<size_t>(b)];
        Eigen::MatrixXd acc = Rd[static_cast<size_t>(b)];
        for (const RowCoeff& rc : pb.rows) acc -= dy[rc.row] * rc.a;
        dS[static_cast<size_t>(b)] = acc;
        Eigen::MatrixXd t = Rc[static_cast<size_t>(b)] - st.X[static_cast<size_t>(b)] * acc;
        Eigen::MatrixXd dx = slt[static_cast<size_t>(b)].solve(t.transpose()).transpose();
        dX[static_cast<size_t>(b)] = 0.5 * (dx + dx.transpose());
      }
      dsl = rdl;
      for (int k = 0; k < cm.nl; ++k)
        for (const LinEntry& e : cm.lin_cols[static_cast<size_t>(k)]) dsl[k] -= e.v * dy[e.row];
      dxl = (rcl - st.xl.cwiseProduct(dsl)).cwiseQuotient(st.sl);
    };

    auto max_steps = [&]() {
      double ap = kInf, ad = kInf;
      for (int b = 0; b < nb; ++b) {
        ap = std::min(ap, psd_max_step(st.X[static_cast<size_t>(b)], dX[static_cast<size_t>(b)]));
        ad = std::min(ad, psd_max_step(st.S[static_cast<size_t>(b)], dS[static_cast<size_t>(b)]));
      }
      for (int k = 0; k < cm.nl; ++k) {
        if (dxl[k] < 0.0) ap = std::min(ap, -st.xl[k] / dxl[k]);
        if (dsl[k] < 0.0) ad = std::min(ad, -st.sl[k] / dsl[k]);
      }
      return std::pair<double, double>(ap, ad);
    };

    // predictor (affine scaling)
    for (int b = 0; b < nb; ++b)
      Rc[static_cast<size_t>(b)].noalias() =
          -st.X[static_cast<size_t>(b)] * st.S[static_cast<size_t>(b)];
    rcl = -st.xl.cwiseProduct(st.sl);
    newton();
    auto [apa, ada] = max_steps();
    const double ap_aff = std::min(1.0, apa);
    const double ad_aff = std::min(1.0, ada);

    double ip_aff = (st.xl + ap_aff * dxl).dot(st.sl + ad_aff * dsl);
    for (int b = 0; b < nb; ++b)
      ip_aff += ((st.X[static_cast<size_t>(b)] + ap_aff * dX[static_cast<size_t>(b)]).array() *
                 (st.S[static_cast<size_t>(b)] + ad_aff * dS[static_cast<size_t>(b)]).array())
                    .sum();
    ip_aff = std::max(ip_aff, 0.0);
    const double sigma = std::clamp(std::pow(ip_aff / ip, 3.0), 1e-10, 1.0);

    // corrector with second-order term, reusing the factorization of M
    std::vector<Eigen::MatrixXd> dXa = dX, dSa = dS;
    Eigen::VectorXd dxla = dxl, dsla = dsl;
    for (int b = 0; b < nb; ++b) {
      Rc[static_cast<size_t>(b)].noalias() -= dXa[static_cast<size_t>(b)] * dSa[static_cast<size_t>(b)];
      Rc[static_cast<size_t>(b)] +=
          sigma * mu * Eigen::MatrixXd::Identity(cm.psd[static_cast<size_t>(b)].n,
                                                 cm.psd[static_cast<size_t>(b)].n);
    }
    rcl = -st.xl.cwiseProduct(st.sl) - dxla.cwiseProduct(dsla) +
          Eigen::VectorXd::Constant(cm.nl, sigma * mu);
    newton();
    auto [apm, adm] = max_steps();
    const double ap = std::min(1.0, cfg.step_frac * apm);
    const double ad = std::min(1.0, cfg.step_frac * adm);
    if (cfg.trace_iterates && !sol.trace.empty()) {
      sol.trace.back().step_p = ap;
      sol.trace.back().step_d = ad;
    }
    if (ap < 1e-10 && ad < 1e-10) {
      if (try_primal_cert(1e-7)) return extract(Status::PrimalInfeasible), sol;
      return extract(Status::NumericalTrouble), sol;
    }

    for (int b = 0; b < nb; ++b) {
      st.X[static_cast<size_t>(b)] += ap * dX[static_cast<size_t>(b)];
      st.X[static_cast<size_t>(b)] =
          0.5 * (st.X[static_cast<size_t>(b)] + st.X[static_cast<size_t>(b)].transpose());
      st.S[static_cast<size_t>(b)] += ad * dS[static_cast<size_t>(b)];
      st.S[static_cast<size_t>(b)] =
          0.5 * (st.S[static_cast<size_t>(b)] + st.S[static_cast<size_t>(b)].transpose());
    }
    st.xl += ap * dxl;
    st.sl += ad * dsl;
    st.xf += ap * dxf;
    st.y += ad * dy;
  }

  if (try_primal_cert(1e-7)) return extract(Status::PrimalInfeasible), sol;
  return extract(Status::MaxIterations), sol;
}

KktReport verify_kkt(const Program& p, const Solution& sol) {
  KktReport rep;
  double pobj = 0.0;
  for (int b = 0; b < p.num_blocks(); ++b)
    pobj += trace_re(p.cost(b) * sol.x[static_cast<size_t>(b)]);
  const double dobj = sol.dual_obj;
  const double objscale = 1.0 + std::abs(pobj) + std::abs(dobj);
  rep.gap = std::abs(pobj - sol.dual_obj) / objscale;

  double comp = 0.0;
  for (int i = 0; i < p.num_constraints(); ++i) {
    const Constraint& c = p.constraint(i);
    double val = 0.0;
    for (const Term& t : c.terms) val += trace_re(t.coeff * sol.x[static_cast<size_t>(t.block)]);
    const double scale = 1.0 + std::abs(c.rhs);
    double viol = 0.0;
    switch (c.sense) {
      case Sense::Eq: viol = std::abs(val - c.rhs); break;
      case Sense::Le:
        viol = std::max(0.0, val - c.rhs);
        rep.dual_residual = std::max(rep.dual_residual, std::max(0.0, sol.y[i]) / scale);
        comp += std::abs(sol.y[i] * (val - c.rhs));
        break;
      case Sense::Ge:
        viol = std::max(0.0, c.rhs - val);
        rep.dual_residual = std::max(rep.dual_residual, std::max(0.0, -sol.y[i]) / scale);
        comp += std::abs(sol.y[i] * (val - c.rhs));
        break;
    }
    rep.primal_residual = std::max(rep.primal_residual, viol / scale);
  }

  for (int b = 0; b < p.num_blocks(); ++b) {
    const Block& blk = p.block(b);
    const Eigen::MatrixXcd& xb = sol.x[static_cast<size_t>(b)];
    const Eigen::MatrixXcd& sb = sol.s[static_cast<size_t>(b)];
    Eigen::MatrixXcd d = p.cost(b) - sb;
    for (int i = 0; i < p.num_constraints(); ++i)
      for (const Term& t : p.constraint(i).terms)
        if (t.block == b) d -= sol.y[i] * t.coeff;
    const double dscale = 1.0 + p.cost(b).norm();
    if (blk.kind == BlockKind::Free) {
      rep.dual_residual = std::max(rep.dual_residual, d.norm() / dscale);
      continue;
    }
    rep.dual_residual = std::max(rep.dual_residual, d.norm() / dscale);
    comp += std::abs(trace_re(sb.adjoint() * xb));
    if (blk.kind == BlockKind::Nonneg) {
      rep.cone_violation = std::max({rep.cone_violation, -xb(0, 0).real(), -sb(0, 0).real()});
    } else {
      const HermitianMatrix hx(xb), hs(sb);
      rep.cone_violation =
          std::max(rep.cone_violation,
                   std::max(-min_eigenvalue(hx) / (1.0 + spectral_norm(hx)),
                            -min_eigenvalue(hs) / (1.0 + spectral_norm(hs))));
    }
  }
  rep.complementarity = comp / objscale;
  return rep;
}

} // namespace rabeam::conic
