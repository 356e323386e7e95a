#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "rabeam/hermitian.hpp"

namespace rabeam::conic {

// Standard-form conic program
//
//   minimize    sum_b <C_b, X_b>
//   subject to  sum_b <A_{i,b}, X_b>  (=, <=, >=)  rhs_i        i = 0..m-1
//               X_b in cone(b)
//
// Block cones: complex Hermitian PSD, real symmetric PSD, nonnegative scalar,
// free scalar. Inequalities are converted internally to equalities with
// nonnegative slack scalars; complex blocks are solved on their real embedding
// with <A,B>_complex = 0.5 * <emb A, emb B>_real bookkeeping, so objective
// values and multipliers come back in complex-program units.

enum class BlockKind { PsdComplex, PsdReal, Nonneg, Free };
enum class Sense { Eq, Le, Ge };

struct Block {
  BlockKind kind = BlockKind::Nonneg;
  int dim = 1; // matrix dimension for PSD blocks, 1 for scalars
  std::string name;
};

struct Term {
  int block = -1;
  Eigen::MatrixXcd coeff; // Hermitian for PSD blocks, 1x1 real for scalars
};

struct Constraint {
  std::vector<Term> terms;
  Sense sense = Sense::Eq;
  double rhs = 0.0;
  std::string name;
};

class Program {
 public:
  int add_block(BlockKind kind, int dim, std::string name = {});
  int add_psd_complex(int dim, std::string name = {}) {
    return add_block(BlockKind::PsdComplex, dim, std::move(name));
  }
  int add_psd_real(int dim, std::string name = {}) {
    return add_block(BlockKind::PsdReal, dim, std::move(name));
  }
  int add_nonneg(std::string name = {}) { return add_block(BlockKind::Nonneg, 1, std::move(name)); }
  int add_free(std::string name = {}) { return add_block(BlockKind::Free, 1, std::move(name)); }

  // Accumulates onto the block's cost; validates Hermitian/shape.
  void add_cost(int block, const Eigen::MatrixXcd& c);
  void add_cost_scalar(int block, double c);

  int add_constraint(Constraint c);
  // Scalar-row sugar: sum_k weight_k * scalar_block_k (sense) rhs.
  int add_scalar_row(const std::vector<std::pair<int, double>>& weights, Sense sense, double rhs,
                     std::string name = {});

  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  const Block& block(int b) const { return blocks_[static_cast<size_t>(b)]; }
  const Eigen::MatrixXcd& cost(int b) const { return costs_[static_cast<size_t>(b)]; }
  int num_constraints() const { return static_cast<int>(constraints_.size()); }
  const Constraint& constraint(int i) const { return constraints_[static_cast<size_t>(i)]; }

  void dump(std::ostream& os) const; // debug text format: blocks, costs, rows

 private:
  std::vector<Block> blocks_;
  std::vector<Eigen::MatrixXcd> costs_;
  std::vector<Constraint> constraints_;
};

// Entry (k,l) equality rows for a Hermitian matrix expression
//   sum_t sign_t * X_{block_t}[offset_t : offset_t+n, same]
// + sum_s scalar_s * M_s + constant = 0,
// one real row per diagonal entry and two (re, im) per off-diagonal pair.
struct HermTerm {
  int block = -1;
  int offset = 0;
  double sign = 1.0;
};
struct ScalarMatTerm {
  int block = -1;
  Eigen::MatrixXcd m;
};
void add_hermitian_link(Program& p, int n, const std::vector<HermTerm>& psd_terms,
                        const std::vector<ScalarMatTerm>& scalar_terms,
                        const Eigen::MatrixXcd& constant, const std::string& name_prefix);

struct Settings {
  double gap_tol = 1e-8;       // relative duality gap at which we declare optimality
  double feas_tol = 1e-8;      // relative primal/dual residual target
  int max_iter = 100;
  int stall_limit = 30;        // non-improving iterations before infeasibility ruling
  double step_frac = 0.98;     // fraction of the step to the cone boundary
  bool trace_iterates = false; // record per-iteration info in Solution::trace
};

enum class Status { Optimal, PrimalInfeasible, DualInfeasible, MaxIterations, NumericalTrouble };

const char* to_string(Status s);

struct IterateInfo {
  int iter = 0;
  double pobj = 0, dobj = 0;   // objective values at the iterate
  double pinf = 0, dinf = 0;   // relative feasibility residuals
  double gap = 0;              // <X,S>/(1+|pobj|+|dobj|)
  double mu = 0;
  double step_p = 0, step_d = 0;
};

struct KktReport {
  double primal_residual = 0; // max relative constraint violation (senses respected)
  double dual_residual = 0;   // max relative dual-feasibility violation across blocks
  double complementarity = 0; // (<X,S> + ineq slack * y) / (1 + |pobj| + |dobj|)
  double gap = 0;             // |pobj - dobj| / (1 + |pobj| + |dobj|)
  double cone_violation = 0;  // most negative eigenvalue across primal/dual blocks, relative
  double max_residual() const;
};

struct Solution {
  Status status = Status::NumericalTrouble;
  std::vector<Eigen::MatrixXcd> x; // per block; 1x1 for scalars
  std::vector<Eigen::MatrixXcd> s; // dual slack per block; zero for Free blocks
  Eigen::VectorXd y;               // one multiplier per constraint (Le rows <= 0, Ge rows >= 0)
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double gap = 0.0;                // relative duality gap at the returned point
  KktReport kkt;                   // residuals recomputed from the returned point
  int iterations = 0;
  std::vector<IterateInfo> trace;
  // Set when status is PrimalInfeasible: A^*(cert_y) in -cone*, b^T cert_y = 1.
  Eigen::VectorXd cert_y;
};

Solution solve(const Program& p, const Settings& settings = {});

// Recomputes all KKT quantities from scratch in complex arithmetic.
KktReport verify_kkt(const Program& p, const Solution& sol);

} // namespace rabeam::conic
