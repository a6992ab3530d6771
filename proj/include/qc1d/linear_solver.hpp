#ifndef QC1D_LINEAR_SOLVER_HPP
#define QC1D_LINEAR_SOLVER_HPP

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <vector>

#include "qc1d/chain.hpp"
#include "qc1d/energy_models.hpp"
#include "qc1d/potential.hpp"

namespace qc1d {

// External dead load; zero mean is required for equilibria to exist.
struct DeadLoad {
  PeriodicField f;
  explicit DeadLoad(PeriodicField load);
};

enum class SolverBackend {
  Auto,               // Direct up to 2N = 8192, ConjugateGradient beyond
  Direct,             // cyclic banded Cholesky with one pinned degree of freedom
  ConjugateGradient,  // matrix-free with the zero-mean projector each step
};

struct LinearizedSolution {
  PeriodicField u;       // zero-mean displacement
  ModelKind model;
  double residual_norm;  // ||H u - P f|| in l2_eps, <= 1e-10 ||f||
};

// Solves the linearized equilibrium <H u, w> = <f, w> for all zero-mean w,
// where H is the second variation of the chosen model at y_F.  kind must
// be Atomistic or QNL.  Throws NotPositiveDefiniteError when the model is
// unstable at this strain.
LinearizedSolution solve_linearized(ModelKind kind, const ChainConfig& cfg,
                                    const Potential& p, const DeadLoad& load,
                                    SolverBackend backend = SolverBackend::Auto);

// l2_eps representer T of the linearized consistency functional: for the
// atomistic solution u_a,
//   <T, w> = eps sum_{k=2}^s sum_{ell in C_qnl(k)} phi''(kF)
//            sum_{j=0}^{k-1} (k Du_{ell+j} - sum_t Du_{ell+t}) Dw_{ell+j}.
// It satisfies the error equation <H_qnl (u_a - u_qnl), w> = <T, w>.
PeriodicField consistency_error(const ChainConfig& cfg, const Potential& p,
                                const PeriodicField& u_a);

// || D u_a - D u_qnl ||_{l2_eps}
double strain_error(const PeriodicField& u_a, const PeriodicField& u_qnl);

// Cholesky factorization of a cyclic banded SPD operator restricted to
// the zero-mean subspace (one degree of freedom pinned, band + Schur
// complement on the wrap block).  Exposed for direct testing.
class CyclicBandedCholesky {
 public:
  explicit CyclicBandedCholesky(const QuadraticForm& H);

  // Solves H u = rhs for zero-mean rhs; the result has zero mean.
  PeriodicField solve(const PeriodicField& rhs) const;

 private:
  int n_ = 0;          // full dimension 2N
  int band_ = 0;       // bandwidth
  int lead_ = 0;       // leading block size n - 1 - band
  std::vector<double> L_;   // banded Cholesky factor, row-major (lead x band+1)
  Eigen::MatrixXd W_;       // lead x band coupling, W = L^-1 E
  Eigen::LLT<Eigen::MatrixXd> schur_;

  double& Lb(int i, int d) { return L_[static_cast<std::size_t>(i) * (band_ + 1) + d]; }
  double Lb(int i, int d) const {
    return L_[static_cast<std::size_t>(i) * (band_ + 1) + d];
  }
};

}  // namespace qc1d

#endif
