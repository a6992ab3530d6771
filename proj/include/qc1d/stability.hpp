#ifndef QC1D_STABILITY_HPP
#define QC1D_STABILITY_HPP

#include "qc1d/chain.hpp"
#include "qc1d/energy_models.hpp"
#include "qc1d/potential.hpp"

namespace qc1d {

// Sharp stability data at the uniform strain y_F.
//
// lambda_min_* is the minimum of <Hu,u>/||Du||^2 over zero-mean u, from a
// dense generalized eigensolve.  B_effective = (A_F - lambda_min_atomistic)
// / (eps^2 mu_eps^2); the bracket ends satisfy
// B_lower <= B_effective <= B_upper (both ends <= 0 under the concavity
// hypothesis, and they coincide for s = 2).
struct StabilityReport {
  double A_F;                    // sum_{k=1}^s k^2 phi''(kF)
  double mu_eps;                 // 2 sin(pi eps / 2) / eps
  double lambda_min_atomistic;
  double lambda_min_qnl;
  double B_effective;
  double B_upper;                // sum_{k=2}^s (k-1) phi''(kF)
  double B_lower;                // phi''(2F) + sum_{k=3}^s (k^4-k^2)/12 phi''(kF)
};

// A_F^s = sum_{k=1}^s k^2 phi''(kF); positivity is equivalent to QNL
// stability whenever K < N - s + 1.
double sharp_stability_constant(const ChainConfig& cfg, const Potential& p);

double mu_eps_formula(int N);

// min ||Psi''|| / ||Psi'|| over zero-mean Psi by dense generalized
// eigensolve; the oracle counterpart of mu_eps_formula.  N <= 512.
double mu_eps_dense(int N);

// Exact atomistic lambda_min by Fourier diagonalization of the circulant
// second variation: min_m sum_k phi''(kF) sin^2(k theta_m / 2) / sin^2(theta_m / 2).
double atomistic_symbol_min(const ChainConfig& cfg, const Potential& p);

// Throws AssumptionViolatedError (carrying the offending k) unless
// phi''(kF) <= 0 for every k = 2..s.
void require_concavity_gate(const ChainConfig& cfg, const Potential& p);

// min <Hu,u>/||Du||^2 over zero-mean u for the given model, by dense
// generalized symmetric eigensolve on the zero-mean subspace.  N <= 512.
double lambda_min_dense(ModelKind kind, const ChainConfig& cfg,
                        const Potential& p, int interface_center = 0);

StabilityReport stability_constants(const ChainConfig& cfg, const Potential& p);

// Critical strain F* with lambda_min(F*) = 0, located by bisection on F
// over [f_lo, f_hi] down to a bracket width f_tol.  kind must be
// Atomistic or QNL.  Throws BracketError when lambda_min does not change
// sign over the bracket.
double critical_strain(ModelKind kind, const ChainConfig& cfg,
                       const Potential& p, double f_lo, double f_hi,
                       double f_tol = 1e-12);

// eta = (B_effective - phi''(2F)) / phi''(3F) for third-neighbor chains;
// the sharp theory brackets it in [2, 6].  Throws UndefinedEtaError when
// s != 3 or phi''(3F) = 0.
double eta_F(const ChainConfig& cfg, const Potential& p);

}  // namespace qc1d

#endif
