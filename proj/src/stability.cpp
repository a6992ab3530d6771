#include "qc1d/stability.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "qc1d/errors.hpp"

namespace qc1d {

namespace {

constexpr int kEigenCap = 512;  // dense eigen-verification size limit

// Orthogonal reflector P with P * (1/sqrt(n)) = e_0; rows 1..n-1 of P span
// the zero-mean subspace, so (P A P)[1:, 1:] restricts A to it.
Eigen::MatrixXd restrict_zero_mean(const Eigen::MatrixXd& A) {
  const Eigen::Index n = A.rows();
  Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(double(n)));
  v(0) -= 1.0;
  const double beta = 2.0 / v.squaredNorm();
  const Eigen::VectorXd w = A * v;
  const double alpha = v.dot(w);
  Eigen::MatrixXd B = A;
  B.noalias() -= beta * v * w.transpose();
  B.noalias() -= beta * w * v.transpose();
  B.noalias() += (beta * beta * alpha) * v * v.transpose();
  return B.bottomRightCorner(n - 1, n - 1);
}

// ||Du||^2 as a quadratic form matched to QuadraticForm's realization.
QuadraticForm strain_norm_form(int N) {
  std::vector<QuadraticForm::DifferencePair> pairs;
  const int n = 2 * N;
  pairs.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    pairs.push_back({(i + n - 1) % n, i, static_cast<double>(N)});
  return QuadraticForm(N, std::move(pairs));
}

double min_generalized_eigenvalue(const Eigen::MatrixXd& A,
                                  const Eigen::MatrixXd& B) {
  const Eigen::MatrixXd Ar = restrict_zero_mean(A);
  const Eigen::MatrixXd Br = restrict_zero_mean(B);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
      Ar, Br, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success)
    throw Error("generalized eigensolve failed to converge");
  return es.eigenvalues().minCoeff();
}

}  // namespace

double sharp_stability_constant(const ChainConfig& cfg, const Potential& p) {
  double acc = 0.0;
  for (int k = 1; k <= cfg.s; ++k)
    acc += static_cast<double>(k) * k * p.evaluate(k * cfg.F, 2);
  return acc;
}

double mu_eps_formula(int N) {
  const double eps = 1.0 / N;
  return 2.0 * std::sin(std::numbers::pi * eps / 2.0) / eps;
}

double mu_eps_dense(int N) {
  if (N > kEigenCap)
    throw ArgumentError("dense eigen-verification is capped at N = 512");
  const int n = 2 * N;
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    D(i, i) = N;
    D(i, (i + n - 1) % n) = -N;
  }
  const Eigen::MatrixXd D2 = D * D;
  const double eps = 1.0 / N;
  const Eigen::MatrixXd A = eps * D2.transpose() * D2;  // ||Psi''||^2
  const Eigen::MatrixXd B = eps * D.transpose() * D;    // ||Psi'||^2
  return std::sqrt(min_generalized_eigenvalue(A, B));
}

double atomistic_symbol_min(const ChainConfig& cfg, const Potential& p) {
  double lo = std::numeric_limits<double>::infinity();
  for (int m = 1; m <= cfg.N; ++m) {  // modes m and 2N-m coincide
    const double half_theta = std::numbers::pi * m / (2.0 * cfg.N);
    const double den = std::sin(half_theta);
    double sym = 0.0;
    for (int k = 1; k <= cfg.s; ++k) {
      const double sk = std::sin(k * half_theta);
      sym += p.evaluate(k * cfg.F, 2) * sk * sk;
    }
    lo = std::min(lo, sym / (den * den));
  }
  return lo;
}

void require_concavity_gate(const ChainConfig& cfg, const Potential& p) {
  for (int k = 2; k <= cfg.s; ++k)
    if (p.evaluate(k * cfg.F, 2) > 0.0)
      throw AssumptionViolatedError(
          "phi''(kF) > 0 for k = " + std::to_string(k) +
              "; the sharp stability theory assumes concavity beyond the "
              "inflection radius",
          k);
}

double lambda_min_dense(ModelKind kind, const ChainConfig& cfg,
                        const Potential& p, int interface_center) {
  if (cfg.N > kEigenCap)
    throw ArgumentError("dense eigen-verification is capped at N = 512");
  const QuadraticForm H = hessian(kind, cfg, p, nullptr, interface_center);
  const QuadraticForm L = strain_norm_form(cfg.N);
  return min_generalized_eigenvalue(H.dense(), L.dense());
}

StabilityReport stability_constants(const ChainConfig& cfg, const Potential& p) {
  require_concavity_gate(cfg, p);
  StabilityReport rep{};
  rep.A_F = sharp_stability_constant(cfg, p);
  rep.mu_eps = mu_eps_formula(cfg.N);
  rep.lambda_min_atomistic = lambda_min_dense(ModelKind::Atomistic, cfg, p);
  rep.lambda_min_qnl = lambda_min_dense(ModelKind::QNL, cfg, p);
  const double eps = cfg.eps();
  rep.B_effective = (rep.A_F - rep.lambda_min_atomistic) /
                    (eps * eps * rep.mu_eps * rep.mu_eps);
  rep.B_upper = 0.0;
  rep.B_lower = 0.0;
  for (int k = 2; k <= cfg.s; ++k) {
    const double dd = p.evaluate(k * cfg.F, 2);
    rep.B_upper += (k - 1) * dd;
    rep.B_lower += (k == 2 ? 1.0
                           : (std::pow(double(k), 4) - double(k) * k) / 12.0) *
                   dd;
  }
  return rep;
}

double critical_strain(ModelKind kind, const ChainConfig& cfg,
                       const Potential& p, double f_lo, double f_hi,
                       double f_tol) {
  if (kind != ModelKind::Atomistic && kind != ModelKind::QNL)
    throw ArgumentError("critical strain is defined for Atomistic and QNL");
  if (!(f_lo > 0.0) || !(f_hi > f_lo))
    throw ArgumentError("critical strain needs a bracket 0 < f_lo < f_hi");
  auto gate = [&](double F) {
    const ChainConfig c(cfg.N, cfg.K, cfg.s, F);
    require_concavity_gate(c, p);
    return lambda_min_dense(kind, c, p);
  };
  double lo = f_lo, hi = f_hi;
  double g_lo = gate(lo), g_hi = gate(hi);
  if (g_lo == 0.0) return lo;
  if (g_hi == 0.0) return hi;
  if ((g_lo > 0.0) == (g_hi > 0.0))
    throw BracketError("lambda_min does not change sign over the bracket");
  while (hi - lo > f_tol) {
    const double mid = 0.5 * (lo + hi);
    const double g_mid = gate(mid);
    if (g_mid == 0.0) return mid;
    if ((g_mid > 0.0) == (g_lo > 0.0)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double eta_F(const ChainConfig& cfg, const Potential& p) {
  if (cfg.s != 3)
    throw UndefinedEtaError("eta_F is defined for third-neighbor chains only");
  const double dd2 = p.evaluate(2.0 * cfg.F, 2);
  const double dd3 = p.evaluate(3.0 * cfg.F, 2);
  if (!(dd2 < 0.0) && !(dd3 < 0.0))
    throw AssumptionViolatedError(
        "eta_F needs phi''(2F) < 0 or phi''(3F) < 0", 2);
  if (dd3 == 0.0)
    throw UndefinedEtaError(
        "phi''(3F) = 0: eta_F is undefined, fall back to the s = 2 theory");
  const StabilityReport rep = stability_constants(cfg, p);
  return (rep.B_effective - dd2) / dd3;
}

}  // namespace qc1d
