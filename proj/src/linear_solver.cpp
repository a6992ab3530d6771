#include "qc1d/linear_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>

#include "qc1d/errors.hpp"
#include "qc1d/stability.hpp"

namespace qc1d {

namespace {

constexpr double kResidualContract = 1e-10;  // ||Hu - Pf|| <= contract * ||f||
constexpr double kResidualTarget = 1e-13;    // refinement aims well below it
constexpr int kDirectLimit = 8192;           // direct factorization up to 2N

// Gershgorin bound on the spectral norm of the representer operator.
double operator_norm_bound(const QuadraticForm& H) {
  std::vector<double> row(static_cast<std::size_t>(H.size()), 0.0);
  const double inv_eps = static_cast<double>(H.half_period());
  for (const auto& pr : H.pairs()) {
    const double w = 2.0 * std::fabs(pr.c) * inv_eps;
    row[static_cast<std::size_t>(pr.a)] += w;
    row[static_cast<std::size_t>(pr.b)] += w;
  }
  double m = 0.0;
  for (double v : row) m = std::max(m, v);
  return m;
}

PeriodicField cg_solve(const QuadraticForm& H, const PeriodicField& rhs,
                       double tol_abs) {
  const int N = H.half_period();
  PeriodicField x(N, true);
  PeriodicField r = project_zero_mean(rhs);
  PeriodicField p = r;
  double rr = inner_product(r, r);
  double best_rr = rr;
  PeriodicField best_x = x;
  int since_best = 0;
  const int max_iter = 64 * H.size();
  // a 2x residual drop takes O(sqrt(kappa)) ~ O(2N) iterations, so the
  // stall window has to scale with the chain
  const int stall_window = H.size();
  for (int it = 0; it < max_iter; ++it) {
    if (std::sqrt(rr) <= tol_abs) break;
    if (++since_best > stall_window) break;  // stalled at the attainable floor
    PeriodicField q = project_zero_mean(H.apply(p));
    const double pq = inner_product(p, q);
    if (!(pq > 0.0))
      throw NotPositiveDefiniteError(
          "conjugate gradients met a non-positive curvature direction");
    const double alpha = rr / pq;
    x += alpha * p;
    if ((it + 1) % 64 == 0) {
      r = project_zero_mean(rhs - H.apply(x));  // refresh the true residual
    } else {
      r -= alpha * q;
    }
    const double rr_new = inner_product(r, r);
    if (rr_new < 0.81 * best_rr) {
      best_rr = rr_new;
      best_x = x;
      since_best = 0;
    }
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  if (rr <= best_rr) return project_zero_mean(x);
  return project_zero_mean(best_x);
}

}  // namespace

DeadLoad::DeadLoad(PeriodicField load) : f(std::move(load)) {
  const double scale = std::max(f.max_abs(), 1e-300);
  if (std::fabs(f.mean()) > 1e-12 * scale)
    throw ArgumentError("dead loads must have zero mean");
  if (!f.zero_mean()) f = project_zero_mean(f);
}

CyclicBandedCholesky::CyclicBandedCholesky(const QuadraticForm& H) {
  n_ = H.size();
  band_ = std::max(H.bandwidth(), 1);
  if (n_ < 2 * band_ + 2)
    throw ArgumentError("cyclic banded factorization needs 2N >= 2s + 2");
  lead_ = n_ - 1 - band_;
  const double inv_eps = static_cast<double>(H.half_period());

  // Accumulate the representer matrix in diagonal + canonical-offset form.
  std::vector<double> diag(static_cast<std::size_t>(n_), 0.0);
  std::vector<double> od(static_cast<std::size_t>(n_) * (band_ + 1), 0.0);
  auto od_at = [&](int i, int d) -> double& {
    return od[static_cast<std::size_t>(i) * (band_ + 1) + d];
  };
  for (const auto& pr : H.pairs()) {
    const double w = pr.c * inv_eps;
    diag[static_cast<std::size_t>(pr.a)] += w;
    diag[static_cast<std::size_t>(pr.b)] += w;
    const int d_raw = (pr.b - pr.a + n_) % n_;
    if (d_raw <= band_)
      od_at(pr.a, d_raw) -= w;
    else
      od_at(pr.b, n_ - d_raw) -= w;
  }

  // Distribute into the reduced system (degree of freedom 0 pinned):
  // leading banded block, border coupling E, border block C.
  std::vector<double> A(static_cast<std::size_t>(lead_) * (band_ + 1), 0.0);
  auto A_at = [&](int i, int d) -> double& {
    return A[static_cast<std::size_t>(i) * (band_ + 1) + d];
  };
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(lead_, band_);
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(band_, band_);
  for (int i = 1; i < n_; ++i) {
    const int ri = i - 1;
    if (ri < lead_)
      A_at(ri, 0) += diag[static_cast<std::size_t>(i)];
    else
      C(ri - lead_, ri - lead_) += diag[static_cast<std::size_t>(i)];
  }
  for (int i = 0; i < n_; ++i) {
    for (int d = 1; d <= band_; ++d) {
      const double v = od_at(i, d);
      if (v == 0.0) continue;
      const int j = (i + d) % n_;
      if (i == 0 || j == 0) continue;
      const int ri = i - 1, rj = j - 1;
      const bool i_lead = ri < lead_, j_lead = rj < lead_;
      if (i_lead && j_lead) {
        A_at(std::max(ri, rj), std::abs(ri - rj)) += v;
      } else if (!i_lead && !j_lead) {
        C(ri - lead_, rj - lead_) += v;
        C(rj - lead_, ri - lead_) += v;
      } else {
        const int rl = i_lead ? ri : rj;
        const int rb = (i_lead ? rj : ri) - lead_;
        E(rl, rb) += v;
      }
    }
  }

  // Banded Cholesky of the leading block.
  L_.assign(static_cast<std::size_t>(lead_) * (band_ + 1), 0.0);
  for (int j = 0; j < lead_; ++j) {
    double x = A_at(j, 0);
    for (int t = 1; t <= std::min(j, band_); ++t) x -= Lb(j, t) * Lb(j, t);
    if (!(x > 0.0))
      throw NotPositiveDefiniteError(
          "linearized operator is not positive definite on the zero-mean "
          "subspace");
    Lb(j, 0) = std::sqrt(x);
    for (int i = j + 1; i <= std::min(j + band_, lead_ - 1); ++i) {
      double y = A_at(i, i - j);
      for (int m = std::max(0, i - band_); m < j; ++m)
        y -= Lb(i, i - m) * Lb(j, j - m);
      Lb(i, i - j) = y / Lb(j, 0);
    }
  }

  // W = L^-1 E and the Schur complement on the wrap block.
  W_ = E;
  for (int col = 0; col < band_; ++col)
    for (int i = 0; i < lead_; ++i) {
      double y = W_(i, col);
      for (int d = 1; d <= std::min(i, band_); ++d)
        y -= Lb(i, d) * W_(i - d, col);
      W_(i, col) = y / Lb(i, 0);
    }
  const Eigen::MatrixXd S = C - W_.transpose() * W_;
  schur_.compute(S);
  if (schur_.info() != Eigen::Success)
    throw NotPositiveDefiniteError(
        "linearized operator is not positive definite on the zero-mean "
        "subspace");
}

PeriodicField CyclicBandedCholesky::solve(const PeriodicField& rhs) const {
  if (rhs.size() != n_)
    throw ArgumentError("right-hand side size mismatch");
  // forward sweep on the leading block
  Eigen::VectorXd y(lead_);
  for (int i = 0; i < lead_; ++i) {
    double v = rhs.storage(i + 1);
    for (int d = 1; d <= std::min(i, band_); ++d) v -= Lb(i, d) * y(i - d);
    y(i) = v / Lb(i, 0);
  }
  Eigen::VectorXd t(band_);
  for (int b = 0; b < band_; ++b) t(b) = rhs.storage(lead_ + 1 + b);
  t -= W_.transpose() * y;
  const Eigen::VectorXd z = schur_.solve(t);
  const Eigen::VectorXd g = y - W_ * z;
  Eigen::VectorXd x(lead_);
  for (int i = lead_ - 1; i >= 0; --i) {
    double v = g(i);
    for (int d = 1; d <= std::min(lead_ - 1 - i, band_); ++d)
      v -= Lb(i + d, d) * x(i + d);
    x(i) = v / Lb(i, 0);
  }
  PeriodicField u(rhs.half_period(), false);
  u.storage(0) = 0.0;
  for (int i = 0; i < lead_; ++i) u.storage(i + 1) = x(i);
  for (int b = 0; b < band_; ++b) u.storage(lead_ + 1 + b) = z(b);
  return project_zero_mean(u);
}

LinearizedSolution solve_linearized(ModelKind kind, const ChainConfig& cfg,
                                    const Potential& p, const DeadLoad& load,
                                    SolverBackend backend) {
  if (kind != ModelKind::Atomistic && kind != ModelKind::QNL)
    throw ArgumentError("linearized solves cover the Atomistic and QNL models");
  if (load.f.half_period() != cfg.N)
    throw ArgumentError("load period does not match the chain configuration");

  // Stability gate via the sharp constants; an indefinite factorization
  // below is the backstop when the concavity hypothesis fails.
  bool gate_known = true;
  double lambda_sharp = 0.0;
  try {
    require_concavity_gate(cfg, p);
    lambda_sharp = (kind == ModelKind::Atomistic)
                       ? atomistic_symbol_min(cfg, p)
                       : sharp_stability_constant(cfg, p);
  } catch (const AssumptionViolatedError&) {
    gate_known = false;
  }
  if (gate_known && !(lambda_sharp > 0.0))
    throw NotPositiveDefiniteError(to_string(kind) +
                                   " model is unstable at this strain");

  const QuadraticForm H = hessian(kind, cfg, p);
  const PeriodicField pf = project_zero_mean(load.f);
  const double f_norm = norm_l2_eps(pf);

  SolverBackend chosen = backend;
  if (chosen == SolverBackend::Auto)
    chosen = (cfg.size() <= kDirectLimit) ? SolverBackend::Direct
                                          : SolverBackend::ConjugateGradient;

  const double tol_abs = kResidualTarget * std::max(f_norm, 1e-300);
  std::optional<CyclicBandedCholesky> fact;
  if (chosen == SolverBackend::Direct) fact.emplace(H);
  auto solve_once = [&](const PeriodicField& rhs) {
    return fact ? fact->solve(rhs) : cg_solve(H, rhs, tol_abs);
  };

  PeriodicField u = solve_once(pf);
  double prev = std::numeric_limits<double>::infinity();
  for (int pass = 0; pass < 5; ++pass) {
    const PeriodicField r = pf - H.apply(u);
    const double rn = norm_l2_eps(r);
    if (rn <= tol_abs || rn > 0.5 * prev)
      break;  // converged, or stalled at the attainable floor
    prev = rn;
    u += solve_once(project_zero_mean(r));
    u = project_zero_mean(u);
  }

  // Residuals below eps_mach * ||H|| * ||u|| are not representable once u
  // is rounded to doubles; the contract binds whenever it sits above that
  // floor (it does for every chain size the verification suites use).
  // The conjugate-gradient recursion carries extra rounding noise, hence
  // the wider allowance on that path.
  const double residual = norm_l2_eps(pf - H.apply(u));
  const double floor = (fact ? 1.0 : 16.0) *
                       std::numeric_limits<double>::epsilon() *
                       operator_norm_bound(H) * norm_l2_eps(u);
  if (f_norm > 0.0 && residual > std::max(kResidualContract * f_norm, floor)) {
    char msg[160];
    std::snprintf(msg, sizeof msg,
                  "linear solve missed the residual contract: ||r|| = %.3e, "
                  "||f|| = %.3e, attainable floor = %.3e",
                  residual, f_norm, floor);
    throw Error(msg);
  }
  return LinearizedSolution{std::move(u), kind, residual};
}

PeriodicField consistency_error(const ChainConfig& cfg, const Potential& p,
                                const PeriodicField& u_a) {
  if (u_a.half_period() != cfg.N)
    throw ArgumentError("field period does not match the chain configuration");
  const PeriodicField du = difference(u_a, 1);
  const int n = cfg.size();
  // c[m] collects the coefficient of Dw_m in <T, w>.
  std::vector<double> c(static_cast<std::size_t>(n), 0.0);
  for (int k = 2; k <= cfg.s; ++k) {
    const double ddphi = p.evaluate(k * cfg.F, 2);
    const auto sets = qnl_index_sets(cfg, k);
    for (int ell : sets.continuum) {
      double window = 0.0;
      for (int t = 0; t < k; ++t) window += du(ell + t);
      for (int j = 0; j < k; ++j) {
        const int m = PeriodicField::storage_index(ell + j, cfg.N);
        c[static_cast<std::size_t>(m)] += ddphi * (k * du(ell + j) - window);
      }
    }
  }
  // <T, w> = eps sum_m c_m (Dw)_m, so the representer is -D+ c.
  const PeriodicField cf(cfg.N, std::move(c), false);
  PeriodicField T = forward_difference(cf);
  T *= -1.0;
  return T;
}

double strain_error(const PeriodicField& u_a, const PeriodicField& u_qnl) {
  if (u_a.half_period() != u_qnl.half_period())
    throw ArgumentError("strain error requires fields of equal period");
  return norm_l2_eps(difference(u_a - u_qnl, 1));
}

}  // namespace qc1d
