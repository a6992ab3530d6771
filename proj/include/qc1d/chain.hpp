#ifndef QC1D_CHAIN_HPP
#define QC1D_CHAIN_HPP

#include <span>
#include <vector>

namespace qc1d {

// Periodic-cell description.  The representative cell holds the 2N atoms
// ell = -N+1 .. N; eps = 1/N is always recomputed from N, never cached.
struct ChainConfig {
  int N;     // half the period (cell size 2N)
  int K;     // atomistic half-width, 1 < K < N - s + 1
  int s;     // interaction range (s-th nearest neighbor)
  double F;  // macroscopic deformation gradient

  ChainConfig(int N_, int K_, int s_, double F_);

  double eps() const { return 1.0 / N; }
  int size() const { return 2 * N; }
};

// 2N-periodic sequence of reals indexed over the representative cell.
// Storage maps ell in [-N+1, N] to i = ell + N - 1 in [0, 2N); access at
// any integer index wraps.
class PeriodicField {
 public:
  explicit PeriodicField(int half_period, bool zero_mean = false);
  PeriodicField(int half_period, std::vector<double> storage_values,
                bool zero_mean = false);

  int half_period() const { return half_period_; }
  int size() const { return static_cast<int>(values_.size()); }
  double eps() const { return 1.0 / half_period_; }
  bool zero_mean() const { return zero_mean_; }

  static int storage_index(int ell, int half_period);

  double operator()(int ell) const {
    return values_[static_cast<std::size_t>(storage_index(ell, half_period_))];
  }
  void set(int ell, double v) {
    values_[static_cast<std::size_t>(storage_index(ell, half_period_))] = v;
  }
  double storage(int i) const { return values_[static_cast<std::size_t>(i)]; }
  double& storage(int i) { return values_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& data() const { return values_; }

  double mean() const;
  double max_abs() const;

  PeriodicField& operator+=(const PeriodicField& other);
  PeriodicField& operator-=(const PeriodicField& other);
  PeriodicField& operator*=(double c);

 private:
  int half_period_;
  std::vector<double> values_;
  bool zero_mean_;
};

PeriodicField operator+(PeriodicField a, const PeriodicField& b);
PeriodicField operator-(PeriodicField a, const PeriodicField& b);
PeriodicField operator*(double c, PeriodicField a);

// (Du)_ell = (u_ell - u_{ell-1})/eps applied `order` times (order 1..4).
// The result of differentiating a periodic field has zero mean, so the
// zero-mean tag is always set on the output.
PeriodicField difference(const PeriodicField& u, int order);

// Forward difference (D+ w)_ell = (w_{ell+1} - w_ell)/eps; the adjoint
// identity reads <Dv, w> = -<v, forward_difference(w)>.
PeriodicField forward_difference(const PeriodicField& w);

// Discrete l2_eps norm (eps * sum v^2)^(1/2), over the whole cell or over
// a subset of representative indices.
double norm_l2_eps(const PeriodicField& v);
double norm_l2_eps(const PeriodicField& v, std::span<const int> subset);
double norm_linf(const PeriodicField& v, std::span<const int> subset);

// <v, w> = eps * sum v_ell w_ell.  Throws ArgumentError on length mismatch.
double inner_product(const PeriodicField& v, const PeriodicField& w);

// Subtracts the mean and tags the result; idempotent.
PeriodicField project_zero_mean(const PeriodicField& u);

// The affine map ell -> F*eps*ell.  Deformations are stored as (F, u)
// pairs with u periodic; the affine part is never stored pointwise.
struct UniformDeformation {
  double F;
  double eps;
  double operator()(int ell) const { return F * eps * ell; }
};

UniformDeformation uniform_deformation(const ChainConfig& cfg);

// Position of atom ell under y = y_F + u (u accessed with periodic wrap).
double deformation_position(const ChainConfig& cfg, const PeriodicField& u,
                            int ell);

}  // namespace qc1d

#endif
