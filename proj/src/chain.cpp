#include "qc1d/chain.hpp"

#include <algorithm>
#include <cmath>

#include "qc1d/errors.hpp"

namespace qc1d {

ChainConfig::ChainConfig(int N_, int K_, int s_, double F_)
    : N(N_), K(K_), s(s_), F(F_) {
  if (N < 4) throw ArgumentError("chain requires N >= 4");
  if (s < 1) throw ArgumentError("interaction range s must be >= 1");
  if (!(F > 0.0)) throw ArgumentError("macroscopic strain F must be positive");
  if (K <= 1 || K >= N - s + 1)
    throw ArgumentError("atomistic half-width must satisfy 1 < K < N - s + 1");
}

PeriodicField::PeriodicField(int half_period, bool zero_mean)
    : half_period_(half_period),
      values_(static_cast<std::size_t>(2 * half_period), 0.0),
      zero_mean_(zero_mean) {
  if (half_period < 1) throw ArgumentError("field half-period must be >= 1");
}

PeriodicField::PeriodicField(int half_period, std::vector<double> storage_values,
                             bool zero_mean)
    : half_period_(half_period),
      values_(std::move(storage_values)),
      zero_mean_(zero_mean) {
  if (half_period < 1) throw ArgumentError("field half-period must be >= 1");
  if (values_.size() != static_cast<std::size_t>(2 * half_period))
    throw ArgumentError("field storage must hold exactly 2N values");
  if (zero_mean_) {
    double sum = 0.0, amax = 0.0;
    for (double v : values_) {
      sum += v;
      amax = std::max(amax, std::fabs(v));
    }
    if (std::fabs(sum) > 2.0 * half_period * 1e-14 * std::max(amax, 1e-300))
      throw ArgumentError("field tagged zero-mean does not sum to zero");
  }
}

int PeriodicField::storage_index(int ell, int half_period) {
  const int m = 2 * half_period;
  int i = (ell + half_period - 1) % m;
  return i < 0 ? i + m : i;
}

double PeriodicField::mean() const {
  double sum = 0.0;
  for (double v : values_) sum += v;
  return sum / static_cast<double>(values_.size());
}

double PeriodicField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::fabs(v));
  return m;
}

PeriodicField& PeriodicField::operator+=(const PeriodicField& other) {
  if (other.half_period_ != half_period_)
    throw ArgumentError("field size mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  zero_mean_ = zero_mean_ && other.zero_mean_;
  return *this;
}

PeriodicField& PeriodicField::operator-=(const PeriodicField& other) {
  if (other.half_period_ != half_period_)
    throw ArgumentError("field size mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  zero_mean_ = zero_mean_ && other.zero_mean_;
  return *this;
}

PeriodicField& PeriodicField::operator*=(double c) {
  for (double& v : values_) v *= c;
  return *this;
}

PeriodicField operator+(PeriodicField a, const PeriodicField& b) {
  a += b;
  return a;
}

PeriodicField operator-(PeriodicField a, const PeriodicField& b) {
  a -= b;
  return a;
}

PeriodicField operator*(double c, PeriodicField a) {
  a *= c;
  return a;
}

PeriodicField difference(const PeriodicField& u, int order) {
  if (order < 1 || order > 4)
    throw ArgumentError("difference order must be in 1..4");
  const int n = u.size();
  const double inv_eps = static_cast<double>(u.half_period());
  PeriodicField cur = u;
  for (int pass = 0; pass < order; ++pass) {
    PeriodicField next(u.half_period(), /*zero_mean=*/true);
    for (int i = 0; i < n; ++i) {
      const int prev = (i + n - 1) % n;
      next.storage(i) = (cur.storage(i) - cur.storage(prev)) * inv_eps;
    }
    cur = std::move(next);
  }
  return cur;
}

PeriodicField forward_difference(const PeriodicField& w) {
  const int n = w.size();
  const double inv_eps = static_cast<double>(w.half_period());
  PeriodicField out(w.half_period(), /*zero_mean=*/true);
  for (int i = 0; i < n; ++i) {
    const int next = (i + 1) % n;
    out.storage(i) = (w.storage(next) - w.storage(i)) * inv_eps;
  }
  return out;
}

double norm_l2_eps(const PeriodicField& v) {
  double acc = 0.0;
  for (int i = 0; i < v.size(); ++i) acc += v.storage(i) * v.storage(i);
  return std::sqrt(acc * v.eps());
}

double norm_l2_eps(const PeriodicField& v, std::span<const int> subset) {
  double acc = 0.0;
  for (int ell : subset) {
    const double x = v(ell);
    acc += x * x;
  }
  return std::sqrt(acc * v.eps());
}

double norm_linf(const PeriodicField& v, std::span<const int> subset) {
  double m = 0.0;
  for (int ell : subset) m = std::max(m, std::fabs(v(ell)));
  return m;
}

double inner_product(const PeriodicField& v, const PeriodicField& w) {
  if (v.half_period() != w.half_period())
    throw ArgumentError("inner product requires fields of equal period");
  double acc = 0.0;
  for (int i = 0; i < v.size(); ++i) acc += v.storage(i) * w.storage(i);
  return acc * v.eps();
}

PeriodicField project_zero_mean(const PeriodicField& u) {
  const double m = u.mean();
  std::vector<double> vals(u.data());
  for (double& v : vals) v -= m;
  return PeriodicField(u.half_period(), std::move(vals), /*zero_mean=*/true);
}

UniformDeformation uniform_deformation(const ChainConfig& cfg) {
  return UniformDeformation{cfg.F, cfg.eps()};
}

double deformation_position(const ChainConfig& cfg, const PeriodicField& u,
                            int ell) {
  return cfg.F * cfg.eps() * ell + u(ell);
}

}  // namespace qc1d
