#include "qc1d/potential.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "qc1d/errors.hpp"

namespace qc1d {

namespace {

void check_args(double r, int order) {
  if (!(r > 0.0)) throw DomainError("potential evaluated at non-positive r");
  if (order < 0 || order > 4)
    throw UnsupportedOrderError("derivative order must be in 0..4");
}

// Locates the +/- sign change of f on (lo, hi) by scan + bisection.
std::optional<double> bisect_sign_change(const std::function<double(double)>& f,
                                         double lo, double hi) {
  constexpr int kScan = 4000;
  const double log_lo = std::log(lo), log_hi = std::log(hi);
  double a = lo, fa = f(a);
  double b = 0.0, fb = 0.0;
  bool found = false;
  for (int i = 1; i <= kScan; ++i) {
    b = std::exp(log_lo + (log_hi - log_lo) * i / kScan);
    fb = f(b);
    if (fa > 0.0 && fb <= 0.0) {
      found = true;
      break;
    }
    a = b;
    fa = fb;
  }
  if (!found) return std::nullopt;
  while (b - a > 1e-12 * std::max(1.0, 0.5 * (a + b))) {
    const double mid = 0.5 * (a + b);
    if (f(mid) > 0.0)
      a = mid;
    else
      b = mid;
  }
  return 0.5 * (a + b);
}

}  // namespace

Potential Potential::lennard_jones(double r_min, double depth) {
  if (!(r_min > 0.0) || !(depth > 0.0))
    throw ArgumentError("lennard-jones requires rmin > 0 and depth > 0");
  Potential p;
  p.kind_ = PotentialKind::LennardJones;
  p.params_ = {{"rmin", r_min}, {"depth", depth}};
  p.inflection_ = bisect_sign_change(
      [&p](double r) { return p.eval_lj(r, 2); }, 1e-3 * r_min, 100.0 * r_min);
  return p;
}

Potential Potential::morse(double stiffness, double r0, double depth) {
  if (!(stiffness > 0.0) || !(r0 > 0.0) || !(depth > 0.0))
    throw ArgumentError("morse requires a > 0, r0 > 0, depth > 0");
  Potential p;
  p.kind_ = PotentialKind::Morse;
  p.params_ = {{"a", stiffness}, {"r0", r0}, {"depth", depth}};
  // closed form for the scan interval: phi'' = 0 at r0 + ln(2)/a
  p.inflection_ = bisect_sign_change(
      [&p](double r) { return p.eval_morse(r, 2); }, 1e-3 * r0, 100.0 * r0);
  return p;
}

Potential Potential::tabulated(TabulatedData data) {
  if (data.r.size() < 2) throw ArgumentError("tabulated potential needs >= 2 nodes");
  if (data.r.front() <= 0.0 ||
      !std::is_sorted(data.r.begin(), data.r.end(), std::less_equal<>()))
    throw ArgumentError("tabulated radii must be positive and strictly increasing");
  for (const auto& col : data.values)
    if (col.size() != data.r.size())
      throw ArgumentError("tabulated derivative columns must match the radius grid");
  Potential p;
  p.kind_ = PotentialKind::Tabulated;
  p.table_ = std::move(data);
  p.inflection_ = bisect_sign_change(
      [&p](double r) { return p.eval_tabulated(r, 2); },
      p.table_.r.front(), p.table_.r.back());
  return p;
}

Potential Potential::by_name(const std::string& name,
                             const std::map<std::string, double>& params) {
  auto take = [&params](const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  auto reject_unknown = [&params](std::initializer_list<const char*> known) {
    for (const auto& entry : params) {
      bool recognized = false;
      for (const char* k : known)
        if (entry.first == k) {
          recognized = true;
          break;
        }
      if (!recognized)
        throw ArgumentError("unknown potential parameter: " + entry.first);
    }
  };
  if (name == "lennard-jones") {
    reject_unknown({"rmin", "depth"});
    return lennard_jones(take("rmin", 1.0), take("depth", 1.0));
  }
  if (name == "morse") {
    reject_unknown({"a", "r0", "depth"});
    return morse(take("a", 2.0), take("r0", 1.0), take("depth", 1.0));
  }
  throw ArgumentError("unknown potential: " + name);
}

double Potential::evaluate(double r, int order) const {
  check_args(r, order);
  switch (kind_) {
    case PotentialKind::LennardJones: return eval_lj(r, order);
    case PotentialKind::Morse: return eval_morse(r, order);
    case PotentialKind::Tabulated: return eval_tabulated(r, order);
  }
  throw Error("unreachable potential kind");
}

// phi(r) = depth * ((rmin/r)^12 - 2 (rmin/r)^6), well minimum at rmin.
double Potential::eval_lj(double r, int order) const {
  const double rm = params_.at("rmin");
  const double d = params_.at("depth");
  const double x = r / rm;
  const double x6 = std::pow(x, -6.0), x12 = x6 * x6;
  const double s = 1.0 / rm;  // each derivative brings one factor 1/rmin
  switch (order) {
    case 0: return d * (x12 - 2.0 * x6);
    case 1: return d * s * (-12.0 * x12 + 12.0 * x6) / x;
    case 2: return d * s * s * (156.0 * x12 - 84.0 * x6) / (x * x);
    case 3: return d * s * s * s * (-2184.0 * x12 + 672.0 * x6) / (x * x * x);
    default:
      return d * s * s * s * s * (32760.0 * x12 - 6048.0 * x6) / (x * x * x * x);
  }
}

// phi(r) = depth * (e^{-2a(r-r0)} - 2 e^{-a(r-r0)}), well minimum at r0.
double Potential::eval_morse(double r, int order) const {
  const double a = params_.at("a");
  const double r0 = params_.at("r0");
  const double d = params_.at("depth");
  const double e1 = std::exp(-a * (r - r0));
  const double e2 = e1 * e1;
  const double an = std::pow(a, order);
  const double sign = (order % 2 == 0) ? 1.0 : -1.0;
  // d^n/dr^n e^{-2a(r-r0)} = (-2a)^n e2,  d^n/dr^n e^{-a(r-r0)} = (-a)^n e1
  return d * sign * an * (std::pow(2.0, order) * e2 - 2.0 * e1);
}

double Potential::eval_tabulated(double r, int order) const {
  const auto& grid = table_.r;
  if (r < grid.front() || r > grid.back())
    throw DomainError("separation outside the tabulated range");
  const auto& col = table_.values[static_cast<std::size_t>(order)];
  auto hi = std::lower_bound(grid.begin(), grid.end(), r);
  if (hi == grid.begin()) return col.front();
  if (hi == grid.end()) return col.back();
  const std::size_t i1 = static_cast<std::size_t>(hi - grid.begin());
  const std::size_t i0 = i1 - 1;
  const double t = (r - grid[i0]) / (grid[i1] - grid[i0]);
  return (1.0 - t) * col[i0] + t * col[i1];
}

double Potential::inflection_radius() const {
  if (!inflection_)
    throw NoInflectionError("phi'' has no +/- sign change on the search range");
  return *inflection_;
}

double cauchy_born_density(const Potential& p, double r, int s, int order) {
  if (s < 1) throw ArgumentError("interaction range s must be >= 1");
  if (order < 0 || order > 2)
    throw UnsupportedOrderError("cauchy_born_density supports orders 0..2");
  double acc = 0.0;
  for (int k = 1; k <= s; ++k)
    acc += std::pow(static_cast<double>(k), order) * p.evaluate(k * r, order);
  return acc;
}

}  // namespace qc1d
