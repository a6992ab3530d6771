#ifndef QC1D_POTENTIAL_HPP
#define QC1D_POTENTIAL_HPP

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qc1d {

enum class PotentialKind { LennardJones, Morse, Tabulated };

// Sampled potential with explicit derivative tables (no spline fitting):
// each order is interpolated linearly between the tabulated nodes.
struct TabulatedData {
  std::vector<double> r;                          // strictly increasing, > 0
  std::array<std::vector<double>, 5> values;      // orders 0..4 sampled on r
};

// Smooth pair potential with derivatives up to order 4.
//
// The library works in dimensionless form throughout: the potential is
// applied directly to bond strains, and energies carry the cell weight
// eps explicitly.  Default normalizations put the well minimum at r = 1
// with depth 1, so F = 1 is the natural reference strain.
class Potential {
 public:
  static Potential lennard_jones(double r_min = 1.0, double depth = 1.0);
  static Potential morse(double stiffness = 2.0, double r0 = 1.0,
                         double depth = 1.0);
  static Potential tabulated(TabulatedData data);

  // Config-file entry point ("lennard-jones" | "morse" with a parameter
  // map).  Unknown names or parameters raise ArgumentError.
  static Potential by_name(const std::string& name,
                           const std::map<std::string, double>& params = {});

  PotentialKind kind() const { return kind_; }
  const std::map<std::string, double>& parameters() const { return params_; }

  // order-th derivative at separation r; order 0 is the value itself.
  // Throws DomainError for r <= 0 and UnsupportedOrderError outside 0..4.
  double evaluate(double r, int order) const;
  double operator()(double r) const { return evaluate(r, 0); }

  // The radius r* with phi'' >= 0 on (0, r*] and phi'' < 0 beyond, found
  // by bisection to relative tolerance 1e-12.  Throws NoInflectionError
  // when phi'' never changes sign (possible for tabulated data).
  double inflection_radius() const;

 private:
  Potential() = default;

  double eval_lj(double r, int order) const;
  double eval_morse(double r, int order) const;
  double eval_tabulated(double r, int order) const;

  PotentialKind kind_ = PotentialKind::LennardJones;
  std::map<std::string, double> params_;
  TabulatedData table_;
  std::optional<double> inflection_;   // located at construction when possible
};

// order-th derivative of the Cauchy-Born density phi_cb(r) = sum_{k<=s} phi(k r):
// returns sum_{k=1}^{s} k^order * phi^(order)(k r).  Orders 0..2.
double cauchy_born_density(const Potential& p, double r, int s, int order);

}  // namespace qc1d

#endif
