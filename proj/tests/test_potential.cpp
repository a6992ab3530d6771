#include <doctest.h>

#include <cmath>
#include <random>

#include "qc1d/errors.hpp"
#include "qc1d/potential.hpp"

using namespace qc1d;

namespace {

// Independent symbolic oracle for the default Lennard-Jones form
// phi(r) = r^-12 - 2 r^-6 and its derivatives.
double lj_oracle(double r, int order) {
  switch (order) {
    case 0: return std::pow(r, -12.0) - 2.0 * std::pow(r, -6.0);
    case 1: return -12.0 * std::pow(r, -13.0) + 12.0 * std::pow(r, -7.0);
    case 2: return 156.0 * std::pow(r, -14.0) - 84.0 * std::pow(r, -8.0);
    case 3: return -2184.0 * std::pow(r, -15.0) + 672.0 * std::pow(r, -9.0);
    default: return 32760.0 * std::pow(r, -16.0) - 6048.0 * std::pow(r, -10.0);
  }
}

// Morse with equilibrium 1 and unit depth: phi(r) = e^{-2a(r-1)} - 2e^{-a(r-1)}.
double morse_oracle(double r, double a, int order) {
  const double e1 = std::exp(-a * (r - 1.0));
  return std::pow(-a, order) * (std::pow(2.0, order) * e1 * e1 - 2.0 * e1);
}

TabulatedData sample_table(const Potential& p, double lo, double hi, int count) {
  TabulatedData data;
  for (int i = 0; i < count; ++i) {
    const double r = lo + (hi - lo) * i / (count - 1);
    data.r.push_back(r);
    for (int m = 0; m <= 4; ++m)
      data.values[static_cast<std::size_t>(m)].push_back(p.evaluate(r, m));
  }
  return data;
}

}  // namespace

TEST_SUITE("potentials") {

TEST_CASE("lennard-jones point values") {
  const Potential lj = Potential::lennard_jones();
  CHECK(lj.evaluate(1.0, 1) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(lj.evaluate(1.0, 2) == doctest::Approx(72.0).epsilon(1e-14));
  // exact dyadic arithmetic: 2^-12 - 2*2^-6 = -127/4096
  CHECK(lj.evaluate(2.0, 0) == -0.031005859375);
  for (int m = 0; m <= 4; ++m)
    for (double r : {0.8, 1.0, 1.3, 2.7})
      CHECK(lj.evaluate(r, m) ==
            doctest::Approx(lj_oracle(r, m)).epsilon(1e-13));
}

TEST_CASE("morse point values") {
  const Potential morse = Potential::morse(2.0);
  CHECK(morse.evaluate(1.0, 2) == doctest::Approx(8.0).epsilon(1e-14));
  for (int m = 0; m <= 4; ++m)
    for (double r : {0.9, 1.0, 1.8, 3.0})
      CHECK(morse.evaluate(r, m) ==
            doctest::Approx(morse_oracle(r, 2.0, m)).epsilon(1e-13));
}

TEST_CASE("evaluate rejects bad arguments") {
  const Potential lj = Potential::lennard_jones();
  CHECK_THROWS_AS(lj.evaluate(0.0, 0), DomainError);
  CHECK_THROWS_AS(lj.evaluate(-1.0, 2), DomainError);
  CHECK_THROWS_AS(lj.evaluate(1.0, 5), UnsupportedOrderError);
  CHECK_THROWS_AS(lj.evaluate(1.0, -1), UnsupportedOrderError);
}

TEST_CASE("finite differences confirm each derivative order") {
  std::mt19937_64 gen(91);
  std::uniform_real_distribution<double> radius(0.8, 3.0);
  const Potential pots[] = {Potential::lennard_jones(), Potential::morse(2.0)};
  for (const Potential& p : pots) {
    for (int trial = 0; trial < 20; ++trial) {
      const double r = radius(gen);
      const double h = 1e-5;
      for (int m = 1; m <= 4; ++m) {
        const double fd =
            (p.evaluate(r + h, m - 1) - p.evaluate(r - h, m - 1)) / (2.0 * h);
        const double want = p.evaluate(r, m);
        CHECK(std::fabs(fd - want) <= 1e-6 * std::max(1.0, std::fabs(want)));
      }
    }
  }
}

TEST_CASE("cauchy-born density values and chain rule") {
  const Potential lj = Potential::lennard_jones();
  CHECK(cauchy_born_density(lj, 1.0, 1, 0) == doctest::Approx(-1.0));
  CHECK(cauchy_born_density(lj, 1.0, 2, 0) == -1.031005859375);
  // chain-rule identity, re-summed term by term with the symbolic oracle
  const Potential morse = Potential::morse(1.0);
  for (const Potential& p : {lj, morse})
    for (double r : {0.9, 1.0, 1.4})
      for (int m = 0; m <= 2; ++m) {
        double want = 0.0;
        for (int k = 1; k <= 3; ++k)
          want += std::pow(k, m) * p.evaluate(k * r, m);
        CHECK(cauchy_born_density(p, r, 3, m) == want);
      }
  CHECK_THROWS_AS(cauchy_born_density(lj, 1.0, 0, 0), ArgumentError);
  CHECK_THROWS_AS(cauchy_born_density(lj, 1.0, 2, 3), UnsupportedOrderError);
}

TEST_CASE("inflection radius") {
  const Potential lj = Potential::lennard_jones();
  CHECK(lj.inflection_radius() ==
        doctest::Approx(std::pow(13.0 / 7.0, 1.0 / 6.0)).epsilon(1e-12));
  const Potential morse1 = Potential::morse(1.0);
  CHECK(morse1.inflection_radius() ==
        doctest::Approx(1.0 + std::log(2.0)).epsilon(1e-12));

  // concave-everywhere table: no inflection
  TabulatedData flat;
  for (int i = 0; i < 32; ++i) {
    flat.r.push_back(1.0 + 0.1 * i);
    flat.values[0].push_back(-1.0);
    flat.values[1].push_back(0.0);
    flat.values[2].push_back(-1.0);
    flat.values[3].push_back(0.0);
    flat.values[4].push_back(0.0);
  }
  const Potential bad = Potential::tabulated(flat);
  CHECK_THROWS_AS(bad.inflection_radius(), NoInflectionError);
}

TEST_CASE("second derivative changes sign exactly once across r*") {
  for (const Potential& p : {Potential::lennard_jones(), Potential::morse(2.0)}) {
    const double rstar = p.inflection_radius();
    int changes = 0;
    double prev = p.evaluate(0.25 * rstar, 2);
    for (int i = 1; i <= 400; ++i) {
      const double r = (0.25 + (4.0 - 0.25) * i / 400.0) * rstar;
      const double cur = p.evaluate(r, 2);
      if ((prev > 0.0) != (cur > 0.0)) ++changes;
      prev = cur;
    }
    CHECK(changes == 1);
    CHECK(p.evaluate(0.9 * rstar, 2) > 0.0);
    CHECK(p.evaluate(1.1 * rstar, 2) < 0.0);
  }
}

TEST_CASE("potential and slope decay at infinity") {
  for (const Potential& p : {Potential::lennard_jones(), Potential::morse(2.0)}) {
    const double rstar = p.inflection_radius();
    CHECK(std::fabs(p.evaluate(100.0 * rstar, 0)) <=
          1e-6 * std::fabs(p.evaluate(rstar, 0)));
    CHECK(std::fabs(p.evaluate(100.0 * rstar, 1)) <=
          1e-6 * std::fabs(p.evaluate(rstar, 1)));
  }
}

TEST_CASE("concavity gate holds beyond the inflection radius") {
  for (const Potential& p : {Potential::lennard_jones(), Potential::morse(2.0)}) {
    const double rstar = p.inflection_radius();
    const int s = 4;
    for (double scale : {1.0 - 1e-9, 1.0, 1.12, 1.5}) {
      const double F = rstar * scale;
      if (!(s * F > rstar)) continue;
      for (int k = 2; k <= s; ++k) CHECK(p.evaluate(k * F, 2) <= 0.0);
    }
  }
}

TEST_CASE("tabulated potential interpolates its source") {
  const Potential lj = Potential::lennard_jones();
  const Potential tab = Potential::tabulated(sample_table(lj, 0.7, 4.0, 4001));
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> radius(0.7, 4.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double r = radius(gen);
    // piecewise-linear nodes, so only a first-order match is expected
    for (int m = 0; m <= 4; ++m)
      CHECK(tab.evaluate(r, m) ==
            doctest::Approx(lj.evaluate(r, m)).epsilon(1e-3));
  }
  CHECK(tab.inflection_radius() ==
        doctest::Approx(lj.inflection_radius()).epsilon(1e-6));
  CHECK_THROWS_AS(tab.evaluate(0.5, 0), DomainError);
  CHECK_THROWS_AS(tab.evaluate(5.0, 0), DomainError);
}

TEST_CASE("by-name construction") {
  const Potential lj = Potential::by_name("lennard-jones", {{"depth", 2.0}});
  CHECK(lj.evaluate(1.0, 0) == doctest::Approx(-2.0));
  const Potential morse = Potential::by_name("morse", {{"a", 3.0}});
  CHECK(morse.evaluate(1.0, 2) == doctest::Approx(18.0));
  CHECK_THROWS_AS(Potential::by_name("yukawa"), ArgumentError);
  CHECK_THROWS_AS(Potential::by_name("morse", {{"q", 1.0}}), ArgumentError);
}

}  // TEST_SUITE
