#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "qc1d/energy_models.hpp"
#include "qc1d/errors.hpp"
#include "test_util.hpp"

using namespace qc1d;
using qc1d::testing::random_admissible;
using qc1d::testing::random_zero_mean;

namespace {

const Potential kLJ = Potential::lennard_jones();

PeriodicField plane_wave(int N, int mode, double phase) {
  PeriodicField u(N, false);
  for (int ell = -N + 1; ell <= N; ++ell)
    u.set(ell, std::cos(std::numbers::pi * mode * ell / double(N) + phase));
  return u;
}

// ||Du||^2 evaluated directly.
double strain_sq(const ChainConfig& cfg, const PeriodicField& u) {
  (void)cfg;
  const double n = norm_l2_eps(difference(u, 1));
  return n * n;
}

double fd_directional(ModelKind kind, const ChainConfig& cfg,
                      const Potential& p, const PeriodicField& u,
                      const PeriodicField& w, double delta,
                      const RepresentativeGrid* grid = nullptr) {
  return (energy(kind, cfg, p, u + delta * w, grid) -
          energy(kind, cfg, p, u - delta * w, grid)) /
         (2.0 * delta);
}

}  // namespace

TEST_SUITE("energy_models") {

TEST_CASE("qnl index sets partition the cell") {
  const ChainConfig cfg(16, 4, 3, 1.0);
  for (int k = 2; k <= cfg.s; ++k) {
    const auto sets = qnl_index_sets(cfg, k);
    CHECK(static_cast<int>(sets.atomistic.size()) == 2 * cfg.K + k + 1);
    CHECK(static_cast<int>(sets.continuum.size()) ==
          2 * cfg.N - 2 * cfg.K - k - 1);
    CHECK(static_cast<int>(sets.interface_set.size()) == 2 * (k - 1));
    std::set<int> all(sets.atomistic.begin(), sets.atomistic.end());
    all.insert(sets.continuum.begin(), sets.continuum.end());
    CHECK(static_cast<int>(all.size()) == 2 * cfg.N);
    // interface indices sit inside the continuum-extended set
    std::set<int> cext(sets.continuum_ext.begin(), sets.continuum_ext.end());
    for (int ell : sets.interface_set) CHECK(cext.count(ell) == 1);
    // explicit end points of A_qnl(k)
    CHECK(sets.atomistic.front() == -cfg.K - k + 1);
    CHECK(sets.atomistic.back() == cfg.K + 1);
  }
  CHECK_THROWS_AS(qnl_index_sets(cfg, 1), ArgumentError);
  CHECK_THROWS_AS(qnl_index_sets(cfg, 4), ArgumentError);
}

TEST_CASE("representative grid invariants") {
  const ChainConfig cfg(16, 4, 3, 1.0);
  CHECK_THROWS_AS(RepresentativeGrid({-16, 0, 8, 16}, cfg), ArgumentError);
  CHECK_THROWS_AS(RepresentativeGrid({-16, -14, 16}, cfg), ArgumentError);
  CHECK_THROWS_AS(RepresentativeGrid({-16, 0, 15}, cfg), ArgumentError);
  const RepresentativeGrid grid = RepresentativeGrid::uniform(cfg, 8);
  CHECK(grid.M() == 2);
  CHECK(grid.segment_atoms(0) == 8);
  CHECK(grid.is_uniform());
  int total = 0;
  for (int j = -grid.M() + 1; j <= grid.M(); ++j)
    total += grid.segment_atoms(j);
  CHECK(total == 2 * cfg.N);
}

TEST_CASE("atomistic energy at uniform strain is exact") {
  // eps * 2N * (phi(1) + phi(2)) with eps * 2N = 2, in exact arithmetic
  const ChainConfig cfg(16, 4, 2, 1.0);
  const PeriodicField zero(cfg.N, true);
  CHECK(energy(ModelKind::Atomistic, cfg, kLJ, zero) == -2.06201171875);
  // QNL at uniform strain reduces to the same Cauchy-Born value
  CHECK(energy(ModelKind::QNL, cfg, kLJ, zero) ==
        doctest::Approx(-2.06201171875).epsilon(1e-15));
  CHECK(energy(ModelKind::QCE, cfg, kLJ, zero) ==
        doctest::Approx(-2.06201171875).epsilon(1e-15));
}

TEST_CASE("all models coincide at nearest-neighbor range") {
  const ChainConfig cfg(12, 4, 1, 1.05);
  std::mt19937_64 gen(11);
  const RepresentativeGrid grid = RepresentativeGrid::uniform(cfg, 2);
  for (int trial = 0; trial < 5; ++trial) {
    const PeriodicField u = random_admissible(cfg, 0.08, gen);
    const double ea = energy(ModelKind::Atomistic, cfg, kLJ, u);
    CHECK(energy(ModelKind::QCE, cfg, kLJ, u) ==
          doctest::Approx(ea).epsilon(1e-14));
    CHECK(energy(ModelKind::QNL, cfg, kLJ, u) ==
          doctest::Approx(ea).epsilon(1e-14));
    (void)grid;
  }
}

TEST_CASE("energy rejects collapsed deformations and missing grids") {
  const ChainConfig cfg(8, 3, 2, 1.0);
  PeriodicField bad(cfg.N, false);
  bad.set(0, -10.0);  // strain F + Du < 0 somewhere
  const PeriodicField u = project_zero_mean(bad);
  CHECK_THROWS_AS(energy(ModelKind::Atomistic, cfg, kLJ, u),
                  InadmissibleDeformationError);
  const PeriodicField zero(cfg.N, true);
  CHECK_THROWS_AS(energy(ModelKind::LocalQC, cfg, kLJ, zero), ArgumentError);
}

TEST_CASE("interfacial energies: uniform grid vanishes, two segments match") {
  const ChainConfig cfg(8, 3, 2, 1.1);
  const RepresentativeGrid grid({-8, 0, 8}, cfg);

  // uniform strain: every brace vanishes
  std::vector<double> pos_uniform;
  for (int j = -1; j <= 1; ++j)
    pos_uniform.push_back(1.1 * cfg.eps() * grid.rep_index(j));
  for (double pj : interfacial_energies(cfg, kLJ, grid, pos_uniform))
    CHECK(std::fabs(pj) <= 1e-15);

  // strains 1 and 1.2: P = eps * (phi(2.2) - phi(2)/2 - phi(2.4)/2)
  const std::vector<double> pos = {-1.0, 0.0, 1.2};
  const auto P = interfacial_energies(cfg, kLJ, grid, pos);
  const double want = cfg.eps() * (kLJ(2.2) - 0.5 * kLJ(2.0) - 0.5 * kLJ(2.4));
  REQUIRE(P.size() == 2);
  CHECK(P[0] == doctest::Approx(want).epsilon(1e-14));
  CHECK(P[1] == doctest::Approx(want).epsilon(1e-14));

  const std::vector<double> not_increasing = {-1.0, -1.0, 1.2};
  CHECK_THROWS_AS(interfacial_energies(cfg, kLJ, grid, not_increasing),
                  InadmissibleDeformationError);
}

TEST_CASE("energy decomposition identity on random grids") {
  std::mt19937_64 gen(101);
  for (int s : {2, 3, 4}) {
    const ChainConfig cfg(24, 6, s, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
      // random grid with gaps >= s
      const int M = 1 + static_cast<int>(gen() % 4);
      std::vector<int> gaps(static_cast<std::size_t>(2 * M), s);
      int extra = 2 * cfg.N - 2 * M * s;
      while (extra > 0) {
        gaps[gen() % gaps.size()]++;
        --extra;
      }
      std::vector<int> rep{-cfg.N};
      for (int g : gaps) rep.push_back(rep.back() + g);
      const RepresentativeGrid grid(rep, cfg);

      std::uniform_real_distribution<double> unif(-1.0, 1.0);
      const double delta = 0.06 * cfg.s * cfg.eps();
      std::vector<double> rep_u(static_cast<std::size_t>(2 * M + 1));
      for (int j = 0; j < 2 * M; ++j) rep_u[j] = delta * unif(gen);
      rep_u.back() = rep_u.front();
      std::vector<double> pos(rep_u.size());
      for (int j = -M; j <= M; ++j)
        pos[j + M] = cfg.F * cfg.eps() * grid.rep_index(j) + rep_u[j + M];

      const PeriodicField u = interpolate_displacement(cfg, grid, rep_u);
      const double e_atom = energy(ModelKind::Atomistic, cfg, kLJ, u);
      const double e_qc = energy(ModelKind::LocalQC, cfg, kLJ, u, &grid);
      double sum_p = 0.0;
      for (double v : interfacial_energies(cfg, kLJ, grid, pos)) sum_p += v;
      CHECK(std::fabs(e_atom - (e_qc + sum_p)) <= 1e-12 * std::fabs(e_atom));
    }
  }
}

TEST_CASE("uniform strain is an equilibrium except for QCE") {
  const PeriodicField zero32(32, true);
  for (int s : {2, 3}) {
    const ChainConfig cfg(32, 8, s, 1.0);
    CHECK(gradient(ModelKind::Atomistic, cfg, kLJ, zero32).max_abs() <= 1e-12);
    CHECK(gradient(ModelKind::QNL, cfg, kLJ, zero32).max_abs() <= 1e-12);
    CHECK(gradient(ModelKind::QCE, cfg, kLJ, zero32).max_abs() > 1e-3);
  }
}

TEST_CASE("qce ghost force: finite-difference oracle, locality, size") {
  const ChainConfig cfg(32, 8, 2, 1.0);
  const PeriodicField zero(cfg.N, true);
  const PeriodicField g = gradient(ModelKind::QCE, cfg, kLJ, zero);

  // oracle: pointwise central differences of the QCE energy, step 1e-6
  const double delta = 1e-6;
  PeriodicField fd(cfg.N, false);
  for (int i = 0; i < cfg.size(); ++i) {
    PeriodicField up = zero, dn = zero;
    up.storage(i) += delta;
    dn.storage(i) -= delta;
    fd.storage(i) = (energy(ModelKind::QCE, cfg, kLJ, up) -
                     energy(ModelKind::QCE, cfg, kLJ, dn)) /
                    (2.0 * delta) * cfg.N;  // representer carries 1/eps
  }
  const PeriodicField fd_proj = project_zero_mean(fd);
  for (int i = 0; i < cfg.size(); ++i)
    CHECK(g.storage(i) == doctest::Approx(fd_proj.storage(i)).epsilon(1e-6));

  // ghost forces vanish farther than s from the interface atoms +-K
  for (int ell = -cfg.N + 1; ell <= cfg.N; ++ell) {
    const int n = cfg.size();
    auto wrap_dist = [n](int a, int b) {
      const int d = std::abs(((a - b) % n + n) % n);
      return std::min(d, n - d);
    };
    const int dist =
        std::min(wrap_dist(ell, -cfg.K), wrap_dist(ell, cfg.K));
    if (dist > cfg.s) CHECK(std::fabs(g(ell)) <= 1e-12);
  }

  // pointwise magnitude is independent of N
  const ChainConfig cfg2(64, 16, 2, 1.0);
  const PeriodicField g2 =
      gradient(ModelKind::QCE, cfg2, kLJ, PeriodicField(cfg2.N, true));
  CHECK(cfg.eps() * g.max_abs() ==
        doctest::Approx(cfg2.eps() * g2.max_abs()).epsilon(1e-12));
}

TEST_CASE("gradient agrees with directional finite differences") {
  std::mt19937_64 gen(301);
  const ChainConfig cfg(16, 4, 3, 1.02);
  const RepresentativeGrid grid = RepresentativeGrid::uniform(cfg, 4);
  const double delta = 1e-6;
  for (ModelKind kind : {ModelKind::Atomistic, ModelKind::LocalQC,
                         ModelKind::QCE, ModelKind::QNL}) {
    const RepresentativeGrid* gp =
        (kind == ModelKind::LocalQC) ? &grid : nullptr;
    for (int trial = 0; trial < 5; ++trial) {
      const PeriodicField u = random_admissible(cfg, 0.05, gen);
      const PeriodicField g = gradient(kind, cfg, kLJ, u, gp);
      for (int wtrial = 0; wtrial < 3; ++wtrial) {
        // strain-bounded direction keeps the cubic remainder small
        const PeriodicField w = random_admissible(cfg, 1.0, gen);
        const double fd = fd_directional(kind, cfg, kLJ, u, w, delta, gp);
        const double got = inner_product(g, w);
        CHECK(got == doctest::Approx(fd).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("hessian quadratic form: plane waves match the Fourier symbol") {
  const ChainConfig cfg(16, 4, 3, 1.04);
  const QuadraticForm H = hessian(ModelKind::Atomistic, cfg, kLJ);
  for (int mode : {1, 2, 5, 16}) {
    const PeriodicField u = plane_wave(cfg.N, mode, 0.3);
    const double theta = std::numbers::pi * mode / cfg.N;
    double symbol = 0.0;
    const double s2 = std::pow(std::sin(theta / 2.0), 2);
    for (int k = 1; k <= cfg.s; ++k)
      symbol += kLJ.evaluate(k * cfg.F, 2) *
                std::pow(std::sin(k * theta / 2.0), 2) / s2;
    CHECK(H.quad(u) / strain_sq(cfg, u) ==
          doctest::Approx(symbol).epsilon(1e-12));
  }
}

TEST_CASE("hessians annihilate constants and are symmetric and banded") {
  const ChainConfig cfg(12, 3, 3, 1.0);
  const RepresentativeGrid grid = RepresentativeGrid::uniform(cfg, 4);
  PeriodicField ones(cfg.N, std::vector<double>(2 * cfg.N, 1.0), false);
  for (ModelKind kind : {ModelKind::Atomistic, ModelKind::LocalQC,
                         ModelKind::QCE, ModelKind::QNL}) {
    const RepresentativeGrid* gp =
        (kind == ModelKind::LocalQC) ? &grid : nullptr;
    const QuadraticForm H = hessian(kind, cfg, kLJ, gp);
    CHECK(H.apply(ones).max_abs() == 0.0);
    const Eigen::MatrixXd D = H.dense();
    const double asym = (D - D.transpose()).cwiseAbs().maxCoeff();
    CHECK(asym <= 1e-12 * D.cwiseAbs().maxCoeff());
    if (kind != ModelKind::LocalQC) CHECK(H.bandwidth() <= cfg.s);
    // dense realization matches the matrix-free apply
    std::mt19937_64 gen(55);
    const PeriodicField u = random_zero_mean(cfg.N, 1.0, gen);
    const Eigen::Map<const Eigen::VectorXd> uv(u.data().data(), 2 * cfg.N);
    const Eigen::VectorXd hv = D * uv;
    const PeriodicField hu = H.apply(u);
    for (int i = 0; i < 2 * cfg.N; ++i)
      CHECK(hu.storage(i) == doctest::Approx(hv(i)).epsilon(1e-12));
  }
  CHECK(hessian(ModelKind::LocalQC, cfg, kLJ, &grid).bandwidth() == 4);
  CHECK_THROWS_AS(hessian(ModelKind::LocalQC, cfg, kLJ), ArgumentError);
  // dense realization refuses oversized chains; matrix-free still works
  const ChainConfig huge(4097, 1024, 2, 1.0);
  const QuadraticForm Hh = hessian(ModelKind::Atomistic, huge, kLJ);
  CHECK_THROWS_AS(Hh.dense(), ArgumentError);
  CHECK(Hh.apply(PeriodicField(huge.N, true)).max_abs() == 0.0);
  const RepresentativeGrid lopsided({-12, -8, 12}, cfg);
  CHECK_THROWS_AS(hessian(ModelKind::LocalQC, cfg, kLJ, &lopsided),
                  ArgumentError);
}

TEST_CASE("hessian matches second central differences of the energy") {
  const ChainConfig cfg(12, 3, 3, 1.01);
  const RepresentativeGrid grid = RepresentativeGrid::uniform(cfg, 4);
  std::mt19937_64 gen(77);
  const double delta = 1e-4;
  for (ModelKind kind : {ModelKind::Atomistic, ModelKind::LocalQC,
                         ModelKind::QCE, ModelKind::QNL}) {
    const RepresentativeGrid* gp =
        (kind == ModelKind::LocalQC) ? &grid : nullptr;
    const QuadraticForm H = hessian(kind, cfg, kLJ, gp);
    const PeriodicField zero(cfg.N, true);
    const double e0 = energy(kind, cfg, kLJ, zero, gp);
    for (int trial = 0; trial < 5; ++trial) {
      const PeriodicField u = random_admissible(cfg, 1.0, gen);
      const double fd = (energy(kind, cfg, kLJ, delta * u, gp) - 2.0 * e0 +
                         energy(kind, cfg, kLJ, -1.0 * delta * u, gp)) /
                        (delta * delta);
      CHECK(H.quad(u) == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("hessian entries match second partial derivatives of the energy") {
  // full entrywise check at a small chain: every assembled coupling is
  // pinned by (E(+i+j) - E(+i-j) - E(-i+j) + E(-i-j)) / (4 delta^2)
  const ChainConfig cfg(8, 2, 3, 1.03);
  const RepresentativeGrid grid = RepresentativeGrid::uniform(cfg, 4);
  const double delta = 1e-5;
  for (ModelKind kind : {ModelKind::Atomistic, ModelKind::LocalQC,
                         ModelKind::QCE, ModelKind::QNL}) {
    const RepresentativeGrid* gp =
        (kind == ModelKind::LocalQC) ? &grid : nullptr;
    const Eigen::MatrixXd D = hessian(kind, cfg, kLJ, gp).dense();
    const int n = cfg.size();
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        PeriodicField pp(cfg.N, false), pm(cfg.N, false), mp(cfg.N, false),
            mm(cfg.N, false);
        pp.storage(i) += delta;
        pp.storage(j) += delta;
        pm.storage(i) += delta;
        pm.storage(j) -= delta;
        mp.storage(i) -= delta;
        mp.storage(j) += delta;
        mm.storage(i) -= delta;
        mm.storage(j) -= delta;
        const double fd =
            (energy(kind, cfg, kLJ, pp, gp) - energy(kind, cfg, kLJ, pm, gp) -
             energy(kind, cfg, kLJ, mp, gp) + energy(kind, cfg, kLJ, mm, gp)) /
            (4.0 * delta * delta);
        worst = std::max(worst, std::fabs(fd - cfg.eps() * D(i, j)));
      }
    }
    CHECK(worst <= 2e-5 * std::max(1.0, cfg.eps() * D.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("qnl second variation is bounded below by the sharp constant") {
  std::mt19937_64 gen(404);
  const ChainConfig cfg(32, 8, 3, 1.05);
  const double a_f = [&] {
    double acc = 0.0;
    for (int k = 1; k <= cfg.s; ++k)
      acc += double(k) * k * kLJ.evaluate(k * cfg.F, 2);
    return acc;
  }();
  const QuadraticForm H = hessian(ModelKind::QNL, cfg, kLJ);
  for (int trial = 0; trial < 100; ++trial) {
    const PeriodicField u = random_zero_mean(cfg.N, 1.0, gen);
    const double lhs = H.quad(u);
    const double rhs = a_f * strain_sq(cfg, u);
    CHECK(lhs >= rhs - 1e-10 * std::max(1.0, std::fabs(rhs)));
  }
  // equality is achieved by a displacement supported deep in the continuum
  PeriodicField bump(cfg.N, false);
  bump.set((cfg.K + 2 + cfg.N) / 2, 1.0);
  const PeriodicField far_u = project_zero_mean(bump);
  const double q = H.quad(far_u);
  const double want = a_f * strain_sq(cfg, far_u);
  CHECK(std::fabs(q - want) <= 1e-10 * std::max(1.0, std::fabs(want)));
}

TEST_CASE("atomistic second variation obeys the two-sided bound") {
  std::mt19937_64 gen(405);
  for (int s : {2, 3, 4}) {
    const ChainConfig cfg(16, 4, s, 1.03);
    double a_f = 0.0, low_coef = 0.0, up_coef = 0.0;
    for (int k = 1; k <= cfg.s; ++k)
      a_f += double(k) * k * kLJ.evaluate(k * cfg.F, 2);
    for (int k = 2; k <= cfg.s; ++k) {
      const double dd = kLJ.evaluate(k * cfg.F, 2);
      REQUIRE(dd <= 0.0);
      low_coef += (k - 1) * std::fabs(dd);
      up_coef += (std::pow(double(k), 4) - double(k) * k) / 12.0 * std::fabs(dd);
    }
    const QuadraticForm H = hessian(ModelKind::Atomistic, cfg, kLJ);
    const double eps2 = cfg.eps() * cfg.eps();
    for (int trial = 0; trial < 40; ++trial) {
      const PeriodicField u = random_zero_mean(cfg.N, 1.0, gen);
      const double q = H.quad(u);
      const double du2 = strain_sq(cfg, u);
      const double d2u2 = std::pow(norm_l2_eps(difference(u, 2)), 2);
      const double scale = std::max(1.0, std::fabs(q));
      CHECK(q >= a_f * du2 + eps2 * low_coef * d2u2 - 1e-12 * scale);
      CHECK(q <= a_f * du2 + eps2 * up_coef * d2u2 + 1e-12 * scale);
    }
  }
}

TEST_CASE("qnl energy coincides with atomistic or Cauchy-Born by support") {
  std::mt19937_64 gen(406);
  const ChainConfig cfg(32, 8, 3, 1.0);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  // support inside the atomistic core: all k >= 2 bonds that differ from
  // the uniform state touch A_qnl, so QNL == Atomistic
  PeriodicField core(cfg.N, false);
  for (int ell = -cfg.K + 1; ell <= cfg.K - 1; ++ell)
    core.set(ell, 0.01 * cfg.eps() * unif(gen));
  const double ea = energy(ModelKind::Atomistic, cfg, kLJ, core);
  CHECK(energy(ModelKind::QNL, cfg, kLJ, core) ==
        doctest::Approx(ea).epsilon(1e-14));

  // support deep in the continuum: QNL == pure Cauchy-Born sum
  PeriodicField far(cfg.N, false);
  const int mid = (cfg.K + 2 + cfg.N) / 2;
  for (int ell = mid - 2; ell <= mid + 2; ++ell)
    far.set(ell, 0.01 * cfg.eps() * unif(gen));
  const PeriodicField du = difference(far, 1);
  double cb = 0.0;
  for (int i = 0; i < cfg.size(); ++i)
    cb += cauchy_born_density(kLJ, cfg.F + du.storage(i), cfg.s, 0);
  cb *= cfg.eps();
  CHECK(energy(ModelKind::QNL, cfg, kLJ, far) ==
        doctest::Approx(cb).epsilon(1e-14));
}

}  // TEST_SUITE
