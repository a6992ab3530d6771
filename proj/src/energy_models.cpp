#include "qc1d/energy_models.hpp"

#include <algorithm>
#include <cmath>

#include "qc1d/errors.hpp"

namespace qc1d {

namespace {

// Strains below this are treated as a collapsed chain; failing early keeps
// the potential evaluation away from the r -> 0 singularity.
constexpr double kStrainFloor = 1e-8;

int wrap_storage(int i, int n) {
  int k = i % n;
  return k < 0 ? k + n : k;
}

// Bond strains y'_ell = F + (Du)_ell indexed by storage slot.
std::vector<double> bond_strains(const ChainConfig& cfg, const PeriodicField& u) {
  if (u.half_period() != cfg.N)
    throw ArgumentError("field period does not match the chain configuration");
  const int n = cfg.size();
  const double inv_eps = static_cast<double>(cfg.N);
  std::vector<double> dy(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int prev = (i + n - 1) % n;
    dy[static_cast<std::size_t>(i)] =
        cfg.F + (u.storage(i) - u.storage(prev)) * inv_eps;
  }
  for (double r : dy)
    if (!(r > kStrainFloor))
      throw InadmissibleDeformationError(
          "deformation has a non-positive bond strain");
  return dy;
}

std::vector<double> segment_strains(const ChainConfig& cfg,
                                    const PeriodicField& u,
                                    const RepresentativeGrid& grid) {
  const int M = grid.M();
  std::vector<double> r(static_cast<std::size_t>(2 * M));
  for (int j = -M + 1; j <= M; ++j) {
    const int nu = grid.segment_atoms(j);
    const double du = u(grid.rep_index(j)) - u(grid.rep_index(j - 1));
    r[static_cast<std::size_t>(j + M - 1)] = cfg.F + du / (cfg.eps() * nu);
  }
  for (double v : r)
    if (!(v > kStrainFloor))
      throw InadmissibleDeformationError(
          "coarse deformation has a non-positive segment strain");
  return r;
}

bool in_atomistic_region(int ell, const ChainConfig& cfg, int center) {
  // membership of atom ell in A = {center-K, ..., center+K}, mod 2N
  const int n = cfg.size();
  int d = wrap_storage(ell - center, n);
  if (d > cfg.N) d -= n;
  return std::abs(d) <= cfg.K;
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Atomistic: return "atomistic";
    case ModelKind::LocalQC: return "local-qc";
    case ModelKind::QCE: return "qce";
    case ModelKind::QNL: return "qnl";
  }
  return "?";
}

RepresentativeGrid::RepresentativeGrid(std::vector<int> rep_indices,
                                       const ChainConfig& cfg)
    : rep_(std::move(rep_indices)) {
  if (rep_.size() < 3 || rep_.size() % 2 == 0)
    throw ArgumentError("representative grid needs an odd count >= 3 of atoms");
  M_ = static_cast<int>(rep_.size() / 2);
  if (rep_.front() != -cfg.N || rep_.back() != cfg.N)
    throw ArgumentError("representative grid must span [-N, N]");
  for (std::size_t j = 1; j < rep_.size(); ++j) {
    const int nu = rep_[j] - rep_[j - 1];
    if (nu < cfg.s)
      throw ArgumentError(
          "representative segments must hold at least s atoms each");
  }
}

RepresentativeGrid RepresentativeGrid::uniform(const ChainConfig& cfg,
                                               int segment_length) {
  if (segment_length < cfg.s)
    throw ArgumentError("uniform segment length must be >= s");
  if ((2 * cfg.N) % segment_length != 0 ||
      ((2 * cfg.N) / segment_length) % 2 != 0)
    throw ArgumentError(
        "uniform segment length must divide 2N into an even segment count");
  std::vector<int> rep;
  for (int ell = -cfg.N; ell <= cfg.N; ell += segment_length) rep.push_back(ell);
  return RepresentativeGrid(std::move(rep), cfg);
}

bool RepresentativeGrid::is_uniform() const {
  const int nu0 = segment_atoms(-M_ + 1);
  for (int j = -M_ + 2; j <= M_; ++j)
    if (segment_atoms(j) != nu0) return false;
  return true;
}

QnlIndexSets qnl_index_sets(const ChainConfig& cfg, int k, int center) {
  if (k < 2 || k > cfg.s)
    throw ArgumentError("qnl index sets are defined for k in 2..s");
  const int n = cfg.size();
  auto to_cell = [&](int raw) { return wrap_storage(raw, n) - cfg.N + 1; };
  QnlIndexSets sets;
  sets.k = k;
  std::vector<char> is_atomistic(static_cast<std::size_t>(n), 0);
  for (int raw = center - cfg.K - k + 1; raw <= center + cfg.K + 1; ++raw)
    is_atomistic[static_cast<std::size_t>(wrap_storage(raw + cfg.N - 1, n))] = 1;
  for (int ell = -cfg.N + 1; ell <= cfg.N; ++ell) {
    if (is_atomistic[static_cast<std::size_t>(
            PeriodicField::storage_index(ell, cfg.N))])
      sets.atomistic.push_back(ell);
    else
      sets.continuum.push_back(ell);
  }
  for (int raw = center - cfg.K - k + 1; raw <= center - cfg.K - 1; ++raw)
    sets.interface_set.push_back(to_cell(raw + cfg.N - 1));
  for (int raw = center + cfg.K + 2; raw <= center + cfg.K + k; ++raw)
    sets.interface_set.push_back(to_cell(raw + cfg.N - 1));
  sets.continuum_ext = sets.continuum;
  sets.continuum_ext.insert(sets.continuum_ext.end(),
                            sets.interface_set.begin(),
                            sets.interface_set.end());
  std::sort(sets.continuum_ext.begin(), sets.continuum_ext.end());
  return sets;
}

QuadraticForm::QuadraticForm(int half_period,
                             std::vector<DifferencePair> pairs)
    : half_period_(half_period), pairs_(std::move(pairs)) {
  const int n = 2 * half_period_;
  for (const auto& pr : pairs_)
    if (pr.a < 0 || pr.a >= n || pr.b < 0 || pr.b >= n || pr.a == pr.b)
      throw ArgumentError("quadratic form pair indices out of range");
}

PeriodicField QuadraticForm::apply(const PeriodicField& u) const {
  if (u.half_period() != half_period_)
    throw ArgumentError("quadratic form applied to a field of wrong period");
  PeriodicField out(half_period_, /*zero_mean=*/false);
  for (const auto& pr : pairs_) {
    const double d = pr.c * (u.storage(pr.b) - u.storage(pr.a));
    out.storage(pr.b) += d;
    out.storage(pr.a) -= d;
  }
  const double inv_eps = static_cast<double>(half_period_);
  for (int i = 0; i < out.size(); ++i) out.storage(i) *= inv_eps;
  return out;
}

double QuadraticForm::quad(const PeriodicField& u) const {
  if (u.half_period() != half_period_)
    throw ArgumentError("quadratic form applied to a field of wrong period");
  double acc = 0.0;
  for (const auto& pr : pairs_) {
    const double d = u.storage(pr.b) - u.storage(pr.a);
    acc += pr.c * d * d;
  }
  return acc;
}

Eigen::MatrixXd QuadraticForm::dense() const {
  const int n = size();
  if (n > 8192)
    throw ArgumentError("dense realization is limited to 2N <= 8192");
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
  const double inv_eps = static_cast<double>(half_period_);
  for (const auto& pr : pairs_) {
    const double w = pr.c * inv_eps;
    H(pr.a, pr.a) += w;
    H(pr.b, pr.b) += w;
    H(pr.a, pr.b) -= w;
    H(pr.b, pr.a) -= w;
  }
  return H;
}

int QuadraticForm::bandwidth() const {
  const int n = size();
  int bw = 0;
  for (const auto& pr : pairs_) {
    const int d = std::abs(pr.a - pr.b);
    bw = std::max(bw, std::min(d, n - d));
  }
  return bw;
}

double energy(ModelKind kind, const ChainConfig& cfg, const Potential& p,
              const PeriodicField& u, const RepresentativeGrid* grid) {
  const int n = cfg.size();
  const double eps = cfg.eps();

  if (kind == ModelKind::LocalQC) {
    if (grid == nullptr)
      throw ArgumentError("the local QC energy requires a representative grid");
    const auto r = segment_strains(cfg, u, *grid);
    double acc = 0.0;
    for (int j = -grid->M() + 1; j <= grid->M(); ++j)
      acc += grid->segment_atoms(j) *
             cauchy_born_density(p, r[static_cast<std::size_t>(j + grid->M() - 1)],
                                 cfg.s, 0);
    return eps * acc;
  }

  const auto dy = bond_strains(cfg, u);
  auto strain = [&dy, n](int ell) {
    return dy[static_cast<std::size_t>(
        PeriodicField::storage_index(ell, n / 2))];
  };
  double acc = 0.0;

  switch (kind) {
    case ModelKind::Atomistic: {
      for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int k = 1; k <= cfg.s; ++k) {
          sum += dy[static_cast<std::size_t>((i + k - 1) % n)];
          acc += p.evaluate(sum, 0);
        }
      }
      break;
    }
    case ModelKind::QNL: {
      for (double r : dy) acc += p.evaluate(r, 0);
      for (int k = 2; k <= cfg.s; ++k) {
        const auto sets = qnl_index_sets(cfg, k);
        for (int ell : sets.atomistic) {
          double sum = 0.0;
          for (int j = 0; j < k; ++j) sum += strain(ell + j);
          acc += p.evaluate(sum, 0);
        }
        for (int ell : sets.continuum)
          for (int j = 0; j < k; ++j)
            acc += p.evaluate(k * strain(ell + j), 0) / k;
      }
      break;
    }
    case ModelKind::QCE: {
      for (int ell = -cfg.N + 1; ell <= cfg.N; ++ell) {
        if (in_atomistic_region(ell, cfg, 0)) {
          double right = 0.0, left = 0.0;
          for (int k = 1; k <= cfg.s; ++k) {
            right += strain(ell + k);
            left += strain(ell - k + 1);
            acc += 0.5 * (p.evaluate(right, 0) + p.evaluate(left, 0));
          }
        } else {
          for (int k = 1; k <= cfg.s; ++k)
            acc += 0.5 * (p.evaluate(k * strain(ell), 0) +
                          p.evaluate(k * strain(ell + 1), 0));
        }
      }
      break;
    }
    case ModelKind::LocalQC:
      break;  // handled above
  }
  return eps * acc;
}

PeriodicField gradient(ModelKind kind, const ChainConfig& cfg,
                       const Potential& p, const PeriodicField& u,
                       const RepresentativeGrid* grid) {
  const int n = cfg.size();
  const double inv_eps = static_cast<double>(cfg.N);

  if (kind == ModelKind::LocalQC) {
    if (grid == nullptr)
      throw ArgumentError("the local QC gradient requires a representative grid");
    const auto r = segment_strains(cfg, u, *grid);
    const int M = grid->M();
    auto seg = [&r, M](int j) {  // wraps j = M+1 back to -M+1
      return r[static_cast<std::size_t>((j > M ? -M + 1 : j) + M - 1)];
    };
    PeriodicField g(cfg.N, /*zero_mean=*/false);
    for (int j = -M + 1; j <= M; ++j) {
      const double d = cauchy_born_density(p, seg(j), cfg.s, 1) -
                       cauchy_born_density(p, seg(j + 1), cfg.s, 1);
      g.set(grid->rep_index(j), d * inv_eps);
    }
    return project_zero_mean(g);
  }

  const auto dy = bond_strains(cfg, u);
  auto strain = [&dy, n](int ell) {
    return dy[static_cast<std::size_t>(
        PeriodicField::storage_index(ell, n / 2))];
  };
  // a[m] accumulates the derivative of (energy / eps) w.r.t. strain slot m.
  std::vector<double> a(static_cast<std::size_t>(n), 0.0);
  auto slot = [&a, n](int ell) -> double& {
    return a[static_cast<std::size_t>(PeriodicField::storage_index(ell, n / 2))];
  };

  switch (kind) {
    case ModelKind::Atomistic: {
      for (int i = 0; i < n; ++i) {
        const int ell = i - n / 2 + 1;
        double sum = 0.0;
        for (int k = 1; k <= cfg.s; ++k) {
          sum += strain(ell + k - 1);
          const double dphi = p.evaluate(sum, 1);
          for (int j = 0; j < k; ++j) slot(ell + j) += dphi;
        }
      }
      break;
    }
    case ModelKind::QNL: {
      for (int i = 0; i < n; ++i)
        a[static_cast<std::size_t>(i)] +=
            p.evaluate(dy[static_cast<std::size_t>(i)], 1);
      for (int k = 2; k <= cfg.s; ++k) {
        const auto sets = qnl_index_sets(cfg, k);
        for (int ell : sets.atomistic) {
          double sum = 0.0;
          for (int j = 0; j < k; ++j) sum += strain(ell + j);
          const double dphi = p.evaluate(sum, 1);
          for (int j = 0; j < k; ++j) slot(ell + j) += dphi;
        }
        for (int ell : sets.continuum)
          for (int j = 0; j < k; ++j)
            slot(ell + j) += p.evaluate(k * strain(ell + j), 1);
      }
      break;
    }
    case ModelKind::QCE: {
      for (int ell = -cfg.N + 1; ell <= cfg.N; ++ell) {
        if (in_atomistic_region(ell, cfg, 0)) {
          double right = 0.0, left = 0.0;
          for (int k = 1; k <= cfg.s; ++k) {
            right += strain(ell + k);
            left += strain(ell - k + 1);
            const double dr = 0.5 * p.evaluate(right, 1);
            const double dl = 0.5 * p.evaluate(left, 1);
            for (int j = 1; j <= k; ++j) slot(ell + j) += dr;
            for (int j = 0; j < k; ++j) slot(ell - j) += dl;
          }
        } else {
          for (int k = 1; k <= cfg.s; ++k) {
            slot(ell) += 0.5 * k * p.evaluate(k * strain(ell), 1);
            slot(ell + 1) += 0.5 * k * p.evaluate(k * strain(ell + 1), 1);
          }
        }
      }
      break;
    }
    case ModelKind::LocalQC:
      break;  // handled above
  }

  PeriodicField g(cfg.N, /*zero_mean=*/false);
  for (int i = 0; i < n; ++i)
    g.storage(i) = (a[static_cast<std::size_t>(i)] -
                    a[static_cast<std::size_t>((i + 1) % n)]) *
                   inv_eps;
  return project_zero_mean(g);
}

QuadraticForm hessian(ModelKind kind, const ChainConfig& cfg,
                      const Potential& p, const RepresentativeGrid* grid,
                      int interface_center) {
  const int n = cfg.size();
  const double inv_eps = static_cast<double>(cfg.N);
  auto st = [&cfg](int ell) { return PeriodicField::storage_index(ell, cfg.N); };
  std::vector<double> ddphi(static_cast<std::size_t>(cfg.s + 1), 0.0);
  for (int k = 1; k <= cfg.s; ++k)
    ddphi[static_cast<std::size_t>(k)] = p.evaluate(k * cfg.F, 2);

  std::vector<QuadraticForm::DifferencePair> pairs;
  switch (kind) {
    case ModelKind::Atomistic: {
      pairs.reserve(static_cast<std::size_t>(n) * cfg.s);
      for (int ell = -cfg.N + 1; ell <= cfg.N; ++ell)
        for (int k = 1; k <= cfg.s; ++k)
          pairs.push_back({st(ell - 1), st(ell + k - 1),
                           ddphi[static_cast<std::size_t>(k)] * inv_eps});
      break;
    }
    case ModelKind::QNL: {
      for (int ell = -cfg.N + 1; ell <= cfg.N; ++ell)
        pairs.push_back({st(ell - 1), st(ell), ddphi[1] * inv_eps});
      for (int k = 2; k <= cfg.s; ++k) {
        const auto sets = qnl_index_sets(cfg, k, interface_center);
        for (int ell : sets.atomistic)
          pairs.push_back({st(ell - 1), st(ell + k - 1),
                           ddphi[static_cast<std::size_t>(k)] * inv_eps});
        for (int ell : sets.continuum)
          for (int j = 0; j < k; ++j)
            pairs.push_back({st(ell + j - 1), st(ell + j),
                             k * ddphi[static_cast<std::size_t>(k)] * inv_eps});
      }
      break;
    }
    case ModelKind::QCE: {
      for (int ell = -cfg.N + 1; ell <= cfg.N; ++ell) {
        if (in_atomistic_region(ell, cfg, interface_center)) {
          for (int k = 1; k <= cfg.s; ++k) {
            const double c = 0.5 * ddphi[static_cast<std::size_t>(k)] * inv_eps;
            pairs.push_back({st(ell), st(ell + k), c});
            pairs.push_back({st(ell - k), st(ell), c});
          }
        } else {
          for (int k = 1; k <= cfg.s; ++k) {
            const double c =
                0.5 * k * k * ddphi[static_cast<std::size_t>(k)] * inv_eps;
            pairs.push_back({st(ell - 1), st(ell), c});
            pairs.push_back({st(ell), st(ell + 1), c});
          }
        }
      }
      break;
    }
    case ModelKind::LocalQC: {
      if (grid == nullptr)
        throw ArgumentError("the local QC hessian requires a representative grid");
      if (!grid->is_uniform())
        throw ArgumentError(
            "local QC hessians are only supported on uniform grids");
      const double ddcb = cauchy_born_density(p, cfg.F, cfg.s, 2);
      for (int j = -grid->M() + 1; j <= grid->M(); ++j) {
        const int nu = grid->segment_atoms(j);
        pairs.push_back({st(grid->rep_index(j - 1)), st(grid->rep_index(j)),
                         ddcb * inv_eps / nu});
      }
      break;
    }
  }
  return QuadraticForm(cfg.N, std::move(pairs));
}

std::vector<double> interfacial_energies(const ChainConfig& cfg,
                                         const Potential& p,
                                         const RepresentativeGrid& grid,
                                         std::span<const double> rep_positions) {
  const int M = grid.M();
  if (rep_positions.size() != static_cast<std::size_t>(2 * M + 1))
    throw ArgumentError("expected one representative position per grid atom");
  for (std::size_t j = 1; j < rep_positions.size(); ++j)
    if (!(rep_positions[j] > rep_positions[j - 1]))
      throw InadmissibleDeformationError(
          "representative positions must be strictly increasing");

  std::vector<double> r(static_cast<std::size_t>(2 * M));
  for (int j = -M + 1; j <= M; ++j) {
    const std::size_t idx = static_cast<std::size_t>(j + M - 1);
    r[idx] = (rep_positions[static_cast<std::size_t>(j + M)] -
              rep_positions[static_cast<std::size_t>(j + M - 1)]) /
             (cfg.eps() * grid.segment_atoms(j));
  }
  auto seg = [&r, M](int j) {
    return r[static_cast<std::size_t>((j > M ? -M + 1 : j) + M - 1)];
  };

  std::vector<double> P(static_cast<std::size_t>(2 * M), 0.0);
  for (int j = -M + 1; j <= M; ++j) {
    const double rj = seg(j), rn = seg(j + 1);
    double acc = 0.0;
    for (int k = 2; k <= cfg.s; ++k)
      for (int q = 1; q <= k - 1; ++q)
        acc += p.evaluate(q * rj + (k - q) * rn, 0) -
               (static_cast<double>(q) / k) * p.evaluate(k * rj, 0) -
               (static_cast<double>(k - q) / k) * p.evaluate(k * rn, 0);
    P[static_cast<std::size_t>(j + M - 1)] = cfg.eps() * acc;
  }
  return P;
}

PeriodicField interpolate_displacement(const ChainConfig& cfg,
                                       const RepresentativeGrid& grid,
                                       std::span<const double> rep_u) {
  const int M = grid.M();
  if (rep_u.size() != static_cast<std::size_t>(2 * M + 1))
    throw ArgumentError("expected one displacement per representative atom");
  const double scale = std::max({1.0, std::fabs(rep_u.front()),
                                 std::fabs(rep_u.back())});
  if (std::fabs(rep_u.front() - rep_u.back()) > 1e-12 * scale)
    throw ArgumentError(
        "periodicity requires equal displacements at the two grid endpoints");
  PeriodicField u(cfg.N, /*zero_mean=*/false);
  for (int j = -M + 1; j <= M; ++j) {
    const int nu = grid.segment_atoms(j);
    const double u0 = rep_u[static_cast<std::size_t>(j + M - 1)];
    const double u1 = rep_u[static_cast<std::size_t>(j + M)];
    for (int i = 0; i < nu; ++i)
      u.set(grid.rep_index(j - 1) + i,
            u0 + (static_cast<double>(i) / nu) * (u1 - u0));
  }
  return u;
}

}  // namespace qc1d
