#ifndef QC1D_ENERGY_MODELS_HPP
#define QC1D_ENERGY_MODELS_HPP

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "qc1d/chain.hpp"
#include "qc1d/potential.hpp"

namespace qc1d {

// The four energy functionals.  Atomistic sums every pair interaction up
// to the s-th neighbor; LocalQC is the coarse-grained Cauchy-Born energy
// on representative-atom segments; QCE mixes atom-wise atomistic and
// continuum energies (and exhibits ghost forces); QNL assigns each
// interaction atomistically or via the Cauchy-Born split, which keeps
// the uniform strain an equilibrium.
enum class ModelKind { Atomistic, LocalQC, QCE, QNL };

std::string to_string(ModelKind kind);

// Representative atoms ell_j, j = -M..M, with ell_{-M} = -N, ell_M = N.
// Segment j holds nu_j = ell_j - ell_{j-1} atoms; every nu_j >= s so a
// bond spans at most one segment junction.
class RepresentativeGrid {
 public:
  RepresentativeGrid(std::vector<int> rep_indices, const ChainConfig& cfg);

  // All segments of equal length; segment_length must divide 2N.
  static RepresentativeGrid uniform(const ChainConfig& cfg, int segment_length);

  int M() const { return M_; }
  int segment_count_total() const { return 2 * M_; }
  // j in [-M, M]
  int rep_index(int j) const { return rep_[static_cast<std::size_t>(j + M_)]; }
  // j in [-M+1, M]
  int segment_atoms(int j) const {
    return rep_index(j) - rep_index(j - 1);
  }
  bool is_uniform() const;

 private:
  std::vector<int> rep_;
  int M_;
};

// Index sets of the QNL splitting for a fixed neighbor distance k:
// bonds starting in `atomistic` keep the full pair interaction, bonds in
// `continuum` use the Cauchy-Born split.  `interface_set` is the 2(k-1)
// indices next to the coupling boundary, `continuum_ext` = continuum plus
// interface.  All values are representative-cell indices.
struct QnlIndexSets {
  int k = 0;
  std::vector<int> atomistic;
  std::vector<int> continuum;
  std::vector<int> interface_set;
  std::vector<int> continuum_ext;
};

QnlIndexSets qnl_index_sets(const ChainConfig& cfg, int k, int center = 0);

// Symmetric bilinear form q(u, v) stored as difference pairs:
// q(u, v) = sum_t c_t (u_{b_t} - u_{a_t}) (v_{b_t} - v_{a_t}).
// apply() returns the l2_eps representer H u, i.e. <apply(u), v> = q(u, v),
// so eigenvalue and solver code can work with plain matrices.
class QuadraticForm {
 public:
  struct DifferencePair {
    int a;      // storage index
    int b;      // storage index
    double c;
  };

  QuadraticForm(int half_period, std::vector<DifferencePair> pairs);

  int half_period() const { return half_period_; }
  int size() const { return 2 * half_period_; }
  const std::vector<DifferencePair>& pairs() const { return pairs_; }

  PeriodicField apply(const PeriodicField& u) const;
  double quad(const PeriodicField& u) const;  // <Hu, u>
  // Dense realization of the representer operator (size capped at 8192).
  Eigen::MatrixXd dense() const;
  // Largest cyclic distance |a - b| over all pairs.
  int bandwidth() const;

 private:
  int half_period_;
  std::vector<DifferencePair> pairs_;
};

// Per-period dimensionless energy of the selected model at y = y_F + u.
// `grid` is required iff kind == LocalQC.  Throws
// InadmissibleDeformationError when any bond strain is <= 1e-8.
double energy(ModelKind kind, const ChainConfig& cfg, const Potential& p,
              const PeriodicField& u, const RepresentativeGrid* grid = nullptr);

// l2_eps representer g of the first variation: <g, w> equals the
// directional derivative of the energy along any zero-mean w.  g is the
// negative force field scaled by 1/eps and is projected to zero mean;
// the pointwise (negative) force at atom ell is eps * g_ell.
PeriodicField gradient(ModelKind kind, const ChainConfig& cfg,
                       const Potential& p, const PeriodicField& u,
                       const RepresentativeGrid* grid = nullptr);

// Second variation at the uniform strain y_F.  For LocalQC the grid must
// be uniform (non-uniform coarse Hessians are out of scope).
// `interface_center` shifts the atomistic region of QCE/QNL; the default
// centers it at atom 0.
QuadraticForm hessian(ModelKind kind, const ChainConfig& cfg,
                      const Potential& p,
                      const RepresentativeGrid* grid = nullptr,
                      int interface_center = 0);

// Interfacial energies P_j, j = -M+1..M, for representative positions
// Y_j (j = -M..M, strictly increasing; the wrap uses r_{M+1} = r_{-M+1}).
// The decomposition identity reads
//   energy(Atomistic, interpolated u) = energy(LocalQC, u, grid) + sum_j P_j.
std::vector<double> interfacial_energies(const ChainConfig& cfg,
                                         const Potential& p,
                                         const RepresentativeGrid& grid,
                                         std::span<const double> rep_positions);

// Piecewise-linear displacement through prescribed representative values
// rep_u (j = -M..M, with rep_u[-M] == rep_u[M] by periodicity).
PeriodicField interpolate_displacement(const ChainConfig& cfg,
                                       const RepresentativeGrid& grid,
                                       std::span<const double> rep_u);

}  // namespace qc1d

#endif
