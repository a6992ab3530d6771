#ifndef QC1D_EXPERIMENTS_HPP
#define QC1D_EXPERIMENTS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qc1d/chain.hpp"
#include "qc1d/linear_solver.hpp"
#include "qc1d/potential.hpp"

namespace qc1d::experiments {

// Atomistic half-width rule: a fixed K or a fraction of N (default N/4).
struct KRule {
  bool is_fraction = true;
  int fixed = 0;
  double fraction = 0.25;

  int resolve(int N) const;
  std::string describe() const;
};

struct FRange {
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;
  std::vector<double> values() const;
};

struct ExperimentConfig {
  std::string experiment;  // ghost-force | stability-scan | critical-gap |
                           // convergence | decomposition
  std::string potential = "lennard-jones";
  std::map<std::string, double> potential_params;
  int s = 2;
  double F = 1.0;
  std::optional<FRange> f_range;
  std::vector<int> n_list;
  KRule k_rule;
  std::string load = "sin-pi-x";
  double amplitude = 1.0;
  std::string output_path;
  std::uint64_t seed = 0;

  ChainConfig chain(int N) const;
  // Throws ArgumentError on anything a run would later trip over.
  void validate() const;
};

// Flat key-value config file with one [section] per field group; exact
// keys are documented in the repository README.
ExperimentConfig parse_config_file(const std::string& path);
// Single "section.key=value" override (CLI flags funnel through this).
void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value);
// FNV-1a over the canonical serialization; recorded in every CSV.
std::uint64_t config_hash(const ExperimentConfig& cfg);
std::string canonical_string(const ExperimentConfig& cfg);

struct Assertion {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ExperimentResult {
  std::string csv;
  std::vector<Assertion> assertions;
  bool ok() const;
};

// Named dead loads ("sin-pi-x", "cos-pi-x") sampled as f_ell = amp * g(eps*ell)
// and projected to zero mean.
DeadLoad make_load(const std::string& name, double amplitude,
                   const ChainConfig& cfg);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
  int excluded = 0;  // points dropped from the small-N end
};

// Least-squares slope of log(err) against log(eps).  When the log-space
// RMS residual exceeds 5% the two smallest-N (largest-eps) points are
// excluded as pre-asymptotic and the fit is repeated.
SlopeFit fit_loglog_slope(const std::vector<double>& eps,
                          const std::vector<double>& err);

ExperimentResult run_ghost_force(const ExperimentConfig& cfg);
ExperimentResult run_stability_scan(const ExperimentConfig& cfg);
ExperimentResult run_critical_gap(const ExperimentConfig& cfg);
ExperimentResult run_convergence(const ExperimentConfig& cfg);
ExperimentResult run_decomposition(const ExperimentConfig& cfg);
ExperimentResult run(const ExperimentConfig& cfg);

}  // namespace qc1d::experiments

#endif
