// Command-line harness: one subcommand per experiment, a flat key-value
// config file, and flag overrides for every scalar field.  Exit code 0
// when every assertion passes, 2 when any fails, 1 on usage errors.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "qc1d/errors.hpp"
#include "qc1d/experiments.hpp"

namespace {

using qc1d::experiments::ExperimentConfig;

void set_experiment_defaults(ExperimentConfig& cfg, bool user_gave_n) {
  if (user_gave_n) return;
  if (cfg.experiment == "ghost-force")
    cfg.n_list = {32, 64, 128};
  else if (cfg.experiment == "stability-scan")
    cfg.n_list = {32};
  else if (cfg.experiment == "critical-gap")
    cfg.n_list = {16, 32, 64, 128};
  else if (cfg.experiment == "convergence")
    cfg.n_list = {32, 64, 128, 256, 512, 1024};
  else if (cfg.experiment == "decomposition")
    cfg.n_list = {64, 2048};
}

void list_potentials() {
  std::cout << "lennard-jones  parameters: rmin (default 1), depth (default 1)\n"
            << "morse          parameters: a (default 2), r0 (default 1), "
               "depth (default 1)\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"1D atomistic-to-continuum coupling experiments"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  std::string config_path;
  bool want_list = false, dry_run = false;
  app.add_option("--config", config_path, "config file (key = value sections)");
  app.add_flag("--list-potentials", want_list, "list potentials and exit");
  app.add_flag("--dry-run", dry_run, "validate the configuration and exit");

  struct FlagSet {
    std::string potential, load, output, k_text, n_text, param_text;
    double F = 0.0, f_min = 0.0, f_max = 0.0, amplitude = 0.0;
    int s = 0, f_count = 0;
    long seed = 0;
  } flags;

  std::vector<CLI::App*> subs;
  for (const char* name : {"ghost-force", "stability-scan", "critical-gap",
                           "convergence", "decomposition"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--potential", flags.potential, "potential name");
    sub->add_option("--param", flags.param_text,
                    "potential parameters, e.g. a=2,r0=1");
    sub->add_option("--s", flags.s, "interaction range");
    sub->add_option("--F", flags.F, "macroscopic strain");
    sub->add_option("--F-min", flags.f_min, "F-range lower end");
    sub->add_option("--F-max", flags.f_max, "F-range upper end");
    sub->add_option("--F-count", flags.f_count, "F-range sample count");
    sub->add_option("--N", flags.n_text, "comma-separated N list");
    sub->add_option("--K", flags.k_text, "atomistic half-width (int or N/4)");
    sub->add_option("--load", flags.load, "load name (sin-pi-x | cos-pi-x)");
    sub->add_option("--amplitude", flags.amplitude, "load amplitude");
    sub->add_option("--output", flags.output, "CSV output path");
    sub->add_option("--seed", flags.seed, "seed for randomized suites");
    subs.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);

  if (want_list) {
    list_potentials();
    return 0;
  }

  try {
    ExperimentConfig cfg;
    if (!config_path.empty())
      cfg = qc1d::experiments::parse_config_file(config_path);

    CLI::App* active = nullptr;
    for (CLI::App* sub : subs)
      if (sub->parsed()) active = sub;
    if (active != nullptr) cfg.experiment = active->get_name();
    if (cfg.experiment.empty())
      throw qc1d::ArgumentError(
          "choose an experiment subcommand or set [experiment] name in the "
          "config file");

    bool n_given = !cfg.n_list.empty();
    if (active != nullptr) {
      using qc1d::experiments::apply_override;
      auto passed = [active](const std::string& opt) {
        return active->count("--" + opt) > 0;
      };
      if (passed("potential")) apply_override(cfg, "potential.kind", flags.potential);
      if (passed("param")) {
        std::stringstream ss(flags.param_text);
        std::string item;
        while (std::getline(ss, item, ',')) {
          const auto eq = item.find('=');
          if (eq == std::string::npos)
            throw qc1d::ArgumentError("--param expects name=value pairs");
          apply_override(cfg, "potential." + item.substr(0, eq),
                         item.substr(eq + 1));
        }
      }
      if (passed("s")) apply_override(cfg, "chain.s", std::to_string(flags.s));
      if (passed("F")) apply_override(cfg, "chain.F", std::to_string(flags.F));
      if (passed("F-min")) apply_override(cfg, "chain.F_min", std::to_string(flags.f_min));
      if (passed("F-max")) apply_override(cfg, "chain.F_max", std::to_string(flags.f_max));
      if (passed("F-count")) apply_override(cfg, "chain.F_count", std::to_string(flags.f_count));
      if (passed("N")) {
        apply_override(cfg, "chain.N", flags.n_text);
        n_given = true;
      }
      if (passed("K")) apply_override(cfg, "chain.K", flags.k_text);
      if (passed("load")) apply_override(cfg, "load.name", flags.load);
      if (passed("amplitude"))
        apply_override(cfg, "load.amplitude", std::to_string(flags.amplitude));
      if (passed("output")) cfg.output_path = flags.output;
      if (passed("seed"))
        apply_override(cfg, "experiment.seed", std::to_string(flags.seed));
    }
    set_experiment_defaults(cfg, n_given);
    if (cfg.output_path.empty()) cfg.output_path = cfg.experiment + ".csv";

    cfg.validate();
    if (dry_run) {
      std::cout << "config ok: " << qc1d::experiments::canonical_string(cfg)
                << "\n";
      return 0;
    }

    const auto result = qc1d::experiments::run(cfg);
    std::ofstream out(cfg.output_path);
    if (!out)
      throw qc1d::ArgumentError("cannot write output: " + cfg.output_path);
    out << result.csv;
    out.close();

    int failures = 0;
    for (const auto& a : result.assertions) {
      std::cout << (a.pass ? "[ok]   " : "[FAIL] ") << a.name << ": "
                << a.detail << "\n";
      if (!a.pass) ++failures;
    }
    std::cout << "wrote " << cfg.output_path << "\n";
    if (failures > 0) {
      std::cout << failures << " assertion(s) failed\n";
      return 2;
    }
    return 0;
  } catch (const qc1d::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
