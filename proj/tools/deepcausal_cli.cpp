// deepcausal swissroll|propensity|gradcheck --config FILE --out DIR [--seed S] [--force]
// Exit codes: 0 success, 1 invalid input or config, 2 numerical failure.

#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "deepcausal/experiment.hpp"

namespace dc = deepcausal;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool force = false;
};

dc::ExperimentConfig resolve(dc::ExperimentKind kind, const Options& o) {
  auto cfg = o.config.empty() ? dc::ExperimentConfig::defaults(kind) : dc::load_config(o.config);
  if (cfg.kind != kind) {
    throw dc::ValidationError("config " + o.config + " describes a '" + dc::to_string(cfg.kind) +
                              "' experiment, not '" + dc::to_string(kind) + "'");
  }
  if (o.seed) cfg.seed = *o.seed;
  return cfg;
}

int run(dc::ExperimentKind kind, const Options& o) {
  const auto cfg = resolve(kind, o);
  dc::prepare_output_dir(o.out, o.force);
  switch (kind) {
    case dc::ExperimentKind::swissroll: {
      const auto r = dc::run_swissroll(cfg);
      dc::write_outputs(r, cfg, o.out);
      for (const auto& rep : r.reports) {
        std::printf("%-12s mean_abs_ite_error=%.6f ate_error=%.6f silhouette=%s\n", rep.method.c_str(),
                    rep.mean_abs_ite_error, rep.ate_error,
                    rep.silhouette ? std::to_string(*rep.silhouette).c_str() : "n/a");
      }
      return 0;
    }
    case dc::ExperimentKind::propensity: {
      const auto r = dc::run_propensity(cfg);
      dc::write_outputs(r, cfg, o.out);
      for (const auto& rep : r.reports) {
        std::printf("%-15s misassignment_error=%.3f%% misassignment_rate=%.3f%% accuracy=%.3f%%\n",
                    rep.method.c_str(), rep.mean_abs_misassignment_error_pct, rep.misassignment_rate_pct,
                    rep.accuracy_pct);
      }
      return 0;
    }
    case dc::ExperimentKind::gradcheck: {
      const auto r = dc::run_gradcheck(cfg);
      dc::write_outputs(r, cfg, o.out);
      std::size_t failed = 0;
      double worst = 0.0;
      for (const auto& e : r.entries) {
        failed += e.passed ? 0 : 1;
        worst = std::max(worst, e.result.max_relative_error);
      }
      std::printf("gradcheck: %zu specs, %zu failed, worst relative error %.3e (tolerance %.1e)\n",
                  r.entries.size(), failed, worst, r.tolerance);
      return failed == 0 ? 0 : 2;
    }
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Treatment-effect experiments: embedding matching and propensity matching"};
  app.require_subcommand(1);
  Options opts;
  std::uint64_t seed = 0;

  struct Sub {
    const char* name;
    const char* help;
    dc::ExperimentKind kind;
  };
  const Sub subs[] = {
      {"swissroll", "Swiss-roll embedding + neighbor matching study", dc::ExperimentKind::swissroll},
      {"propensity", "Jittered-pair propensity matching study", dc::ExperimentKind::propensity},
      {"gradcheck", "Finite-difference gradient check over a grid of layer specs", dc::ExperimentKind::gradcheck},
  };
  std::vector<std::pair<CLI::App*, dc::ExperimentKind>> commands;
  for (const auto& s : subs) {
    auto* cmd = app.add_subcommand(s.name, s.help);
    cmd->add_option("--config", opts.config, "JSON config file (defaults are used when omitted)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", opts.out, "Output directory")->required();
    cmd->add_option("--seed", seed, "Override the config seed");
    cmd->add_flag("--force", opts.force, "Allow writing into a non-empty output directory");
    commands.emplace_back(cmd, s.kind);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  for (const auto& [cmd, kind] : commands) {
    if (!cmd->parsed()) continue;
    if (cmd->count("--seed") > 0) opts.seed = seed;
    try {
      return run(kind, opts);
    } catch (const dc::ValidationError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    } catch (const dc::NumericalError& e) {
      std::cerr << "numerical failure: " << e.what() << '\n';
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    }
  }
  return 1;
}
