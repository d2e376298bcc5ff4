// flagcd command line front end.
//
//   flagcd build      --config job.json
//   flagcd report     --config job.json --out out/ --format csv
//   flagcd compare    --config job.json --tol 1e-8
//
// Exit codes: 0 success (including not-equivalent verdicts), 2 configuration
// or usage error, 3 numeric failure in any task, 1 I/O or other errors.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "flagcd/errors.hpp"
#include "flagcd/job_config.hpp"
#include "flagcd/report.hpp"

namespace {

struct Options {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<double> tol;
  std::vector<double> grid_radii;
  std::optional<std::uint64_t> seed;
};

// Overrides go through the config echo so they get the same validation as
// the file itself.
flagcd::JobConfig apply_overrides(const flagcd::JobConfig& cfg, const Options& o) {
  auto doc = flagcd::config_to_json(cfg);
  if (o.tol) doc["defaults"]["tol"] = *o.tol;
  if (!o.grid_radii.empty()) doc["defaults"]["grid_radii"] = o.grid_radii;
  if (o.seed) doc["defaults"]["seed"] = *o.seed;
  if (o.out) doc["output"]["directory"] = *o.out;
  if (o.format) doc["output"]["format"] = *o.format;
  return flagcd::parse_config(doc.dump());
}

void print_summary(const flagcd::JobConfig& cfg) {
  for (const auto& m : cfg.models) {
    std::cout << "model " << m.name << ": " << flagcd::to_string(m.family) << ", " << m.blocks()
              << " block(s), N = " << m.truncation;
    if (m.family == flagcd::ModelFamily::generalized_szego) std::cout << ", lambda = " << m.lambda;
    if (m.family != flagcd::ModelFamily::power_series) {
      std::cout << ", mu = [";
      for (std::size_t i = 0; i < m.mu.size(); ++i) std::cout << (i ? ", " : "") << m.mu[i];
      std::cout << "]";
    }
    std::cout << "\n";
  }
  for (const auto& t : cfg.tasks) {
    std::cout << "task " << t.name << ": " << flagcd::to_string(t.type) << " on";
    for (const auto& m : t.models) std::cout << " " << m;
    std::cout << "\n";
  }
}

void print_task(const flagcd::TaskResult& t) {
  std::cout << "task " << t.name << " (" << flagcd::to_string(t.type) << "): ";
  if (!t.ok) {
    std::cout << "FAILED [" << t.error_kind << "] " << t.error << "\n";
    return;
  }
  if (t.type == flagcd::TaskType::compare && t.data.contains("verdict")) {
    std::cout << (t.data["verdict"]["equivalent"].get<bool>() ? "equivalent" : "not equivalent") << "\n";
    return;
  }
  std::cout << "ok\n";
}

int run(const std::string& command, const Options& opts) {
  flagcd::JobConfig cfg;
  try {
    cfg = apply_overrides(flagcd::load_config(opts.config), opts);
  } catch (const flagcd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  if (command == "build") {
    print_summary(cfg);
    return 0;
  }
  if (command != "report") {
    std::erase_if(cfg.tasks, [&](const flagcd::TaskSpec& t) { return flagcd::to_string(t.type) != command; });
  }

  const auto report = flagcd::run_job(cfg);
  for (const auto& t : report.tasks) print_task(t);
  try {
    const auto files = flagcd::emit_report(report, cfg.output.directory, cfg.output.format);
    std::cout << "wrote " << files.size() << " file(s) to " << cfg.output.directory << "\n";
  } catch (const std::exception& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return 1;
  }
  return report.all_ok() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flagcd: invariants and matrix models for flag-structured Cowen-Douglas operators"};
  app.require_subcommand(1);
  app.fallthrough();

  Options opts;
  app.add_option("--config", opts.config, "job configuration (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--out", opts.out, "output directory (overrides output.directory)");
  app.add_option("--format", opts.format, "report format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--tol", opts.tol, "default equivalence tolerance");
  app.add_option("--grid-radii", opts.grid_radii, "default grid radii, comma separated")->delimiter(',');
  app.add_option("--seed", opts.seed, "seed for the heuristic strong-irreducibility probe");

  app.add_subcommand("build", "validate the config and print model summaries");
  app.add_subcommand("invariants", "run invariants tasks");
  app.add_subcommand("compare", "run compare tasks");
  app.add_subcommand("spectral", "run spectral tasks (eigenframes and probes)");
  app.add_subcommand("report", "run all tasks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    return run(app.get_subcommands().front()->get_name(), opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
