#pragma once

// Declarative job configuration (JSON). Example:
//
//   {
//     "models": {
//       "A": {"family": "generalized_szego", "lambda": 2, "mu": 1}
//     },
//     "tasks": [ {"type": "invariants", "model": "A"} ],
//     "output": {"directory": "out", "format": "csv"}
//   }
//
// Unknown keys are rejected. Schema errors carry a dotted field path;
// syntax errors carry "line:column".

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "flagcd/kernel_engine.hpp"
#include "flagcd/matrix_models.hpp"

namespace flagcd {

enum class ModelFamily { generalized_szego, power_series, fock };
enum class TaskType { invariants, compare, spectral, frame_check };
enum class ReportFormat { json, csv };

std::string to_string(ModelFamily f);
std::string to_string(TaskType t);
std::string to_string(ReportFormat f);

struct ModelSpec {
  std::string name;
  ModelFamily family = ModelFamily::generalized_szego;
  double lambda = 1.0;
  std::vector<double> mu;  // per-block scales (generalized_szego, fock)
  std::vector<std::vector<double>> coefficients;  // per-block series (power_series)
  int terms = kDefaultTerms;
  int truncation = kDefaultTruncation;
  double phase = 0.0;
  double radius = 1.0;

  int blocks() const noexcept;
};

struct GridSpec {
  std::vector<double> radii;
  int angles = 8;

  bool operator==(const GridSpec&) const = default;
};

struct JobDefaults {
  double tol = 1e-6;
  GridSpec grid{{0.1, 0.2, 0.3, 0.4}, 8};
  GridSpec spectral_grid{{0.1, 0.2, 0.3}, 8};
  double eigen_tol = 1e-8;
  int probe_truncation = 8;
  std::uint64_t seed = kDefaultProbeSeed;
};

struct TaskSpec {
  std::string name;
  TaskType type = TaskType::invariants;
  std::vector<std::string> models;
  std::optional<GridSpec> grid;
  std::optional<double> tol;
  std::optional<double> eigen_tol;
  std::optional<int> probe_truncation;
  std::vector<cplx> points;         // frame_check
  std::string coefficients = "binomial";
  bool export_matrix = false;       // spectral
};

struct OutputSpec {
  std::string directory = "flagcd-out";
  ReportFormat format = ReportFormat::json;
};

struct JobConfig {
  std::vector<ModelSpec> models;  // declaration order
  std::vector<TaskSpec> tasks;
  JobDefaults defaults;
  OutputSpec output;

  const ModelSpec* find_model(const std::string& name) const;
};

/// Parses and validates a configuration document.
JobConfig parse_config(const std::string& text);
JobConfig load_config(const std::string& path);

/// Canonical JSON echo; parse_config(config_to_json(c).dump()) reproduces c.
nlohmann::json config_to_json(const JobConfig& config);

/// Kernels K_0..K_{n-1} of a model descriptor.
std::vector<ScalarKernel> build_kernels(const ModelSpec& spec);

std::vector<cplx> make_grid(const GridSpec& grid);

}  // namespace flagcd
