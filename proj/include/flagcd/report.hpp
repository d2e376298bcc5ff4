#pragma once

// Job execution and report emission.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "flagcd/job_config.hpp"

namespace flagcd {

inline constexpr const char* kToolVersion = "0.3.1";

/// A value per grid point; written as a "re,im,value" CSV table.
struct GridTable {
  std::string name;
  std::vector<cplx> points;
  std::vector<double> values;
};

struct MatrixExport {
  std::string file_name;
  std::string content;
};

struct TaskResult {
  std::string name;
  TaskType type = TaskType::invariants;
  bool ok = true;
  std::string error_kind;  // "domain", "numeric", ... when !ok
  std::string error;
  nlohmann::json data = nlohmann::json::object();
  std::vector<GridTable> grids;
  std::vector<MatrixExport> matrices;
  double elapsed_ms = 0.0;
};

struct InvariantReport {
  std::string version = kToolVersion;
  std::string config_hash;
  double elapsed_ms = 0.0;
  nlohmann::json defaults;
  nlohmann::json config;
  std::vector<TaskResult> tasks;

  bool all_ok() const noexcept;
};

/// 64-bit FNV-1a of the canonical config echo minus output.directory, as 16
/// hex digits.
std::string config_hash(const JobConfig& config);

/// Runs the tasks in declaration order. A throwing task is recorded as
/// failed; the remaining tasks still run.
InvariantReport run_job(const JobConfig& config);

/// Single task, as run_job would execute it.
TaskResult run_task(const JobConfig& config, const TaskSpec& task);

/// Report as JSON. All timing lives under metadata.timing_ms.
nlohmann::json report_to_json(const InvariantReport& report);

/// "re,im,value" header plus one row per point, 17 significant digits.
std::string grid_to_csv(const GridTable& grid);

/// Writes report.json, matrix exports and, for csv, one
/// <task>.<grid>.csv per grid. Returns the written paths in order.
std::vector<std::filesystem::path> emit_report(const InvariantReport& report,
                                               const std::filesystem::path& directory,
                                               ReportFormat format);

}  // namespace flagcd
