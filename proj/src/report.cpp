#include "flagcd/report.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "flagcd/errors.hpp"
#include "flagcd/flag_builder.hpp"
#include "flagcd/format.hpp"
#include "flagcd/invariants.hpp"
#include "flagcd/matrix_io.hpp"
#include "flagcd/matrix_models.hpp"

namespace flagcd {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr double kFrameStep = 1e-4;
constexpr double kFrameTol = 1e-5;

// Config echo without the output location, which does not affect results.
json computation_echo(const JobConfig& cfg) {
  json j = config_to_json(cfg);
  j["output"].erase("directory");
  return j;
}

json point(cplx w) { return json::array({w.real(), w.imag()}); }

json table_json(const GridTable& g) {
  json rows = json::array();
  for (std::size_t i = 0; i < g.points.size(); ++i) rows.push_back({{"w", point(g.points[i])}, {"value", g.values[i]}});
  return rows;
}

json located_max(const GridTable& g) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < g.values.size(); ++i)
    if (g.values[i] > g.values[best]) best = i;
  if (g.values.empty()) return json(nullptr);
  return {{"value", g.values[best]}, {"w", point(g.points[best])}};
}

std::string block(int i) { return "K" + std::to_string(i); }

const ModelSpec& model_of(const JobConfig& cfg, const std::string& name) {
  const auto* m = cfg.find_model(name);
  if (m == nullptr) throw ConfigError("tasks", "undeclared model \"" + name + "\"");
  return *m;
}

OperatorModel operator_model(const ModelSpec& spec, const std::vector<ScalarKernel>& kernels, int N) {
  if (kernels.size() == 1) return rank_one_model(shift_model(kernels.front(), N));
  return kernel_chain_model(kernels, N, spec.phase);
}

void run_invariants(const JobConfig& cfg, const TaskSpec& task, TaskResult& out) {
  const auto& spec = model_of(cfg, task.models.front());
  const auto kernels = build_kernels(spec);
  const auto pts = make_grid(task.grid.value_or(cfg.defaults.grid));
  const double tol = task.tol.value_or(cfg.defaults.tol);
  const cplx origin{};

  json origin_data = {{"w", point(origin)}};
  json homogeneity = json::array();
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    const int k = static_cast<int>(i);
    const auto cg = curvature_grid(kernels[i], pts);
    out.grids.push_back({"curvature_" + block(k), cg.points, cg.values});
    origin_data["curvature_" + block(k)] = curvature(kernels[i], origin);

    const auto h = is_homogeneous_rank1(kernels[i], pts, tol);
    homogeneity.push_back({{"block", block(k)},
                           {"homogeneous", h.homogeneous},
                           {"lambda_estimate", h.lambda_estimate},
                           {"max_relative_deviation", h.max_relative_deviation}});
    GridTable lam{"lambda_" + block(k), pts, h.lambda_values};
    out.grids.push_back(std::move(lam));

    if (i == 0) continue;
    const std::string pair = block(k - 1) + "_" + block(k);
    const auto rg = ratio_grid(kernels[i - 1], kernels[i], pts);
    out.grids.push_back({"ratio_" + pair, rg.points, rg.values});
    const auto sg = second_fundamental_form_grid(kernels[i - 1], kernels[i], pts);
    out.grids.push_back({"sff_" + pair, sg.points, sg.values});
    origin_data["ratio_" + pair] = ratio_invariant(kernels[i - 1], kernels[i], origin);
    origin_data["sff_" + pair] = second_fundamental_form_coeff(kernels[i - 1], kernels[i], origin);
  }
  out.data = {{"model", spec.name}, {"blocks", kernels.size()}, {"tol", tol},
              {"origin", origin_data}, {"homogeneity", homogeneity}};
}

json verdict_json(const EquivalenceVerdict& v) {
  return {{"equivalent", v.equivalent}, {"max_curvature_gap", v.max_curvature_gap},
          {"max_ratio_gap", v.max_ratio_gap}, {"tol", v.tol}};
}

void run_compare(const JobConfig& cfg, const TaskSpec& task, TaskResult& out) {
  const auto& sa = model_of(cfg, task.models[0]);
  const auto& sb = model_of(cfg, task.models[1]);
  const auto ka = build_kernels(sa);
  const auto kb = build_kernels(sb);
  const auto pts = make_grid(task.grid.value_or(cfg.defaults.grid));
  const double tol = task.tol.value_or(cfg.defaults.tol);
  out.data = {{"models", {sa.name, sb.name}}, {"tol", tol}};

  if (ka.size() != kb.size()) {
    out.data["verdict"] = {{"equivalent", false},
                           {"reason", "block counts differ (" + std::to_string(ka.size()) + " vs " +
                                          std::to_string(kb.size()) + ")"}};
    return;
  }

  const cplx origin{};
  json origin_gaps = {{"w", point(origin)}};
  bool equivalent = true;

  const auto ca = curvature_grid(ka[0], pts);
  const auto cb = curvature_grid(kb[0], pts);
  GridTable cgap{"curvature_gap", pts, {}};
  for (std::size_t p = 0; p < pts.size(); ++p) cgap.values.push_back(relative_gap(ca.values[p], cb.values[p]));
  origin_gaps["curvature_gap"] = relative_gap(curvature(ka[0], origin), curvature(kb[0], origin));
  json located = {{"curvature_gap", located_max(cgap)}};
  out.grids.push_back(cgap);

  json ratio_max = json::array();
  for (std::size_t i = 1; i < ka.size(); ++i) {
    const std::string pair = block(static_cast<int>(i) - 1) + "_" + block(static_cast<int>(i));
    const auto ra = ratio_grid(ka[i - 1], ka[i], pts);
    const auto rb = ratio_grid(kb[i - 1], kb[i], pts);
    GridTable rgap{"ratio_gap_" + pair, pts, {}};
    for (std::size_t p = 0; p < pts.size(); ++p) rgap.values.push_back(relative_gap(ra.values[p], rb.values[p]));
    origin_gaps["ratio_gap_" + pair] =
        relative_gap(ratio_invariant(ka[i - 1], ka[i], origin), ratio_invariant(kb[i - 1], kb[i], origin));
    ratio_max.push_back(located_max(rgap));
    out.grids.push_back(std::move(rgap));
  }
  located["ratio_gap"] = ratio_max;

  json verdict;
  if (ka.size() >= 2) {
    verdict = verdict_json(equivalent_fbn(ka, kb, pts, tol));
    equivalent = verdict["equivalent"].get<bool>();
  } else {
    double worst = 0.0;
    for (double g : cgap.values) worst = std::max(worst, g);
    equivalent = worst <= tol;
    verdict = {{"equivalent", equivalent}, {"max_curvature_gap", worst},
               {"max_ratio_gap", json::array()}, {"tol", tol}};
  }
  verdict["located"] = located;
  out.data["verdict"] = verdict;
  out.data["origin"] = origin_gaps;

  if (ka.size() >= 2) {
    const auto ma = kernel_chain_model(ka, sa.truncation, sa.phase);
    const auto mb = kernel_chain_model(kb, sb.truncation, sb.phase);
    const auto mv = equivalent_models(ma, mb, pts, tol);
    json j = verdict_json(mv);
    j["truncation"] = {sa.truncation, sb.truncation};
    j["agrees_with_kernel_verdict"] = mv.equivalent == equivalent;
    out.data["model_verdict"] = j;
  }
}

void run_spectral(const JobConfig& cfg, const TaskSpec& task, TaskResult& out) {
  const auto& spec = model_of(cfg, task.models.front());
  const auto kernels = build_kernels(spec);
  const int n = static_cast<int>(kernels.size());
  const auto model = operator_model(spec, kernels, spec.truncation);
  const auto pts = make_grid(task.grid.value_or(cfg.defaults.spectral_grid));
  const double eigen_tol = task.eigen_tol.value_or(cfg.defaults.eigen_tol);

  out.data = {{"model", spec.name}, {"blocks", n}, {"truncation", spec.truncation},
              {"shape", to_string(model.shape)}, {"eigen_tol", eigen_tol}};
  if (n >= 2) out.data["intertwining_residual"] = intertwining_residual(model);

  GridTable dims{"eigenframe_dimension", {}, {}};
  GridTable resid{"eigenframe_residual", {}, {}};
  json skipped = json::array();
  bool all_match = true;
  for (const auto& w : pts) {
    try {
      const auto ef = eigenframe(model, w, eigen_tol);
      dims.points.push_back(w);
      dims.values.push_back(ef.dimension);
      resid.points.push_back(w);
      resid.values.push_back(ef.residual);
      all_match = all_match && ef.dimension == n;
    } catch (const NumericError& e) {
      skipped.push_back({{"w", point(w)}, {"reason", e.what()}});
    }
  }
  out.data["eigenframe"] = {{"dimension_equals_blocks", all_match && !dims.values.empty()},
                            {"evaluated", dims.points.size()}, {"skipped", skipped}};
  out.grids.push_back(std::move(dims));
  out.grids.push_back(std::move(resid));

  const int probe_n = task.probe_truncation.value_or(cfg.defaults.probe_truncation);
  if (n * probe_n > kMaxCommutantSize) {
    out.data["probes"] = {{"skipped", "probe matrix larger than " + std::to_string(kMaxCommutantSize)}};
  } else {
    const auto probe_model = operator_model(spec, kernels, probe_n);
    const auto irr = irreducibility_probe(probe_model);
    const auto strong = strong_irreducibility_probe(probe_model, cfg.defaults.seed);
    out.data["probes"] = {
        {"truncation", probe_n},
        {"irreducibility",
         {{"irreducible", irr.irreducible}, {"star_commutant_dim", irr.star_commutant_dim},
          {"label", "EXACT_FOR_TRUNCATION"}}},
        {"strong_irreducibility",
         {{"plain_commutant_dim", strong.plain_commutant_dim},
          {"nontrivial_idempotent_found", strong.nontrivial_idempotent_found},
          {"idempotent_residual", strong.idempotent_residual},
          {"idempotent_rank", strong.idempotent_rank},
          {"seed", strong.seed},
          {"label", strong.label}}}};
  }

  if (task.export_matrix) {
    out.matrices.push_back({task.name + ".matrix.txt", format_matrix(model.matrix(), spec.truncation)});
    out.data["matrix_file"] = task.name + ".matrix.txt";
  }
}

void run_frame_check(const JobConfig& cfg, const TaskSpec& task, TaskResult& out) {
  const auto& spec = model_of(cfg, task.models.front());
  const auto kernels = build_kernels(spec);
  const auto model = operator_model(spec, kernels, spec.truncation);
  const auto pts = task.points.empty() ? make_grid(task.grid.value_or(cfg.defaults.spectral_grid)) : task.points;
  const auto rule = task.coefficients == "unit" ? FrameCoefficientRule::unit() : FrameCoefficientRule::binomial();
  const double eigen_tol = task.eigen_tol.value_or(cfg.defaults.eigen_tol);
  const double tol = task.tol.value_or(kFrameTol);

  GridTable membership{"membership_residual", {}, {}};
  GridTable orth{"orthogonality_residual", {}, {}};
  json rows = json::array();
  bool consistent = true;
  bool vacuous = false;
  for (const auto& w : pts) {
    const auto rep = fbn_frame_check(model, w, rule, kFrameStep, eigen_tol);
    vacuous = rep.vacuous;
    membership.points.push_back(w);
    membership.values.push_back(rep.membership_residual);
    orth.points.push_back(w);
    orth.values.push_back(rep.max_orthogonality_residual);
    consistent = consistent && rep.max_orthogonality_residual <= tol;
    rows.push_back({{"w", point(w)},
                    {"eigenframe_dimension", rep.eigenframe_dimension},
                    {"membership_residual", rep.membership_residual},
                    {"max_orthogonality_residual", rep.max_orthogonality_residual},
                    {"t_norms", rep.t_norms}});
  }
  out.data = {{"model", spec.name}, {"coefficient_rule", rule.name}, {"step", kFrameStep},
              {"tol", tol}, {"vacuous", vacuous}, {"orthogonal_within_tol", consistent}, {"points", rows}};
  out.grids.push_back(std::move(membership));
  out.grids.push_back(std::move(orth));
}

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

json defaults_json(const JobConfig& cfg) {
  const auto& d = cfg.defaults;
  return {{"tol", d.tol},
          {"grid", {{"radii", d.grid.radii}, {"angles", d.grid.angles}}},
          {"spectral_grid", {{"radii", d.spectral_grid.radii}, {"angles", d.spectral_grid.angles}}},
          {"eigen_tol", d.eigen_tol},
          {"probe_truncation", d.probe_truncation},
          {"seed", d.seed},
          {"series_terms", kDefaultTerms},
          {"truncation", kDefaultTruncation},
          {"guard_fraction", kGuardFraction},
          {"frame_check_step", kFrameStep},
          {"frame_check_tol", kFrameTol},
          {"commutant_rank_tol", "N*eps*sigma_max"},
          {"max_commutant_size", kMaxCommutantSize}};
}

}  // namespace

bool InvariantReport::all_ok() const noexcept {
  for (const auto& t : tasks)
    if (!t.ok) return false;
  return true;
}

std::string config_hash(const JobConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : computation_echo(config).dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

TaskResult run_task(const JobConfig& config, const TaskSpec& task) {
  TaskResult out;
  out.name = task.name;
  out.type = task.type;
  const auto t0 = Clock::now();
  try {
    switch (task.type) {
      case TaskType::invariants: run_invariants(config, task, out); break;
      case TaskType::compare: run_compare(config, task, out); break;
      case TaskType::spectral: run_spectral(config, task, out); break;
      case TaskType::frame_check: run_frame_check(config, task, out); break;
    }
  } catch (const std::exception& e) {
    // Partial output of a failed task is dropped.
    out.ok = false;
    out.error_kind = dynamic_cast<const NumericError*>(&e)  ? "numeric"
                     : dynamic_cast<const DomainError*>(&e) ? "domain"
                     : dynamic_cast<const ConfigError*>(&e) ? "config"
                                                            : "internal";
    out.error = e.what();
    out.data = json::object();
    out.grids.clear();
    out.matrices.clear();
  }
  out.elapsed_ms = ms_since(t0);
  return out;
}

InvariantReport run_job(const JobConfig& config) {
  const auto t0 = Clock::now();
  InvariantReport rep;
  rep.config_hash = config_hash(config);
  rep.defaults = defaults_json(config);
  rep.config = computation_echo(config);
  for (const auto& task : config.tasks) rep.tasks.push_back(run_task(config, task));
  rep.elapsed_ms = ms_since(t0);
  return rep;
}

nlohmann::json report_to_json(const InvariantReport& report) {
  json timing = {{"total", report.elapsed_ms}, {"tasks", json::object()}};
  json tasks = json::array();
  for (const auto& t : report.tasks) {
    timing["tasks"][t.name] = t.elapsed_ms;
    json grids = json::object();
    for (const auto& g : t.grids) grids[g.name] = table_json(g);
    json j = {{"name", t.name}, {"type", to_string(t.type)}, {"ok", t.ok}, {"data", t.data}, {"grids", grids}};
    if (!t.ok) j["error"] = {{"kind", t.error_kind}, {"message", t.error}};
    tasks.push_back(j);
  }
  return {{"metadata",
           {{"tool", "flagcd"}, {"version", report.version}, {"config_hash", report.config_hash},
            {"timing_ms", timing}}},
          {"defaults", report.defaults},
          {"config", report.config},
          {"tasks", tasks}};
}

std::string grid_to_csv(const GridTable& grid) {
  std::string s = "re,im,value\n";
  auto num = [](double v) { return format_g17(v == 0.0 ? 0.0 : v); };
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    s += num(grid.points[i].real());
    s += ',';
    s += num(grid.points[i].imag());
    s += ',';
    s += num(grid.values[i]);
    s += '\n';
  }
  return s;
}

std::vector<std::filesystem::path> emit_report(const InvariantReport& report,
                                               const std::filesystem::path& directory, ReportFormat format) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw Error("cannot create output directory " + directory.string() + ": " + ec.message());

  std::vector<fs::path> written;
  auto write = [&](const fs::path& p, const std::string& content) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    f << content;
    f.close();
    if (!f) throw Error("cannot write " + p.string());
    written.push_back(p);
  };

  write(directory / "report.json", report_to_json(report).dump(2) + "\n");
  for (const auto& t : report.tasks) {
    for (const auto& m : t.matrices) write(directory / m.file_name, m.content);
    if (format != ReportFormat::csv) continue;
    for (const auto& g : t.grids) write(directory / (t.name + "." + g.name + ".csv"), grid_to_csv(g));
  }
  return written;
}

}  // namespace flagcd
