#include "flagcd/job_config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "flagcd/errors.hpp"

namespace flagcd {

namespace {

using ojson = nlohmann::ordered_json;

// Best-effort line lookup for a dotted path: finds each quoted component in
// turn, starting after the previous match.
std::string locate(const std::string& text, const std::vector<std::string>& path) {
  std::size_t pos = 0;
  for (const auto& part : path) {
    if (part.empty() || part.front() == '[') continue;
    const auto hit = text.find('"' + part + '"', pos);
    if (hit == std::string::npos) break;
    pos = hit;
  }
  if (pos == 0) return {};
  return " (line " + std::to_string(1 + std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n')) + ")";
}

class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& msg) const {
    std::string dotted;
    for (const auto& p : path) {
      if (!dotted.empty() && p.front() != '[') dotted += '.';
      dotted += p;
    }
    throw ConfigError(dotted + locate(text_, path), msg);
  }

  void allow_only(const ojson& obj, const std::vector<std::string>& path,
                  std::initializer_list<const char*> keys) const {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& [k, v] : obj.items()) {
      (void)v;
      if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; })) {
        auto p = path;
        p.push_back(k);
        fail(p, "unknown key");
      }
    }
  }

  double number(const ojson& v, const std::vector<std::string>& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }

  double positive(const ojson& v, const std::vector<std::string>& path, const char* what) const {
    const double x = number(v, path);
    if (!(x > 0.0)) fail(path, std::string(what) + " must be positive");
    return x;
  }

  int integer(const ojson& v, const std::vector<std::string>& path, int lo) const {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    const auto x = v.get<long long>();
    if (x < lo || x > 1'000'000) fail(path, "must be an integer >= " + std::to_string(lo));
    return static_cast<int>(x);
  }

  std::string string(const ojson& v, const std::vector<std::string>& path) const {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const ojson& v, const std::vector<std::string>& path) const {
    if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      auto p = path;
      p.push_back("[" + std::to_string(i) + "]");
      out.push_back(number(v[i], p));
    }
    return out;
  }

 private:
  const std::string& text_;
};

using Path = std::vector<std::string>;

Path child(Path p, const std::string& k) {
  p.push_back(k);
  return p;
}

ModelFamily parse_family(const Reader& r, const ojson& v, const Path& path) {
  const auto s = r.string(v, path);
  if (s == "generalized_szego") return ModelFamily::generalized_szego;
  if (s == "power_series") return ModelFamily::power_series;
  if (s == "fock") return ModelFamily::fock;
  r.fail(path, "unknown family '" + s + "' (generalized_szego|power_series|fock)");
}

TaskType parse_task_type(const Reader& r, const ojson& v, const Path& path) {
  const auto s = r.string(v, path);
  if (s == "invariants") return TaskType::invariants;
  if (s == "compare") return TaskType::compare;
  if (s == "spectral") return TaskType::spectral;
  if (s == "frame_check") return TaskType::frame_check;
  r.fail(path, "unknown task type '" + s + "' (invariants|compare|spectral|frame_check)");
}

ModelSpec parse_model(const Reader& r, const std::string& name, const ojson& m, const Path& path) {
  r.allow_only(m, path, {"family", "lambda", "mu", "blocks", "coefficients", "terms", "truncation", "phase", "radius"});
  if (!m.contains("family")) r.fail(path, "missing 'family'");
  ModelSpec s;
  s.name = name;
  s.family = parse_family(r, m["family"], child(path, "family"));
  if (m.contains("radius")) s.radius = r.positive(m["radius"], child(path, "radius"), "radius");
  if (m.contains("phase")) s.phase = r.number(m["phase"], child(path, "phase"));

  auto forbid = [&](const char* key) {
    if (m.contains(key)) r.fail(child(path, key), "not allowed for family " + to_string(s.family));
  };

  if (s.family == ModelFamily::power_series) {
    forbid("lambda");
    forbid("mu");
    forbid("blocks");
    forbid("terms");
    if (!m.contains("coefficients")) r.fail(path, "power_series needs 'coefficients'");
    const auto& c = m["coefficients"];
    const auto cp = child(path, "coefficients");
    if (!c.is_array() || c.empty()) r.fail(cp, "expected an array");
    if (c.front().is_array()) {
      for (std::size_t i = 0; i < c.size(); ++i) s.coefficients.push_back(r.numbers(c[i], child(cp, "[" + std::to_string(i) + "]")));
    } else {
      s.coefficients.push_back(r.numbers(c, cp));
    }
    for (std::size_t i = 0; i < s.coefficients.size(); ++i)
      if (!(s.coefficients[i][0] > 0.0)) r.fail(cp, "block " + std::to_string(i) + ": a0 must be positive");
    std::size_t shortest = s.coefficients.front().size();
    for (const auto& c2 : s.coefficients) shortest = std::min(shortest, c2.size());
    s.terms = static_cast<int>(shortest);
    s.truncation = std::min<int>(kDefaultTruncation, static_cast<int>(shortest));
  } else {
    forbid("coefficients");
    if (s.family == ModelFamily::generalized_szego) {
      if (!m.contains("lambda")) r.fail(path, "generalized_szego needs 'lambda'");
      s.lambda = r.positive(m["lambda"], child(path, "lambda"), "lambda");
    } else {
      forbid("lambda");
    }
    std::optional<int> blocks;
    if (m.contains("blocks")) blocks = r.integer(m["blocks"], child(path, "blocks"), 1);
    const auto mp = child(path, "mu");
    if (m.contains("mu") && m["mu"].is_array()) {
      s.mu = r.numbers(m["mu"], mp);
      if (blocks && *blocks != static_cast<int>(s.mu.size())) r.fail(mp, "length must equal 'blocks'");
    } else {
      const double mu = m.contains("mu") ? r.number(m["mu"], mp) : 1.0;
      const int n = blocks.value_or(2);
      s.mu.assign(static_cast<std::size_t>(n), mu);
      s.mu[0] = 1.0;
    }
    for (double v : s.mu)
      if (!(v > 0.0)) r.fail(mp, "mu must be positive");
    if (m.contains("terms")) s.terms = r.integer(m["terms"], child(path, "terms"), 2);
  }
  if (m.contains("truncation")) s.truncation = r.integer(m["truncation"], child(path, "truncation"), 2);
  if (s.truncation > s.terms) r.fail(child(path, "truncation"), "truncation exceeds the number of series terms");
  if (s.truncation < 2) r.fail(child(path, "truncation"), "truncation must be at least 2");
  return s;
}

GridSpec parse_grid(const Reader& r, const ojson& obj, const Path& path, const char* radii_key,
                    const GridSpec& fallback) {
  GridSpec g = fallback;
  if (obj.contains(radii_key)) {
    g.radii = r.numbers(obj[radii_key], child(path, radii_key));
    for (double x : g.radii)
      if (x < 0.0) r.fail(child(path, radii_key), "radii must be nonnegative");
  }
  if (obj.contains("angles")) g.angles = r.integer(obj["angles"], child(path, "angles"), 1);
  return g;
}

void check_grid_admissible(const Reader& r, const GridSpec& g, const ModelSpec& m, const Path& path) {
  const double limit = kGuardFraction * m.radius;
  for (double x : g.radii)
    if (x > limit) r.fail(path, "grid radius " + std::to_string(x) + " outside guard band of model " + m.name);
}

bool valid_task_name(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

JobConfig parse_document(const std::string& text, const ojson& doc) {
  const Reader r(text);
  JobConfig cfg;
  r.allow_only(doc, {}, {"models", "tasks", "defaults", "output"});

  if (doc.contains("defaults")) {
    const auto& d = doc["defaults"];
    const Path p{"defaults"};
    r.allow_only(d, p, {"tol", "grid_radii", "angles", "spectral_radii", "eigen_tol", "probe_truncation", "seed"});
    if (d.contains("tol")) cfg.defaults.tol = r.positive(d["tol"], child(p, "tol"), "tol");
    cfg.defaults.grid = parse_grid(r, d, p, "grid_radii", cfg.defaults.grid);
    cfg.defaults.spectral_grid.angles = cfg.defaults.grid.angles;
    if (d.contains("spectral_radii")) {
      cfg.defaults.spectral_grid.radii = r.numbers(d["spectral_radii"], child(p, "spectral_radii"));
    }
    if (d.contains("eigen_tol")) cfg.defaults.eigen_tol = r.positive(d["eigen_tol"], child(p, "eigen_tol"), "eigen_tol");
    if (d.contains("probe_truncation"))
      cfg.defaults.probe_truncation = r.integer(d["probe_truncation"], child(p, "probe_truncation"), 2);
    if (d.contains("seed")) cfg.defaults.seed = static_cast<std::uint64_t>(r.integer(d["seed"], child(p, "seed"), 0));
  }

  if (!doc.contains("models")) r.fail({"models"}, "missing 'models' section");
  const auto& models = doc["models"];
  if (!models.is_object()) r.fail({"models"}, "expected an object");
  for (const auto& [name, m] : models.items()) cfg.models.push_back(parse_model(r, name, m, {"models", name}));

  if (doc.contains("tasks")) {
    const auto& tasks = doc["tasks"];
    if (!tasks.is_array()) r.fail({"tasks"}, "expected an array");
    std::set<std::string> names;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      const Path p{"tasks", "[" + std::to_string(i) + "]"};
      const auto& t = tasks[i];
      r.allow_only(t, p, {"type", "name", "model", "models", "grid_radii", "angles", "tol", "eigen_tol",
                          "probe_truncation", "points", "coefficients", "export_matrix"});
      if (!t.contains("type")) r.fail(p, "missing 'type'");
      TaskSpec ts;
      ts.type = parse_task_type(r, t["type"], child(p, "type"));
      ts.name = t.contains("name") ? r.string(t["name"], child(p, "name"))
                                   : "task" + std::to_string(i) + "_" + to_string(ts.type);
      if (!valid_task_name(ts.name)) r.fail(child(p, "name"), "task names may use [A-Za-z0-9_.-] only");
      if (!names.insert(ts.name).second) r.fail(child(p, "name"), "duplicate task name '" + ts.name + "'");

      if (ts.type == TaskType::compare) {
        if (t.contains("model")) r.fail(child(p, "model"), "compare tasks take 'models': [A, B]");
        if (!t.contains("models") || !t["models"].is_array() || t["models"].size() != 2)
          r.fail(child(p, "models"), "compare needs exactly two model names");
        for (std::size_t k = 0; k < 2; ++k) ts.models.push_back(r.string(t["models"][k], child(p, "models")));
      } else {
        if (t.contains("models")) r.fail(child(p, "models"), "only compare tasks take 'models'");
        if (!t.contains("model")) r.fail(p, "missing 'model'");
        ts.models.push_back(r.string(t["model"], child(p, "model")));
      }
      for (const auto& ref : ts.models)
        if (cfg.find_model(ref) == nullptr) r.fail(child(p, "model"), "undeclared model \"" + ref + "\"");

      if (t.contains("grid_radii") || t.contains("angles")) {
        const GridSpec& base = ts.type == TaskType::spectral ? cfg.defaults.spectral_grid : cfg.defaults.grid;
        ts.grid = parse_grid(r, t, p, "grid_radii", base);
      }
      if (t.contains("tol")) ts.tol = r.positive(t["tol"], child(p, "tol"), "tol");
      if (t.contains("eigen_tol")) ts.eigen_tol = r.positive(t["eigen_tol"], child(p, "eigen_tol"), "eigen_tol");
      if (t.contains("probe_truncation"))
        ts.probe_truncation = r.integer(t["probe_truncation"], child(p, "probe_truncation"), 2);
      if (t.contains("points")) {
        if (ts.type != TaskType::frame_check) r.fail(child(p, "points"), "only frame_check tasks take 'points'");
        const auto& pts = t["points"];
        if (!pts.is_array() || pts.empty()) r.fail(child(p, "points"), "expected an array of [re, im] pairs");
        for (std::size_t k = 0; k < pts.size(); ++k) {
          const auto pp = child(child(p, "points"), "[" + std::to_string(k) + "]");
          const auto xy = r.numbers(pts[k], pp);
          if (xy.size() != 2) r.fail(pp, "expected [re, im]");
          ts.points.emplace_back(xy[0], xy[1]);
        }
      }
      if (t.contains("coefficients")) {
        ts.coefficients = r.string(t["coefficients"], child(p, "coefficients"));
        if (ts.coefficients != "binomial" && ts.coefficients != "unit")
          r.fail(child(p, "coefficients"), "expected 'binomial' or 'unit'");
      }
      if (t.contains("export_matrix")) {
        if (!t["export_matrix"].is_boolean()) r.fail(child(p, "export_matrix"), "expected a boolean");
        ts.export_matrix = t["export_matrix"].get<bool>();
      }
      for (const auto& ref : ts.models) {
        const auto* m = cfg.find_model(ref);
        if (ts.grid) check_grid_admissible(r, *ts.grid, *m, child(p, "grid_radii"));
        for (const auto& z : ts.points)
          if (std::abs(z) > kGuardFraction * m->radius) r.fail(child(p, "points"), "point outside guard band");
      }
      cfg.tasks.push_back(std::move(ts));
    }
  }

  for (const auto& m : cfg.models) {
    check_grid_admissible(r, cfg.defaults.grid, m, {"defaults", "grid_radii"});
    check_grid_admissible(r, cfg.defaults.spectral_grid, m, {"defaults", "spectral_radii"});
  }

  if (doc.contains("output")) {
    const auto& o = doc["output"];
    const Path p{"output"};
    r.allow_only(o, p, {"directory", "format"});
    if (o.contains("directory")) cfg.output.directory = r.string(o["directory"], child(p, "directory"));
    if (o.contains("format")) {
      const auto f = r.string(o["format"], child(p, "format"));
      if (f == "json") cfg.output.format = ReportFormat::json;
      else if (f == "csv") cfg.output.format = ReportFormat::csv;
      else r.fail(child(p, "format"), "expected 'json' or 'csv'");
    }
  }
  return cfg;
}

}  // namespace

std::string to_string(ModelFamily f) {
  switch (f) {
    case ModelFamily::generalized_szego: return "generalized_szego";
    case ModelFamily::power_series: return "power_series";
    case ModelFamily::fock: return "fock";
  }
  return "unknown";
}

std::string to_string(TaskType t) {
  switch (t) {
    case TaskType::invariants: return "invariants";
    case TaskType::compare: return "compare";
    case TaskType::spectral: return "spectral";
    case TaskType::frame_check: return "frame_check";
  }
  return "unknown";
}

std::string to_string(ReportFormat f) { return f == ReportFormat::json ? "json" : "csv"; }

int ModelSpec::blocks() const noexcept {
  return static_cast<int>(family == ModelFamily::power_series ? coefficients.size() : mu.size());
}

const ModelSpec* JobConfig::find_model(const std::string& name) const {
  for (const auto& m : models)
    if (m.name == name) return &m;
  return nullptr;
}

JobConfig parse_config(const std::string& text) {
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // e.what() already names line and column.
    throw ConfigError("syntax", e.what());
  }
  return parse_document(text, doc);
}

JobConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

nlohmann::json config_to_json(const JobConfig& c) {
  ojson doc;
  ojson d;
  d["tol"] = c.defaults.tol;
  d["grid_radii"] = c.defaults.grid.radii;
  d["angles"] = c.defaults.grid.angles;
  d["spectral_radii"] = c.defaults.spectral_grid.radii;
  d["eigen_tol"] = c.defaults.eigen_tol;
  d["probe_truncation"] = c.defaults.probe_truncation;
  d["seed"] = c.defaults.seed;
  doc["defaults"] = d;

  ojson models = ojson::object();
  for (const auto& m : c.models) {
    ojson j;
    j["family"] = to_string(m.family);
    if (m.family == ModelFamily::power_series) {
      j["coefficients"] = m.coefficients;
    } else {
      if (m.family == ModelFamily::generalized_szego) j["lambda"] = m.lambda;
      j["mu"] = m.mu;
      j["terms"] = m.terms;
    }
    j["truncation"] = m.truncation;
    j["phase"] = m.phase;
    j["radius"] = m.radius;
    models[m.name] = j;
  }
  doc["models"] = models;

  ojson tasks = ojson::array();
  for (const auto& t : c.tasks) {
    ojson j;
    j["type"] = to_string(t.type);
    j["name"] = t.name;
    if (t.type == TaskType::compare) j["models"] = t.models;
    else j["model"] = t.models.front();
    if (t.grid) {
      j["grid_radii"] = t.grid->radii;
      j["angles"] = t.grid->angles;
    }
    if (t.tol) j["tol"] = *t.tol;
    if (t.eigen_tol) j["eigen_tol"] = *t.eigen_tol;
    if (t.probe_truncation) j["probe_truncation"] = *t.probe_truncation;
    if (!t.points.empty()) {
      ojson pts = ojson::array();
      for (const auto& z : t.points) pts.push_back({z.real(), z.imag()});
      j["points"] = pts;
    }
    if (t.type == TaskType::frame_check) j["coefficients"] = t.coefficients;
    if (t.type == TaskType::spectral) j["export_matrix"] = t.export_matrix;
    tasks.push_back(j);
  }
  doc["tasks"] = tasks;
  doc["output"] = {{"directory", c.output.directory}, {"format", to_string(c.output.format)}};
  // Round-trip through text so callers get the sorted-key json type.
  return nlohmann::json::parse(doc.dump());
}

std::vector<ScalarKernel> build_kernels(const ModelSpec& spec) {
  const DiskDomain domain = DiskDomain::with_radius(spec.radius);
  std::vector<ScalarKernel> out;
  switch (spec.family) {
    case ModelFamily::generalized_szego:
      for (std::size_t i = 0; i < spec.mu.size(); ++i)
        out.push_back(make_generalized_szego(spec.lambda + 2.0 * static_cast<double>(i), spec.mu[i], spec.terms, domain));
      break;
    case ModelFamily::fock:
      for (double mu : spec.mu) out.push_back(make_fock_kernel(mu, spec.terms, domain));
      break;
    case ModelFamily::power_series:
      for (const auto& c : spec.coefficients) out.push_back(make_power_series_kernel(c, domain));
      break;
  }
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = out[i].with_label(spec.name + ".K" + std::to_string(i));
  return out;
}

std::vector<cplx> make_grid(const GridSpec& grid) {
  std::vector<cplx> pts;
  for (double r : grid.radii) {
    if (r == 0.0) {
      pts.emplace_back(0.0, 0.0);
      continue;
    }
    for (int a = 0; a < grid.angles; ++a)
      pts.push_back(std::polar(r, 2.0 * std::numbers::pi * a / grid.angles));
  }
  return pts;
}

}  // namespace flagcd
