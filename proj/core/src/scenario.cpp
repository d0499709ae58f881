#include "dipolerad/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dipolerad/classical_fields.hpp"
#include "dipolerad/errors.hpp"
#include "dipolerad/numerics.hpp"

namespace dipolerad {

namespace {

using nlohmann::json;

constexpr const char* kCodeVersion = "dipole-flux 0.1.0";

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

const json& require_key(const json& obj, const char* key, const std::string& path) {
  if (!obj.contains(key)) throw ConfigError(path + ": missing key '" + key + "'");
  return obj.at(key);
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* k) { return it.key() == k; }) == allowed.end())
      throw ConfigError(path + ": unknown key '" + it.key() + "'");
  }
}

double number_at(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path + ": must be a number");
  return j.get<double>();
}

int int_at(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path + ": must be an integer");
  return j.get<int>();
}

Vec3 vec3_at(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(path + ": must be an array of 3 numbers");
  for (const auto& c : j)
    if (!c.is_number()) throw ConfigError(path + ": must be an array of 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

std::string code_version() { return kCodeVersion; }

std::string task_name(TaskKind k) {
  switch (k) {
    case TaskKind::rates: return "rates";
    case TaskKind::real_flux: return "real-flux";
    case TaskKind::virtual_flux: return "virtual-flux";
    case TaskKind::angular_map: return "angular-map";
    case TaskKind::classical_field: return "classical-field";
    case TaskKind::identities: return "identities";
  }
  return "?";
}

std::optional<TaskKind> task_from_name(std::string_view n) {
  if (n == "rates") return TaskKind::rates;
  if (n == "real-flux") return TaskKind::real_flux;
  if (n == "virtual-flux") return TaskKind::virtual_flux;
  if (n == "angular-map") return TaskKind::angular_map;
  if (n == "classical-field") return TaskKind::classical_field;
  if (n == "identities") return TaskKind::identities;
  return std::nullopt;
}

std::optional<TaskKind> task_from_subcommand(std::string_view n) {
  if (n == "rates") return TaskKind::rates;
  if (n == "flux") return TaskKind::real_flux;
  if (n == "virtual") return TaskKind::virtual_flux;
  if (n == "map") return TaskKind::angular_map;
  if (n == "classical") return TaskKind::classical_field;
  if (n == "check") return TaskKind::identities;
  return std::nullopt;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

ScenarioConfig ScenarioConfig::from_json_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: JSON parse error: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  check_keys(j, {"spectrum", "quadrature", "field_points", "sphere_order", "tasks", "trajectory"},
             "config");

  ScenarioConfig cfg;

  if (j.contains("spectrum"))
    cfg.spectrum = DipoleSpectrum::from_json_text(j.at("spectrum").dump());

  if (cfg.spectrum) cfg.quadrature = QuadratureSpec::defaults_for(*cfg.spectrum);
  if (j.contains("quadrature")) {
    const auto& q = j.at("quadrature");
    const std::string path = "config.quadrature";
    if (!q.is_object()) throw ConfigError(path + ": must be an object");
    check_keys(q, {"cutoff", "regulator", "epsilon", "n_nodes", "nodes_per_panel", "prescription"},
               path);
    if (q.contains("cutoff")) cfg.quadrature.cutoff = number_at(q.at("cutoff"), path + ".cutoff");
    if (q.contains("epsilon"))
      cfg.quadrature.epsilon = number_at(q.at("epsilon"), path + ".epsilon");
    if (q.contains("n_nodes")) cfg.quadrature.n_nodes = int_at(q.at("n_nodes"), path + ".n_nodes");
    if (q.contains("nodes_per_panel"))
      cfg.quadrature.nodes_per_panel = int_at(q.at("nodes_per_panel"), path + ".nodes_per_panel");
    if (q.contains("regulator")) {
      const auto& r = q.at("regulator");
      if (!r.is_object()) throw ConfigError(path + ".regulator: must be an object");
      check_keys(r, {"type", "scale"}, path + ".regulator");
      const auto& type = require_key(r, "type", path + ".regulator");
      if (!type.is_string()) throw ConfigError(path + ".regulator.type: must be a string");
      const std::string tn = type.get<std::string>();
      if (tn == "sharp") {
        cfg.quadrature.regulator = {RegulatorKind::sharp, 1.0};
      } else if (tn == "exponential") {
        const double scale =
            number_at(require_key(r, "scale", path + ".regulator"), path + ".regulator.scale");
        cfg.quadrature.regulator = {RegulatorKind::exponential, scale};
      } else {
        throw ConfigError(path + ".regulator.type: must be 'sharp' or 'exponential'");
      }
    }
    if (q.contains("prescription")) {
      const auto& pj = q.at("prescription");
      if (!pj.is_string()) throw ConfigError(path + ".prescription: must be a string");
      const std::string pn = pj.get<std::string>();
      if (pn == "retarded") cfg.quadrature.prescription = PolePrescription::retarded;
      else if (pn == "principal-value")
        cfg.quadrature.prescription = PolePrescription::principal_value;
      else
        throw ConfigError(path + ".prescription: must be 'retarded' or 'principal-value'");
    }
  }
  cfg.quadrature.validate();
  if (cfg.spectrum) cfg.quadrature.validate_for(*cfg.spectrum);

  if (j.contains("field_points")) {
    const auto& fps = j.at("field_points");
    if (!fps.is_array()) throw ConfigError("config.field_points: must be an array");
    for (std::size_t i = 0; i < fps.size(); ++i) {
      const std::string path = "config.field_points[" + std::to_string(i) + "]";
      const auto& fp = fps[i];
      if (!fp.is_object()) throw ConfigError(path + ": must be an object");
      check_keys(fp, {"direction", "radius", "times"}, path);
      FieldPointSpec spec;
      spec.direction = vec3_at(require_key(fp, "direction", path), path + ".direction");
      spec.radius = number_at(require_key(fp, "radius", path), path + ".radius");
      if (!(spec.radius > 0.0)) throw ConfigError(path + ".radius: must be > 0");
      const auto& times = require_key(fp, "times", path);
      if (!times.is_array() || times.empty())
        throw ConfigError(path + ".times: must be a non-empty array of numbers");
      for (std::size_t k = 0; k < times.size(); ++k)
        spec.times.push_back(
            number_at(times[k], path + ".times[" + std::to_string(k) + "]"));
      cfg.field_points.push_back(std::move(spec));
    }
  }

  if (j.contains("sphere_order")) {
    const auto& so = j.at("sphere_order");
    if (!so.is_array() || so.size() != 2)
      throw ConfigError("config.sphere_order: must be [n_theta, n_phi]");
    cfg.sphere_theta = int_at(so[0], "config.sphere_order[0]");
    cfg.sphere_phi = int_at(so[1], "config.sphere_order[1]");
    if (cfg.sphere_theta < 1 || cfg.sphere_phi < 1)
      throw ConfigError("config.sphere_order: orders must be positive");
  }

  const auto& tasks = require_key(j, "tasks", "config");
  if (!tasks.is_array() || tasks.empty())
    throw ConfigError("config.tasks: must be a non-empty array of task names");
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const std::string path = "config.tasks[" + std::to_string(i) + "]";
    if (!tasks[i].is_string()) throw ConfigError(path + ": must be a string");
    const auto k = task_from_name(tasks[i].get<std::string>());
    if (!k)
      throw ConfigError(path + ": unknown task '" + tasks[i].get<std::string>() +
                        "' (expected rates|real-flux|virtual-flux|angular-map|"
                        "classical-field|identities)");
    cfg.tasks.push_back(*k);
  }

  if (j.contains("trajectory"))
    cfg.trajectory = DipoleTrajectory::from_json_text(j.at("trajectory").dump());

  // per-task requirements, checked up front so misconfiguration is a schema
  // error (exit 2) rather than a runtime task failure
  for (const TaskKind k : cfg.tasks) {
    const bool needs_spectrum = k == TaskKind::rates || k == TaskKind::real_flux ||
                                k == TaskKind::virtual_flux || k == TaskKind::angular_map;
    if (needs_spectrum && !cfg.spectrum)
      throw ConfigError("config: task '" + task_name(k) + "' requires a spectrum section");
    if (k == TaskKind::virtual_flux && cfg.field_points.empty())
      throw ConfigError("config: task 'virtual-flux' requires field_points (radius and times)");
    if (k == TaskKind::classical_field) {
      if (!cfg.trajectory)
        throw ConfigError("config: task 'classical-field' requires a trajectory section");
      if (cfg.field_points.empty())
        throw ConfigError("config: task 'classical-field' requires field_points");
    }
  }

  // canonical effective config -> hash
  json canon;
  if (cfg.spectrum) {
    json levels = json::array();
    for (const auto& lvl : cfg.spectrum->levels())
      levels.push_back({{"label", lvl.label}, {"energy", lvl.energy}});
    json dipoles = json::array();
    for (const auto& t : cfg.spectrum->transitions()) {
      if (t.from > t.to) continue;  // one canonical direction per stored pair
      dipoles.push_back({{"from", t.from_label},
                         {"to", t.to_label},
                         {"re", {t.d_em.x.real(), t.d_em.y.real(), t.d_em.z.real()}},
                         {"im", {t.d_em.x.imag(), t.d_em.y.imag(), t.d_em.z.imag()}}});
    }
    canon["spectrum"] = {{"levels", levels},
                         {"dipoles", dipoles},
                         {"excited", cfg.spectrum->excited_label()}};
  }
  canon["quadrature"] = {
      {"cutoff", cfg.quadrature.cutoff},
      {"epsilon", cfg.quadrature.epsilon},
      {"n_nodes", cfg.quadrature.n_nodes},
      {"nodes_per_panel", cfg.quadrature.nodes_per_panel},
      {"prescription",
       cfg.quadrature.prescription == PolePrescription::retarded ? "retarded" : "principal-value"},
      {"regulator",
       {{"type", cfg.quadrature.regulator.kind == RegulatorKind::sharp ? "sharp" : "exponential"},
        {"scale", cfg.quadrature.regulator.scale}}}};
  canon["sphere_order"] = {cfg.sphere_theta, cfg.sphere_phi};
  json fps = json::array();
  for (const auto& fp : cfg.field_points)
    fps.push_back({{"direction", {fp.direction.x, fp.direction.y, fp.direction.z}},
                   {"radius", fp.radius},
                   {"times", fp.times}});
  canon["field_points"] = fps;
  json tnames = json::array();
  for (const TaskKind k : cfg.tasks) tnames.push_back(task_name(k));
  canon["tasks"] = tnames;
  if (j.contains("trajectory")) {
    const auto& tj = j.at("trajectory");
    json ct;
    ct["type"] = tj.value("type", "");
    if (ct["type"] == "harmonic") {
      ct["d0"] = tj.at("d0");
      ct["omega"] = tj.at("omega");
      ct["phase"] = tj.value("phase", 0.0);
    } else {
      ct["dt"] = tj.at("dt");
      ct["samples"] = tj.at("samples");
    }
    canon["trajectory"] = ct;
  }
  cfg.canonical_json = canon.dump();
  cfg.hash = hex64(fnv1a64(cfg.canonical_json));
  return cfg;
}

ScenarioConfig ScenarioConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

bool ResultBundle::all_ok() const {
  return std::all_of(tasks.begin(), tasks.end(), [](const TaskResult& t) { return t.ok; });
}

// ---------------------------------------------------------------------------
// task builders
// ---------------------------------------------------------------------------

namespace {

void add_quadrature_meta(Table& t, const QuadratureSpec& spec) {
  t.meta.emplace_back("cutoff", format_double(spec.cutoff));
  t.meta.emplace_back("epsilon", format_double(spec.epsilon));
  t.meta.emplace_back("regulator", spec.regulator.name());
  t.meta.emplace_back("prescription", spec.prescription == PolePrescription::retarded
                                          ? "retarded"
                                          : "principal-value");
  t.meta.emplace_back("units", "natural (hbar=c=eps0=mu0=1)");
}

Table build_rates(const ScenarioConfig& cfg) {
  const auto& s = *cfg.spectrum;
  const auto flux = real_flux(s);
  Table t;
  t.rows_key = "transitions";
  t.columns = {"from", "to", "omega", "gamma", "power"};
  for (const auto& term : flux.terms)
    t.rows.push_back({s.excited_label(), term.to, term.omega_em, term.gamma, term.power});
  t.meta.emplace_back("P_real", format_double(flux.total));
  t.meta.emplace_back("units", "natural (hbar=c=eps0=mu0=1)");
  return t;
}

Table build_real_flux(const ScenarioConfig& cfg) {
  const auto& s = *cfg.spectrum;
  const auto grid = SphericalGrid::product_gauss(cfg.sphere_theta, cfg.sphere_phi);
  const auto flux = real_flux(s);
  const double quad = total_real_flux(s, grid, cfg.quadrature);
  Table t;
  t.rows_key = "transitions";
  t.columns = {"from", "to", "omega", "gamma", "power"};
  for (const auto& term : flux.terms)
    t.rows.push_back({s.excited_label(), term.to, term.omega_em, term.gamma, term.power});
  t.meta.emplace_back("P_real_spectrum_path", format_double(flux.total));
  t.meta.emplace_back("P_real_quadrature_path", format_double(quad));
  const double scale = std::max({std::abs(flux.total), std::abs(quad), 1e-300});
  t.meta.emplace_back("relative_difference", format_double(std::abs(flux.total - quad) / scale));
  t.meta.emplace_back("sphere_order", std::to_string(cfg.sphere_theta) + "x" +
                                          std::to_string(cfg.sphere_phi));
  t.meta.emplace_back("units", "natural (hbar=c=eps0=mu0=1)");
  return t;
}

Table build_virtual_flux(const ScenarioConfig& cfg) {
  const auto& s = *cfg.spectrum;
  const auto grid = SphericalGrid::product_gauss(cfg.sphere_theta, cfg.sphere_phi);
  Table t;
  t.rows_key = "series";
  t.columns = {"point", "t", "t_r", "P_virtual", "cutoff", "regulator"};
  double max_residual = 0.0;
  for (std::size_t i = 0; i < cfg.field_points.size(); ++i) {
    const auto& fp = cfg.field_points[i];
    const auto series = virtual_flux_series(s, fp.radius, fp.times, grid, cfg.quadrature);
    for (const auto& smp : series.samples) {
      max_residual = std::max(max_residual, smp.imag_residual);
      t.rows.push_back({static_cast<std::int64_t>(i), smp.t, smp.t_r, smp.value,
                        cfg.quadrature.cutoff, cfg.quadrature.regulator.name()});
    }
    if (fp.times.size() >= 2) {
      std::vector<double> ts, vs;
      for (const auto& smp : series.samples) {
        ts.push_back(smp.t_r);
        vs.push_back(smp.value);
      }
      const double window = ts.back() - ts.front();
      if (window > 0.0)
        t.meta.emplace_back("time_average_point" + std::to_string(i),
                            format_double(time_average(ts, vs, window)));
    }
  }
  t.meta.emplace_back("imag_residual_max", format_double(max_residual));
  add_quadrature_meta(t, cfg.quadrature);
  return t;
}

Table build_angular_map(const ScenarioConfig& cfg) {
  const auto& s = *cfg.spectrum;
  const auto grid = SphericalGrid::product_gauss(cfg.sphere_theta, cfg.sphere_phi);
  Table t;
  t.rows_key = "points";
  t.columns = {"theta", "phi", "weight", "x2_first_order", "x2_real_second_order", "x2_density"};
  std::vector<double> weighted;
  weighted.reserve(grid.nodes.size());
  for (const auto& node : grid.nodes) {
    const double first = first_order_density(s, node.dir);
    const double second = real_second_order_density_analytic(s, node.dir);
    const double theta = std::acos(std::clamp(node.dir.z, -1.0, 1.0));
    const double phi = std::atan2(node.dir.y, node.dir.x);
    t.rows.push_back({theta, phi, node.weight, first, second, first + second});
    weighted.push_back(node.weight * (first + second));
  }
  const double sum = pairwise_sum(weighted);
  t.meta.emplace_back("sphere_sum", format_double(sum));
  t.meta.emplace_back("P_real_spectrum_path", format_double(real_flux(s).total));
  t.meta.emplace_back("sphere_order", std::to_string(cfg.sphere_theta) + "x" +
                                          std::to_string(cfg.sphere_phi));
  t.meta.emplace_back("units", "natural (hbar=c=eps0=mu0=1)");
  return t;
}

Table build_classical_field(const ScenarioConfig& cfg) {
  const auto& traj = *cfg.trajectory;
  const auto grid = SphericalGrid::product_gauss(cfg.sphere_theta, cfg.sphere_phi);
  Table t;
  t.rows_key = "samples";
  t.columns = {"point", "t",       "t_r",     "radius",  "dir_x",   "dir_y",   "dir_z",
               "near_x", "near_y",  "near_z",  "mid_x",   "mid_y",   "mid_z",   "far_x",
               "far_y",  "far_z",   "total_x", "total_y", "total_z", "E_rad_x", "E_rad_y",
               "E_rad_z", "B_rad_x", "B_rad_y", "B_rad_z", "A_rad_x", "A_rad_y", "A_rad_z",
               "poynting_radial", "sphere_power"};
  for (std::size_t i = 0; i < cfg.field_points.size(); ++i) {
    const auto& fp = cfg.field_points[i];
    const Vec3 dir = triad_for(fp.direction).xhat;
    for (const double time : fp.times) {
      const FieldPoint p{dir, fp.radius, time};
      const auto z = electric_source_field(traj, p);
      const auto rad = radiation_source_fields(traj, p);
      const Vec3 a = radiation_source_potential(traj, p);
      const Vec3 total = z.total();
      const double sr = dot(dir, cross(rad.E, rad.B));
      const double power = classical_radiated_power(traj, fp.radius, time, grid);
      t.rows.push_back({static_cast<std::int64_t>(i), time, p.retarded_time(), fp.radius,
                        dir.x, dir.y, dir.z, z.near.x, z.near.y, z.near.z, z.intermediate.x,
                        z.intermediate.y, z.intermediate.z, z.far.x, z.far.y, z.far.z, total.x,
                        total.y, total.z, rad.E.x, rad.E.y, rad.E.z, rad.B.x, rad.B.y, rad.B.z,
                        a.x, a.y, a.z, sr, power});
    }
  }
  t.meta.emplace_back("trajectory", cfg.trajectory->is_harmonic() ? "harmonic" : "tabulated");
  t.meta.emplace_back("units", "natural (hbar=c=eps0=mu0=1)");
  return t;
}

struct IdentityCheck {
  std::string name;
  double computed = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool pass() const { return std::abs(computed - expected) <= tolerance; }
};

Table build_identities(const ScenarioConfig& cfg, bool* all_pass, std::string* failed_names);

}  // namespace

ResultBundle run_scenario(const ScenarioConfig& cfg) {
  ResultBundle bundle;
  bundle.config_hash = cfg.hash;
  bundle.code_version = kCodeVersion;
  for (const TaskKind kind : cfg.tasks) {
    TaskResult result;
    result.task = task_name(kind);
    try {
      switch (kind) {
        case TaskKind::rates: result.table = build_rates(cfg); result.ok = true; break;
        case TaskKind::real_flux: result.table = build_real_flux(cfg); result.ok = true; break;
        case TaskKind::virtual_flux:
          result.table = build_virtual_flux(cfg);
          result.ok = true;
          break;
        case TaskKind::angular_map:
          result.table = build_angular_map(cfg);
          result.ok = true;
          break;
        case TaskKind::classical_field:
          result.table = build_classical_field(cfg);
          result.ok = true;
          break;
        case TaskKind::identities: {
          bool pass = true;
          std::string failed;
          result.table = build_identities(cfg, &pass, &failed);
          result.ok = pass;
          if (!pass) result.error = "identity check failed: " + failed;
          break;
        }
      }
    } catch (const std::exception& e) {
      result.ok = false;
      result.error = e.what();
    }
    bundle.tasks.push_back(std::move(result));
  }
  return bundle;
}

// ---------------------------------------------------------------------------
// emission
// ---------------------------------------------------------------------------

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

std::string cell_to_csv(const Cell& c) {
  if (std::holds_alternative<double>(c)) return format_double(std::get<double>(c));
  if (std::holds_alternative<std::int64_t>(c)) return std::to_string(std::get<std::int64_t>(c));
  return csv_escape(std::get<std::string>(c));
}

json cell_to_json(const Cell& c) {
  if (std::holds_alternative<double>(c)) return std::get<double>(c);
  if (std::holds_alternative<std::int64_t>(c)) return std::get<std::int64_t>(c);
  return std::get<std::string>(c);
}

}  // namespace

std::string task_to_json_text(const ResultBundle& bundle, const TaskResult& task) {
  json j;
  j["provenance"] = {{"code_version", bundle.code_version},
                     {"config_hash", bundle.config_hash},
                     {"task", task.task},
                     {"ok", task.ok},
                     {"error", task.error}};
  json meta = json::object();
  for (const auto& [k, v] : task.table.meta) meta[k] = v;
  j["meta"] = meta;
  j["columns"] = task.table.columns;
  j["rows_key"] = task.table.rows_key;
  json rows = json::array();
  for (const auto& row : task.table.rows) {
    json obj = json::object();
    for (std::size_t c = 0; c < task.table.columns.size(); ++c)
      obj[task.table.columns[c]] = cell_to_json(row[c]);
    rows.push_back(std::move(obj));
  }
  j[task.table.rows_key] = std::move(rows);
  return j.dump(2) + "\n";
}

TaskResult task_from_json_text(std::string_view text, std::string* config_hash,
                               std::string* code_version_out) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("result: JSON parse error: ") + e.what());
  }
  TaskResult out;
  const auto& prov = j.at("provenance");
  out.task = prov.at("task").get<std::string>();
  out.ok = prov.at("ok").get<bool>();
  out.error = prov.at("error").get<std::string>();
  if (config_hash) *config_hash = prov.at("config_hash").get<std::string>();
  if (code_version_out) *code_version_out = prov.at("code_version").get<std::string>();
  out.table.rows_key = j.at("rows_key").get<std::string>();
  out.table.columns = j.at("columns").get<std::vector<std::string>>();
  for (auto it = j.at("meta").begin(); it != j.at("meta").end(); ++it)
    out.table.meta.emplace_back(it.key(), it.value().get<std::string>());
  for (const auto& row : j.at(out.table.rows_key)) {
    std::vector<Cell> cells;
    for (const auto& col : out.table.columns) {
      const auto& v = row.at(col);
      if (v.is_number_float()) cells.emplace_back(v.get<double>());
      else if (v.is_number_integer()) cells.emplace_back(v.get<std::int64_t>());
      else cells.emplace_back(v.get<std::string>());
    }
    out.table.rows.push_back(std::move(cells));
  }
  return out;
}

void emit(const ResultBundle& bundle, EmitFormat format, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  for (const auto& task : bundle.tasks) {
    const std::string ext = format == EmitFormat::csv ? ".csv" : ".json";
    const auto path = out_dir / (task.task + ext);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("emit: cannot open '" + path.string() + "' for writing");
    if (format == EmitFormat::json) {
      out << task_to_json_text(bundle, task);
    } else {
      out << "# code_version=" << bundle.code_version << "\n";
      out << "# config_hash=" << bundle.config_hash << "\n";
      out << "# task=" << task.task << "\n";
      out << "# ok=" << (task.ok ? "true" : "false") << "\n";
      if (!task.ok) out << "# error=" << task.error << "\n";
      for (const auto& [k, v] : task.table.meta) out << "# " << k << "=" << v << "\n";
      for (std::size_t c = 0; c < task.table.columns.size(); ++c)
        out << (c ? "," : "") << task.table.columns[c];
      out << "\n";
      for (const auto& row : task.table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << cell_to_csv(row[c]);
        out << "\n";
      }
    }
    if (!out) throw ConfigError("emit: write failed for '" + path.string() + "'");
  }
}

// ---------------------------------------------------------------------------
// identities task: desk-scale verification of the analytic relations the
// library is built on
// ---------------------------------------------------------------------------

namespace {

Table build_identities(const ScenarioConfig& cfg, bool* all_pass, std::string* failed_names) {
  std::vector<IdentityCheck> checks;
  std::mt19937 rng(0x5eedu);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  auto random_dir = [&]() {
    Vec3 v;
    do {
      v = {uni(rng), uni(rng), uni(rng)};
    } while (norm2(v) < 1e-4 || norm2(v) > 1.0);
    return v / norm(v);
  };
  auto random_cvec = [&]() {
    return CVec3{{uni(rng), uni(rng)}, {uni(rng), uni(rng)}, {uni(rng), uni(rng)}};
  };

  // polarization completeness and triad orthonormality
  {
    double max_pol = 0.0, max_triad = 0.0;
    for (int i = 0; i < 2000; ++i) {
      const Vec3 n = random_dir();
      const CVec3 d = random_cvec();
      const auto tr = triad_for(n);
      const double sum = std::norm(dot(tr.e1, d)) + std::norm(dot(tr.e2, d));
      const double comp = norm2(d) - std::norm(dot(tr.xhat, d));
      max_pol = std::max(max_pol, std::abs(sum - comp) / std::max(norm2(d), 1e-30));
      max_triad = std::max({max_triad, std::abs(dot(tr.e1, tr.e2)),
                            std::abs(dot(tr.e1, tr.xhat)), std::abs(dot(tr.e2, tr.xhat)),
                            std::abs(norm2(tr.e1) - 1.0), std::abs(norm2(tr.e2) - 1.0),
                            norm(cross(tr.e1, tr.e2) - tr.xhat)});
    }
    checks.push_back({"polarization_completeness", max_pol, 0.0, 1e-12});
    checks.push_back({"triad_orthonormality", max_triad, 0.0, 1e-13});
  }

  const auto grid = SphericalGrid::product_gauss(cfg.sphere_theta, cfg.sphere_phi);

  // sphere integral of the polarization sum = (8 pi / 3) |d|^2
  {
    const CVec3 d = random_cvec();
    const double val =
        integrate_sphere([&](const Vec3& n) { return polarization_sum(d, n); }, grid);
    const double expected = 8.0 * std::numbers::pi / 3.0 * norm2(d);
    checks.push_back({"polsum_sphere_integral", val / expected, 1.0, 1e-8});
  }

  // radiation fields: transversality and B = xhat x E; E = -dA/dt by FD
  {
    const auto traj = DipoleTrajectory::harmonic({0.3, -0.2, 1.0}, 1.3, 0.4);
    double max_tv = 0.0, max_fd = 0.0;
    for (int i = 0; i < 64; ++i) {
      const Vec3 n = random_dir();
      const FieldPoint p{n, 2.0, 5.0 + 0.1 * i};
      const auto f = radiation_source_fields(traj, p);
      max_tv = std::max({max_tv, std::abs(dot(n, f.E)), std::abs(dot(n, f.B)),
                         norm(f.B - cross(n, f.E))});
      const double h = 1e-4;
      const Vec3 ap = radiation_source_potential(traj, {n, p.radius, p.t + h});
      const Vec3 am = radiation_source_potential(traj, {n, p.radius, p.t - h});
      max_fd = std::max(max_fd, norm((am - ap) / (2.0 * h) - f.E));
    }
    checks.push_back({"radiation_transversality", max_tv, 0.0, 1e-14});
    checks.push_back({"E_equals_minus_dA_dt", max_fd, 0.0, 1e-6});
  }

  // Larmor: time-averaged harmonic power = omega^4 d0^2 / (12 pi)
  {
    const double omega = 1.7, d0 = 0.8, radius = 3.0;
    const auto traj = DipoleTrajectory::harmonic({0.0, 0.0, d0}, omega);
    const int n = 64;
    std::vector<double> ts(n + 1), vs(n + 1);
    const double period = 2.0 * std::numbers::pi / omega;
    for (int i = 0; i <= n; ++i) {
      ts[i] = radius + period * i / n;
      vs[i] = classical_radiated_power(traj, radius, ts[i], grid);
    }
    const double avg = time_average(ts, vs, period);
    const double larmor = std::pow(omega, 4) * d0 * d0 / (12.0 * std::numbers::pi);
    checks.push_back({"larmor_time_average", avg / larmor, 1.0, 1e-6});
  }

  // nascent delta: extrapolated PV/delta integral -> 2 pi w(omega0)
  {
    QuadratureSpec spec;
    spec.cutoff = 100.0;
    spec.epsilon = 1e-3;
    const auto pvx =
        pv_delta_extrapolated(1.0, [](double w) { return w * w * w * w; }, spec);
    checks.push_back(
        {"pv_delta_limit", pvx.value / (2.0 * std::numbers::pi), 1.0, 1e-4});
  }

  // finite-time line kernel: Gaussian moment and first zero location
  {
    const double tau = 200.0;
    const GaussRule& rule = cached_gauss_legendre(12);
    const double L = 9.0, wpanel = std::numbers::pi / tau;
    const int n_panels = static_cast<int>(std::ceil(L / wpanel));
    std::vector<double> parts;
    parts.reserve(n_panels);
    for (int k = 0; k < n_panels; ++k) {
      const double a = L * k / n_panels, b = L * (k + 1) / n_panels;
      const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      double acc = 0.0;
      for (std::size_t q = 0; q < rule.x.size(); ++q) {
        const double w = mid + half * rule.x[q];
        acc += rule.w[q] * delta_tau(w, tau) * std::exp(-w * w);
      }
      parts.push_back(half * acc);
    }
    const double integral = 2.0 * pairwise_sum(parts);  // delta_tau is even
    checks.push_back({"delta_tau_gaussian_moment", integral, 1.0, 5e-3});

    double lo = std::numbers::pi / tau, hi = 3.0 * std::numbers::pi / tau;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (delta_tau(lo, tau) * delta_tau(mid, tau) <= 0.0) hi = mid;
      else lo = mid;
    }
    checks.push_back(
        {"delta_tau_first_zero", 0.5 * (lo + hi), 2.0 * std::numbers::pi / tau, 1e-9});
  }

  // second-order integrand: entire form equals time-independent + oscillatory
  {
    std::uniform_real_distribution<double> uw(0.05, 4.0);
    std::uniform_real_distribution<double> up(-2.0, 2.0);
    std::uniform_real_distribution<double> ut(0.0, 20.0);
    double max_resid = 0.0;
    for (int i = 0; i < 2000; ++i) {
      const double w = uw(rng);
      double p = up(rng);
      if (std::abs(std::abs(p) - w) < 1e-3) p += 0.01;  // keep off the removable points
      const double tr = ut(rng);
      const auto split = second_order_integrand_split(w, p, tr);
      const auto whole = second_order_integrand(w, p, tr);
      const double scale =
          std::max({1.0, std::abs(split.time_independent), std::abs(split.oscillatory)});
      max_resid = std::max(
          max_resid, std::abs(split.time_independent + split.oscillatory - whole) / scale);
    }
    checks.push_back({"second_order_integrand_split", max_resid, 0.0, 1e-10});
  }

  // upward-transition cancellation and the two real-flux routes
  {
    RawSpectrum raw;
    raw.levels = {{"g", 0.0}, {"e", 1.0}, {"u", 1.7}};
    raw.dipoles = {{"e", "g", CVec3{{0.4, 0}, {0, 0.3}, {0.7, 0}}},
                   {"e", "u", CVec3{{0.2, 0.1}, {0, 0}, {0.5, 0}}}};
    raw.excited = "e";
    const auto s = DipoleSpectrum::validate(raw);
    const Vec3 n = random_dir();
    const auto first = first_order_terms(s, n);
    const auto second = real_second_order_terms_analytic(s, n);
    double upward_sum = 0.0;
    const auto u_idx = *s.index_of("u");
    for (std::size_t i = 0; i < first.size(); ++i)
      if (first[i].m == u_idx) upward_sum += first[i].value + second[i].value;
    checks.push_back({"upward_cancellation", upward_sum, 0.0, 0.0});

    QuadratureSpec spec = QuadratureSpec::defaults_for(s);
    const double quad = total_real_flux(s, grid, spec);
    const double direct = real_flux(s).total;
    checks.push_back({"real_flux_two_routes", quad / direct, 1.0, 1e-10});
  }

  // f kernel: series/direct agreement at the branch switch point (same
  // argument, both expansions)
  {
    const double t = 2.0;
    const double w = 1.0000001e-4 / t;  // just above the switch: direct branch
    const auto direct = f_kernel(w, t);
    const double wt = w * t;
    const std::complex<double> series{t * (1.0 - wt * wt / 6.0), t * wt * 0.5};
    checks.push_back(
        {"f_kernel_branch_agreement", std::abs(direct - series) / std::abs(direct), 0.0, 1e-13});
  }

  Table t;
  t.rows_key = "checks";
  t.columns = {"identity", "computed", "expected", "abs_error", "tolerance", "pass"};
  *all_pass = true;
  for (const auto& c : checks) {
    const bool ok = c.pass();
    if (!ok) {
      *all_pass = false;
      if (!failed_names->empty()) *failed_names += ", ";
      *failed_names += c.name;
    }
    t.rows.push_back({c.name, c.computed, c.expected, std::abs(c.computed - c.expected),
                      c.tolerance, static_cast<std::int64_t>(ok ? 1 : 0)});
  }
  t.meta.emplace_back("units", "natural (hbar=c=eps0=mu0=1)");
  return t;
}

}  // namespace

}  // namespace dipolerad
