#pragma once
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dipolerad/flux_engine.hpp"
#include "dipolerad/quadrature.hpp"
#include "dipolerad/spectrum.hpp"
#include "dipolerad/trajectory.hpp"

namespace dipolerad {

enum class TaskKind { rates, real_flux, virtual_flux, angular_map, classical_field, identities };

std::string task_name(TaskKind k);                       // config/task-table name
std::optional<TaskKind> task_from_name(std::string_view);  // accepts config names
std::optional<TaskKind> task_from_subcommand(std::string_view);  // CLI names

struct FieldPointSpec {
  Vec3 direction{0.0, 0.0, 1.0};
  double radius = 1.0;
  std::vector<double> times;
};

/// Parsed and validated scenario configuration. The canonical re-serialized
/// form (defaults materialized, keys sorted) defines the config hash, so the
/// hash changes exactly when a semantically relevant field changes.
struct ScenarioConfig {
  std::optional<DipoleSpectrum> spectrum;
  QuadratureSpec quadrature;
  std::vector<FieldPointSpec> field_points;
  int sphere_theta = 32;
  int sphere_phi = 64;
  std::vector<TaskKind> tasks;
  std::optional<DipoleTrajectory> trajectory;

  std::string canonical_json;  // effective config, canonical form
  std::string hash;            // FNV-1a 64 of canonical_json, hex

  static ScenarioConfig from_json_text(std::string_view text);
  static ScenarioConfig from_file(const std::filesystem::path& path);
};

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
  std::string rows_key = "rows";  // JSON key naming the row array
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::pair<std::string, std::string>> meta;  // ordered provenance lines
};

struct TaskResult {
  std::string task;
  bool ok = false;
  std::string error;
  Table table;
};

struct ResultBundle {
  std::string config_hash;
  std::string code_version;
  std::vector<TaskResult> tasks;

  bool all_ok() const;
};

/// Executes the configured tasks in order. Schema problems throw ConfigError;
/// numerical failures are recorded per task without aborting the others.
ResultBundle run_scenario(const ScenarioConfig& cfg);

enum class EmitFormat { csv, json };

/// Writes one file per task into out_dir (<task>.csv or <task>.json).
/// Identical bundles produce byte-identical files.
void emit(const ResultBundle& bundle, EmitFormat format, const std::filesystem::path& out_dir);

/// JSON text of one task result / parse-back (round-trip exact for doubles).
std::string task_to_json_text(const ResultBundle& bundle, const TaskResult& task);
TaskResult task_from_json_text(std::string_view text, std::string* config_hash = nullptr,
                               std::string* code_version = nullptr);

/// Full-double text form used in CSV: 17 significant digits, C locale.
std::string format_double(double v);

std::string code_version();

}  // namespace dipolerad
