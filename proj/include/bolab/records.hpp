#pragma once

#include <filesystem>

#include "bolab/dynamics.hpp"
#include "bolab/theorem_lab.hpp"

namespace bolab {

/// Writes config.json, traces/<name>.csv, verdict.json, summary.md and plots.json.
void persist_record(const ExperimentRecord& record, const std::filesystem::path& dir);

/// Reads back a persisted record (config, traces, verdict, fingerprint).
ExperimentRecord load_record(const std::filesystem::path& dir);

/// plots.json manifest: one series per trace, with axis labels and fitted lines.
nlohmann::json plot_manifest(const ExperimentRecord& record);

/// Writes traces/*.csv and plots.json into `dir`.
void emit_plot_data(const ExperimentRecord& record, const std::filesystem::path& dir);

std::string summary_markdown(const ExperimentRecord& record);

/// meta.json (config, grid, times) plus snap_<index>.csv per snapshot.
void write_trajectory(const Trajectory& traj, const std::filesystem::path& dir);
Trajectory read_trajectory(const std::filesystem::path& dir);

nlohmann::json to_json(const SolverConfig& c);
SolverConfig solver_from_json(const nlohmann::json& j);

/// Serializes JSON the same way everywhere (2-space indent, trailing newline).
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace bolab
