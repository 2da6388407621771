#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "navlab/episode.hpp"
#include "navlab/graph.hpp"

// File formats: environments are JSON
//   {"id": ..., "nodes": [{"id","x","y","landmark"}], "edges": [[u, v]]}
// with edge lengths derived from positions, never stored. Episodes are JSON
// Lines, one object per episode.

namespace navlab::io {

using json = nlohmann::json;

json env_to_json(const EnvGraph& env);
/// `fallback_id` is used when the document carries no "id".
EnvGraph env_from_json(const json& doc, const std::string& fallback_id);

void save_env(const std::filesystem::path& path, const EnvGraph& env);
EnvGraph load_env(const std::filesystem::path& path);

json episode_to_json(const Episode& e);
Episode episode_from_json(const json& doc);

void save_episodes(const std::filesystem::path& path, const std::vector<Episode>& episodes);
std::vector<Episode> load_episodes(const std::filesystem::path& path);

/// Loads every *.json in a directory, or a comma separated list of files.
std::vector<EnvGraph> load_envs(const std::string& spec);

std::string read_text(const std::filesystem::path& path);
/// Writes via a temporary file and rename.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace navlab::io
