#include "navlab/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "navlab/error.hpp"

namespace navlab::io {

namespace fs = std::filesystem;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
}

json env_to_json(const EnvGraph& env) {
  json nodes = json::array();
  for (NodeId i = 0; i < static_cast<NodeId>(env.node_count()); ++i) {
    const auto& n = env.node(i);
    nodes.push_back({{"id", i}, {"x", n.pos.x}, {"y", n.pos.y}, {"landmark", n.landmark}});
  }
  json edges = json::array();
  for (auto [u, v] : env.edges()) edges.push_back({u, v});
  return {{"id", env.id()}, {"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

namespace {

NodeId node_id(const json& v) {
  if (v.is_number_integer()) return v.get<NodeId>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    std::size_t used = 0;
    int id = 0;
    try {
      id = std::stoi(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == s.size() && !s.empty()) return id;
  }
  throw ValidationError("node ids must be integers, got " + v.dump());
}

}  // namespace

EnvGraph env_from_json(const json& doc, const std::string& fallback_id) {
  try {
    for (const auto& [key, _] : doc.items()) {
      if (key != "id" && key != "nodes" && key != "edges") {
        throw ValidationError("environment: unknown key '" + key + "'");
      }
    }
    std::string id = doc.contains("id") ? doc.at("id").get<std::string>() : fallback_id;
    const auto& jn = doc.at("nodes");
    std::vector<EnvNode> nodes(jn.size());
    std::vector<bool> seen(jn.size(), false);
    for (const auto& n : jn) {
      const NodeId i = node_id(n.at("id"));
      if (i < 0 || static_cast<std::size_t>(i) >= nodes.size() || seen[i]) {
        throw ValidationError("environment " + id + ": node ids must be unique in 0..n-1");
      }
      seen[i] = true;
      nodes[i] = EnvNode{{n.at("x").get<double>(), n.at("y").get<double>()}, n.at("landmark").get<int>()};
    }
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (const auto& e : doc.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw ValidationError("edges must be [u, v] pairs");
      edges.emplace_back(node_id(e[0]), node_id(e[1]));
    }
    return EnvGraph(std::move(id), std::move(nodes), std::move(edges));
  } catch (const json::exception& ex) {
    throw ValidationError(std::string("malformed environment: ") + ex.what());
  }
}

void save_env(const fs::path& path, const EnvGraph& env) {
  write_text(path, env_to_json(env).dump(2) + "\n");
}

EnvGraph load_env(const fs::path& path) {
  const auto text = read_text(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& ex) {
    throw ValidationError(path.string() + ": " + ex.what());
  }
  return env_from_json(doc, path.stem().string());
}

json episode_to_json(const Episode& e) {
  return {{"id", e.id},
          {"env_id", e.env_id},
          {"instruction_tokens", e.instruction_tokens},
          {"instruction_text", e.instruction_text},
          {"start", e.start},
          {"goal", e.goal},
          {"gt_path", e.gt_path}};
}

Episode episode_from_json(const json& doc) {
  try {
    Episode e;
    e.id = doc.at("id").get<std::string>();
    e.env_id = doc.at("env_id").get<std::string>();
    e.instruction_tokens = doc.at("instruction_tokens").get<std::vector<int>>();
    if (doc.contains("instruction_text")) e.instruction_text = doc.at("instruction_text").get<std::string>();
    e.start = doc.at("start").get<NodeId>();
    e.goal = doc.at("goal").get<NodeId>();
    e.gt_path = doc.at("gt_path").get<std::vector<NodeId>>();
    return e;
  } catch (const json::exception& ex) {
    throw ValidationError(std::string("malformed episode: ") + ex.what());
  }
}

void save_episodes(const fs::path& path, const std::vector<Episode>& episodes) {
  std::string text;
  for (const auto& e : episodes) text += episode_to_json(e).dump() + "\n";
  write_text(path, text);
}

std::vector<Episode> load_episodes(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::vector<Episode> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(episode_from_json(json::parse(line)));
    } catch (const json::exception& ex) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": " + ex.what());
    } catch (const ValidationError& ex) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

std::vector<EnvGraph> load_envs(const std::string& spec) {
  std::vector<fs::path> files;
  if (fs::is_directory(spec)) {
    for (const auto& entry : fs::directory_iterator(spec)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (!part.empty()) files.emplace_back(part);
    }
  }
  if (files.empty()) throw IoError("no environment files found in '" + spec + "'");
  std::vector<EnvGraph> envs;
  for (const auto& f : files) envs.push_back(load_env(f));
  return envs;
}

}  // namespace navlab::io
