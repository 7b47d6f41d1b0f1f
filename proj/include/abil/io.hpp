#pragma once
// Artifact persistence: JSONL datasets (one trajectory per line), JSON model
// bundles, CSV evaluation reports, and the run manifest written alongside
// every artifact. Readers validate a schema version field and reject files
// that do not match; numbers round-trip bit-exactly through the shortest
// JSON representation.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "abil/expert.hpp"
#include "abil/gridworld.hpp"
#include "abil/kb.hpp"
#include "abil/mlp.hpp"
#include "abil/perception.hpp"
#include "abil/policy.hpp"
#include "abil/runner.hpp"
#include "abil/symbolic.hpp"

namespace abil {

inline constexpr int kDatasetSchema = 1;
inline constexpr int kModelSchema = 1;
inline constexpr const char* kToolVersion = "0.1.0";

struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------- files ----

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path);
  out << content;
  if (!out) throw FormatError("short write to " + path);
}

// ---------------------------------------------------------------- atoms ----

// Episode artifacts carry ground atoms only: "pred(3)" / "next-to(3,7)".
inline std::string render_atom(const GroundAtom& a) {
  for (const ObjectRef& r : a.args)
    if (!r.bound()) throw FormatError("unbound role in artifact atom " + to_string(a));
  return to_string(a);
}

inline GroundAtom parse_atom(const std::string& text) {
  std::size_t open = text.find('(');
  if (open == 0 || open == std::string::npos || text.back() != ')')
    throw FormatError("malformed atom: " + text);
  GroundAtom a;
  a.pred = text.substr(0, open);
  std::string args = text.substr(open + 1, text.size() - open - 2);
  if (args.empty()) throw FormatError("atom needs at least one argument: " + text);
  std::size_t pos = 0;
  while (pos <= args.size()) {
    std::size_t comma = args.find(',', pos);
    std::string tok = args.substr(pos, comma == std::string::npos ? comma : comma - pos);
    if (tok.empty() || !std::all_of(tok.begin(), tok.end(),
                                    [](unsigned char c) { return std::isdigit(c); }))
      throw FormatError("atom arguments must be object ids: " + text);
    a.args.push_back(obj(std::stoi(tok)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return a;
}

namespace iodetail {

inline nlohmann::json goal_json(const SymbolicState& goal) {
  nlohmann::json arr = nlohmann::json::array();
  for (const GroundAtom& a : goal.atoms) arr.push_back(render_atom(a));
  return arr;
}

inline SymbolicState goal_from_json(const nlohmann::json& arr) {
  std::vector<GroundAtom> atoms;
  for (const auto& item : arr) atoms.push_back(parse_atom(item.get<std::string>()));
  return SymbolicState{std::move(atoms)};
}

template <class Enum>
Enum checked_enum(int value, int limit, const char* what) {
  if (value < 0 || value >= limit)
    throw FormatError(std::string(what) + " out of range: " + std::to_string(value));
  return static_cast<Enum>(value);
}

inline nlohmann::json state_json(const EnvState& s) {
  std::string wall(s.wall.size(), '0');
  for (std::size_t i = 0; i < s.wall.size(); ++i)
    if (s.wall[i]) wall[i] = '1';
  nlohmann::json objects = nlohmann::json::array();
  for (const GridObject& o : s.objects)
    objects.push_back({o.id, static_cast<int>(o.kind), static_cast<int>(o.color), o.x, o.y,
                       static_cast<int>(o.door), o.carried ? 1 : 0});
  return {{"w", s.width},
          {"h", s.height},
          {"wall", wall},
          {"agent", {s.agent_x, s.agent_y, static_cast<int>(s.agent_dir)}},
          {"carry", s.carrying},
          {"objects", objects},
          {"step", s.step_count},
          {"hz", s.horizon}};
}

inline EnvState state_from_json(const nlohmann::json& j, const SymbolicState& goal) {
  EnvState s;
  s.width = j.at("w").get<int>();
  s.height = j.at("h").get<int>();
  if (s.width <= 0 || s.height <= 0) throw FormatError("non-positive grid size");
  std::string wall = j.at("wall").get<std::string>();
  if (wall.size() != static_cast<std::size_t>(s.width) * s.height)
    throw FormatError("wall mask does not cover the grid");
  s.wall.resize(wall.size());
  for (std::size_t i = 0; i < wall.size(); ++i) {
    if (wall[i] != '0' && wall[i] != '1') throw FormatError("wall mask must be 0/1");
    s.wall[i] = wall[i] == '1' ? 1 : 0;
  }
  const auto& agent = j.at("agent");
  s.agent_x = agent.at(0).get<int>();
  s.agent_y = agent.at(1).get<int>();
  s.agent_dir = checked_enum<Dir>(agent.at(2).get<int>(), 4, "direction");
  s.carrying = j.at("carry").get<int>();
  int index = 0;
  for (const auto& row : j.at("objects")) {
    GridObject o;
    o.id = row.at(0).get<int>();
    if (o.id != index)
      throw FormatError("object ids must match their slot order, found id " +
                        std::to_string(o.id) + " at slot " + std::to_string(index));
    o.kind = checked_enum<Kind>(row.at(1).get<int>(), 4, "kind");
    o.color = checked_enum<Color>(row.at(2).get<int>(), 6, "color");
    o.x = row.at(3).get<int>();
    o.y = row.at(4).get<int>();
    o.door = checked_enum<DoorState>(row.at(5).get<int>(), 3, "door state");
    o.carried = row.at(6).get<int>() != 0;
    s.objects.push_back(o);
    ++index;
  }
  s.goal = goal;
  s.step_count = j.at("step").get<int>();
  s.horizon = j.at("hz").get<int>();
  return s;
}

inline nlohmann::json binding_json(const RoleBinding& binding) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [role, bound] : binding)
    out[role] = {{"id", bound.id}, {"kind", bound.kind}};
  return out;
}

inline RoleBinding binding_from_json(const nlohmann::json& j) {
  RoleBinding binding;
  for (const auto& [role, bound] : j.items())
    binding[role] = BoundObject{bound.at("id").get<int>(), bound.at("kind").get<std::string>()};
  return binding;
}

}  // namespace iodetail

// -------------------------------------------------------------- dataset ----

inline std::string render_trajectory(const Trajectory& traj) {
  if (traj.states.size() != traj.actions.size() + 1)
    throw FormatError("trajectory needs exactly one more state than actions");
  nlohmann::json states = nlohmann::json::array();
  for (const EnvState& s : traj.states) {
    if (s.goal != traj.goal) throw FormatError("state goal differs from the trajectory goal");
    states.push_back(iodetail::state_json(s));
  }
  nlohmann::json actions = nlohmann::json::array();
  for (Action a : traj.actions) actions.push_back(static_cast<int>(a));
  nlohmann::json line{{"v", kDatasetSchema},
                      {"task", traj.task},
                      {"seed", traj.seed},
                      {"binding", iodetail::binding_json(traj.binding)},
                      {"goal", iodetail::goal_json(traj.goal)},
                      {"states", states},
                      {"actions", actions}};
  return line.dump();
}

inline Trajectory parse_trajectory(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw FormatError("invalid JSON");
  if (!j.contains("v") || !j.at("v").is_number_integer() ||
      j.at("v").get<int>() != kDatasetSchema)
    throw FormatError("unsupported dataset schema version");
  Trajectory traj;
  traj.task = j.at("task").get<std::string>();
  traj.seed = j.at("seed").get<std::uint64_t>();
  traj.binding = iodetail::binding_from_json(j.at("binding"));
  traj.goal = iodetail::goal_from_json(j.at("goal"));
  for (const auto& s : j.at("states"))
    traj.states.push_back(iodetail::state_from_json(s, traj.goal));
  for (const auto& a : j.at("actions")) {
    int v = a.get<int>();
    if (v < 0 || v >= kNumActions)
      throw FormatError("action out of range: " + std::to_string(v));
    traj.actions.push_back(static_cast<Action>(v));
  }
  if (traj.states.size() != traj.actions.size() + 1)
    throw FormatError("trajectory needs exactly one more state than actions");
  return traj;
}

inline void write_dataset(const Dataset& data, const std::string& path) {
  std::string out;
  for (const Trajectory& traj : data.trajectories) {
    out += render_trajectory(traj);
    out += '\n';
  }
  write_text_file(path, out);
}

inline Dataset read_dataset(const std::string& path) {
  std::string text = read_text_file(path);
  Dataset data;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty()) continue;
    try {
      data.trajectories.push_back(parse_trajectory(line));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return data;
}

// --------------------------------------------------------------- models ----

namespace iodetail {

inline nlohmann::json mlp_json(const Mlp& m) {
  return {{"n_in", m.n_in},   {"n_hidden", m.n_hidden}, {"n_out", m.n_out},
          {"w1", m.w1},       {"b1", m.b1},             {"w2", m.w2},
          {"b2", m.b2}};
}

inline Mlp mlp_from_json(const nlohmann::json& j) {
  Mlp m;
  m.n_in = j.at("n_in").get<int>();
  m.n_hidden = j.at("n_hidden").get<int>();
  m.n_out = j.at("n_out").get<int>();
  if (m.n_in <= 0 || m.n_hidden <= 0 || m.n_out <= 0)
    throw FormatError("non-positive layer size");
  m.w1 = j.at("w1").get<std::vector<double>>();
  m.b1 = j.at("b1").get<std::vector<double>>();
  m.w2 = j.at("w2").get<std::vector<double>>();
  m.b2 = j.at("b2").get<std::vector<double>>();
  std::size_t in = static_cast<std::size_t>(m.n_in), hid = static_cast<std::size_t>(m.n_hidden),
              out = static_cast<std::size_t>(m.n_out);
  if (m.w1.size() != in * hid || m.b1.size() != hid || m.w2.size() != hid * out ||
      m.b2.size() != out)
    throw FormatError("weight arrays do not match the declared shape");
  return m;
}

inline std::string model_key(const std::string& name, int arity) {
  return name + "/" + std::to_string(arity);
}

inline std::pair<std::string, int> parse_model_key(const std::string& key) {
  std::size_t slash = key.rfind('/');
  if (slash == 0 || slash == std::string::npos)
    throw FormatError("malformed model key: " + key);
  int arity = 0;
  try {
    arity = std::stoi(key.substr(slash + 1));
  } catch (const std::exception&) {
    throw FormatError("malformed model key: " + key);
  }
  if (arity <= 0) throw FormatError("malformed model key: " + key);
  return {key.substr(0, slash), arity};
}

inline nlohmann::json model_envelope(const std::string& kind) {
  return {{"schema", kModelSchema},
          {"kind", kind},
          {"vocabulary", nlohmann::json::array()},
          {"weights", nlohmann::json::object()}};
}

inline nlohmann::json checked_envelope(const std::string& path, const std::string& kind) {
  nlohmann::json j = nlohmann::json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded()) throw FormatError(path + ": invalid JSON");
  if (!j.contains("schema") || !j.at("schema").is_number_integer() ||
      j.at("schema").get<int>() != kModelSchema)
    throw FormatError(path + ": unsupported model schema version");
  if (j.at("kind").get<std::string>() != kind)
    throw FormatError(path + ": expected a " + kind + " model, found " +
                      j.at("kind").get<std::string>());
  return j;
}

}  // namespace iodetail

inline void write_perception(const PerceptionModel& model, const std::string& path) {
  nlohmann::json j = iodetail::model_envelope("perception");
  j["threshold"] = model.threshold;
  for (const auto& [key, net] : model.scorers) {
    std::string name = iodetail::model_key(key.first, key.second);
    j["vocabulary"].push_back(name);
    j["weights"][name] = iodetail::mlp_json(net);
  }
  write_text_file(path, j.dump(2) + "\n");
}

inline PerceptionModel read_perception(const std::string& path) {
  try {
    nlohmann::json j = iodetail::checked_envelope(path, "perception");
    PerceptionModel model;
    model.threshold = j.at("threshold").get<double>();
    for (const auto& name : j.at("vocabulary")) {
      auto [pred, arity] = iodetail::parse_model_key(name.get<std::string>());
      model.scorers.emplace(ScorerKey{pred, arity},
                            iodetail::mlp_from_json(j.at("weights").at(name.get<std::string>())));
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

inline void write_ensemble(const PolicyEnsemble& ensemble, const std::string& path) {
  nlohmann::json j = iodetail::model_envelope("ensemble");
  for (const auto& [key, net] : ensemble.policies) {
    std::string name = iodetail::model_key(key.first, key.second);
    j["vocabulary"].push_back(name);
    j["weights"][name] = iodetail::mlp_json(net);
  }
  write_text_file(path, j.dump(2) + "\n");
}

inline PolicyEnsemble read_ensemble(const std::string& path) {
  try {
    nlohmann::json j = iodetail::checked_envelope(path, "ensemble");
    PolicyEnsemble ensemble;
    for (const auto& name : j.at("vocabulary")) {
      auto [pred, arity] = iodetail::parse_model_key(name.get<std::string>());
      ensemble.policies.emplace(
          OperatorKey{pred, arity},
          iodetail::mlp_from_json(j.at("weights").at(name.get<std::string>())));
    }
    return ensemble;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

inline void write_bc(const BcBaseline& bc, const std::string& path) {
  nlohmann::json j = iodetail::model_envelope("bc");
  j["vocabulary"].push_back("net");
  j["weights"]["net"] = iodetail::mlp_json(bc.net);
  write_text_file(path, j.dump(2) + "\n");
}

inline BcBaseline read_bc(const std::string& path) {
  try {
    nlohmann::json j = iodetail::checked_envelope(path, "bc");
    return BcBaseline{iodetail::mlp_from_json(j.at("weights").at("net"))};
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

// -------------------------------------------------------------- reports ----

inline constexpr const char* kReportHeader =
    "task,mode,agent,seed,episodes,success,wallclock_ms_per_eval";

// Shortest decimal form that parses back to the same double.
inline std::string render_number(double v) { return nlohmann::json(v).dump(); }

inline std::string report_csv_rows(const Report& report) {
  std::string out;
  for (const SeedResult& sr : report.per_seed) {
    out += report.task + "," + report.mode + "," + report.agent + "," +
           std::to_string(sr.seed) + "," + std::to_string(report.episodes) + "," +
           render_number(sr.success) + "," + render_number(sr.wallclock_ms_per_eval) + "\n";
  }
  return out;
}

inline std::string reports_to_csv(const std::vector<Report>& reports) {
  std::string out = std::string(kReportHeader) + "\n";
  for (const Report& r : reports) out += report_csv_rows(r);
  return out;
}

// Concatenate data rows from several report files under one header.
inline std::string merge_report_csv(const std::vector<std::string>& texts) {
  std::string out = std::string(kReportHeader) + "\n";
  for (const std::string& text : texts) {
    std::size_t pos = 0;
    bool first = true;
    while (pos < text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string::npos) end = text.size();
      std::string line = text.substr(pos, end - pos);
      pos = end + 1;
      if (first) {
        if (line != kReportHeader) throw FormatError("report header mismatch: " + line);
        first = false;
        continue;
      }
      if (!line.empty()) out += line + "\n";
    }
    if (first) throw FormatError("empty report file");
  }
  return out;
}

// ------------------------------------------------------------- manifest ----

inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string fnv1a64_hex(const std::string& bytes) {
  static const char* digits = "0123456789abcdef";
  std::uint64_t h = fnv1a64(bytes);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::vector<std::uint64_t> seeds;
  std::map<std::string, std::string> artifacts;  // path -> fnv1a64 hex of contents
  std::string tool_version = kToolVersion;

  bool operator==(const RunManifest&) const = default;
};

inline std::string manifest_path(const std::string& artifact) {
  return artifact + ".manifest.json";
}

inline nlohmann::json manifest_json(const RunManifest& m) {
  return {{"command", m.command},
          {"config", m.config},
          {"seeds", m.seeds},
          {"artifacts", m.artifacts},
          {"tool_version", m.tool_version}};
}

inline RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.config = j.at("config");
  m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  m.artifacts = j.at("artifacts").get<std::map<std::string, std::string>>();
  m.tool_version = j.at("tool_version").get<std::string>();
  return m;
}

// Hash the artifact just written, record it, and drop the manifest next to it.
inline void write_manifest_for(const std::string& artifact_path, RunManifest manifest) {
  manifest.artifacts[artifact_path] = fnv1a64_hex(read_text_file(artifact_path));
  write_text_file(manifest_path(artifact_path), manifest_json(manifest).dump(2) + "\n");
}

inline RunManifest read_manifest(const std::string& path) {
  try {
    nlohmann::json j = nlohmann::json::parse(read_text_file(path), nullptr, false);
    if (j.is_discarded()) throw FormatError(path + ": invalid JSON");
    return manifest_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace abil
