#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <string>
#include <vector>

#include "abil/expert.hpp"
#include "abil/gridworld.hpp"
#include "abil/io.hpp"
#include "abil/kb.hpp"
#include "abil/perception.hpp"
#include "abil/policy.hpp"
#include "scorers.hpp"

using namespace abil;

namespace {

StateMachine load_machine(Task task) {
  return parse_kb_file(std::string(ABIL_KB_DIR) + "/" + task_kb_name(task) + ".kb");
}

std::string scratch(const std::string& name) {
  std::filesystem::path dir = std::filesystem::temp_directory_path() / "abil-io-tests";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

Dataset small_dataset(Task task, int n, std::uint64_t seed) {
  StateMachine m = load_machine(task);
  return generate_dataset(task_config(task, Split::Basic), m, n, seed);
}

}  // namespace

TEST_CASE("atoms render as pred(objId,...) and parse back") {
  GroundAtom holding{"holding", {obj(3)}};
  GroundAtom next_to{"next-to", {obj(3), obj(7)}};
  CHECK(render_atom(holding) == "holding(3)");
  CHECK(render_atom(next_to) == "next-to(3,7)");
  CHECK(parse_atom("holding(3)") == holding);
  CHECK(parse_atom("next-to(3,7)") == next_to);

  CHECK_THROWS_AS(render_atom(GroundAtom{"holding", {role_ref("key")}}), FormatError);
  for (const char* bad : {"holding", "holding()", "holding(x)", "(3)", "holding(3",
                          "holding(3,)", "holding(,3)", "holding(-3)"})
    CHECK_THROWS_AS(parse_atom(bad), FormatError);
}

TEST_CASE("datasets round-trip through JSONL exactly") {
  Dataset pickup = small_dataset(Task::Pickup, 5, 3);
  std::string path = scratch("pickup.jsonl");
  write_dataset(pickup, path);
  CHECK(read_dataset(path) == pickup);

  // unlock exercises doors, lock state, and carried objects
  Dataset unlock = small_dataset(Task::Unlock, 3, 9);
  std::string upath = scratch("unlock.jsonl");
  write_dataset(unlock, upath);
  CHECK(read_dataset(upath) == unlock);

  // one line per trajectory, each a self-contained schema-tagged record
  std::string text = read_text_file(path);
  std::size_t lines = 0;
  for (char c : text) lines += c == '\n' ? 1 : 0;
  CHECK(lines == 5);
  std::string first = text.substr(0, text.find('\n'));
  Trajectory t = parse_trajectory(first);
  CHECK(t == pickup.trajectories[0]);
}

TEST_CASE("dataset seeds survive the full 64-bit range") {
  Dataset data = small_dataset(Task::Pickup, 1, 0);
  data.trajectories[0].seed = 0xdeadbeefcafebabeull;
  Trajectory back = parse_trajectory(render_trajectory(data.trajectories[0]));
  CHECK(back.seed == 0xdeadbeefcafebabeull);
  CHECK(back == data.trajectories[0]);
}

TEST_CASE("dataset reader rejects schema and structure violations") {
  Dataset data = small_dataset(Task::Pickup, 2, 5);
  std::string line = render_trajectory(data.trajectories[0]);

  nlohmann::json j = nlohmann::json::parse(line);
  j["v"] = kDatasetSchema + 1;
  CHECK_THROWS_AS(parse_trajectory(j.dump()), FormatError);
  j.erase("v");
  CHECK_THROWS_AS(parse_trajectory(j.dump()), FormatError);

  j = nlohmann::json::parse(line);
  j["actions"][0] = kNumActions;
  CHECK_THROWS_AS(parse_trajectory(j.dump()), FormatError);

  j = nlohmann::json::parse(line);
  j["actions"].erase(0);  // breaks states == actions + 1
  CHECK_THROWS_AS(parse_trajectory(j.dump()), FormatError);

  j = nlohmann::json::parse(line);
  j["states"][0]["wall"] = "0101";
  CHECK_THROWS_AS(parse_trajectory(j.dump()), FormatError);

  j = nlohmann::json::parse(line);
  j["states"][0]["objects"][0][0] = 5;  // id must equal slot index
  CHECK_THROWS_AS(parse_trajectory(j.dump()), FormatError);

  j = nlohmann::json::parse(line);
  j["goal"][0] = "holding(key)";  // role name, not an object id
  CHECK_THROWS_AS(parse_trajectory(j.dump()), FormatError);

  CHECK_THROWS_AS(parse_trajectory("{not json"), FormatError);

  // file-level errors carry the offending line number
  std::string path = scratch("broken.jsonl");
  write_text_file(path, line + "\n{\"v\":99}\n");
  try {
    read_dataset(path);
    FAIL("expected a FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
}

TEST_CASE("perception models round-trip bit-exactly") {
  Dataset data = small_dataset(Task::Pickup, 8, 2);
  PerceptionTrainConfig cfg;
  cfg.rounds = 1;
  cfg.epochs = 1;
  cfg.seed = 4;
  auto [model, telemetry] = train_perception(data, load_machine(Task::Pickup), cfg);

  std::string path = scratch("percep.json");
  write_perception(model, path);
  CHECK(read_perception(path) == model);

  // crafted weights hit exact integer values
  PerceptionModel crafted = testing::crafted_perception(8, 8);
  std::string cpath = scratch("crafted.json");
  write_perception(crafted, cpath);
  CHECK(read_perception(cpath) == crafted);
}

TEST_CASE("policy and bc models round-trip bit-exactly") {
  Dataset data = small_dataset(Task::Pickup, 8, 2);
  PerceptionModel percep = testing::crafted_perception(8, 8);
  std::map<std::string, StateMachine> machines{{"pickup", load_machine(Task::Pickup)}};
  PolicyTrainConfig cfg;
  cfg.epochs = 1;
  cfg.seed = 6;
  auto [ensemble, telemetry] = train_ensemble(data, percep, machines, cfg);

  std::string epath = scratch("ensemble.json");
  write_ensemble(ensemble, epath);
  CHECK(read_ensemble(epath) == ensemble);

  BcBaseline bc = train_bc(data, cfg);
  std::string bpath = scratch("bc.json");
  write_bc(bc, bpath);
  CHECK(read_bc(bpath) == bc);
}

TEST_CASE("model readers reject wrong kind, schema, and shapes") {
  PerceptionModel crafted = testing::crafted_perception(8, 8);
  std::string path = scratch("kind.json");
  write_perception(crafted, path);

  CHECK_THROWS_AS(read_ensemble(path), FormatError);
  CHECK_THROWS_AS(read_bc(path), FormatError);

  nlohmann::json j = nlohmann::json::parse(read_text_file(path));
  j["schema"] = kModelSchema + 1;
  std::string spath = scratch("schema.json");
  write_text_file(spath, j.dump());
  CHECK_THROWS_AS(read_perception(spath), FormatError);

  j = nlohmann::json::parse(read_text_file(path));
  j["weights"]["facing/1"]["w1"].erase(0);  // breaks n_in * n_hidden
  std::string wpath = scratch("shape.json");
  write_text_file(wpath, j.dump());
  CHECK_THROWS_AS(read_perception(wpath), FormatError);

  j = nlohmann::json::parse(read_text_file(path));
  j["vocabulary"].push_back("nonsense");  // key without a weight entry
  std::string vpath = scratch("vocab.json");
  write_text_file(vpath, j.dump());
  CHECK_THROWS_AS(read_perception(vpath), FormatError);

  std::string tpath = scratch("trash.json");
  write_text_file(tpath, "[1,2,3");
  CHECK_THROWS_AS(read_perception(tpath), FormatError);
}

TEST_CASE("reports render one CSV row per seed") {
  Report r;
  r.task = "pickup";
  r.mode = "basic";
  r.agent = "abil";
  r.episodes = 100;
  r.per_seed = {{0, 0.75, 12.5, 3}, {1, 0.8, 11.0, 0}};
  r.mean = 0.775;
  r.stddev = 0.025;

  std::string csv = reports_to_csv({r});
  CHECK(csv ==
        "task,mode,agent,seed,episodes,success,wallclock_ms_per_eval\n"
        "pickup,basic,abil,0,100,0.75,12.5\n"
        "pickup,basic,abil,1,100,0.8,11.0\n");

  // merging keeps a single header and every data row
  Report other = r;
  other.agent = "bc";
  std::string merged = merge_report_csv({csv, reports_to_csv({other})});
  std::size_t rows = 0;
  for (char c : merged) rows += c == '\n' ? 1 : 0;
  CHECK(rows == 5);
  CHECK(merged.find("pickup,basic,bc,0,") != std::string::npos);
  CHECK(merged.rfind("task,mode,agent", 0) == 0);
  CHECK(merged.find("task,mode,agent", 10) == std::string::npos);

  CHECK_THROWS_AS(merge_report_csv({"wrong,header\n1,2\n"}), FormatError);
  CHECK_THROWS_AS(merge_report_csv({""}), FormatError);
}

TEST_CASE("csv numbers use the shortest round-trip form") {
  CHECK(render_number(0.25) == "0.25");
  CHECK(render_number(0.0) == "0.0");
  for (double v : {1.0 / 3.0, 0.1, 123.456, 7.0 / 11.0})
    CHECK(std::stod(render_number(v)) == v);
}

TEST_CASE("fnv1a64 matches published test vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
  CHECK(fnv1a64_hex("foobar") == "85944171f73967e8");
  CHECK(fnv1a64_hex("").size() == 16);
}

TEST_CASE("manifests record artifact hashes and round-trip") {
  std::string artifact = scratch("artifact.jsonl");
  write_text_file(artifact, "payload\n");

  RunManifest m;
  m.command = "abil gen --task pickup --episodes 1 --seed 0 --out artifact.jsonl";
  m.config = {{"task", "pickup"}, {"episodes", 1}};
  m.seeds = {0, 0xffffffffffffffffull};
  write_manifest_for(artifact, m);

  RunManifest back = read_manifest(manifest_path(artifact));
  CHECK(back.command == m.command);
  CHECK(back.config == m.config);
  CHECK(back.seeds == m.seeds);
  CHECK(back.tool_version == kToolVersion);
  REQUIRE(back.artifacts.count(artifact) == 1);
  CHECK(back.artifacts.at(artifact) == fnv1a64_hex("payload\n"));

  CHECK_THROWS_AS(read_manifest(scratch("missing.json")), FormatError);
}
