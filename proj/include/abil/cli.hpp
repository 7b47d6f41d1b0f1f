#pragma once
// Command-line surface: dataset generation, perception/policy/baseline
// training, closed-loop evaluation, grounding diagnostics, abduction dumps,
// knowledge-base validation, and report merging. Every artifact write drops
// a manifest beside the file. Exit codes: 0 success, 1 usage error, 2
// runtime error; user errors never print a stack trace.

#include <cstdint>
#include <exception>
#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "abil/abduction.hpp"
#include "abil/expert.hpp"
#include "abil/gridworld.hpp"
#include "abil/io.hpp"
#include "abil/kb.hpp"
#include "abil/perception.hpp"
#include "abil/policy.hpp"
#include "abil/runner.hpp"

#ifndef ABIL_KB_DIR
#define ABIL_KB_DIR "kb"
#endif

namespace abil {

namespace clidetail {

inline std::string join_command(int argc, char** argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) {
    if (i) out += ' ';
    out += argv[i];
  }
  return out;
}

inline StateMachine machine_for(const std::string& task, const std::string& kb_dir) {
  return parse_kb_file(kb_dir + "/" + task_kb_name(parse_task(task)) + ".kb");
}

// One machine per distinct task present in the data.
inline std::map<std::string, StateMachine> machines_for(const Dataset& data,
                                                        const std::string& kb_dir) {
  std::map<std::string, StateMachine> machines;
  for (const Trajectory& t : data.trajectories)
    if (machines.find(t.task) == machines.end())
      machines.emplace(t.task, machine_for(t.task, kb_dir));
  return machines;
}

inline Dataset load_datasets(const std::vector<std::string>& paths) {
  Dataset all;
  for (const std::string& p : paths) {
    Dataset d = read_dataset(p);
    all.trajectories.insert(all.trajectories.end(),
                            std::make_move_iterator(d.trajectories.begin()),
                            std::make_move_iterator(d.trajectories.end()));
  }
  if (all.trajectories.empty()) throw FormatError("no trajectories in the given datasets");
  return all;
}

inline Split parse_split(const std::string& mode) {
  return mode == "basic" ? Split::Basic : Split::Gen;
}

inline TieBreak parse_tie_break(const std::string& name) {
  return name == "earliest" ? TieBreak::Earliest : TieBreak::Latest;
}

inline ScoreTrack score_track(const Trajectory& traj, const StateMachine& bound,
                              const PerceptionModel* model) {
  SymbolicState tracked = tracked_atoms(bound);
  ScoreTrack track;
  track.atoms = tracked.atoms;
  track.scores.resize(traj.states.size());
  for (std::size_t t = 0; t < traj.states.size(); ++t) {
    track.scores[t].reserve(track.atoms.size());
    for (const GroundAtom& a : track.atoms)
      track.scores[t].push_back(model != nullptr ? model->score(traj.states[t], a)
                                                 : (oracle_atom(traj.states[t], a) ? 1.0 : 0.0));
  }
  return track;
}

}  // namespace clidetail

inline int run_cli(int argc, char** argv) {
  CLI::App app{"Abductive imitation toolkit: state-machine-guided grounding, "
               "policy ensembles, and gridworld benchmarks"};
  app.require_subcommand(1);
  std::string kb_dir = ABIL_KB_DIR;
  app.add_option("--kb-dir", kb_dir, "Directory holding the .kb task machines")
      ->capture_default_str();

  const std::vector<std::string> task_names{"goto",   "goto_single", "pickup",
                                            "open",   "put",         "unlock"};
  const std::string command = clidetail::join_command(argc, argv);

  // ------------------------------------------------------------------ gen
  auto* gen = app.add_subcommand("gen", "Generate an expert demonstration dataset");
  struct {
    std::string task = "pickup";
    std::string mode = "basic";
    int episodes = 100;
    std::uint64_t seed = 0;
    std::string out;
  } g;
  gen->add_option("--task", g.task, "Task name")
      ->required()
      ->check(CLI::IsMember(task_names));
  gen->add_option("--mode", g.mode, "Instance split")
      ->check(CLI::IsMember({"basic", "gen"}))
      ->capture_default_str();
  gen->add_option("--episodes", g.episodes, "Trajectories to generate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen->add_option("--seed", g.seed, "Base seed; episode i uses a stream mixed from it")
      ->capture_default_str();
  gen->add_option("--out", g.out, "Output .jsonl path")->required();
  gen->callback([&] {
    StateMachine machine = clidetail::machine_for(g.task, kb_dir);
    TaskConfig cfg = task_config(parse_task(g.task), clidetail::parse_split(g.mode));
    Dataset data = generate_dataset(cfg, machine, g.episodes, g.seed);
    write_dataset(data, g.out);
    RunManifest manifest;
    manifest.command = command;
    manifest.config = {{"task", g.task}, {"mode", g.mode}, {"episodes", g.episodes},
                       {"seed", g.seed}, {"out", g.out}};
    manifest.seeds = {g.seed};
    write_manifest_for(g.out, manifest);
    std::cout << "wrote " << data.trajectories.size() << " trajectories to " << g.out << "\n";
  });

  // ----------------------------------------------------- train-perception
  auto* tp = app.add_subcommand("train-perception",
                                "Fit predicate scorers by abductive pseudo-labeling");
  struct {
    std::vector<std::string> data;
    std::string out;
    PerceptionTrainConfig cfg;
  } p;
  tp->add_option("--data", p.data, "Input .jsonl datasets (tasks may be mixed)")
      ->required()
      ->expected(-1);
  tp->add_option("--out", p.out, "Output model .json path")->required();
  tp->add_option("--rounds", p.cfg.rounds, "Abduction/update alternations")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  tp->add_option("--epochs", p.cfg.epochs, "Gradient epochs per round")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  tp->add_option("--lr", p.cfg.lr, "Learning rate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  tp->add_option("--batch", p.cfg.batch, "Minibatch size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  tp->add_option("--hidden", p.cfg.hidden, "Hidden units per scorer")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  tp->add_option("--seed", p.cfg.seed, "Training seed")->capture_default_str();
  tp->add_option("--threshold", p.cfg.threshold, "Score cutoff for grounding an atom true")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  std::string tp_tie = "latest";
  tp->add_option("--tie-break", tp_tie, "Transition-step tie-break during abduction")
      ->check(CLI::IsMember({"earliest", "latest"}))
      ->capture_default_str();
  tp->add_flag("--self-training", p.cfg.self_training,
               "Also fit abduction-unconstrained atoms against thresholded scores");
  tp->callback([&] {
    p.cfg.tie_break = clidetail::parse_tie_break(tp_tie);
    Dataset data = clidetail::load_datasets(p.data);
    auto machines = clidetail::machines_for(data, kb_dir);
    auto [model, telemetry] = train_perception(data, machines, p.cfg);
    write_perception(model, p.out);
    RunManifest manifest;
    manifest.command = command;
    manifest.config = {{"data", p.data},     {"out", p.out},       {"rounds", p.cfg.rounds},
                       {"epochs", p.cfg.epochs}, {"lr", p.cfg.lr}, {"batch", p.cfg.batch},
                       {"hidden", p.cfg.hidden}, {"seed", p.cfg.seed},
                       {"threshold", p.cfg.threshold}, {"tie_break", tp_tie},
                       {"self_training", p.cfg.self_training}};
    manifest.seeds = {p.cfg.seed};
    write_manifest_for(p.out, manifest);
    for (std::size_t r = 0; r < telemetry.round_costs.size(); ++r)
      std::cout << "round " << r << ": abduction cost " << telemetry.round_costs[r]
                << ", infeasible " << telemetry.infeasible[r] << "\n";
    std::cout << "wrote " << model.scorers.size() << " scorers to " << p.out << "\n";
  });

  // --------------------------------------------------------- train-policy
  auto* tl = app.add_subcommand("train-policy",
                                "Fit one policy per operator, routed by plan skeletons");
  struct {
    std::vector<std::string> data;
    std::string perception;
    std::string out;
    PolicyTrainConfig cfg;
  } q;
  tl->add_option("--data", q.data, "Input .jsonl datasets (tasks may be mixed)")
      ->required()
      ->expected(-1);
  tl->add_option("--perception", q.perception, "Trained perception model .json")->required();
  tl->add_option("--out", q.out, "Output ensemble .json path")->required();
  tl->add_option("--epochs", q.cfg.epochs, "Gradient epochs")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  tl->add_option("--lr", q.cfg.lr, "Learning rate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  tl->add_option("--batch", q.cfg.batch, "Minibatch size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  tl->add_option("--hidden", q.cfg.hidden, "Hidden units per policy")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  tl->add_option("--seed", q.cfg.seed, "Training seed")->capture_default_str();
  tl->callback([&] {
    Dataset data = clidetail::load_datasets(q.data);
    auto machines = clidetail::machines_for(data, kb_dir);
    PerceptionModel percep = read_perception(q.perception);
    auto [ensemble, telemetry] = train_ensemble(data, percep, machines, q.cfg);
    write_ensemble(ensemble, q.out);
    RunManifest manifest;
    manifest.command = command;
    manifest.config = {{"data", q.data},   {"perception", q.perception}, {"out", q.out},
                       {"epochs", q.cfg.epochs}, {"lr", q.cfg.lr},       {"batch", q.cfg.batch},
                       {"hidden", q.cfg.hidden}, {"seed", q.cfg.seed}};
    manifest.seeds = {q.cfg.seed};
    write_manifest_for(q.out, manifest);
    for (const auto& [key, count] : telemetry.bucket_sizes)
      std::cout << "bucket " << key.first << "/" << key.second << ": " << count << " steps\n";
    std::cout << "fallback steps: " << telemetry.fallback_steps << "\n";
    std::cout << "wrote " << ensemble.policies.size() << " policies to " << q.out << "\n";
  });

  // ------------------------------------------------------------- train-bc
  auto* tb = app.add_subcommand("train-bc", "Fit the monolithic goal-conditioned baseline");
  struct {
    std::vector<std::string> data;
    std::string out;
    PolicyTrainConfig cfg;
  } b;
  tb->add_option("--data", b.data, "Input .jsonl datasets")->required()->expected(-1);
  tb->add_option("--out", b.out, "Output model .json path")->required();
  tb->add_option("--epochs", b.cfg.epochs, "Gradient epochs")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  tb->add_option("--lr", b.cfg.lr, "Learning rate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  tb->add_option("--batch", b.cfg.batch, "Minibatch size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  tb->add_option("--hidden", b.cfg.hidden, "Hidden units")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  tb->add_option("--seed", b.cfg.seed, "Training seed")->capture_default_str();
  tb->callback([&] {
    Dataset data = clidetail::load_datasets(b.data);
    BcBaseline bc = train_bc(data, b.cfg);
    write_bc(bc, b.out);
    RunManifest manifest;
    manifest.command = command;
    manifest.config = {{"data", b.data},         {"out", b.out},   {"epochs", b.cfg.epochs},
                       {"lr", b.cfg.lr},         {"batch", b.cfg.batch},
                       {"hidden", b.cfg.hidden}, {"seed", b.cfg.seed}};
    manifest.seeds = {b.cfg.seed};
    write_manifest_for(b.out, manifest);
    std::cout << "wrote baseline to " << b.out << "\n";
  });

  // ----------------------------------------------------------------- eval
  auto* ev = app.add_subcommand("eval", "Success@episodes over seeds for a trained agent");
  struct {
    std::string task = "pickup";
    std::string mode = "basic";
    std::string agent = "abil";
    std::string perception;
    std::string policy;
    std::string bc;
    int episodes = 100;
    std::vector<std::uint64_t> seeds{0, 1, 2};
    double noise = 0.0;
    std::string fallback = "first";
    std::string out;
  } e;
  ev->add_option("--task", e.task, "Task name")->required()->check(CLI::IsMember(task_names));
  ev->add_option("--mode", e.mode, "Instance split")
      ->check(CLI::IsMember({"basic", "gen"}))
      ->capture_default_str();
  ev->add_option("--agent", e.agent, "Agent under evaluation")
      ->check(CLI::IsMember({"abil", "bc"}))
      ->capture_default_str();
  ev->add_option("--perception", e.perception, "Perception model .json (abil agent)");
  ev->add_option("--policy", e.policy, "Policy ensemble .json (abil agent)");
  ev->add_option("--bc", e.bc, "Baseline model .json (bc agent)");
  ev->add_option("--episodes", e.episodes, "Episodes per seed")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ev->add_option("--seeds", e.seeds, "Evaluation seeds")
      ->delimiter(',')
      ->capture_default_str();
  ev->add_option("--noise", e.noise, "Grounding noise flip probability")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  ev->add_option("--fallback", e.fallback, "Operator choice when no node is entailed")
      ->check(CLI::IsMember({"first", "repeat"}))
      ->capture_default_str();
  ev->add_option("--out", e.out, "Optional report .csv path");
  ev->callback([&] {
    if (e.agent == "abil" && (e.perception.empty() || e.policy.empty()))
      throw CLI::RequiredError("--perception and --policy (required by --agent abil)");
    if (e.agent == "bc" && e.bc.empty())
      throw CLI::RequiredError("--bc (required by --agent bc)");
    StateMachine machine = clidetail::machine_for(e.task, kb_dir);
    EvalConfig cfg;
    cfg.task = parse_task(e.task);
    cfg.split = clidetail::parse_split(e.mode);
    cfg.episodes = e.episodes;
    cfg.seeds = e.seeds;
    cfg.agent = e.agent == "abil" ? AgentKind::Abil : AgentKind::Bc;
    cfg.noise_p = e.noise;
    cfg.fallback = e.fallback == "first" ? FallbackMode::FirstOperator : FallbackMode::RepeatLast;

    Report report;
    if (cfg.agent == AgentKind::Abil) {
      PerceptionModel percep = read_perception(e.perception);
      PolicyEnsemble ensemble = read_ensemble(e.policy);
      report = evaluate(cfg, machine, &percep, &ensemble, nullptr);
    } else {
      BcBaseline baseline = read_bc(e.bc);
      report = evaluate(cfg, machine, nullptr, nullptr, &baseline);
    }
    std::cout << report.task << " " << report.mode << " " << report.agent << ": success "
              << render_number(report.mean) << " +/- " << render_number(report.stddev) << " ("
              << report.per_seed.size() << " seeds x " << report.episodes << " episodes)\n";
    std::cout << reports_to_csv({report});
    if (!e.out.empty()) {
      write_text_file(e.out, reports_to_csv({report}));
      RunManifest manifest;
      manifest.command = command;
      manifest.config = {{"task", e.task},     {"mode", e.mode},       {"agent", e.agent},
                         {"perception", e.perception}, {"policy", e.policy}, {"bc", e.bc},
                         {"episodes", e.episodes}, {"noise", e.noise},
                         {"fallback", e.fallback}, {"out", e.out}};
      manifest.seeds = e.seeds;
      write_manifest_for(e.out, manifest);
    }
  });

  // ----------------------------------------------------------- ground-acc
  auto* ga = app.add_subcommand("ground-acc",
                                "Grounding accuracy of a perception model on a dataset");
  struct {
    std::vector<std::string> data;
    std::string perception;
    std::size_t limit = 1000;
  } a;
  ga->add_option("--data", a.data, "Held-out .jsonl datasets")->required()->expected(-1);
  ga->add_option("--perception", a.perception, "Perception model .json")->required();
  ga->add_option("--limit", a.limit, "Max states to grade")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ga->callback([&] {
    Dataset data = clidetail::load_datasets(a.data);
    auto machines = clidetail::machines_for(data, kb_dir);
    PerceptionModel model = read_perception(a.perception);
    GroundingReport report = grounding_accuracy(model, grounding_sample(data, machines, a.limit));
    std::cout << "micro " << render_number(report.accuracy()) << " (" << report.correct << "/"
              << report.total << ")\n";
    for (const auto& [pred, counts] : report.per_pred)
      std::cout << "  " << pred << ": "
                << render_number(static_cast<double>(counts.first) / counts.second) << " ("
                << counts.first << "/" << counts.second << ")\n";
  });

  // --------------------------------------------------------------- abduce
  auto* ab = app.add_subcommand(
      "abduce", "Label a dataset with cheapest machine-consistent assignments");
  struct {
    std::vector<std::string> data;
    std::string perception;
    std::string tie_break = "earliest";
    std::string out;
  } d;
  ab->add_option("--data", d.data, "Input .jsonl datasets")->required()->expected(-1);
  ab->add_option("--perception", d.perception,
                 "Score states with this model (default: oracle 0/1 scores)");
  ab->add_option("--tie-break", d.tie_break, "Transition-step tie-break")
      ->check(CLI::IsMember({"earliest", "latest"}))
      ->capture_default_str();
  ab->add_option("--out", d.out, "Optional labelings .jsonl path (default: stdout)");
  ab->callback([&] {
    Dataset data = clidetail::load_datasets(d.data);
    auto machines = clidetail::machines_for(data, kb_dir);
    PerceptionModel model;
    bool use_model = !d.perception.empty();
    if (use_model) model = read_perception(d.perception);
    TieBreak tb = clidetail::parse_tie_break(d.tie_break);

    std::string lines;
    double total_cost = 0.0;
    for (const Trajectory& traj : data.trajectories) {
      StateMachine bound = bind_roles(machines.at(traj.task), traj.binding);
      ScoreTrack track = clidetail::score_track(traj, bound, use_model ? &model : nullptr);
      Labeling lab = abduce(track, bound, tb);
      total_cost += lab.cost;
      nlohmann::json line{{"task", traj.task},
                          {"seed", traj.seed},
                          {"cost", lab.cost},
                          {"path", lab.path},
                          {"assignment", lab.assignment}};
      lines += line.dump();
      lines += '\n';
    }
    if (d.out.empty()) {
      std::cout << lines;
    } else {
      write_text_file(d.out, lines);
      RunManifest manifest;
      manifest.command = command;
      manifest.config = {{"data", d.data},
                         {"perception", d.perception},
                         {"tie_break", d.tie_break},
                         {"out", d.out}};
      write_manifest_for(d.out, manifest);
    }
    std::cout << "mean abduction cost "
              << render_number(total_cost / static_cast<double>(data.trajectories.size()))
              << " over " << data.trajectories.size() << " trajectories\n";
  });

  // ----------------------------------------------------------- validate-kb
  auto* vk = app.add_subcommand("validate-kb", "Parse and structurally check .kb files");
  std::vector<std::string> kb_files;
  vk->add_option("files", kb_files, "Knowledge-base files")->required()->expected(-1);
  vk->callback([&] {
    for (const std::string& file : kb_files) {
      StateMachine m = parse_kb_file(file);
      auto violations = validate_machine(m);
      if (!violations.empty())  // parse_kb_file validates, but belt and braces
        throw std::runtime_error(file + ": " + violations.front().code + " at " +
                                 violations.front().where);
      std::cout << "ok: " << file << " (" << m.name << ", " << m.nodes.size() << " nodes, "
                << m.edges.size() << " edges)\n";
    }
  });

  // --------------------------------------------------------------- report
  auto* rp = app.add_subcommand("report", "Merge evaluation CSVs under one header");
  struct {
    std::vector<std::string> inputs;
    std::string out;
  } r;
  rp->add_option("inputs", r.inputs, "Input .csv reports")->required()->expected(-1);
  rp->add_option("--out", r.out, "Merged .csv path (default: stdout)");
  rp->callback([&] {
    std::vector<std::string> texts;
    texts.reserve(r.inputs.size());
    for (const std::string& path : r.inputs) texts.push_back(read_text_file(path));
    std::string merged = merge_report_csv(texts);
    if (r.out.empty()) {
      std::cout << merged;
    } else {
      write_text_file(r.out, merged);
      RunManifest manifest;
      manifest.command = command;
      manifest.config = {{"inputs", r.inputs}, {"out", r.out}};
      write_manifest_for(r.out, manifest);
      std::cout << "wrote " << r.out << "\n";
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    int code = app.exit(err);
    return code == 0 ? 0 : 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace abil
