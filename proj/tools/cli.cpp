// Copyright 2026 The gilt Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "gilt/checkpoint.hpp"
#include "gilt/config.hpp"
#include "gilt/errors.hpp"
#include "gilt/eval_harness.hpp"
#include "gilt/kernels.hpp"
#include "gilt/pipeline.hpp"
#include "gilt/tokenizer.hpp"
#include "json.hpp"

namespace gilt::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

// One per run, written to <out>/manifest.json whether the command succeeds or not.
struct RunManifest {
  std::string command;
  std::vector<std::string> args;
  ordered_json config = ordered_json::object();
  std::uint64_t seed = 0;
  ordered_json checkpoints = ordered_json::object();  // role → id
  ordered_json outputs = ordered_json::array();
  std::string started_at;
  double wall_clock_seconds = 0.0;
  int exit_code = 0;
  std::string error;
  int threads = 1;
};

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw IoError("write failed for '" + path.string() + "'");
}

void write_manifest(const RunManifest& m, const fs::path& out_dir) {
  ordered_json j;
  j["command"] = m.command;
  j["args"] = m.args;
  j["config"] = m.config;
  j["seed"] = m.seed;
  j["checkpoints"] = m.checkpoints;
  j["outputs"] = m.outputs;
  j["version"] = GILT_VERSION;
  j["git"] = GILT_GIT_STAMP;
  j["threads"] = m.threads;
  j["started_at"] = m.started_at;
  j["wall_clock_seconds"] = m.wall_clock_seconds;
  j["exit_code"] = m.exit_code;
  if (!m.error.empty()) j["error"] = m.error;
  write_text(out_dir / "manifest.json", j.dump(2) + "\n");
}

ordered_json config_json(const TrainConfig& cfg) { return ordered_json::parse(to_json(cfg)); }

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<TaskLevel> parse_levels(const std::string& s) {
  std::vector<TaskLevel> out;
  for (const auto& t : split_list(s)) out.push_back(parse_task_level(t));
  return out;
}

SplitFractions parse_fractions(const std::string& s) {
  const auto parts = split_list(s);
  if (parts.size() != 3) throw ConfigError("--split expects train,valid,test fractions");
  SplitFractions f;
  try {
    f.train = std::stod(parts[0]);
    f.valid = std::stod(parts[1]);
    f.test = std::stod(parts[2]);
  } catch (const std::exception&) {
    throw ConfigError("--split: not a number in '" + s + "'");
  }
  return f;
}

Dataset find_dataset(const fs::path& registry, const std::string& name) {
  for (const RegistryEntry& e : load_registry(registry))
    if (e.name == name) return load_dataset(e);
  throw ConfigError("dataset '" + name + "' is not in registry '" + registry.string() + "'");
}

// ---- prep ------------------------------------------------------------------

struct PrepSyntheticArgs {
  int graphs = 5;
  int classes = 4;
  int nodes_per_class = 40;
  int feature_dim = 16;
  double intra_p = 0.1;
  double inter_p = 0.003;
  double separation = 2.0;
  double noise_sd = 1.0;
  std::uint64_t seed = 0;
  std::string split = "0.6,0.2,0.2";
  std::string heldout_split = "0.5,0,0.5";
  bool graph_set = false;
};

void prep_synthetic(const PrepSyntheticArgs& a, const fs::path& out, RunManifest& m) {
  const SplitFractions fr = parse_fractions(a.split);
  const SplitFractions held_fr = parse_fractions(a.heldout_split);
  SyntheticSpec spec;
  spec.n_classes = a.classes;
  spec.nodes_per_class = a.nodes_per_class;
  spec.intra_p = a.intra_p;
  spec.inter_p = a.inter_p;
  spec.feature_dim = a.feature_dim;
  spec.class_mean_separation = a.separation;
  spec.noise_sd = a.noise_sd;

  std::vector<RegistryEntry> corpus;
  for (int i = 0; i < a.graphs; ++i) {
    spec.seed = a.seed + static_cast<std::uint64_t>(i);
    const std::vector<Graph> g{assign_split(make_synthetic(spec), fr, TaskLevel::node, spec.seed)};
    const std::string name = "sbm-" + std::to_string(i);
    write_graph_collection(g, out / (name + ".json"));
    corpus.push_back({name, name + ".json", GraphFormat::json, {TaskLevel::node}});
    m.outputs.push_back(name + ".json");
  }
  spec.seed = a.seed + 1000;
  Graph held = make_synthetic(spec);
  held = assign_stratified_split(std::move(held), held_fr, spec.seed);
  held = assign_split(std::move(held), held_fr, TaskLevel::link, spec.seed + 1);
  const std::vector<Graph> held_v{held};
  write_graph_collection(held_v, out / "heldout.json");

  std::vector<RegistryEntry> all = corpus;
  all.push_back({"heldout", "heldout.json", GraphFormat::json, {TaskLevel::node, TaskLevel::link}});
  if (a.graph_set) {
    SyntheticGraphSetSpec gs;
    gs.seed = a.seed + 2000;
    Dataset d = assign_graph_split(make_synthetic_graph_set(gs, "graphs"), fr, gs.seed);
    write_graph_collection(d.graphs, out / "graphs.json");
    const RegistryEntry e{"graphs", "graphs.json", GraphFormat::json, {TaskLevel::graph}};
    corpus.push_back(e);
    all.push_back(e);
    m.outputs.push_back("graphs.json");
  }
  write_registry(corpus, out / "corpus.json");
  write_registry(all, out / "registry.json");
  for (const char* f : {"heldout.json", "corpus.json", "registry.json"}) m.outputs.push_back(f);
  m.seed = a.seed;
}

struct PrepConvertArgs {
  std::string input;
  std::string format = "edge-list";
  std::string name;
  std::string levels = "node";
  std::string split = "0.6,0.2,0.2";
  std::uint64_t seed = 0;
};

void prep_convert(const PrepConvertArgs& a, const fs::path& out, RunManifest& m) {
  const SplitFractions fr = parse_fractions(a.split);
  const std::vector<TaskLevel> levels = parse_levels(a.levels);
  Graph g = load_graph(a.input, parse_graph_format(a.format));
  for (TaskLevel l : levels) {
    if (l == TaskLevel::graph) throw ConfigError("--levels: convert handles single graphs (node, link)");
    if (l == TaskLevel::link || !g.node_split) g = assign_split(std::move(g), fr, l, a.seed);
  }
  const std::string file = a.name + ".json";
  const std::vector<Graph> gs{g};
  write_graph_collection(gs, out / file);

  std::vector<RegistryEntry> entries;
  if (fs::exists(out / "registry.json")) entries = load_registry(out / "registry.json");
  std::erase_if(entries, [&](const RegistryEntry& e) { return e.name == a.name; });
  for (RegistryEntry& e : entries) e.path = fs::relative(e.path, out);
  entries.push_back({a.name, file, GraphFormat::json, levels});
  write_registry(entries, out / "registry.json");
  m.outputs.push_back(file);
  m.outputs.push_back("registry.json");
  m.seed = a.seed;
}

// ---- pretrain / init -------------------------------------------------------

struct ConfigArgs {
  std::string config_path;
  std::string preset = "desk";
  std::vector<std::string> sets;
};

// Layers the config file and --set overrides on `base`.
TrainConfig resolve_config(const ConfigArgs& a, TrainConfig base) {
  TrainConfig cfg = std::move(base);
  if (!a.config_path.empty()) cfg = apply_key_values(read_key_values(a.config_path), cfg);
  for (const std::string& kv : a.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t") + 1);
      return s;
    };
    apply_setting(cfg, trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

TrainConfig resolve_config(const ConfigArgs& a) { return resolve_config(a, preset(a.preset)); }

std::vector<std::pair<std::string, PcaModel>> fitted_alignment(const Corpus& corpus, const ModelConfig& model) {
  std::vector<std::pair<std::string, PcaModel>> out;
  const AlignSpec spec = align_spec(model);
  for (const Dataset& d : corpus.datasets) {
    for (std::size_t i = 0; i < d.graphs.size(); ++i) {
      const std::string key = d.name + "/" + std::to_string(i);
      out.emplace_back(key, align(d.graphs[i].features, spec).pca);
    }
  }
  return out;
}

void cmd_pretrain(const ConfigArgs& ca, const std::string& resume, const fs::path& out, std::ostream& log,
                  RunManifest& m) {
  // A resumed run starts from the checkpoint's own config; the preset only
  // seeds fresh runs.
  std::optional<Checkpoint> resumed;
  if (!resume.empty()) resumed = read_checkpoint(resume);
  const TrainConfig cfg = resumed ? resolve_config(ca, resumed->config) : resolve_config(ca);
  m.config = config_json(cfg);
  m.seed = cfg.seed;
  if (cfg.corpus.empty()) throw ConfigError("corpus: no corpus registry given (set 'corpus')");
  if (!fs::exists(cfg.corpus)) throw ConfigError("corpus: registry '" + cfg.corpus + "' does not exist");
  const Corpus corpus = load_corpus(cfg.corpus);

  TrainState start;
  if (resumed) {
    if (!(resumed->config.model == cfg.model)) {
      throw ConfigError("--resume: checkpoint architecture differs from the config");
    }
    m.checkpoints["resumed_from"] = checkpoint_id(*resumed);
    start = std::move(resumed->state);
  } else {
    start = initial_state(cfg);
  }

  write_text(out / "config.txt", to_key_value_text(cfg));
  m.outputs.push_back("config.txt");
  const fs::path telemetry = out / "telemetry.csv";
  {
    std::ofstream f(telemetry, std::ios::trunc);
    if (!f) throw IoError("cannot write '" + telemetry.string() + "'");
    f << telemetry_csv_header() << "\n";
  }
  m.outputs.push_back("telemetry.csv");

  const auto pca = fitted_alignment(corpus, cfg.model);
  auto save = [&](const TrainState& st, const fs::path& path) {
    const Checkpoint ck{cfg, st, pca};
    write_checkpoint(ck, path);
    return checkpoint_id(ck);
  };

  auto on_epoch = [&](const TrainState& st, const EpochTelemetry& t) {
    std::ofstream f(telemetry, std::ios::app);
    f << telemetry_csv_row(t) << "\n";
    log << "epoch " << t.epoch << " loss " << t.total_loss << " shots " << t.shots << "\n";
    if (cfg.checkpoint_every > 0 && st.epoch % cfg.checkpoint_every == 0 && st.epoch < cfg.epochs) {
      fs::create_directories(out / "checkpoints");
      char name[32];
      std::snprintf(name, sizeof name, "epoch-%04d.ckpt", st.epoch);
      m.checkpoints[std::string("epoch-") + std::to_string(st.epoch)] = save(st, out / "checkpoints" / name);
      m.outputs.push_back(std::string("checkpoints/") + name);
    }
  };
  auto on_diverge = [&](const TrainState& st) {
    m.checkpoints["diverged"] = save(st, out / "diverged.ckpt");
    m.outputs.push_back("diverged.ckpt");
  };

  const TrainResult r = train(corpus, cfg, std::move(start), on_epoch, on_diverge);
  m.checkpoints["final"] = save(r.state, out / "final.ckpt");
  m.outputs.push_back("final.ckpt");
}

void cmd_init(const ConfigArgs& ca, const fs::path& out, RunManifest& m) {
  const TrainConfig cfg = resolve_config(ca);
  m.config = config_json(cfg);
  m.seed = cfg.seed;
  write_text(out / "config.txt", to_key_value_text(cfg));
  const Checkpoint ck{cfg, initial_state(cfg), {}};
  write_checkpoint(ck, out / "init.ckpt");
  m.checkpoints["init"] = checkpoint_id(ck);
  m.outputs.push_back("config.txt");
  m.outputs.push_back("init.ckpt");
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint;
  std::string registry;
  std::string dataset;
  std::string level = "node";
  int n_way = 2;
  int k_shot = 5;
  std::string metric = "accuracy";
  int runs = 5;
  std::string seeds;
  std::string sweep_k;
  std::vector<std::string> ablate;
  std::size_t query_cap = 2048;
};

std::size_t hits_k_of(const std::string& metric) {
  const auto at = metric.find('@');
  if (at == std::string::npos) return 100;
  try {
    return static_cast<std::size_t>(std::stoul(metric.substr(at + 1)));
  } catch (const std::exception&) {
    throw ConfigError("--metric: bad hits@K value in '" + metric + "'");
  }
}

void cmd_eval(const EvalArgs& a, const fs::path& out, RunManifest& m) {
  const Checkpoint ck = read_checkpoint(a.checkpoint);
  m.config = config_json(ck.config);
  m.checkpoints["evaluated"] = checkpoint_id(ck);

  EvalProtocol p;
  p.level = parse_task_level(a.level);
  p.n_way = p.level == TaskLevel::link ? 2 : a.n_way;
  p.k_shot = a.k_shot;
  p.metric = parse_metric(a.metric);
  p.hits_k = hits_k_of(a.metric);
  p.query_cap = a.query_cap;
  p.neg_ratio = ck.config.neg_ratio;
  p.seeds.clear();
  if (!a.seeds.empty()) {
    for (const auto& s : split_list(a.seeds)) p.seeds.push_back(std::stoull(s));
  } else {
    if (a.runs < 1) throw ConfigError("--runs must be >= 1");
    for (int i = 0; i < a.runs; ++i) p.seeds.push_back(static_cast<std::uint64_t>(i));
  }
  for (const auto& k : split_list(a.sweep_k)) p.sweep_k.push_back(std::stoi(k));
  for (const auto& flag : a.ablate)
    for (const auto& name : split_list(flag)) add_ablation(p.ablations, name);
  m.seed = p.seeds.front();

  const Dataset d = find_dataset(a.registry, a.dataset);
  const std::uint64_t before = fingerprint(ck.state.params);
  const EvalReport r = evaluate(ck.state.params, d, p, checkpoint_id(ck));
  if (fingerprint(ck.state.params) != before) throw NumericalError("evaluation modified the parameters");

  write_text(out / "report.json", report_to_json(r) + "\n");
  write_text(out / "report.csv", report_to_csv(r));
  m.outputs.push_back("report.json");
  m.outputs.push_back("report.csv");
  if (!p.sweep_k.empty()) {
    write_text(out / "sweep.csv", sweep_to_csv(r));
    m.outputs.push_back("sweep.csv");
  }
}

// ---- tokenize --------------------------------------------------------------

struct TokenizeArgs {
  std::string checkpoint;
  std::string registry;
  std::string dataset;
  std::string level = "node";
  std::string split_policy = "evaluation";
  int n_way = 2;
  int k_shot = 5;
  std::size_t query_size = 64;
  std::uint64_t seed = 0;
};

void cmd_tokenize(const TokenizeArgs& a, const fs::path& out, RunManifest& m) {
  const Checkpoint ck = read_checkpoint(a.checkpoint);
  m.config = config_json(ck.config);
  m.checkpoints["encoder"] = checkpoint_id(ck);
  m.seed = a.seed;
  const Dataset d = find_dataset(a.registry, a.dataset);
  const TaskLevel level = parse_task_level(a.level);
  SplitPolicy policy;
  if (a.split_policy == "evaluation") policy = SplitPolicy::evaluation;
  else if (a.split_policy == "pretrain") policy = SplitPolicy::pretrain;
  else throw ConfigError("--policy must be evaluation or pretrain");

  Rng rng(a.seed);
  Episode e;
  switch (level) {
    case TaskLevel::node: e = sample_node_episode(d.graphs.at(0), a.n_way, a.k_shot, a.query_size, policy, rng); break;
    case TaskLevel::link:
      e = sample_link_episode(d.graphs.at(0), a.k_shot, a.query_size, policy, rng, {ck.config.neg_ratio, 200});
      break;
    case TaskLevel::graph: e = sample_graph_episode(d, a.n_way, a.k_shot, a.query_size, policy, rng); break;
  }
  check_leakage(e, d);
  const PreparedDataset data = prepare_dataset(d, align_spec(ck.config.model));
  write_token_set(tokenize_episode(ck.state.params, data, e), out / "tokens.bin");
  write_text(out / "episode.json", episode_to_json(e) + "\n");
  m.outputs.push_back("tokens.bin");
  m.outputs.push_back("episode.json");
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ProtocolError*>(&e)) return kExitUsage;
  if (dynamic_cast<const NumericalError*>(&e)) return kExitNumerical;
  if (dynamic_cast<const Error*>(&e)) return kExitData;
  if (dynamic_cast<const std::invalid_argument*>(&e) || dynamic_cast<const std::out_of_range*>(&e)) return kExitUsage;
  return kExitData;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"gilt: graph in-context learning toolkit"};
  app.require_subcommand(1);
  std::string out_dir;

  PrepSyntheticArgs syn;
  PrepConvertArgs conv;
  auto* prep = app.add_subcommand("prep", "Build datasets and registries");
  prep->require_subcommand(1);
  auto* prep_syn = prep->add_subcommand("synthetic", "Stochastic block model corpus plus a held-out graph");
  prep_syn->add_option("--out", out_dir, "Output directory")->required();
  prep_syn->add_option("--graphs", syn.graphs, "Pre-training graphs");
  prep_syn->add_option("--classes", syn.classes);
  prep_syn->add_option("--nodes-per-class", syn.nodes_per_class);
  prep_syn->add_option("--feature-dim", syn.feature_dim);
  prep_syn->add_option("--intra-p", syn.intra_p);
  prep_syn->add_option("--inter-p", syn.inter_p);
  prep_syn->add_option("--separation", syn.separation, "Norm of each class mean");
  prep_syn->add_option("--noise-sd", syn.noise_sd);
  prep_syn->add_option("--seed", syn.seed);
  prep_syn->add_option("--split", syn.split, "train,valid,test fractions of the pre-training graphs");
  prep_syn->add_option("--heldout-split", syn.heldout_split, "train,valid,test fractions of the held-out graph");
  prep_syn->add_flag("--graph-set", syn.graph_set, "Also write a graph-classification dataset");
  auto* prep_conv = prep->add_subcommand("convert", "Convert an edge list or JSON graph and register it");
  prep_conv->add_option("--out", out_dir)->required();
  prep_conv->add_option("--input", conv.input)->required();
  prep_conv->add_option("--format", conv.format, "edge-list or json");
  prep_conv->add_option("--name", conv.name)->required();
  prep_conv->add_option("--levels", conv.levels, "Comma list of node,link");
  prep_conv->add_option("--split", conv.split);
  prep_conv->add_option("--seed", conv.seed);

  ConfigArgs cfg_args;
  std::string resume;
  auto* pre = app.add_subcommand("pretrain", "Episodic multi-task pre-training");
  pre->add_option("--config", cfg_args.config_path, "Key-value config file");
  pre->add_option("--preset", cfg_args.preset, "paper-table6 or desk")->check(CLI::IsMember({"paper-table6", "desk"}));
  pre->add_option("--set", cfg_args.sets, "key=value override (repeatable)");
  pre->add_option("--resume", resume, "Continue from a checkpoint");
  pre->add_option("--out", out_dir)->required();

  auto* init = app.add_subcommand("init", "Write an untrained checkpoint");
  init->add_option("--config", cfg_args.config_path);
  init->add_option("--preset", cfg_args.preset)->check(CLI::IsMember({"paper-table6", "desk"}));
  init->add_option("--set", cfg_args.sets);
  init->add_option("--out", out_dir)->required();

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Few-shot evaluation, ablations and shot sweeps");
  eval->add_option("--checkpoint", ev.checkpoint)->required();
  eval->add_option("--registry", ev.registry)->required();
  eval->add_option("--dataset", ev.dataset)->required();
  eval->add_option("--level", ev.level, "node, link or graph");
  eval->add_option("--n", ev.n_way, "Classes per episode");
  eval->add_option("--k", ev.k_shot, "Shots per class");
  eval->add_option("--metric", ev.metric, "accuracy, roc-auc or hits@K");
  eval->add_option("--runs", ev.runs, "Seeds 0..runs-1");
  eval->add_option("--seeds", ev.seeds, "Comma list; overrides --runs");
  eval->add_option("--sweep-k", ev.sweep_k, "Comma list of shot counts");
  eval->add_option("--ablate", ev.ablate,
                   "no-transformer, no-encoder, two-layer-encoder, full-token, unshared-attention, nonlinear-gcn");
  eval->add_option("--query-cap", ev.query_cap, "Query items for link and graph tasks");
  eval->add_option("--out", out_dir)->required();

  TokenizeArgs tk;
  auto* tok = app.add_subcommand("tokenize", "Export one episode's tokens");
  tok->add_option("--checkpoint", tk.checkpoint)->required();
  tok->add_option("--registry", tk.registry)->required();
  tok->add_option("--dataset", tk.dataset)->required();
  tok->add_option("--level", tk.level);
  tok->add_option("--policy", tk.split_policy, "evaluation or pretrain");
  tok->add_option("--n", tk.n_way);
  tok->add_option("--k", tk.k_shot);
  tok->add_option("--query-size", tk.query_size);
  tok->add_option("--seed", tk.seed);
  tok->add_option("--out", out_dir)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "gilt: " << e.what() << "\n";
    return kExitUsage;
  }

  RunManifest m;
  m.args = args;
  m.started_at = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path out_path(out_dir);
  try {
    fs::create_directories(out_path);
  } catch (const fs::filesystem_error& e) {
    err << "gilt: cannot create output directory '" << out_dir << "': " << e.what() << "\n";
    return kExitData;
  }
  m.threads = kernels::apply_thread_env();

  int code = kExitOk;
  try {
    if (prep_syn->parsed()) {
      m.command = "prep synthetic";
      prep_synthetic(syn, out_path, m);
    } else if (prep_conv->parsed()) {
      m.command = "prep convert";
      prep_convert(conv, out_path, m);
    } else if (pre->parsed()) {
      m.command = "pretrain";
      cmd_pretrain(cfg_args, resume, out_path, out, m);
    } else if (init->parsed()) {
      m.command = "init";
      cmd_init(cfg_args, out_path, m);
    } else if (eval->parsed()) {
      m.command = "eval";
      cmd_eval(ev, out_path, m);
    } else if (tok->parsed()) {
      m.command = "tokenize";
      cmd_tokenize(tk, out_path, m);
    }
  } catch (const std::exception& e) {
    code = exit_code_for(e);
    m.error = e.what();
    err << "gilt " << m.command << ": " << e.what() << "\n";
  }
  m.exit_code = code;
  m.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  try {
    write_manifest(m, out_path);
  } catch (const std::exception& e) {
    err << "gilt: " << e.what() << "\n";
    if (code == kExitOk) code = kExitData;
  }
  return code;
}

}  // namespace gilt::cli
