#include "flowmine/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include "flowmine/attention.hpp"
#include "flowmine/causality.hpp"
#include "flowmine/errors.hpp"
#include "flowmine/io.hpp"
#include "flowmine/manifest.hpp"
#include "flowmine/miner.hpp"
#include "flowmine/synthgen.hpp"

namespace flowmine {

namespace fs = std::filesystem;

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// Directory that receives manifest.txt for an artifact at `out`.
std::string manifest_path(const std::string& manifest_dir,
                          const std::string& out) {
  fs::path dir = manifest_dir.empty() ? fs::path(out).parent_path()
                                      : fs::path(manifest_dir);
  if (dir.empty()) dir = ".";
  fs::create_directories(dir);
  return (dir / "manifest.txt").string();
}

Catalog load_catalog(const std::string& path) {
  return parse_catalog(read_file(path));
}

std::vector<FlowSpec> load_flow_files(const std::vector<std::string>& paths,
                                      const Catalog& catalog) {
  std::vector<FlowSpec> flows;
  for (const std::string& p : paths) {
    for (FlowSpec& f : parse_flows(read_file(p), catalog)) {
      flows.push_back(std::move(f));
    }
  }
  return flows;
}

// A .flow file, or a directory of .flow files taken in name order.
std::vector<std::string> expand_flow_sources(const std::string& arg) {
  if (fs::is_directory(arg)) {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(arg)) {
      if (entry.path().extension() == ".flow") {
        files.push_back(entry.path().string());
      }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
      throw Error("no .flow files in directory: " + arg);
    }
    return files;
  }
  return {arg};
}

}  // namespace

int classify_error(const std::exception& e) {
  if (dynamic_cast<const NonFiniteLoss*>(&e)) return kExitDiverged;
  if (dynamic_cast<const Error*>(&e)) return kExitData;
  if (dynamic_cast<const std::invalid_argument*>(&e)) return kExitUsage;
  return 1;
}

StageOutcome run_gen(const GenStageOptions& opt) {
  Stopwatch clock;
  Catalog catalog = load_catalog(opt.catalog_path);
  std::vector<FlowSpec> flows = load_flow_files(opt.flow_paths, catalog);
  if (flows.empty()) throw Error("gen: no flows given");

  GenConfig cfg;
  cfg.cores = opt.cores;
  cfg.runs = opt.runs;
  cfg.seed = opt.seed;
  cfg.spawn_prob = opt.spawn_prob;

  std::vector<Trace> traces;
  traces.reserve(opt.traces);
  for (std::size_t i = 0; i < opt.traces; ++i) {
    GenConfig c = cfg;
    c.seed = cfg.seed + i;
    traces.push_back(opt.negative ? generate_negative(flows, c, opt.corruptions)
                                  : generate(flows, c));
  }
  write_file(opt.out, serialize_traces(traces));

  std::size_t events = 0;
  for (const auto& t : traces) events += t.size();

  RunManifest m;
  m.subcommand = "gen";
  m.seed = opt.seed;
  m.add_config("cores", static_cast<std::uint64_t>(opt.cores));
  m.add_config("runs", static_cast<std::uint64_t>(opt.runs));
  m.add_config("traces", static_cast<std::uint64_t>(opt.traces));
  m.add_config("spawn_prob", opt.spawn_prob);
  m.add_config("negative", std::string(opt.negative ? "true" : "false"));
  if (opt.negative) {
    m.add_config("corruptions", static_cast<std::uint64_t>(opt.corruptions));
  }
  m.add_config("out", opt.out);
  m.add_input("catalog", opt.catalog_path);
  for (std::size_t i = 0; i < opt.flow_paths.size(); ++i) {
    m.add_input("flows." + std::to_string(i), opt.flow_paths[i]);
  }
  m.runtime_seconds = clock.seconds();
  m.write(manifest_path(opt.manifest_dir, opt.out));

  return {kExitOk, "gen: wrote " + std::to_string(traces.size()) +
                       " traces (" + std::to_string(events) + " events) to " +
                       opt.out};
}

StageOutcome run_graph(const GraphStageOptions& opt) {
  Stopwatch clock;
  Catalog catalog = load_catalog(opt.catalog_path);
  Predicate pred = predicate_from_string(opt.predicate);
  CausalityGraph g = build_graph(catalog, pred);

  std::string what = "causality graph";
  if (!opt.subgraph.empty()) {
    auto colon = opt.subgraph.find(':');
    if (colon == std::string::npos) {
      throw std::invalid_argument("graph: --subgraph wants START:END");
    }
    MessageId s = static_cast<MessageId>(
        std::stoul(opt.subgraph.substr(0, colon)));
    MessageId e =
        static_cast<MessageId>(std::stoul(opt.subgraph.substr(colon + 1)));
    g = reachable_subgraph(g, s, e);
    what = "reachable subgraph " + opt.subgraph;
  }
  write_file(opt.out, to_dot(g, catalog));

  RunManifest m;
  m.subcommand = "graph";
  m.add_config("predicate", opt.predicate);
  if (!opt.subgraph.empty()) m.add_config("subgraph", opt.subgraph);
  m.add_config("nodes", static_cast<std::uint64_t>(g.nodes.size()));
  m.add_config("edges", static_cast<std::uint64_t>(g.edge_count()));
  m.add_config("out", opt.out);
  m.add_input("catalog", opt.catalog_path);
  m.runtime_seconds = clock.seconds();
  m.write(manifest_path(opt.manifest_dir, opt.out));

  return {kExitOk, "graph: wrote " + what + " (" +
                       std::to_string(g.nodes.size()) + " nodes, " +
                       std::to_string(g.edge_count()) + " edges) to " +
                       opt.out};
}

StageOutcome run_train(const TrainStageOptions& opt) {
  Stopwatch clock;
  Catalog catalog = load_catalog(opt.catalog_path);
  std::vector<Trace> traces = parse_traces(read_file(opt.traces_path), catalog);

  RunManifest m;
  m.subcommand = "train";
  m.seed = opt.model.seed;

  std::string family;
  if (opt.ngram != 0) {
    auto scorer = train_ngram(traces, catalog, opt.ngram, opt.smoothing);
    save_scorer(*scorer, opt.out);
    family = "ngram";
    m.add_config("family", family);
    m.add_config("order", static_cast<std::uint64_t>(opt.ngram));
    m.add_config("smoothing", opt.smoothing);
  } else {
    auto scorer = train(traces, catalog, opt.model);
    save_scorer(*scorer, opt.out);
    family = "attention";
    m.add_config("family", family);
    m.add_config("layers", static_cast<std::uint64_t>(opt.model.layers));
    m.add_config("heads", static_cast<std::uint64_t>(opt.model.heads));
    m.add_config("dim", static_cast<std::uint64_t>(opt.model.dim));
    m.add_config("window", static_cast<std::uint64_t>(opt.model.window));
    m.add_config("mask_prob", opt.model.mask_prob);
    m.add_config("epochs", static_cast<std::uint64_t>(opt.model.epochs));
    m.add_config("learning_rate", opt.model.learning_rate);
    m.add_config("batch", static_cast<std::uint64_t>(opt.model.batch));
    for (std::size_t i = 0; i < scorer->epoch_losses.size(); ++i) {
      m.add_config("epoch_loss." + std::to_string(i + 1),
                   scorer->epoch_losses[i]);
      if (opt.verbose) {
        std::cout << "epoch " << (i + 1) << " loss "
                  << fmt(scorer->epoch_losses[i]) << "\n";
      }
    }
  }
  m.add_config("out", opt.out);
  m.add_input("catalog", opt.catalog_path);
  m.add_input("traces", opt.traces_path);
  m.runtime_seconds = clock.seconds();
  m.write(manifest_path(opt.manifest_dir, opt.out));

  return {kExitOk, "train: wrote " + family + " model to " + opt.out};
}

StageOutcome run_mine(const MineStageOptions& opt) {
  Stopwatch clock;
  Catalog catalog = load_catalog(opt.catalog_path);
  std::vector<Trace> traces = parse_traces(read_file(opt.traces_path), catalog);
  std::unique_ptr<Scorer> scorer = load_scorer(opt.model_path);
  CausalityGraph g = build_graph(catalog, predicate_from_string(opt.predicate));

  MineOptions mo;
  mo.theta = opt.theta;
  mo.samples = opt.samples;
  MineResult result = mine(g, *scorer, traces, catalog, mo);

  fs::create_directories(opt.out_dir);
  std::ostringstream summary;
  summary << "mining summary (theta = " << fmt(opt.theta) << ")\n\n";
  for (const MinedFlow& flow : result.flows) {
    std::string name = "flow_" + std::to_string(flow.start) + "_" +
                       std::to_string(flow.end);
    FlowSpec spec = to_flowspec(flow, name);
    write_file((fs::path(opt.out_dir) / (name + ".flow")).string(),
               serialize_flows({spec}));
    write_file((fs::path(opt.out_dir) / (name + ".dot")).string(),
               flow_to_dot(spec, catalog));
    summary << name << ": " << flow.edges.size() << " edges\n";
    for (const auto& [edge, rel] : flow.edge_scores) {
      summary << "  kept " << edge.first << " -> " << edge.second
              << "  score " << fmt(rel) << " (raw "
              << fmt(flow.raw_scores.at(edge)) << ")\n";
    }
  }
  if (!result.skipped.empty()) {
    summary << "\nskipped pairs\n";
    for (const SkippedPair& p : result.skipped) {
      summary << "  (" << p.start << ", " << p.end << "): " << p.reason
              << "\n";
    }
  }
  if (!result.removed.empty()) {
    summary << "\nremoved edges\n";
    for (const RemovedEdge& r : result.removed) {
      summary << "  pair (" << r.start << ", " << r.end << ") " << r.src
              << " -> " << r.dst << "  stage " << r.stage;
      if (r.stage == "threshold") {
        summary << "  score " << fmt(r.relative_score) << " (raw "
                << fmt(r.raw_score) << ")";
      }
      summary << "\n";
    }
  }
  write_file((fs::path(opt.out_dir) / "summary.txt").string(), summary.str());

  RunManifest m;
  m.subcommand = "mine";
  m.add_config("theta", opt.theta);
  m.add_config("samples", static_cast<std::uint64_t>(opt.samples));
  m.add_config("predicate", opt.predicate);
  m.add_config("flows_mined", static_cast<std::uint64_t>(result.flows.size()));
  m.add_config("pairs_skipped",
               static_cast<std::uint64_t>(result.skipped.size()));
  m.add_config("out_dir", opt.out_dir);
  m.add_input("catalog", opt.catalog_path);
  m.add_input("traces", opt.traces_path);
  m.add_input("model", opt.model_path);
  m.runtime_seconds = clock.seconds();
  m.write(manifest_path(opt.manifest_dir,
                        (fs::path(opt.out_dir) / "summary.txt").string()));

  return {kExitOk, "mine: " + std::to_string(result.flows.size()) +
                       " flows, " + std::to_string(result.skipped.size()) +
                       " pairs skipped; artifacts in " + opt.out_dir};
}

StageOutcome run_eval(const EvalStageOptions& opt) {
  Stopwatch clock;
  Catalog catalog = load_catalog(opt.catalog_path);
  std::vector<std::string> flow_files = expand_flow_sources(opt.flows);
  std::vector<FlowSpec> flows = load_flow_files(flow_files, catalog);
  std::vector<Trace> traces = parse_traces(read_file(opt.traces_path), catalog);

  if (opt.policy != "greedy" && opt.policy != "oracle") {
    throw std::invalid_argument("eval: policy must be greedy or oracle");
  }

  std::size_t size = 0;  // model size convention: nodes + edges, all flows
  for (const FlowSpec& f : flows) {
    size += f.nodes().size() + f.edges().size();
  }

  std::vector<EvalReport> reports;
  reports.reserve(traces.size());
  for (const Trace& t : traces) {
    reports.push_back(opt.policy == "greedy"
                          ? evaluate_greedy(flows, t)
                          : evaluate_oracle(flows, t, opt.budget));
  }

  std::size_t events = 0, accepted = 0, incomplete = 0;
  bool truncated = false;
  for (const EvalReport& r : reports) {
    events += r.total_events;
    accepted += r.accepted;
    incomplete += r.incomplete_instances;
    truncated = truncated || r.budget_exceeded;
  }
  double ratio = events == 0 ? 1.0
                             : static_cast<double>(accepted) /
                                   static_cast<double>(events);
  double rt = clock.seconds();

  std::ostringstream human;
  human << "evaluation report\n";
  human << "policy = " << opt.policy << "\n";
  human << "flows = " << flows.size() << " (size " << size << ")\n";
  human << "traces = " << traces.size() << "\n\n";
  human << "trace  events  accepted  rejected  rate  incomplete\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const EvalReport& r = reports[i];
    human << i << "  " << r.total_events << "  " << r.accepted << "  "
          << r.rejected << "  " << fmt(r.rate) << "  "
          << r.incomplete_instances << "\n";
  }
  human << "\naggregate: events " << events << ", accepted " << accepted
        << ", ratio " << fmt(ratio) << ", incomplete " << incomplete << "\n";
  if (truncated) {
    human << "oracle budget exceeded: ratio is a lower bound\n";
  }
  std::size_t nondet_total = 0;
  for (const EvalReport& r : reports) nondet_total += r.nondet.size();
  if (nondet_total != 0) {
    human << "\nnon-deterministic fits: " << nondet_total << "\n";
    std::size_t shown = 0;
    for (std::size_t i = 0; i < reports.size() && shown < 50; ++i) {
      for (const NondetNote& n : reports[i].nondet) {
        human << "  trace " << i << " event " << n.event_index
              << ": candidates";
        for (std::uint32_t c : n.candidates) human << " " << c;
        human << "\n";
        if (++shown >= 50) break;
      }
    }
    if (nondet_total > shown) {
      human << "  ... " << (nondet_total - shown) << " more\n";
    }
  }
  write_file(opt.out, human.str());

  std::ostringstream kv;
  if (!opt.benchmark.empty()) kv << "benchmark = " << opt.benchmark << "\n";
  kv << "policy = " << opt.policy << "\n";
  kv << "flows = " << flows.size() << "\n";
  kv << "size = " << size << "\n";
  kv << "events = " << events << "\n";
  kv << "accepted = " << accepted << "\n";
  kv << "rejected = " << (events - accepted) << "\n";
  kv << "ratio = " << fmt(ratio) << "\n";
  kv << "incomplete_instances = " << incomplete << "\n";
  kv << "nondet = " << nondet_total << "\n";
  kv << "budget_exceeded = " << (truncated ? 1 : 0) << "\n";
  kv << "rt_seconds = " << fmt(rt) << "\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    kv << "trace." << i << ".events = " << reports[i].total_events << "\n";
    kv << "trace." << i << ".rate = " << fmt(reports[i].rate) << "\n";
  }
  write_file(opt.out + ".kv", kv.str());

  RunManifest m;
  m.subcommand = "eval";
  m.add_config("policy", opt.policy);
  m.add_config("budget", opt.budget);
  if (!opt.benchmark.empty()) m.add_config("benchmark", opt.benchmark);
  m.add_config("ratio", ratio);
  m.add_config("size", static_cast<std::uint64_t>(size));
  m.add_config("out", opt.out);
  m.add_input("catalog", opt.catalog_path);
  for (std::size_t i = 0; i < flow_files.size(); ++i) {
    m.add_input("flows." + std::to_string(i), flow_files[i]);
  }
  m.add_input("traces", opt.traces_path);
  m.runtime_seconds = rt;
  m.write(manifest_path(opt.manifest_dir, opt.out));

  StageOutcome outcome;
  outcome.exit_code = truncated ? kExitBudget : kExitOk;
  outcome.message = "eval: ratio " + fmt(ratio) + " over " +
                    std::to_string(events) + " events (" + opt.policy + ")" +
                    (truncated ? " [budget exceeded: lower bound]" : "");
  return outcome;
}

StageOutcome run_report(const ReportStageOptions& opt) {
  Stopwatch clock;
  if (opt.inputs.empty()) throw Error("report: no eval inputs");

  struct Row {
    std::string benchmark;
    bool has_flows = false;
    double ratio = 0.0;
    std::size_t size = 0;
    double rt = 0.0;
    bool lower_bound = false;
  };
  std::vector<Row> rows;
  for (const std::string& path : opt.inputs) {
    std::map<std::string, std::string> kv;
    std::istringstream in(read_file(path));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#') continue;
      auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ParseError(lineno, "expected key = value in " + path);
      }
      auto trim = [](std::string s) {
        s.erase(0, s.find_first_not_of(" \t"));
        s.erase(s.find_last_not_of(" \t") + 1);
        return s;
      };
      kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    Row row;
    row.benchmark = kv.count("benchmark") ? kv["benchmark"] : path;
    row.has_flows = kv.count("flows") && kv["flows"] != "0";
    if (kv.count("ratio")) row.ratio = std::stod(kv["ratio"]);
    if (kv.count("size")) row.size = std::stoul(kv["size"]);
    if (kv.count("rt_seconds")) row.rt = std::stod(kv["rt_seconds"]);
    row.lower_bound = kv.count("budget_exceeded") && kv["budget_exceeded"] == "1";
    rows.push_back(row);
  }

  std::ostringstream human, kv;
  human << "mining summary\n";
  human << "benchmark  Ratio  size  RT(s)\n";
  double ratio_sum = 0.0, rt_sum = 0.0;
  std::size_t size_sum = 0, counted = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    human << r.benchmark << "  ";
    kv << "row." << i << ".benchmark = " << r.benchmark << "\n";
    if (!r.has_flows) {
      human << "n/a (no flows mined)  0  " << fmt(r.rt) << "\n";
      kv << "row." << i << ".ratio = n/a\n";
      kv << "row." << i << ".reason = no flows mined\n";
    } else {
      human << fmt(r.ratio) << (r.lower_bound ? " (lower bound)" : "") << "  "
            << r.size << "  " << fmt(r.rt) << "\n";
      kv << "row." << i << ".ratio = " << fmt(r.ratio) << "\n";
      ratio_sum += r.ratio;
      size_sum += r.size;
      rt_sum += r.rt;
      ++counted;
    }
    kv << "row." << i << ".size = " << r.size << "\n";
    kv << "row." << i << ".rt_seconds = " << fmt(r.rt) << "\n";
  }
  if (counted > 0) {
    double dm = static_cast<double>(counted);
    human << "mean  " << fmt(ratio_sum / dm) << "  "
          << fmt(static_cast<double>(size_sum) / dm) << "  "
          << fmt(rt_sum / dm) << "\n";
    kv << "mean.ratio = " << fmt(ratio_sum / dm) << "\n";
    kv << "mean.size = " << fmt(static_cast<double>(size_sum) / dm) << "\n";
    kv << "mean.rt_seconds = " << fmt(rt_sum / dm) << "\n";
  }
  write_file(opt.out, human.str());
  write_file(opt.out + ".kv", kv.str());

  RunManifest m;
  m.subcommand = "report";
  for (std::size_t i = 0; i < opt.inputs.size(); ++i) {
    m.add_input("eval." + std::to_string(i), opt.inputs[i]);
  }
  m.add_config("out", opt.out);
  m.runtime_seconds = clock.seconds();
  m.write(manifest_path(opt.manifest_dir, opt.out));

  return {kExitOk,
          "report: " + std::to_string(rows.size()) + " rows to " + opt.out};
}

/* ---- pipeline driver ---- */

namespace {

struct StageConfig {
  std::string name;
  std::size_t line = 0;  // of the [section] header
  std::map<std::string, std::string> kv;
  std::map<std::string, std::size_t> kv_lines;
};

std::vector<StageConfig> parse_pipeline_config(const std::string& text) {
  std::vector<StageConfig> stages;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = line;
    s.erase(0, s.find_first_not_of(" \t"));
    s.erase(s.find_last_not_of(" \t\r") + 1);
    if (s.empty() || s[0] == '#') continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ParseError(lineno, "unterminated section");
      stages.push_back(StageConfig{s.substr(1, s.size() - 2), lineno, {}, {}});
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw ParseError(lineno, "expected key = value");
    }
    if (stages.empty()) {
      throw ParseError(lineno, "key outside any [stage] section");
    }
    auto trim = [](std::string t) {
      t.erase(0, t.find_first_not_of(" \t"));
      t.erase(t.find_last_not_of(" \t") + 1);
      return t;
    };
    std::string key = trim(s.substr(0, eq));
    if (stages.back().kv.count(key)) {
      throw ParseError(lineno, "duplicate key: " + key);
    }
    stages.back().kv[key] = trim(s.substr(eq + 1));
    stages.back().kv_lines[key] = lineno;
  }
  return stages;
}

class KeyReader {
 public:
  KeyReader(const StageConfig& stage) : stage_(stage) {}

  bool has(const std::string& key) {
    used_.insert(key);
    return stage_.kv.count(key) != 0;
  }
  std::string str(const std::string& key, const std::string& fallback = "") {
    used_.insert(key);
    auto it = stage_.kv.find(key);
    return it == stage_.kv.end() ? fallback : it->second;
  }
  std::string require(const std::string& key) {
    used_.insert(key);
    auto it = stage_.kv.find(key);
    if (it == stage_.kv.end()) {
      throw ParseError(stage_.line,
                       "[" + stage_.name + "] missing key: " + key);
    }
    return it->second;
  }
  std::uint64_t num(const std::string& key, std::uint64_t fallback) {
    used_.insert(key);
    auto it = stage_.kv.find(key);
    return it == stage_.kv.end() ? fallback : std::stoull(it->second);
  }
  double real(const std::string& key, double fallback) {
    used_.insert(key);
    auto it = stage_.kv.find(key);
    return it == stage_.kv.end() ? fallback : std::stod(it->second);
  }
  std::vector<std::string> list(const std::string& key) {
    used_.insert(key);
    std::vector<std::string> out;
    auto it = stage_.kv.find(key);
    if (it == stage_.kv.end()) return out;
    std::istringstream in(it->second);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
  }
  void reject_unknown() const {
    for (const auto& [k, v] : stage_.kv) {
      (void)v;
      if (!used_.count(k)) {
        throw ParseError(stage_.kv_lines.at(k),
                         "[" + stage_.name + "] unknown key: " + k);
      }
    }
  }

 private:
  const StageConfig& stage_;
  std::set<std::string> used_;
};

// Output path: relative paths land under out_dir. Input path: prefer the
// working directory, fall back to out_dir (earlier stage outputs live there).
std::string out_path(const std::string& out_dir, const std::string& p) {
  if (out_dir.empty() || p.empty() || fs::path(p).is_absolute()) return p;
  return (fs::path(out_dir) / p).string();
}
std::string in_path(const std::string& out_dir, const std::string& p) {
  if (out_dir.empty() || p.empty() || fs::path(p).is_absolute()) return p;
  if (fs::exists(p)) return p;
  fs::path alt = fs::path(out_dir) / p;
  if (fs::exists(alt)) return alt.string();
  return p;
}

}  // namespace

StageOutcome run_pipeline(const std::string& config_path,
                          const std::string& out_dir, bool verbose) {
  std::vector<StageConfig> stages = parse_pipeline_config(read_file(config_path));
  if (stages.empty()) {
    throw ParseError(0, "pipeline config has no stages");
  }
  if (!out_dir.empty()) fs::create_directories(out_dir);

  for (const StageConfig& stage : stages) {
    StageOutcome outcome;
    try {
      KeyReader r(stage);
      if (stage.name == "gen") {
        GenStageOptions o;
        o.catalog_path = in_path(out_dir, r.require("catalog"));
        for (const std::string& f : r.list("flows")) {
          o.flow_paths.push_back(in_path(out_dir, f));
        }
        o.traces = r.num("traces", o.traces);
        o.runs = r.num("runs", o.runs);
        o.cores = r.num("cores", o.cores);
        o.spawn_prob = r.real("spawn_prob", o.spawn_prob);
        o.seed = r.num("seed", o.seed);
        o.negative = r.str("negative", "false") == "true";
        o.corruptions = r.num("corruptions", o.corruptions);
        o.out = out_path(out_dir, r.require("out"));
        o.verbose = verbose;
        r.reject_unknown();
        outcome = run_gen(o);
      } else if (stage.name == "graph") {
        GraphStageOptions o;
        o.catalog_path = in_path(out_dir, r.require("catalog"));
        o.predicate = r.str("predicate", o.predicate);
        o.subgraph = r.str("subgraph", "");
        o.out = out_path(out_dir, r.require("out"));
        o.verbose = verbose;
        r.reject_unknown();
        outcome = run_graph(o);
      } else if (stage.name == "train") {
        TrainStageOptions o;
        o.catalog_path = in_path(out_dir, r.require("catalog"));
        o.traces_path = in_path(out_dir, r.require("traces"));
        o.ngram = static_cast<int>(r.num("ngram", 0));
        o.smoothing = r.real("smoothing", o.smoothing);
        o.model.layers = r.num("layers", o.model.layers);
        o.model.heads = r.num("heads", o.model.heads);
        o.model.dim = r.num("dim", o.model.dim);
        o.model.window = r.num("window", o.model.window);
        o.model.mask_prob = r.real("mask_prob", o.model.mask_prob);
        o.model.epochs = r.num("epochs", o.model.epochs);
        o.model.learning_rate = r.real("lr", o.model.learning_rate);
        o.model.batch = r.num("batch", o.model.batch);
        o.model.seed = r.num("seed", o.model.seed);
        o.out = out_path(out_dir, r.require("out"));
        o.verbose = verbose;
        r.reject_unknown();
        outcome = run_train(o);
      } else if (stage.name == "mine") {
        MineStageOptions o;
        o.catalog_path = in_path(out_dir, r.require("catalog"));
        o.traces_path = in_path(out_dir, r.require("traces"));
        o.model_path = in_path(out_dir, r.require("model"));
        o.predicate = r.str("predicate", o.predicate);
        o.theta = r.real("theta", o.theta);
        o.samples = r.num("samples", o.samples);
        o.out_dir = out_path(out_dir, r.require("out"));
        o.verbose = verbose;
        r.reject_unknown();
        outcome = run_mine(o);
      } else if (stage.name == "eval") {
        EvalStageOptions o;
        o.catalog_path = in_path(out_dir, r.require("catalog"));
        o.flows = in_path(out_dir, r.require("flows"));
        o.traces_path = in_path(out_dir, r.require("traces"));
        o.policy = r.str("policy", o.policy);
        o.budget = r.num("budget", o.budget);
        o.benchmark = r.str("benchmark", "");
        o.out = out_path(out_dir, r.require("out"));
        o.verbose = verbose;
        r.reject_unknown();
        outcome = run_eval(o);
      } else if (stage.name == "report") {
        ReportStageOptions o;
        for (const std::string& f : r.list("inputs")) {
          o.inputs.push_back(in_path(out_dir, f));
        }
        o.out = out_path(out_dir, r.require("out"));
        o.verbose = verbose;
        r.reject_unknown();
        outcome = run_report(o);
      } else {
        throw ParseError(stage.line, "unknown stage: " + stage.name);
      }
    } catch (const std::exception& e) {
      return {classify_error(e),
              "stage " + stage.name + " failed: " + e.what()};
    }
    if (verbose) std::cout << outcome.message << "\n";
    if (outcome.exit_code != kExitOk) {
      outcome.message = "stage " + stage.name + ": " + outcome.message;
      return outcome;
    }
  }
  return {kExitOk, "pipeline: " + std::to_string(stages.size()) +
                       " stages completed"};
}

}  // namespace flowmine
