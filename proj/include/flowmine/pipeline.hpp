// Stage runners shared by the CLI subcommands and the `pipeline` driver.
// Each runner loads its inputs, produces its artifacts plus a manifest, and
// returns a one-line outcome; errors surface as exceptions, which callers map
// to exit codes with `classify_error`.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "flowmine/evaluator.hpp"
#include "flowmine/seqmodel.hpp"

namespace flowmine {

// Exit conventions: 0 success, 2 usage, 3 data/parse, 4 training divergence,
// 5 oracle budget exceeded.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitDiverged = 4;
inline constexpr int kExitBudget = 5;

int classify_error(const std::exception& e);

struct StageOutcome {
  int exit_code = kExitOk;
  std::string message;
};

struct GenStageOptions {
  std::string catalog_path;
  std::vector<std::string> flow_paths;
  std::size_t traces = 1;   // number of trace lines in the output file
  std::size_t runs = 16;    // flow instances per trace
  std::size_t cores = 4;
  double spawn_prob = 0.5;
  std::uint64_t seed = 0;
  bool negative = false;    // corrupt each trace and certify rejection
  std::size_t corruptions = 1;
  std::string out;          // .trc file
  std::string manifest_dir; // empty: alongside the output
  bool verbose = false;
};

struct GraphStageOptions {
  std::string catalog_path;
  std::string predicate = "union";
  std::string subgraph;     // "" or "START:END" to restrict to a pair
  std::string out;          // .dot file
  std::string manifest_dir;
  bool verbose = false;
};

struct TrainStageOptions {
  std::string catalog_path;
  std::string traces_path;
  int ngram = 0;            // 0: attention model; 2 or 3: n-gram order
  double smoothing = 0.0;   // n-gram additive constant
  ModelConfig model;
  std::string out;          // model file
  std::string manifest_dir;
  bool verbose = false;
};

struct MineStageOptions {
  std::string catalog_path;
  std::string traces_path;
  std::string model_path;
  std::string predicate = "union";
  double theta = 0.75;
  std::size_t samples = kDefaultNextScoreSamples;
  std::string out_dir;      // receives flow_S_E.flow/.dot, summary.txt
  std::string manifest_dir;
  bool verbose = false;
};

struct EvalStageOptions {
  std::string catalog_path;
  std::string flows;        // .flow file or a directory of them
  std::string traces_path;
  std::string policy = "greedy";  // "greedy" | "oracle"
  std::uint64_t budget = kDefaultOracleBudget;
  std::string benchmark;    // row label carried into reports
  std::string out;          // report text; key=value copy at out + ".kv"
  std::string manifest_dir;
  bool verbose = false;
};

struct ReportStageOptions {
  std::vector<std::string> inputs;  // eval .kv files
  std::string out;                  // summary text; kv copy at out + ".kv"
  std::string manifest_dir;
  bool verbose = false;
};

StageOutcome run_gen(const GenStageOptions& opt);
StageOutcome run_graph(const GraphStageOptions& opt);
StageOutcome run_train(const TrainStageOptions& opt);
StageOutcome run_mine(const MineStageOptions& opt);
StageOutcome run_eval(const EvalStageOptions& opt);
StageOutcome run_report(const ReportStageOptions& opt);

// Executes the stages of a line-oriented config file (sections `[gen]`,
// `[graph]`, `[train]`, `[mine]`, `[eval]`, `[report]` in file order; `key =
// value` entries; `#` comments). Relative output paths are placed under
// `out_dir` when it is nonempty, and inputs missing from the working
// directory are searched there too, so earlier stages can feed later ones.
// Halts at the first failing stage with a diagnostic naming it.
StageOutcome run_pipeline(const std::string& config_path,
                          const std::string& out_dir, bool verbose);

}  // namespace flowmine
