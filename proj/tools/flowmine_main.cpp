// flowmine: mine message-flow specifications from SoC communication traces.
//
// Subcommands: gen, graph, train, mine, eval, report, pipeline.
// Exit codes: 0 success, 2 usage error, 3 data/parse error, 4 training
// divergence, 5 oracle budget exceeded.

#include <iostream>

#include <CLI11.hpp>

#include "flowmine/pipeline.hpp"
#include "flowmine/version.hpp"

namespace {

int finish(const flowmine::StageOutcome& outcome, bool verbose) {
  // Stage messages are one-liners; always show failures, show successes
  // unless the stage already printed (pipeline prints per stage).
  if (outcome.exit_code == flowmine::kExitOk) {
    std::cout << outcome.message << "\n";
  } else {
    std::cerr << outcome.message << "\n";
  }
  (void)verbose;
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flowmine: message-flow mining from communication traces"};
  app.set_version_flag("--version", flowmine::kVersion);
  app.require_subcommand(1);

  bool verbose = false;
  std::string manifest_dir;
  std::uint64_t global_seed = 0;
  app.add_flag("--verbose", verbose, "chatty stage output");
  app.add_option("--manifest-dir", manifest_dir,
                 "directory for manifest.txt (default: beside the artifact)");
  auto* seed_opt =
      app.add_option("--seed", global_seed, "seed for seedable subcommands");

  int exit_code = 0;
  auto run = [&](const flowmine::StageOutcome& outcome) {
    exit_code = finish(outcome, verbose);
  };

  // gen
  auto* gen = app.add_subcommand("gen", "generate synthetic traces");
  auto gen_opt = std::make_shared<flowmine::GenStageOptions>();
  gen->add_option("--catalog", gen_opt->catalog_path, "message catalog (.cat)")
      ->required();
  gen->add_option("--flows", gen_opt->flow_paths, "flow files (.flow)")
      ->required()
      ->expected(-1);
  gen->add_option("--traces", gen_opt->traces, "trace lines to emit");
  gen->add_option("--runs", gen_opt->runs, "flow instances per trace");
  gen->add_option("--cores", gen_opt->cores, "max concurrent instances");
  gen->add_option("--spawn-prob", gen_opt->spawn_prob,
                  "bias of the spawn-vs-advance coin");
  auto* gen_seed = gen->add_option("--seed", gen_opt->seed, "base seed");
  gen->add_flag("--negative", gen_opt->negative,
                "corrupt each trace and certify it is rejected");
  gen->add_option("--corruptions", gen_opt->corruptions,
                  "edits per corrupted trace");
  gen->add_option("-o,--out", gen_opt->out, "output .trc file")->required();
  gen->callback([&, gen_opt, gen_seed] {
    if (!*gen_seed && *seed_opt) gen_opt->seed = global_seed;
    gen_opt->manifest_dir = manifest_dir;
    gen_opt->verbose = verbose;
    run(flowmine::run_gen(*gen_opt));
  });

  // graph
  auto* graph = app.add_subcommand("graph", "build the causality graph");
  auto graph_opt = std::make_shared<flowmine::GraphStageOptions>();
  graph->add_option("--catalog", graph_opt->catalog_path, "message catalog")
      ->required();
  graph->add_option("--predicate", graph_opt->predicate,
                    "paper | forward | union");
  graph->add_option("--subgraph", graph_opt->subgraph,
                    "restrict to START:END reachable subgraph");
  graph->add_option("-o,--out", graph_opt->out, "output .dot file")->required();
  graph->callback([&, graph_opt] {
    graph_opt->manifest_dir = manifest_dir;
    graph_opt->verbose = verbose;
    run(flowmine::run_graph(*graph_opt));
  });

  // train
  auto* train = app.add_subcommand("train", "train a scorer");
  auto train_opt = std::make_shared<flowmine::TrainStageOptions>();
  train->add_option("--catalog", train_opt->catalog_path, "message catalog")
      ->required();
  train->add_option("--traces", train_opt->traces_path, "training traces")
      ->required();
  train->add_option("--ngram", train_opt->ngram,
                    "n-gram order (2 or 3) instead of the attention model");
  train->add_option("--smoothing", train_opt->smoothing,
                    "n-gram additive smoothing");
  train->add_option("--layers", train_opt->model.layers, "encoder layers");
  train->add_option("--heads", train_opt->model.heads, "attention heads");
  train->add_option("--dim", train_opt->model.dim, "model width");
  train->add_option("--window", train_opt->model.window, "context window");
  train->add_option("--mask-prob", train_opt->model.mask_prob,
                    "masking probability");
  train->add_option("--epochs", train_opt->model.epochs, "training epochs");
  train->add_option("--lr", train_opt->model.learning_rate, "learning rate");
  train->add_option("--batch", train_opt->model.batch, "windows per step");
  auto* train_seed = train->add_option("--seed", train_opt->model.seed, "seed");
  train->add_option("-o,--out", train_opt->out, "output model file")
      ->required();
  train->callback([&, train_opt, train_seed] {
    if (!*train_seed && *seed_opt) train_opt->model.seed = global_seed;
    train_opt->manifest_dir = manifest_dir;
    train_opt->verbose = verbose;
    run(flowmine::run_train(*train_opt));
  });

  // mine
  auto* mine = app.add_subcommand("mine", "mine flows from the graph");
  auto mine_opt = std::make_shared<flowmine::MineStageOptions>();
  mine->add_option("--catalog", mine_opt->catalog_path, "message catalog")
      ->required();
  mine->add_option("--traces", mine_opt->traces_path, "trace corpus")
      ->required();
  mine->add_option("--model", mine_opt->model_path, "trained scorer")
      ->required();
  mine->add_option("--predicate", mine_opt->predicate,
                   "paper | forward | union");
  mine->add_option("--theta", mine_opt->theta, "retention threshold");
  mine->add_option("--samples", mine_opt->samples,
                   "occurrences sampled per score");
  mine->add_option("-o,--out", mine_opt->out_dir, "output directory")
      ->required();
  mine->callback([&, mine_opt] {
    mine_opt->manifest_dir = manifest_dir;
    mine_opt->verbose = verbose;
    run(flowmine::run_mine(*mine_opt));
  });

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate flows against traces");
  auto eval_opt = std::make_shared<flowmine::EvalStageOptions>();
  eval->add_option("--catalog", eval_opt->catalog_path, "message catalog")
      ->required();
  eval->add_option("--flows", eval_opt->flows,
                   ".flow file or directory of them")
      ->required();
  eval->add_option("--traces", eval_opt->traces_path, "trace corpus")
      ->required();
  eval->add_option("--policy", eval_opt->policy, "greedy | oracle");
  eval->add_option("--budget", eval_opt->budget, "oracle search budget");
  eval->add_option("--benchmark", eval_opt->benchmark, "row label for reports");
  eval->add_option("-o,--out", eval_opt->out, "report file (.kv copy added)")
      ->required();
  eval->callback([&, eval_opt] {
    eval_opt->manifest_dir = manifest_dir;
    eval_opt->verbose = verbose;
    run(flowmine::run_eval(*eval_opt));
  });

  // report
  auto* report = app.add_subcommand("report", "summarize eval outputs");
  auto report_opt = std::make_shared<flowmine::ReportStageOptions>();
  report->add_option("--inputs", report_opt->inputs, "eval .kv files")
      ->required()
      ->expected(-1);
  report->add_option("-o,--out", report_opt->out, "summary file")->required();
  report->callback([&, report_opt] {
    report_opt->manifest_dir = manifest_dir;
    report_opt->verbose = verbose;
    run(flowmine::run_report(*report_opt));
  });

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "run staged config end to end");
  auto pipe_config = std::make_shared<std::string>();
  auto pipe_out = std::make_shared<std::string>();
  pipe->add_option("--config", *pipe_config, "stage config file")->required();
  pipe->add_option("-o,--out", *pipe_out, "artifact directory");
  pipe->callback([&, pipe_config, pipe_out] {
    run(flowmine::run_pipeline(*pipe_config, *pipe_out, verbose));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    // CLI11's --help/--version exit with 0; real usage problems map to 2.
    return code == 0 ? 0 : flowmine::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return flowmine::classify_error(e);
  }
  return exit_code;
}
