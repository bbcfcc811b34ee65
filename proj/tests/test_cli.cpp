#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include "fixtures.hpp"
#include "flowmine/io.hpp"
#include "flowmine/seqmodel.hpp"

using namespace flowmine;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string output;  // stdout and stderr combined
};

CliResult run_cli(const std::string& args) {
  std::string cmd = std::string(FLOWMINE_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

// Shared scratch area with the abc catalog and flow written once.
const std::string& work_dir() {
  static std::string dir = [] {
    std::string d = "/tmp/flowmine_cli_test";
    fs::create_directories(d);
    write_file(d + "/abc.cat", serialize_catalog(testing::abc_catalog()));
    write_file(d + "/abc.flow", serialize_flows({testing::abc_flow()}));
    return d;
  }();
  return dir;
}

std::string path(const std::string& name) { return work_dir() + "/" + name; }

void gen_corpus(const std::string& out, const std::string& extra = "") {
  CliResult r = run_cli("gen --catalog " + path("abc.cat") + " --flows " +
                        path("abc.flow") + " --traces 3 --runs 4 --cores 2" +
                        " --seed 5 -o " + out + " " + extra);
  REQUIRE(r.code == 0);
}

}  // namespace

TEST_CASE("cli: --version prints a version and exits cleanly") {
  CliResult r = run_cli("--version");
  CHECK(r.code == 0);
  CHECK(r.output.find('.') != std::string::npos);
}

TEST_CASE("cli: usage problems exit with 2") {
  CHECK(run_cli("").code == 2);                       // subcommand required
  CHECK(run_cli("frobnicate").code == 2);             // unknown subcommand
  CHECK(run_cli("gen --no-such-flag").code == 2);     // unknown flag
  CHECK(run_cli("gen -o /tmp/x.trc").code == 2);      // missing required
}

TEST_CASE("cli: gen writes a parseable corpus and is seed-deterministic") {
  gen_corpus(path("t1.trc"));
  gen_corpus(path("t2.trc"));
  CHECK(read_file(path("t1.trc")) == read_file(path("t2.trc")));

  Catalog c = testing::abc_catalog();
  auto traces = parse_traces(read_file(path("t1.trc")), c);
  REQUIRE(traces.size() == 3);
  for (const Trace& t : traces) CHECK(t.size() == 12);  // 4 runs x 3 events

  std::string manifest = read_file(path("manifest.txt"));
  CHECK(manifest.find("subcommand = gen") != std::string::npos);
  CHECK(manifest.find("seed = 5") != std::string::npos);
  CHECK(manifest.find("config.cores = 2") != std::string::npos);
  CHECK(manifest.find("input.catalog = ") != std::string::npos);
  CHECK(manifest.find("crc32=") != std::string::npos);
  CHECK(manifest.find("tool_version") != std::string::npos);
}

TEST_CASE("cli: the global --seed matches the subcommand --seed") {
  CliResult a = run_cli("--seed 5 gen --catalog " + path("abc.cat") +
                        " --flows " + path("abc.flow") +
                        " --traces 3 --runs 4 --cores 2 -o " +
                        path("t_global.trc"));
  REQUIRE(a.code == 0);
  gen_corpus(path("t_sub.trc"));
  CHECK(read_file(path("t_global.trc")) == read_file(path("t_sub.trc")));
}

TEST_CASE("cli: a missing input exits 3 and names the file") {
  CliResult r = run_cli("gen --catalog /tmp/absent.cat --flows " +
                        path("abc.flow") + " -o " + path("t_err.trc"));
  CHECK(r.code == 3);
  CHECK(r.output.find("absent.cat") != std::string::npos);
}

TEST_CASE("cli: graph exports dot, optionally restricted to a pair") {
  CliResult r = run_cli("graph --catalog " + path("abc.cat") + " -o " +
                        path("g.dot"));
  CHECK(r.code == 0);
  std::string dot = read_file(path("g.dot"));
  CHECK(dot.find("digraph") != std::string::npos);
  CHECK(dot.find("->") != std::string::npos);

  CliResult sub = run_cli("graph --catalog " + path("abc.cat") +
                          " --subgraph 1:3 -o " + path("g_sub.dot"));
  CHECK(sub.code == 0);

  CHECK(run_cli("graph --catalog " + path("abc.cat") +
                " --predicate sideways -o " + path("g_bad.dot"))
            .code == 3);
  CHECK(run_cli("graph --catalog " + path("abc.cat") + " --subgraph 1-3 -o " +
                path("g_bad.dot"))
            .code == 2);
}

TEST_CASE("cli: train/mine/eval round trip on the abc corpus") {
  gen_corpus(path("t1.trc"));

  CliResult tr = run_cli("train --catalog " + path("abc.cat") + " --traces " +
                         path("t1.trc") + " --ngram 2 --smoothing 0.01 -o " +
                         path("abc.fmlm"));
  REQUIRE(tr.code == 0);
  auto model = load_scorer(path("abc.fmlm"));
  CHECK(model->family() == "ngram");

  CliResult mi = run_cli("mine --catalog " + path("abc.cat") + " --traces " +
                         path("t1.trc") + " --model " + path("abc.fmlm") +
                         " --theta 0.5 -o " + path("mined"));
  REQUIRE(mi.code == 0);
  CHECK(fs::exists(path("mined/summary.txt")));
  CHECK(fs::exists(path("mined/flow_1_3.dot")));

  Catalog c = testing::abc_catalog();
  auto mined = parse_flows(read_file(path("mined/flow_1_3.flow")), c);
  REQUIRE(mined.size() == 1);
  CHECK(mined[0].edges() == testing::abc_flow().edges());

  CliResult ev = run_cli("eval --catalog " + path("abc.cat") + " --flows " +
                         path("mined") + " --traces " + path("t1.trc") +
                         " --policy greedy -o " + path("rep.txt"));
  REQUIRE(ev.code == 0);
  std::string kv = read_file(path("rep.txt.kv"));
  CHECK(kv.find("policy = greedy") != std::string::npos);
  CHECK(kv.find("ratio = 1.000000") != std::string::npos);
}

TEST_CASE("cli: a tiny attention model trains end to end") {
  gen_corpus(path("t1.trc"));
  CliResult tr = run_cli("train --catalog " + path("abc.cat") + " --traces " +
                         path("t1.trc") +
                         " --dim 8 --heads 2 --window 8 --epochs 2 -o " +
                         path("abc_att.fmlm"));
  REQUIRE(tr.code == 0);
  CHECK(load_scorer(path("abc_att.fmlm"))->family() == "attention");
}

TEST_CASE("cli: training divergence exits 4") {
  gen_corpus(path("t1.trc"));
  CliResult r = run_cli("train --catalog " + path("abc.cat") + " --traces " +
                        path("t1.trc") +
                        " --dim 8 --heads 2 --window 8 --epochs 5" +
                        " --lr 1e100 -o " + path("abc_div.fmlm"));
  CHECK(r.code == 4);
}

TEST_CASE("cli: negative corpora are measurably rejected") {
  gen_corpus(path("t_neg.trc"), "--negative --corruptions 2");
  CliResult ev = run_cli("eval --catalog " + path("abc.cat") + " --flows " +
                         path("abc.flow") + " --traces " + path("t_neg.trc") +
                         " --policy oracle -o " + path("rep_neg.txt"));
  REQUIRE(ev.code == 0);
  std::string kv = read_file(path("rep_neg.txt.kv"));
  CHECK(kv.find("ratio = 1.000000") == std::string::npos);
}

TEST_CASE("cli: an exhausted oracle budget exits 5 and flags the report") {
  gen_corpus(path("t1.trc"));
  CliResult ev = run_cli("eval --catalog " + path("abc.cat") + " --flows " +
                         path("abc.flow") + " --traces " + path("t1.trc") +
                         " --policy oracle --budget 1 -o " +
                         path("rep_budget.txt"));
  CHECK(ev.code == 5);
  std::string kv = read_file(path("rep_budget.txt.kv"));
  CHECK(kv.find("budget_exceeded = 1") != std::string::npos);
}

TEST_CASE("cli: unknown eval policy exits 2") {
  gen_corpus(path("t1.trc"));
  CHECK(run_cli("eval --catalog " + path("abc.cat") + " --flows " +
                path("abc.flow") + " --traces " + path("t1.trc") +
                " --policy psychic -o " + path("rep_bad.txt"))
            .code == 2);
}

TEST_CASE("cli: report aggregates eval outputs") {
  gen_corpus(path("t1.trc"));
  for (const char* policy : {"greedy", "oracle"}) {
    CliResult ev = run_cli("eval --catalog " + path("abc.cat") + " --flows " +
                           path("abc.flow") + " --traces " + path("t1.trc") +
                           " --policy " + policy + " --benchmark abc_" +
                           policy + " -o " + path(std::string("rep_") +
                           policy + ".txt"));
    REQUIRE(ev.code == 0);
  }
  CliResult rep = run_cli("report --inputs " + path("rep_greedy.txt.kv") +
                          " " + path("rep_oracle.txt.kv") + " -o " +
                          path("summary.txt"));
  REQUIRE(rep.code == 0);
  std::string kv = read_file(path("summary.txt.kv"));
  CHECK(kv.find("row.0.benchmark = abc_greedy") != std::string::npos);
  CHECK(kv.find("row.1.benchmark = abc_oracle") != std::string::npos);
  CHECK(kv.find("mean.ratio = 1.000000") != std::string::npos);
}

TEST_CASE("cli: the pipeline driver chains stages in one run") {
  std::string dir = path("pipe_out");
  fs::remove_all(dir);
  std::string cfg =
      "# abc end-to-end\n"
      "[gen]\n"
      "catalog = " + path("abc.cat") + "\n"
      "flows = " + path("abc.flow") + "\n"
      "traces = 3\nruns = 4\ncores = 2\nseed = 5\n"
      "out = corpus.trc\n"
      "[train]\n"
      "catalog = " + path("abc.cat") + "\n"
      "traces = corpus.trc\nngram = 2\nsmoothing = 0.01\n"
      "out = model.fmlm\n"
      "[mine]\n"
      "catalog = " + path("abc.cat") + "\n"
      "traces = corpus.trc\nmodel = model.fmlm\ntheta = 0.5\n"
      "out = mined\n"
      "[eval]\n"
      "catalog = " + path("abc.cat") + "\n"
      "flows = mined\ntraces = corpus.trc\npolicy = oracle\n"
      "benchmark = abc\nout = report.txt\n"
      "[report]\n"
      "inputs = report.txt.kv\nout = summary.txt\n";
  write_file(path("pipe.cfg"), cfg);

  CliResult r = run_cli("pipeline --config " + path("pipe.cfg") + " -o " + dir);
  REQUIRE(r.code == 0);
  CHECK(r.output.find("5 stages completed") != std::string::npos);
  CHECK(fs::exists(dir + "/corpus.trc"));
  CHECK(fs::exists(dir + "/model.fmlm"));
  CHECK(fs::exists(dir + "/mined/flow_1_3.flow"));
  CHECK(fs::exists(dir + "/report.txt.kv"));
  CHECK(fs::exists(dir + "/summary.txt"));
  CHECK(read_file(dir + "/summary.txt.kv").find("mean.ratio = 1.000000") !=
        std::string::npos);
}

TEST_CASE("cli: the pipeline halts at the first broken stage") {
  std::string cfg =
      "[gen]\n"
      "catalog = " + path("abc.cat") + "\n"
      "flows = " + path("abc.flow") + "\n"
      "traces = 1\n";  // missing out
  write_file(path("pipe_bad.cfg"), cfg);
  CliResult r = run_cli("pipeline --config " + path("pipe_bad.cfg"));
  CHECK(r.code == 3);
  CHECK(r.output.find("gen") != std::string::npos);
}
