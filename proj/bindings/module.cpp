// Python bindings for the flowmine core. Mirrors the C++ API closely: the
// same types, the same defaults, exceptions surfaced as flowmine.Error.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "flowmine/attention.hpp"
#include "flowmine/causality.hpp"
#include "flowmine/errors.hpp"
#include "flowmine/evaluator.hpp"
#include "flowmine/io.hpp"
#include "flowmine/miner.hpp"
#include "flowmine/seqmodel.hpp"
#include "flowmine/slicing.hpp"
#include "flowmine/synthgen.hpp"
#include "flowmine/types.hpp"

namespace py = pybind11;
using namespace flowmine;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Message-flow mining for SoC communication traces";

  py::register_exception<Error>(m, "Error");

  // ---- types ---------------------------------------------------------------
  py::class_<Message>(m, "Message")
      .def(py::init([](MessageId id, std::string src, std::string dest,
                       std::string cmd) {
             return Message{id, std::move(src), std::move(dest),
                            std::move(cmd)};
           }),
           py::arg("id"), py::arg("src"), py::arg("dest"), py::arg("cmd"))
      .def_readonly("id", &Message::id)
      .def_readonly("src", &Message::src)
      .def_readonly("dest", &Message::dest)
      .def_readonly("cmd", &Message::cmd)
      .def("__eq__", [](const Message& a, const Message& b) { return a == b; })
      .def("__repr__", [](const Message& msg) {
        return "Message(" + std::to_string(msg.id) + ", " + msg.src + " -> " +
               msg.dest + ", " + msg.cmd + ")";
      });

  py::class_<Catalog>(m, "Catalog")
      .def(py::init<>())
      .def("add", &Catalog::add, py::arg("message"))
      .def("add_start", &Catalog::add_start, py::arg("id"))
      .def("add_end", &Catalog::add_end, py::arg("id"))
      .def("contains", &Catalog::contains, py::arg("id"))
      .def("at", &Catalog::at, py::arg("id"),
           py::return_value_policy::reference_internal)
      .def("messages", &Catalog::messages,
           py::return_value_policy::reference_internal)
      .def("ids", &Catalog::ids)
      .def("start_ids",
           [](const Catalog& c) {
             return std::vector<MessageId>(c.start_ids().begin(),
                                           c.start_ids().end());
           })
      .def("end_ids",
           [](const Catalog& c) {
             return std::vector<MessageId>(c.end_ids().begin(),
                                           c.end_ids().end());
           })
      .def("validate_annotations", &Catalog::validate_annotations)
      .def("__len__", &Catalog::size)
      .def("__eq__",
           [](const Catalog& a, const Catalog& b) { return a == b; });

  py::class_<Trace>(m, "Trace")
      .def(py::init<>())
      .def(py::init([](std::vector<MessageId> events) {
             return Trace{std::move(events)};
           }),
           py::arg("events"))
      .def_readwrite("events", &Trace::events)
      .def("__len__", &Trace::size)
      .def("__eq__", [](const Trace& a, const Trace& b) { return a == b; })
      .def("__repr__", [](const Trace& t) {
        return "Trace(" + std::to_string(t.size()) + " events)";
      });

  py::class_<FlowSpec>(m, "FlowSpec")
      .def(py::init<std::string, MessageId, std::set<MessageId>,
                    std::set<std::pair<MessageId, MessageId>>>(),
           py::arg("name"), py::arg("start"), py::arg("ends"),
           py::arg("edges"))
      .def_property_readonly("name", &FlowSpec::name)
      .def_property_readonly("start", &FlowSpec::start)
      .def_property_readonly("ends",
                             [](const FlowSpec& f) {
                               return std::vector<MessageId>(f.ends().begin(),
                                                             f.ends().end());
                             })
      .def_property_readonly(
          "edges",
          [](const FlowSpec& f) {
            return std::vector<std::pair<MessageId, MessageId>>(
                f.edges().begin(), f.edges().end());
          })
      .def_property_readonly("nodes", &FlowSpec::nodes)
      .def("has_node", &FlowSpec::has_node, py::arg("id"))
      .def("is_end", &FlowSpec::is_end, py::arg("id"))
      .def("successors", &FlowSpec::successors, py::arg("id"))
      .def("validate", &FlowSpec::validate)
      .def("__eq__",
           [](const FlowSpec& a, const FlowSpec& b) { return a == b; })
      .def("__repr__", [](const FlowSpec& f) {
        return "FlowSpec(" + f.name() + ", start=" +
               std::to_string(f.start()) + ", " +
               std::to_string(f.edges().size()) + " edges)";
      });

  py::enum_<Predicate>(m, "Predicate")
      .value("PAPER_SRC_DEST", Predicate::kPaperSrcDest)
      .value("FORWARD_DEST_SRC", Predicate::kForwardDestSrc)
      .value("UNION", Predicate::kUnion);

  m.def("causal", &causal, py::arg("m1"), py::arg("m2"),
        py::arg("predicate"));
  m.def("predicate_from_string", &predicate_from_string, py::arg("s"));

  // ---- io ------------------------------------------------------------------
  m.def("parse_catalog", &parse_catalog, py::arg("text"));
  m.def("serialize_catalog", &serialize_catalog, py::arg("catalog"));
  m.def("parse_traces", &parse_traces, py::arg("text"), py::arg("catalog"));
  m.def("serialize_traces", &serialize_traces, py::arg("traces"));
  m.def("parse_flows", &parse_flows, py::arg("text"), py::arg("catalog"));
  m.def("serialize_flows", &serialize_flows, py::arg("flows"));
  m.def("flow_to_dot", &flow_to_dot, py::arg("flow"), py::arg("catalog"));

  // ---- causality -----------------------------------------------------------
  py::class_<CausalityGraph>(m, "CausalityGraph")
      .def_readonly("nodes", &CausalityGraph::nodes)
      .def_readonly("predicate", &CausalityGraph::predicate)
      .def_readonly("starts", &CausalityGraph::starts)
      .def_readonly("ends", &CausalityGraph::ends)
      .def("has_node", &CausalityGraph::has_node, py::arg("id"))
      .def("has_edge", &CausalityGraph::has_edge, py::arg("a"), py::arg("b"))
      .def("successors", &CausalityGraph::successors, py::arg("id"))
      .def("edge_count", &CausalityGraph::edge_count)
      .def("edges", &CausalityGraph::edges)
      .def("__repr__", [](const CausalityGraph& g) {
        return "CausalityGraph(" + std::to_string(g.nodes.size()) +
               " nodes, " + std::to_string(g.edge_count()) + " edges)";
      });

  m.def("build_graph", &build_graph, py::arg("catalog"),
        py::arg("predicate") = Predicate::kUnion);
  m.def("reachable_subgraph", &reachable_subgraph, py::arg("graph"),
        py::arg("start"), py::arg("end"));
  m.def("graph_to_dot", &to_dot, py::arg("graph"), py::arg("catalog"));
  m.def("causality_slice", &causality_slice, py::arg("trace"),
        py::arg("catalog"), py::arg("predicate") = Predicate::kUnion,
        py::arg("window") = kDefaultSliceWindow);

  // ---- synthgen ------------------------------------------------------------
  py::class_<GenConfig>(m, "GenConfig")
      .def(py::init<>())
      .def_readwrite("cores", &GenConfig::cores)
      .def_readwrite("runs", &GenConfig::runs)
      .def_readwrite("seed", &GenConfig::seed)
      .def_readwrite("spawn_prob", &GenConfig::spawn_prob);

  m.def("generate", &generate, py::arg("flows"), py::arg("config"));
  m.def("generate_corpus", &generate_corpus, py::arg("flows"),
        py::arg("config"), py::arg("count"));
  m.def("generate_negative", &generate_negative, py::arg("flows"),
        py::arg("config"), py::arg("corruptions") = 1,
        py::arg("max_attempts") = 64);
  m.def("expected_run_length", &expected_run_length, py::arg("flow"));

  // ---- scorers -------------------------------------------------------------
  py::class_<ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("layers", &ModelConfig::layers)
      .def_readwrite("heads", &ModelConfig::heads)
      .def_readwrite("dim", &ModelConfig::dim)
      .def_readwrite("window", &ModelConfig::window)
      .def_readwrite("mask_prob", &ModelConfig::mask_prob)
      .def_readwrite("epochs", &ModelConfig::epochs)
      .def_readwrite("learning_rate", &ModelConfig::learning_rate)
      .def_readwrite("batch", &ModelConfig::batch)
      .def_readwrite("seed", &ModelConfig::seed);

  py::class_<Scorer>(m, "Scorer")
      .def("score", &Scorer::score, py::arg("context"), py::arg("position"))
      .def_property_readonly("window", &Scorer::window)
      .def_property_readonly("family", &Scorer::family);

  py::class_<AttentionScorer, Scorer>(m, "AttentionScorer")
      .def_readonly("epoch_losses", &AttentionScorer::epoch_losses)
      .def_property_readonly("config", &AttentionScorer::config);

  py::class_<NgramScorer, Scorer>(m, "NgramScorer")
      .def_property_readonly("order", &NgramScorer::order)
      .def_property_readonly("smoothing", &NgramScorer::smoothing);

  m.def("train", &train, py::arg("traces"), py::arg("catalog"),
        py::arg("config") = ModelConfig{});
  m.def("train_ngram", &train_ngram, py::arg("traces"), py::arg("catalog"),
        py::arg("order") = 2, py::arg("smoothing") = 0.1);
  m.def("next_score", &next_score, py::arg("scorer"), py::arg("traces"),
        py::arg("m1"), py::arg("m2"),
        py::arg("samples") = kDefaultNextScoreSamples);
  m.def("next_score_multi", &next_score_multi, py::arg("scorer"),
        py::arg("traces"), py::arg("m1"), py::arg("candidates"),
        py::arg("samples") = kDefaultNextScoreSamples);
  m.def("save_scorer", &save_scorer, py::arg("scorer"), py::arg("path"));
  m.def("load_scorer", &load_scorer, py::arg("path"));

  // ---- miner ---------------------------------------------------------------
  py::class_<MineOptions>(m, "MineOptions")
      .def(py::init<>())
      .def_readwrite("theta", &MineOptions::theta)
      .def_readwrite("samples", &MineOptions::samples);

  py::class_<MinedFlow>(m, "MinedFlow")
      .def_readonly("start", &MinedFlow::start)
      .def_readonly("end", &MinedFlow::end)
      .def_property_readonly(
          "edges",
          [](const MinedFlow& f) {
            return std::vector<std::pair<MessageId, MessageId>>(
                f.edges.begin(), f.edges.end());
          })
      .def_readonly("theta", &MinedFlow::theta)
      .def_readonly("edge_scores", &MinedFlow::edge_scores)
      .def_readonly("raw_scores", &MinedFlow::raw_scores);

  py::class_<SkippedPair>(m, "SkippedPair")
      .def_readonly("start", &SkippedPair::start)
      .def_readonly("end", &SkippedPair::end)
      .def_readonly("reason", &SkippedPair::reason);

  py::class_<RemovedEdge>(m, "RemovedEdge")
      .def_readonly("start", &RemovedEdge::start)
      .def_readonly("end", &RemovedEdge::end)
      .def_readonly("src", &RemovedEdge::src)
      .def_readonly("dst", &RemovedEdge::dst)
      .def_readonly("raw_score", &RemovedEdge::raw_score)
      .def_readonly("relative_score", &RemovedEdge::relative_score)
      .def_readonly("stage", &RemovedEdge::stage);

  py::class_<MineResult>(m, "MineResult")
      .def_readonly("flows", &MineResult::flows)
      .def_readonly("skipped", &MineResult::skipped)
      .def_readonly("removed", &MineResult::removed);

  m.def("mine", &mine, py::arg("graph"), py::arg("scorer"), py::arg("traces"),
        py::arg("catalog"), py::arg("options") = MineOptions{});
  m.def("to_flowspec", &to_flowspec, py::arg("flow"), py::arg("name"));

  // ---- evaluator -----------------------------------------------------------
  py::class_<InstanceTrace>(m, "InstanceTrace")
      .def_readonly("flow_index", &InstanceTrace::flow_index)
      .def_readonly("event_indices", &InstanceTrace::event_indices)
      .def_readonly("completed", &InstanceTrace::completed);

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("policy", &EvalReport::policy)
      .def_readonly("total_events", &EvalReport::total_events)
      .def_readonly("accepted", &EvalReport::accepted)
      .def_readonly("rejected", &EvalReport::rejected)
      .def_readonly("incomplete_instances", &EvalReport::incomplete_instances)
      .def_readonly("rate", &EvalReport::rate)
      .def_readonly("exact", &EvalReport::exact)
      .def_readonly("budget_exceeded", &EvalReport::budget_exceeded)
      .def_readonly("rejected_indices", &EvalReport::rejected_indices)
      .def_readonly("decomposition", &EvalReport::decomposition);

  m.def("evaluate_greedy", &evaluate_greedy, py::arg("flows"),
        py::arg("trace"));
  m.def("evaluate_oracle", &evaluate_oracle, py::arg("flows"),
        py::arg("trace"), py::arg("budget") = kDefaultOracleBudget);

  py::class_<FlowMatch>(m, "FlowMatch")
      .def_readonly("index_a", &FlowMatch::index_a)
      .def_readonly("index_b", &FlowMatch::index_b)
      .def_readonly("start", &FlowMatch::start)
      .def_readonly("edge_precision", &FlowMatch::edge_precision)
      .def_readonly("edge_recall", &FlowMatch::edge_recall)
      .def_readonly("spurious", &FlowMatch::spurious)
      .def_readonly("missing", &FlowMatch::missing);

  py::class_<FlowComparison>(m, "FlowComparison")
      .def_readonly("matches", &FlowComparison::matches)
      .def_readonly("unmatched_a", &FlowComparison::unmatched_a)
      .def_readonly("unmatched_b", &FlowComparison::unmatched_b)
      .def_readonly("micro_precision", &FlowComparison::micro_precision)
      .def_readonly("micro_recall", &FlowComparison::micro_recall);

  m.def("compare_flows", &compare_flows, py::arg("a"), py::arg("b"));
}
