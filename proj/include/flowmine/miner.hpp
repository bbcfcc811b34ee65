// Flow mining: refine a causality graph into per-(start, end) flow
// specifications using scorer queries and a retention threshold theta.
//
// Pipeline per (start, end) pair:
//   1. reachable_subgraph restricts the causality graph to nodes between the
//      pair (pairs with no path are reported, not mined).
//   2. Structural trim: in-edges of the start and out-edges of the end are
//      dropped — an acceptor instance is born at the start and finishes at
//      the end, so such edges cannot occur inside one instance.
//   3. Every remaining edge (m1, m2) gets the corpus score
//      next_score(scorer, traces, m1, m2); one forward pass per sampled m1
//      occurrence serves all of m1's candidate successors.
//   4. Acyclic skeleton: edges are admitted in order of descending score
//      (ties: by (src, dst)); an edge that would close a cycle is skipped.
//      This step is independent of theta, which keeps mining monotone.
//   5. Threshold: an edge survives iff its score is at least theta times the
//      best score among its source's skeleton out-edges. Interleaved corpora
//      dilute absolute next-message frequencies (occurrences of m1 are often
//      followed by unrelated traffic), so acceptance is judged relative to
//      the strongest successor; stored edge_scores are these relative values
//      and raw means are kept alongside.
//   6. Re-prune: only nodes (and their edges) on some surviving start -> end
//      path remain.
//
// When the trimmed reachable subgraph is already acyclic, theta -> 0 keeps
// it whole; raising theta only ever removes edges.

#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "flowmine/causality.hpp"
#include "flowmine/seqmodel.hpp"
#include "flowmine/types.hpp"

namespace flowmine {

struct MinedFlow {
  MessageId start = 0;
  MessageId end = 0;
  std::set<std::pair<MessageId, MessageId>> edges;
  double theta = 0.0;
  // Relative retention scores (>= theta by construction).
  std::map<std::pair<MessageId, MessageId>, double> edge_scores;
  // Raw mean next-message probabilities the relative scores came from.
  std::map<std::pair<MessageId, MessageId>, double> raw_scores;
};

struct SkippedPair {
  MessageId start = 0;
  MessageId end = 0;
  std::string reason;
};

struct RemovedEdge {
  MessageId start = 0, end = 0;  // which pair's mining removed it
  MessageId src = 0, dst = 0;
  double raw_score = 0.0;
  double relative_score = 0.0;
  std::string stage;  // "trim" | "skeleton" | "threshold" | "prune"
};

struct MineOptions {
  double theta = 0.75;
  std::size_t samples = kDefaultNextScoreSamples;
};

struct MineResult {
  std::vector<MinedFlow> flows;
  std::vector<SkippedPair> skipped;
  std::vector<RemovedEdge> removed;  // diagnostics for the mining summary
};

// Mines one flow per (start, end) annotation pair in the catalog with a
// surviving path. Deterministic given (graph, scorer, traces, options).
MineResult mine(const CausalityGraph& g, const Scorer& scorer,
                const std::vector<Trace>& traces, const Catalog& catalog,
                const MineOptions& options = {});

// Converts a mined flow into a validated FlowSpec (throws InvariantViolation
// if mining produced a malformed graph, which would be a miner bug).
FlowSpec to_flowspec(const MinedFlow& flow, const std::string& name);

}  // namespace flowmine
