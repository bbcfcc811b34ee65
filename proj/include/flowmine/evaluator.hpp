#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flowmine/types.hpp"

namespace flowmine {

// Diagnostic record: at `event_index` more than one active instance could have
// consumed the event; `candidates` are the instance ids (spawn order) that
// matched. The greedy policy advanced the oldest.
struct NondetNote {
  std::size_t event_index = 0;
  std::vector<std::uint32_t> candidates;
};

// One reconstructed flow instance: which flow it instantiates and the trace
// positions of its events (in order). `completed` is false for instances that
// never reached an end node; their events count as rejected.
struct InstanceTrace {
  std::size_t flow_index = 0;
  std::vector<std::size_t> event_indices;
  bool completed = false;
};

struct EvalReport {
  std::string policy;  // "greedy-oldest" or "exhaustive"
  std::size_t total_events = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t incomplete_instances = 0;
  double rate = 1.0;  // accepted/total; an empty trace evaluates to 1.0
  // Oracle only: true when the exhaustive search finished within budget. When
  // false, `rate` is a certified lower bound (budget_exceeded is set).
  bool exact = true;
  bool budget_exceeded = false;
  std::vector<std::size_t> rejected_indices;     // sorted
  std::vector<InstanceTrace> decomposition;      // witness assignment
  std::vector<NondetNote> nondet;                // greedy diagnostics
};

// Greedy online policy: a start event always spawns a new instance (first
// matching flow in declaration order); otherwise the oldest active instance
// that can consume the event advances; otherwise the event is rejected.
// Instances finish upon reaching any end node. Unfinished instances have all
// their events re-marked rejected at end of trace.
EvalReport evaluate_greedy(const std::vector<FlowSpec>& flows,
                           const Trace& trace);

inline constexpr std::uint64_t kDefaultOracleBudget = 4'000'000;

// Exhaustive policy: maximizes the number of accepted events over all ways of
// assigning events to flow instances. Within `budget` search states the result
// is exact; beyond it a deterministic beam search supplies the best assignment
// found and the report is flagged (rate = lower bound).
EvalReport evaluate_oracle(const std::vector<FlowSpec>& flows,
                           const Trace& trace,
                           std::uint64_t budget = kDefaultOracleBudget);

// ---- flow comparison -------------------------------------------------------

struct FlowMatch {
  std::size_t index_a = 0, index_b = 0;
  MessageId start = 0;
  double edge_precision = 1.0;  // |A∩B| / |A|
  double edge_recall = 1.0;     // |A∩B| / |B|
  std::vector<std::pair<MessageId, MessageId>> spurious;  // in A, not B
  std::vector<std::pair<MessageId, MessageId>> missing;   // in B, not A
};

struct FlowComparison {
  std::vector<FlowMatch> matches;
  std::vector<std::size_t> unmatched_a;  // indices into `a`
  std::vector<std::size_t> unmatched_b;
  double micro_precision = 1.0;  // edge-level, across all matched pairs
  double micro_recall = 1.0;
};

// Pairs flows by (start, ends) and compares edge sets. Flows of `a` with no
// partner in `b` (and vice versa) land in the unmatched lists.
FlowComparison compare_flows(const std::vector<FlowSpec>& a,
                             const std::vector<FlowSpec>& b);

}  // namespace flowmine
