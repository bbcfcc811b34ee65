// Synthetic trace generation: interleaves randomized flow instances the way a
// multi-core initiator mix would, so the same flows that produced a trace can
// later be mined back out of it.
//
// Scheduler model. A fixed number of instances ("runs") is spawned over the
// lifetime of a trace, with at most `cores` concurrently in flight. At each
// step, if a new instance may start (capacity free and runs remaining) a coin
// with bias `spawn_prob` decides between spawning and advancing; when nothing
// is in flight the spawn is forced. Spawning picks a flow uniformly and emits
// its start message; advancing picks an in-flight instance uniformly and moves
// it along a uniformly chosen outgoing edge. An instance completes the moment
// it reaches an end node. With cores == 1 the trace degenerates to whole
// instances laid end to end.
//
// All randomness comes from the deterministic Rng, so a (flows, config) pair
// fully determines the trace.

#pragma once

#include <cstdint>
#include <vector>

#include "flowmine/evaluator.hpp"
#include "flowmine/types.hpp"

namespace flowmine {

struct GenConfig {
  std::size_t cores = 4;    // max concurrent instances
  std::size_t runs = 16;    // total instances per trace
  std::uint64_t seed = 0;
  double spawn_prob = 0.5;  // bias of the spawn-vs-advance coin
};

// One interleaved trace containing exactly cfg.runs completed instances.
Trace generate(const std::vector<FlowSpec>& flows, const GenConfig& cfg);

// `count` traces; trace i uses seed cfg.seed + i.
std::vector<Trace> generate_corpus(const std::vector<FlowSpec>& flows,
                                   const GenConfig& cfg, std::size_t count);

// A corrupted trace that the flows provably cannot fully explain: generates a
// positive trace, applies `corruptions` random edits (delete one event, swap
// an adjacent pair, or insert a random flow-node id), and certifies with the
// exhaustive evaluator that the acceptance rate dropped below 1. Retries with
// fresh edits until certification succeeds; throws InfeasibleCorruption after
// `max_attempts` failures.
Trace generate_negative(const std::vector<FlowSpec>& flows,
                        const GenConfig& cfg, std::size_t corruptions = 1,
                        std::size_t max_attempts = 64);

// Expected number of events a single instance of `flow` emits, under uniform
// edge choice at every node.
double expected_run_length(const FlowSpec& flow);

}  // namespace flowmine
