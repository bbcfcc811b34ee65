#include "flowmine/synthgen.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "flowmine/errors.hpp"
#include "flowmine/rng.hpp"

namespace flowmine {

namespace {

struct InFlight {
  std::size_t flow = 0;
  MessageId node = 0;
};

Trace generate_with_rng(const std::vector<FlowSpec>& flows, const GenConfig& cfg,
                        Rng& rng) {
  if (flows.empty()) {
    throw InvariantViolation("generate: need at least one flow");
  }
  if (cfg.cores == 0) {
    throw InvariantViolation("generate: cores must be >= 1");
  }
  if (cfg.spawn_prob < 0.0 || cfg.spawn_prob > 1.0) {
    throw InvariantViolation("generate: spawn_prob must be in [0, 1]");
  }

  Trace trace;
  std::vector<InFlight> active;
  std::size_t spawned = 0;

  while (spawned < cfg.runs || !active.empty()) {
    bool can_spawn = active.size() < cfg.cores && spawned < cfg.runs;
    if (can_spawn && (active.empty() || rng.bernoulli(cfg.spawn_prob))) {
      std::size_t f = rng.below(flows.size());
      MessageId start = flows[f].start();
      trace.events.push_back(start);
      ++spawned;
      if (!flows[f].is_end(start)) {
        active.push_back(InFlight{f, start});
      }
      continue;
    }
    std::size_t pick = rng.below(active.size());
    InFlight& inst = active[pick];
    const auto& succ = flows[inst.flow].successors(inst.node);
    MessageId next = succ[rng.below(succ.size())];
    trace.events.push_back(next);
    if (flows[inst.flow].is_end(next)) {
      active.erase(active.begin() + static_cast<long>(pick));
    } else {
      inst.node = next;
    }
  }
  return trace;
}

}  // namespace

Trace generate(const std::vector<FlowSpec>& flows, const GenConfig& cfg) {
  Rng rng(cfg.seed);
  return generate_with_rng(flows, cfg, rng);
}

std::vector<Trace> generate_corpus(const std::vector<FlowSpec>& flows,
                                   const GenConfig& cfg, std::size_t count) {
  std::vector<Trace> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    GenConfig c = cfg;
    c.seed = cfg.seed + i;
    out.push_back(generate(flows, c));
  }
  return out;
}

Trace generate_negative(const std::vector<FlowSpec>& flows, const GenConfig& cfg,
                        std::size_t corruptions, std::size_t max_attempts) {
  if (corruptions == 0) {
    throw InvariantViolation("generate_negative: corruptions must be >= 1");
  }
  Trace positive = generate(flows, cfg);
  if (positive.empty()) {
    throw InfeasibleCorruption("cannot corrupt an empty trace");
  }

  // Pool of ids a corrupting insertion may draw from.
  std::vector<MessageId> pool;
  {
    std::set<MessageId> ids;
    for (const auto& f : flows) {
      ids.insert(f.nodes().begin(), f.nodes().end());
    }
    pool.assign(ids.begin(), ids.end());
  }

  // Decorrelate the corruption stream from the generation stream.
  Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    Trace t = positive;
    for (std::size_t c = 0; c < corruptions; ++c) {
      switch (rng.below(3)) {
        case 0: {  // delete
          std::size_t i = rng.below(t.size());
          t.events.erase(t.events.begin() + static_cast<long>(i));
          break;
        }
        case 1: {  // swap adjacent
          if (t.size() >= 2) {
            std::size_t i = rng.below(t.size() - 1);
            std::swap(t.events[i], t.events[i + 1]);
          }
          break;
        }
        default: {  // insert
          std::size_t i = rng.below(t.size() + 1);
          MessageId id = pool[rng.below(pool.size())];
          t.events.insert(t.events.begin() + static_cast<long>(i), id);
          break;
        }
      }
    }
    if (t.empty()) continue;
    EvalReport report = evaluate_oracle(flows, t);
    if (report.exact && report.rate < 1.0) return t;
  }
  throw InfeasibleCorruption(
      "no certified-invalid corruption found within attempt limit");
}

double expected_run_length(const FlowSpec& flow) {
  std::map<MessageId, double> memo;
  auto visit = [&](auto&& self, MessageId u) -> double {
    auto it = memo.find(u);
    if (it != memo.end()) return it->second;
    double len = 1.0;
    if (!flow.is_end(u)) {
      const auto& succ = flow.successors(u);
      double sum = 0.0;
      for (MessageId v : succ) sum += self(self, v);
      len += sum / static_cast<double>(succ.size());
    }
    memo[u] = len;
    return len;
  };
  return visit(visit, flow.start());
}

}  // namespace flowmine
