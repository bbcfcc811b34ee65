#include "flowmine/miner.hpp"

#include <algorithm>

#include "flowmine/errors.hpp"
#include "flowmine/slicing.hpp"

namespace flowmine {

namespace {

using Edge = std::pair<MessageId, MessageId>;

// Is `to` reachable from `from` over `adj`?
bool reaches(const std::map<MessageId, std::set<MessageId>>& adj,
             MessageId from, MessageId to) {
  if (from == to) return true;
  std::set<MessageId> seen{from};
  std::vector<MessageId> stack{from};
  while (!stack.empty()) {
    MessageId u = stack.back();
    stack.pop_back();
    auto it = adj.find(u);
    if (it == adj.end()) continue;
    for (MessageId v : it->second) {
      if (v == to) return true;
      if (seen.insert(v).second) stack.push_back(v);
    }
  }
  return false;
}

std::set<MessageId> forward_set(const std::map<MessageId, std::set<MessageId>>& adj,
                                MessageId from) {
  std::set<MessageId> seen{from};
  std::vector<MessageId> stack{from};
  while (!stack.empty()) {
    MessageId u = stack.back();
    stack.pop_back();
    auto it = adj.find(u);
    if (it == adj.end()) continue;
    for (MessageId v : it->second) {
      if (seen.insert(v).second) stack.push_back(v);
    }
  }
  return seen;
}

}  // namespace

MineResult mine(const CausalityGraph& g, const Scorer& scorer,
                const std::vector<Trace>& traces, const Catalog& catalog,
                const MineOptions& options) {
  if (options.theta <= 0.0 || options.theta > 1.0) {
    throw InvariantViolation("mine: theta must be in (0, 1]");
  }
  if (catalog.start_ids().empty() || catalog.end_ids().empty()) {
    throw InvariantViolation("mine: catalog has no start/end annotations");
  }

  MineResult result;
  // Queries go against the causality-sliced corpus — the same view of the
  // traces the attention scorer was trained on. Within a slice the position
  // after m1 is its next *causally related* event, so interleaving noise is
  // largely gone before the scorer is ever consulted.
  std::vector<Trace> sliced;
  for (const Trace& trace : traces) {
    for (Trace& slice : causality_slice(trace, catalog, Predicate::kUnion)) {
      sliced.push_back(std::move(slice));
    }
  }

  // Raw next-message scores, computed once per source node across all pairs.
  std::map<MessageId, std::map<MessageId, double>> raw_cache;
  auto raw_score = [&](MessageId m1, MessageId m2) -> double {
    auto it = raw_cache.find(m1);
    if (it == raw_cache.end()) {
      const auto& succ = g.successors(m1);
      std::map<MessageId, double> scores;
      if (!succ.empty()) {
        try {
          scores = next_score_multi(scorer, sliced, m1, succ, options.samples);
        } catch (const NoOccurrence&) {
          // Never observed: no edge out of m1 can be certified.
          for (MessageId c : succ) scores[c] = 0.0;
        }
      }
      it = raw_cache.emplace(m1, std::move(scores)).first;
    }
    return it->second.at(m2);
  };

  for (MessageId start : catalog.start_ids()) {
    for (MessageId end : catalog.end_ids()) {
      CausalityGraph sub;
      try {
        sub = reachable_subgraph(g, start, end);
      } catch (const NoPath&) {
        result.skipped.push_back({start, end, "no path in causality graph"});
        continue;
      }

      // Structural trim.
      std::vector<Edge> candidates;
      for (const auto& [u, succ] : sub.adj) {
        if (u == end) {
          for (MessageId v : succ) {
            result.removed.push_back({start, end, u, v, 0.0, 0.0, "trim"});
          }
          continue;  // out-edges of the end
        }
        for (MessageId v : succ) {
          if (v == start) {
            result.removed.push_back({start, end, u, v, 0.0, 0.0, "trim"});
            continue;  // in-edges of the start
          }
          candidates.emplace_back(u, v);
        }
      }

      // Score, then admit into an acyclic skeleton by descending score.
      std::vector<std::pair<double, Edge>> scored;
      scored.reserve(candidates.size());
      for (const Edge& e : candidates) {
        scored.emplace_back(raw_score(e.first, e.second), e);
      }
      std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
      });

      std::map<MessageId, std::set<MessageId>> skeleton;
      for (const auto& [score, e] : scored) {
        if (reaches(skeleton, e.second, e.first)) {
          result.removed.push_back(
              {start, end, e.first, e.second, score, 0.0, "skeleton"});
          continue;  // would close a cycle
        }
        skeleton[e.first].insert(e.second);
      }

      // Relative threshold per source node.
      std::map<MessageId, std::set<MessageId>> kept;
      std::map<Edge, double> rel_scores, raw_kept;
      for (const auto& [u, succ] : skeleton) {
        double mode = 0.0;
        for (MessageId v : succ) mode = std::max(mode, raw_score(u, v));
        for (MessageId v : succ) {
          double raw = raw_score(u, v);
          double rel = mode > 0.0 ? raw / mode : 0.0;
          if (rel >= options.theta) {
            kept[u].insert(v);
            rel_scores[{u, v}] = rel;
            raw_kept[{u, v}] = raw;
          } else {
            result.removed.push_back({start, end, u, v, raw, rel, "threshold"});
          }
        }
      }

      // Keep only nodes on a surviving start -> end path.
      std::map<MessageId, std::set<MessageId>> back;
      for (const auto& [u, succ] : kept) {
        for (MessageId v : succ) back[v].insert(u);
      }
      std::set<MessageId> fwd = forward_set(kept, start);
      std::set<MessageId> bwd = forward_set(back, end);
      std::set<MessageId> alive;
      std::set_intersection(fwd.begin(), fwd.end(), bwd.begin(), bwd.end(),
                            std::inserter(alive, alive.begin()));

      if (!alive.count(start) || !alive.count(end) ||
          (start != end && !reaches(kept, start, end))) {
        result.skipped.push_back({start, end, "no surviving path at theta"});
        continue;
      }

      MinedFlow flow;
      flow.start = start;
      flow.end = end;
      flow.theta = options.theta;
      for (const auto& [u, succ] : kept) {
        for (MessageId v : succ) {
          if (alive.count(u) && alive.count(v)) {
            flow.edges.insert({u, v});
            flow.edge_scores[{u, v}] = rel_scores[{u, v}];
            flow.raw_scores[{u, v}] = raw_kept[{u, v}];
          } else {
            result.removed.push_back({start, end, u, v, raw_kept[{u, v}],
                                      rel_scores[{u, v}], "prune"});
          }
        }
      }
      if (flow.edges.empty()) {
        result.skipped.push_back({start, end, "no surviving path at theta"});
        continue;
      }
      result.flows.push_back(std::move(flow));
    }
  }
  return result;
}

FlowSpec to_flowspec(const MinedFlow& flow, const std::string& name) {
  FlowSpec spec(name, flow.start, {flow.end}, flow.edges);
  spec.validate();
  return spec;
}

}  // namespace flowmine
