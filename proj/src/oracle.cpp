// Exhaustive-policy evaluation: maximize accepted events over all instance
// assignments. Exact memoized search within budget, deterministic beam search
// as the flagged fallback.

#include <algorithm>
#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

#include "flowmine/evaluator.hpp"

namespace flowmine {

namespace {

// One active (not yet finished) instance, packed for state keys:
// (flow index << 48) | (node << 16) | event count. Catalog ids fit in 32 bits
// (occupying bits 16..47), flow indices and counts in 16 bits each.
using Packed = std::uint64_t;

Packed pack(std::size_t flow, MessageId node, std::size_t count) {
  return (static_cast<Packed>(flow) << 48) |
         (static_cast<Packed>(node) << 16) | static_cast<Packed>(count);
}
std::size_t packed_flow(Packed p) { return p >> 48; }
MessageId packed_node(Packed p) {
  return static_cast<MessageId>((p >> 16) & 0xffffffffull);
}
std::size_t packed_count(Packed p) { return p & 0xffff; }

// State: sorted multiset of packed actives.
using State = std::vector<Packed>;

struct StateHash {
  std::size_t operator()(const State& s) const {
    std::uint64_t h = 1469598103934665603ull;
    for (Packed p : s) {
      h ^= p;
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

// feasible[f][u][i]: can an instance of flow f sitting at node u still reach
// an end node using a subsequence of trace[i..)?
struct Feasibility {
  // per flow: node -> vector<char> of size n+1
  std::vector<std::map<MessageId, std::vector<char>>> table;

  bool ok(std::size_t flow, MessageId node, std::size_t i) const {
    const auto& m = table[flow];
    auto it = m.find(node);
    if (it == m.end()) return false;
    return it->second[i] != 0;
  }
};

Feasibility build_feasibility(const std::vector<FlowSpec>& flows,
                              const Trace& trace) {
  std::size_t n = trace.size();
  Feasibility fz;
  fz.table.resize(flows.size());
  for (std::size_t f = 0; f < flows.size(); ++f) {
    const FlowSpec& flow = flows[f];
    auto& tab = fz.table[f];
    for (MessageId u : flow.nodes()) {
      if (!flow.is_end(u)) tab[u] = std::vector<char>(n + 1, 0);
    }
    // Predecessor lists restricted to non-end sources.
    std::map<MessageId, std::vector<MessageId>> preds;
    for (const auto& [a, b] : flow.edges()) {
      if (!flow.is_end(a)) preds[b].push_back(a);
    }
    for (std::size_t i = n; i-- > 0;) {
      for (auto& [u, vec] : tab) {
        (void)u;
        vec[i] = vec[i + 1];
      }
      MessageId ev = trace.events[i];
      auto pit = preds.find(ev);
      if (pit == preds.end()) continue;
      bool ev_ok =
          flow.is_end(ev) || (tab.count(ev) != 0 && tab[ev][i + 1] != 0);
      if (!ev_ok) continue;
      for (MessageId u : pit->second) {
        tab[u][i] = 1;
      }
    }
  }
  return fz;
}

// Drop actives that can no longer complete; their events are rejected either
// way, so the value of the state is unchanged and states collapse massively.
State normalize(const State& s, const Feasibility& fz, std::size_t i) {
  State out;
  out.reserve(s.size());
  for (Packed p : s) {
    if (fz.ok(packed_flow(p), packed_node(p), i)) out.push_back(p);
  }
  return out;
}

struct Choice {
  enum Kind : std::uint8_t { kReject, kSpawn, kAdvance } kind = kReject;
  std::size_t flow = 0;   // spawn: flow index
  Packed triple = 0;      // advance: which active
};

struct BudgetBlown {};

class ExactSearch {
 public:
  ExactSearch(const std::vector<FlowSpec>& flows, const Trace& trace,
              const Feasibility& fz, std::uint64_t budget)
      : flows_(flows), trace_(trace), fz_(fz), budget_(budget) {
    memo_.resize(trace.size() + 1);
    for (std::size_t f = 0; f < flows.size(); ++f) {
      starts_by_id_[flows[f].start()].push_back(f);
    }
  }

  long long run() { return value(0, State{}); }

  // Enumerate choices at (i, state) in deterministic order with their values.
  std::vector<std::pair<Choice, long long>> choices(std::size_t i,
                                                    const State& state) {
    std::vector<std::pair<Choice, long long>> out;
    MessageId ev = trace_.events[i];
    // Advances over distinct triples, in sorted (state) order.
    for (std::size_t k = 0; k < state.size(); ++k) {
      if (k > 0 && state[k] == state[k - 1]) continue;
      Packed p = state[k];
      std::size_t f = packed_flow(p);
      MessageId u = packed_node(p);
      const auto& succ = flows_[f].successors(u);
      if (!std::binary_search(succ.begin(), succ.end(), ev)) continue;
      std::size_t cnt = packed_count(p);
      State next = state;
      next.erase(next.begin() + static_cast<long>(k));
      long long gain = 0;
      if (flows_[f].is_end(ev)) {
        gain = static_cast<long long>(cnt) + 1;
      } else {
        if (!fz_.ok(f, ev, i + 1)) continue;  // could never finish
        Packed q = pack(f, ev, cnt + 1);
        next.insert(std::upper_bound(next.begin(), next.end(), q), q);
      }
      out.push_back({Choice{Choice::kAdvance, 0, p},
                     gain + value(i + 1, std::move(next))});
    }
    // Spawns, by flow declaration order.
    auto sit = starts_by_id_.find(ev);
    if (sit != starts_by_id_.end()) {
      for (std::size_t f : sit->second) {
        if (flows_[f].is_end(ev)) {
          out.push_back({Choice{Choice::kSpawn, f, 0},
                         1 + value(i + 1, state)});
        } else if (fz_.ok(f, ev, i + 1)) {
          Packed q = pack(f, ev, 1);
          State next = state;
          next.insert(std::upper_bound(next.begin(), next.end(), q), q);
          out.push_back(
              {Choice{Choice::kSpawn, f, 0}, value(i + 1, std::move(next))});
        }
      }
    }
    out.push_back({Choice{Choice::kReject, 0, 0}, value(i + 1, state)});
    return out;
  }

  long long value(std::size_t i, State state) {
    state = normalize(state, fz_, i);
    if (i == trace_.size()) return 0;
    auto& layer = memo_[i];
    auto it = layer.find(state);
    if (it != layer.end()) return it->second;
    if (++expanded_ > budget_) throw BudgetBlown{};
    long long best = 0;
    for (auto& [c, v] : choices(i, state)) {
      (void)c;
      best = std::max(best, v);
    }
    layer.emplace(std::move(state), best);
    return best;
  }

 private:
  const std::vector<FlowSpec>& flows_;
  const Trace& trace_;
  const Feasibility& fz_;
  std::uint64_t budget_;
  std::uint64_t expanded_ = 0;
  std::vector<std::unordered_map<State, long long, StateHash>> memo_;
  std::map<MessageId, std::vector<std::size_t>> starts_by_id_;

  friend EvalReport finish_exact(ExactSearch&, const std::vector<FlowSpec>&,
                                 const Trace&, const Feasibility&);
};

// Replay the exact solution to materialize the witness decomposition.
struct ReplayInstance {
  std::size_t flow = 0;
  MessageId node = 0;
  std::vector<std::size_t> events;
  bool done = false;
  bool dead = false;
};

EvalReport finish_exact(ExactSearch& search, const std::vector<FlowSpec>& flows,
                        const Trace& trace, const Feasibility& fz) {
  EvalReport report;
  report.policy = "exhaustive";
  report.total_events = trace.size();
  report.exact = true;

  std::vector<ReplayInstance> instances;
  State state;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    // Mirror normalize(): retire live instances that can no longer finish.
    for (auto& inst : instances) {
      if (!inst.done && !inst.dead && !fz.ok(inst.flow, inst.node, i)) {
        inst.dead = true;
      }
    }
    state = normalize(state, fz, i);
    long long want = search.value(i, state);
    auto options = search.choices(i, state);
    const Choice* picked = nullptr;
    for (auto& [c, v] : options) {
      if (v == want) {
        picked = &c;
        break;
      }
    }
    // options always holds at least the reject choice with value(i+1,...)
    MessageId ev = trace.events[i];
    switch (picked->kind) {
      case Choice::kReject:
        break;
      case Choice::kSpawn: {
        ReplayInstance inst;
        inst.flow = picked->flow;
        inst.node = ev;
        inst.events.push_back(i);
        if (flows[picked->flow].is_end(ev)) {
          inst.done = true;
        } else {
          state.insert(std::upper_bound(state.begin(), state.end(),
                                        pack(picked->flow, ev, 1)),
                       pack(picked->flow, ev, 1));
        }
        instances.push_back(std::move(inst));
        break;
      }
      case Choice::kAdvance: {
        Packed p = picked->triple;
        // Oldest live instance matching the packed triple.
        for (auto& inst : instances) {
          if (inst.done || inst.dead) continue;
          if (pack(inst.flow, inst.node, inst.events.size()) != p) continue;
          inst.node = ev;
          inst.events.push_back(i);
          if (flows[inst.flow].is_end(ev)) inst.done = true;
          break;
        }
        auto it = std::find(state.begin(), state.end(), p);
        state.erase(it);
        if (!flows[packed_flow(p)].is_end(ev)) {
          Packed q = pack(packed_flow(p), ev, packed_count(p) + 1);
          state.insert(std::upper_bound(state.begin(), state.end(), q), q);
        }
        break;
      }
    }
  }

  std::vector<bool> accepted(trace.size(), false);
  for (const auto& inst : instances) {
    InstanceTrace it;
    it.flow_index = inst.flow;
    it.event_indices = inst.events;
    it.completed = inst.done;
    if (inst.done) {
      for (std::size_t i : inst.events) accepted[i] = true;
    } else {
      ++report.incomplete_instances;
    }
    report.decomposition.push_back(std::move(it));
  }
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (accepted[i]) {
      ++report.accepted;
    } else {
      report.rejected_indices.push_back(i);
    }
  }
  report.rejected = trace.size() - report.accepted;
  report.rate = trace.empty() ? 1.0
                              : static_cast<double>(report.accepted) /
                                    static_cast<double>(trace.size());
  return report;
}

/* ---- beam fallback ---- */

constexpr std::size_t kBeamWidth = 256;

struct BeamNode {
  State state;
  long long accepted = 0;  // completed events so far
  std::uint32_t parent = 0;
  Choice choice;
};

EvalReport beam_search(const std::vector<FlowSpec>& flows, const Trace& trace,
                       const Feasibility& fz) {
  std::map<MessageId, std::vector<std::size_t>> starts_by_id;
  for (std::size_t f = 0; f < flows.size(); ++f) {
    starts_by_id[flows[f].start()].push_back(f);
  }

  std::size_t n = trace.size();
  std::vector<BeamNode> layer{BeamNode{}};
  // Per step, per surviving node: (parent in previous layer, choice).
  std::vector<std::vector<std::pair<std::uint32_t, Choice>>> history;
  history.reserve(n);

  for (std::size_t i = 0; i < n; ++i) {
    MessageId ev = trace.events[i];
    std::vector<BeamNode> next;
    next.reserve(layer.size() * 4);
    for (std::uint32_t pi = 0; pi < layer.size(); ++pi) {
      BeamNode& node = layer[pi];
      State base = normalize(node.state, fz, i);
      // Reject.
      next.push_back(BeamNode{base, node.accepted, pi, Choice{}});
      // Advances.
      for (std::size_t k = 0; k < base.size(); ++k) {
        if (k > 0 && base[k] == base[k - 1]) continue;
        Packed p = base[k];
        std::size_t f = packed_flow(p);
        const auto& succ = flows[f].successors(packed_node(p));
        if (!std::binary_search(succ.begin(), succ.end(), ev)) continue;
        State st = base;
        st.erase(st.begin() + static_cast<long>(k));
        long long acc = node.accepted;
        if (flows[f].is_end(ev)) {
          acc += static_cast<long long>(packed_count(p)) + 1;
        } else {
          if (!fz.ok(f, ev, i + 1)) continue;
          Packed q = pack(f, ev, packed_count(p) + 1);
          st.insert(std::upper_bound(st.begin(), st.end(), q), q);
        }
        next.push_back(
            BeamNode{std::move(st), acc, pi, Choice{Choice::kAdvance, 0, p}});
      }
      // Spawns.
      auto sit = starts_by_id.find(ev);
      if (sit != starts_by_id.end()) {
        for (std::size_t f : sit->second) {
          if (flows[f].is_end(ev)) {
            next.push_back(BeamNode{base, node.accepted + 1, pi,
                                    Choice{Choice::kSpawn, f, 0}});
          } else if (fz.ok(f, ev, i + 1)) {
            Packed q = pack(f, ev, 1);
            State st = base;
            st.insert(std::upper_bound(st.begin(), st.end(), q), q);
            next.push_back(BeamNode{std::move(st), node.accepted, pi,
                                    Choice{Choice::kSpawn, f, 0}});
          }
        }
      }
    }

    // Rank: accepted + optimistic potential of actives, then state for
    // determinism. Deduplicate identical states keeping the best.
    auto potential = [](const BeamNode& b) {
      long long pot = b.accepted;
      for (Packed p : b.state) {
        pot += static_cast<long long>(packed_count(p));
      }
      return pot;
    };
    std::stable_sort(next.begin(), next.end(),
                     [&](const BeamNode& x, const BeamNode& y) {
                       long long px = potential(x), py = potential(y);
                       if (px != py) return px > py;
                       if (x.accepted != y.accepted) {
                         return x.accepted > y.accepted;
                       }
                       return x.state < y.state;
                     });
    std::vector<BeamNode> kept;
    kept.reserve(kBeamWidth);
    std::map<State, bool> seen;
    for (auto& b : next) {
      if (kept.size() >= kBeamWidth) break;
      if (seen.emplace(b.state, true).second) kept.push_back(std::move(b));
    }
    history.emplace_back();
    auto& h = history.back();
    h.reserve(kept.size());
    // Record (predecessor, choice) and re-point each parent to the node's own
    // index within this layer for the next step.
    for (auto& b : kept) {
      h.emplace_back(b.parent, b.choice);
      b.parent = static_cast<std::uint32_t>(h.size() - 1);
    }
    layer = std::move(kept);
  }

  // Best final node by accepted count.
  std::uint32_t best = 0;
  for (std::uint32_t bi = 1; bi < layer.size(); ++bi) {
    if (layer[bi].accepted > layer[best].accepted) best = bi;
  }

  // Walk the history chain backwards to recover the choice sequence.
  std::vector<Choice> plan(n);
  std::uint32_t cur = best;
  for (std::size_t i = n; i-- > 0;) {
    plan[i] = history[i][cur].second;
    cur = history[i][cur].first;
  }

  // Replay.
  EvalReport report;
  report.policy = "exhaustive";
  report.total_events = n;
  report.exact = false;
  report.budget_exceeded = true;
  std::vector<ReplayInstance> instances;
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& inst : instances) {
      if (!inst.done && !inst.dead && !fz.ok(inst.flow, inst.node, i)) {
        inst.dead = true;
      }
    }
    MessageId ev = trace.events[i];
    const Choice& c = plan[i];
    if (c.kind == Choice::kSpawn) {
      ReplayInstance inst;
      inst.flow = c.flow;
      inst.node = ev;
      inst.events.push_back(i);
      inst.done = flows[c.flow].is_end(ev);
      instances.push_back(std::move(inst));
    } else if (c.kind == Choice::kAdvance) {
      for (auto& inst : instances) {
        if (inst.done || inst.dead) continue;
        if (pack(inst.flow, inst.node, inst.events.size()) != c.triple) {
          continue;
        }
        inst.node = ev;
        inst.events.push_back(i);
        if (flows[inst.flow].is_end(ev)) inst.done = true;
        break;
      }
    }
  }
  std::vector<bool> accepted(n, false);
  for (const auto& inst : instances) {
    InstanceTrace it;
    it.flow_index = inst.flow;
    it.event_indices = inst.events;
    it.completed = inst.done;
    if (inst.done) {
      for (std::size_t idx : inst.events) accepted[idx] = true;
    } else {
      ++report.incomplete_instances;
    }
    report.decomposition.push_back(std::move(it));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (accepted[i]) {
      ++report.accepted;
    } else {
      report.rejected_indices.push_back(i);
    }
  }
  report.rejected = n - report.accepted;
  report.rate = n == 0 ? 1.0
                       : static_cast<double>(report.accepted) /
                             static_cast<double>(n);
  return report;
}

}  // namespace

EvalReport evaluate_oracle(const std::vector<FlowSpec>& flows,
                           const Trace& trace, std::uint64_t budget) {
  EvalReport report;
  report.policy = "exhaustive";
  report.total_events = trace.size();
  if (trace.empty()) {
    report.rate = 1.0;
    return report;
  }
  Feasibility fz = build_feasibility(flows, trace);
  try {
    ExactSearch search(flows, trace, fz, budget);
    search.run();
    return finish_exact(search, flows, trace, fz);
  } catch (const BudgetBlown&) {
    return beam_search(flows, trace, fz);
  }
}

}  // namespace flowmine
