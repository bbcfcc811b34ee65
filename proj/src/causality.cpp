#include "flowmine/causality.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace flowmine {

bool CausalityGraph::has_node(MessageId id) const {
  return std::binary_search(nodes.begin(), nodes.end(), id);
}

bool CausalityGraph::has_edge(MessageId a, MessageId b) const {
  auto it = adj.find(a);
  if (it == adj.end()) return false;
  return std::binary_search(it->second.begin(), it->second.end(), b);
}

const std::vector<MessageId>& CausalityGraph::successors(MessageId id) const {
  static const std::vector<MessageId> kEmpty;
  auto it = adj.find(id);
  return it == adj.end() ? kEmpty : it->second;
}

std::size_t CausalityGraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& [u, succ] : adj) {
    (void)u;
    n += succ.size();
  }
  return n;
}

std::vector<std::pair<MessageId, MessageId>> CausalityGraph::edges() const {
  std::vector<std::pair<MessageId, MessageId>> out;
  out.reserve(edge_count());
  for (const auto& [u, succ] : adj) {
    for (MessageId v : succ) out.emplace_back(u, v);
  }
  return out;
}

CausalityGraph build_graph(const Catalog& catalog, Predicate predicate) {
  CausalityGraph g;
  g.predicate = predicate;
  g.nodes = catalog.ids();
  g.starts.assign(catalog.start_ids().begin(), catalog.start_ids().end());
  g.ends.assign(catalog.end_ids().begin(), catalog.end_ids().end());
  for (MessageId a : g.nodes) {
    const Message& ma = catalog.at(a);
    for (MessageId b : g.nodes) {
      if (a == b) continue;
      if (causal(ma, catalog.at(b), predicate)) {
        g.adj[a].push_back(b);
      }
    }
  }
  return g;  // successor lists are sorted because g.nodes is sorted
}

namespace {

// Forward reachability from the seed set (seeds themselves included).
std::set<MessageId> forward_reach(const CausalityGraph& g,
                                  const std::vector<MessageId>& seeds) {
  std::set<MessageId> seen(seeds.begin(), seeds.end());
  std::vector<MessageId> stack(seeds.begin(), seeds.end());
  while (!stack.empty()) {
    MessageId u = stack.back();
    stack.pop_back();
    for (MessageId v : g.successors(u)) {
      if (seen.insert(v).second) stack.push_back(v);
    }
  }
  return seen;
}

std::set<MessageId> backward_reach(const CausalityGraph& g,
                                   const std::vector<MessageId>& seeds) {
  std::map<MessageId, std::vector<MessageId>> preds;
  for (const auto& [u, succ] : g.adj) {
    for (MessageId v : succ) preds[v].push_back(u);
  }
  std::set<MessageId> seen(seeds.begin(), seeds.end());
  std::vector<MessageId> stack(seeds.begin(), seeds.end());
  while (!stack.empty()) {
    MessageId u = stack.back();
    stack.pop_back();
    for (MessageId p : preds[u]) {
      if (seen.insert(p).second) stack.push_back(p);
    }
  }
  return seen;
}

}  // namespace

CausalityGraph reachable_subgraph(const CausalityGraph& g, MessageId start,
                                  MessageId end) {
  if (!g.has_node(start)) throw UnknownId(start, "reachable_subgraph start");
  if (!g.has_node(end)) throw UnknownId(end, "reachable_subgraph end");

  std::set<MessageId> fwd, back;
  if (start == end) {
    // Only a nonempty cycle through the node qualifies as a path, so both
    // reachability sweeps must use at least one edge: seed the forward sweep
    // with the node's successors and the backward sweep with its
    // predecessors, then put the node itself back.
    fwd = forward_reach(g, g.successors(start));
    if (!fwd.count(start)) throw NoPath(start, end);
    std::vector<MessageId> preds;
    for (const auto& [u, succ] : g.adj) {
      if (std::binary_search(succ.begin(), succ.end(), start)) {
        preds.push_back(u);
      }
    }
    back = backward_reach(g, preds);
    fwd.insert(start);
    back.insert(start);
  } else {
    fwd = forward_reach(g, {start});
    if (!fwd.count(end)) throw NoPath(start, end);
    back = backward_reach(g, {end});
    if (!back.count(start)) throw NoPath(start, end);
  }

  CausalityGraph sub;
  sub.predicate = g.predicate;
  sub.starts = g.starts;
  sub.ends = g.ends;
  for (MessageId n : g.nodes) {
    if (fwd.count(n) && back.count(n)) sub.nodes.push_back(n);
  }
  for (MessageId u : sub.nodes) {
    std::vector<MessageId> kept;
    for (MessageId v : g.successors(u)) {
      if (std::binary_search(sub.nodes.begin(), sub.nodes.end(), v)) {
        kept.push_back(v);
      }
    }
    if (!kept.empty()) sub.adj[u] = std::move(kept);
  }
  return sub;
}

std::string to_dot(const CausalityGraph& g, const Catalog& catalog) {
  std::ostringstream out;
  out << "digraph causality {\n";
  for (MessageId n : g.nodes) {
    const Message& m = catalog.at(n);
    out << "  msg_" << n << " [label=\"msg_" << n << "\\n"
        << m.src << ':' << m.dest << ':' << m.cmd << '"';
    if (std::binary_search(g.starts.begin(), g.starts.end(), n)) {
      out << ", style=filled, fillcolor=green";
    } else if (std::binary_search(g.ends.begin(), g.ends.end(), n)) {
      out << ", style=filled, fillcolor=purple";
    }
    out << "];\n";
  }
  for (const auto& [u, succ] : g.adj) {
    for (MessageId v : succ) {
      out << "  msg_" << u << " -> msg_" << v << ";\n";
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace flowmine
