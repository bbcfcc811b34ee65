#pragma once

#include <map>
#include <string>
#include <vector>

#include "flowmine/types.hpp"

namespace flowmine {

// Directed graph over catalog message ids. Edge (a,b) means "an instance of b
// can causally follow an instance of a" under the chosen structural predicate.
struct CausalityGraph {
  std::vector<MessageId> nodes;                     // sorted
  std::map<MessageId, std::vector<MessageId>> adj;  // sorted successor lists
  Predicate predicate = Predicate::kUnion;
  std::vector<MessageId> starts;  // catalog annotations, sorted
  std::vector<MessageId> ends;

  bool has_node(MessageId id) const;
  bool has_edge(MessageId a, MessageId b) const;
  const std::vector<MessageId>& successors(MessageId id) const;
  std::size_t edge_count() const;
  std::vector<std::pair<MessageId, MessageId>> edges() const;  // sorted
};

// Builds the full causality graph: edge (i,j) present iff i != j and
// causal(m_i, m_j, predicate).
CausalityGraph build_graph(const Catalog& catalog,
                           Predicate predicate = Predicate::kUnion);

// The subgraph of nodes both forward-reachable from `start` and backward-
// reachable from `end`, with edges restricted to those nodes. Throws NoPath
// when no start->end path exists (including start == end with no cycle back
// to it), UnknownId when either endpoint is not a node.
CausalityGraph reachable_subgraph(const CausalityGraph& g, MessageId start,
                                  MessageId end);

// Graphviz export; labels are `msg_<id>\n<src>:<dest>:<cmd>`, start nodes
// green, end nodes purple (per the catalog annotations).
std::string to_dot(const CausalityGraph& g, const Catalog& catalog);

}  // namespace flowmine
