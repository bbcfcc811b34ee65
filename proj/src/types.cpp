#include "flowmine/types.hpp"

#include <algorithm>
#include <functional>

namespace flowmine {

/* ---- Catalog ---- */

void Catalog::add(Message m) {
  if (m.id == 0) {
    throw InvariantViolation("message id must be a positive integer");
  }
  if (m.src.empty() || m.dest.empty() || m.cmd.empty()) {
    throw InvariantViolation("message " + std::to_string(m.id) +
                             " has an empty src/dest/cmd field");
  }
  if (contains(m.id)) {
    throw DuplicateMessage(m.id);
  }
  index_[m.id] = messages_.size();
  messages_.push_back(std::move(m));
}

const Message& Catalog::at(MessageId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    throw UnknownId(id, "catalog lookup");
  }
  return messages_[it->second];
}

void Catalog::validate_annotations() const {
  for (MessageId id : starts_) {
    if (!contains(id)) throw UnknownId(id, "start annotation");
  }
  for (MessageId id : ends_) {
    if (!contains(id)) throw UnknownId(id, "end annotation");
  }
}

std::vector<MessageId> Catalog::ids() const {
  std::vector<MessageId> out;
  out.reserve(messages_.size());
  for (const auto& [id, idx] : index_) {
    (void)idx;
    out.push_back(id);
  }
  return out;  // std::map iteration is already sorted
}

/* ---- FlowSpec ---- */

FlowSpec::FlowSpec(std::string name, MessageId start, std::set<MessageId> ends,
                   std::set<std::pair<MessageId, MessageId>> edges)
    : name_(std::move(name)),
      start_(start),
      ends_(std::move(ends)),
      edges_(std::move(edges)) {
  std::set<MessageId> nodes{start_};
  nodes.insert(ends_.begin(), ends_.end());
  for (const auto& [a, b] : edges_) {
    nodes.insert(a);
    nodes.insert(b);
    adj_[a].push_back(b);
  }
  nodes_.assign(nodes.begin(), nodes.end());
  for (auto& [n, succ] : adj_) {
    (void)n;
    std::sort(succ.begin(), succ.end());
  }
}

bool FlowSpec::has_node(MessageId id) const {
  return std::binary_search(nodes_.begin(), nodes_.end(), id);
}

const std::vector<MessageId>& FlowSpec::successors(MessageId id) const {
  static const std::vector<MessageId> kEmpty;
  auto it = adj_.find(id);
  return it == adj_.end() ? kEmpty : it->second;
}

void FlowSpec::validate() const {
  if (start_ == 0) {
    throw InvariantViolation("flow '" + name_ + "' has no start message");
  }
  if (ends_.empty()) {
    throw InvariantViolation("flow '" + name_ + "' has no end message");
  }
  for (const auto& [a, b] : edges_) {
    if (a == b) {
      throw InvariantViolation("flow '" + name_ + "' has a self-loop on msg_" +
                               std::to_string(a));
    }
    if (b == start_) {
      throw InvariantViolation("flow '" + name_ +
                               "': start message msg_" + std::to_string(start_) +
                               " has an incoming edge");
    }
  }

  // Cycle check: iterative DFS with colors over the successor lists.
  enum Color : unsigned char { kWhite, kGray, kBlack };
  std::map<MessageId, Color> color;
  for (MessageId n : nodes_) color[n] = kWhite;
  std::function<void(MessageId)> visit = [&](MessageId u) {
    color[u] = kGray;
    for (MessageId v : successors(u)) {
      if (color[v] == kGray) {
        throw InvariantViolation("flow '" + name_ + "' contains a cycle");
      }
      if (color[v] == kWhite) visit(v);
    }
    color[u] = kBlack;
  };
  for (MessageId n : nodes_) {
    if (color[n] == kWhite) visit(n);
  }

  // Reachability from start.
  std::set<MessageId> seen{start_};
  std::vector<MessageId> stack{start_};
  while (!stack.empty()) {
    MessageId u = stack.back();
    stack.pop_back();
    for (MessageId v : successors(u)) {
      if (seen.insert(v).second) stack.push_back(v);
    }
  }
  for (MessageId n : nodes_) {
    if (!seen.count(n)) {
      throw InvariantViolation("flow '" + name_ + "': msg_" +
                               std::to_string(n) +
                               " is unreachable from the start message");
    }
  }

  // Every node reaches some end (walk predecessors from the ends).
  std::map<MessageId, std::vector<MessageId>> preds;
  for (const auto& [a, b] : edges_) preds[b].push_back(a);
  std::set<MessageId> reaches(ends_.begin(), ends_.end());
  std::vector<MessageId> back(ends_.begin(), ends_.end());
  while (!back.empty()) {
    MessageId u = back.back();
    back.pop_back();
    for (MessageId p : preds[u]) {
      if (reaches.insert(p).second) back.push_back(p);
    }
  }
  for (MessageId n : nodes_) {
    if (!reaches.count(n)) {
      throw InvariantViolation("flow '" + name_ + "': msg_" +
                               std::to_string(n) + " reaches no end message");
    }
  }
}

/* ---- Predicates ---- */

bool causal(const Message& m1, const Message& m2, Predicate p) {
  switch (p) {
    case Predicate::kPaperSrcDest:
      return m1.src == m2.dest;
    case Predicate::kForwardDestSrc:
      return m1.dest == m2.src;
    case Predicate::kUnion:
      return m1.src == m2.dest || m1.dest == m2.src;
  }
  return false;
}

Predicate predicate_from_string(const std::string& s) {
  if (s == "paper") return Predicate::kPaperSrcDest;
  if (s == "forward") return Predicate::kForwardDestSrc;
  if (s == "union") return Predicate::kUnion;
  throw ParseError(0, "unknown causality predicate '" + s +
                          "' (expected paper|forward|union)");
}

std::string to_string(Predicate p) {
  switch (p) {
    case Predicate::kPaperSrcDest:
      return "paper";
    case Predicate::kForwardDestSrc:
      return "forward";
    case Predicate::kUnion:
      return "union";
  }
  return "?";
}

}  // namespace flowmine
