#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "flowmine/errors.hpp"

namespace flowmine {

// Message ids are positive integers; 0 is reserved for the padding token of the
// sequence model and never appears in catalogs or traces.
using MessageId = std::uint32_t;

// One catalog entry: (src, dest, cmd) identified by a unique id.
struct Message {
  MessageId id = 0;
  std::string src;
  std::string dest;
  std::string cmd;

  bool operator==(const Message&) const = default;
};

// The message catalog plus the start/end annotations used for mining.
class Catalog {
 public:
  // Throws DuplicateMessage / InvariantViolation (id 0, empty fields).
  void add(Message m);

  bool contains(MessageId id) const { return index_.count(id) != 0; }
  const Message& at(MessageId id) const;

  // Messages in insertion (file) order.
  const std::vector<Message>& messages() const { return messages_; }
  std::size_t size() const { return messages_.size(); }

  // Start/end annotations; kept sorted. Ids must exist in the catalog by the
  // time validate_annotations() runs (the parser calls it after reading all
  // lines, so directives may precede the message body in a file).
  void add_start(MessageId id) { starts_.insert(id); }
  void add_end(MessageId id) { ends_.insert(id); }
  const std::set<MessageId>& start_ids() const { return starts_; }
  const std::set<MessageId>& end_ids() const { return ends_; }
  void validate_annotations() const;

  // Sorted list of all ids.
  std::vector<MessageId> ids() const;

  bool operator==(const Catalog& other) const {
    return messages_ == other.messages_ && starts_ == other.starts_ &&
           ends_ == other.ends_;
  }

 private:
  std::vector<Message> messages_;
  std::map<MessageId, std::size_t> index_;
  std::set<MessageId> starts_;
  std::set<MessageId> ends_;
};

// One observed sequence of message instances.
struct Trace {
  std::vector<MessageId> events;

  bool operator==(const Trace&) const = default;
  std::size_t size() const { return events.size(); }
  bool empty() const { return events.empty(); }
};

// A message flow: a DAG rooted at `start`, terminating at `ends`. Branches are
// alternative root-to-end paths. An executing instance finishes as soon as it
// reaches any end node, so end nodes are terminal for acceptance purposes.
class FlowSpec {
 public:
  FlowSpec() = default;
  FlowSpec(std::string name, MessageId start, std::set<MessageId> ends,
           std::set<std::pair<MessageId, MessageId>> edges);

  const std::string& name() const { return name_; }
  MessageId start() const { return start_; }
  const std::set<MessageId>& ends() const { return ends_; }
  const std::set<std::pair<MessageId, MessageId>>& edges() const {
    return edges_;
  }
  // All nodes (start, ends, edge endpoints), sorted.
  const std::vector<MessageId>& nodes() const { return nodes_; }
  bool has_node(MessageId id) const;
  bool is_end(MessageId id) const { return ends_.count(id) != 0; }
  // Sorted successors of `id` (empty for unknown / terminal nodes).
  const std::vector<MessageId>& successors(MessageId id) const;

  // Checks: ends non-empty, start in-degree 0, acyclic, every node reachable
  // from start, every node reaches some end. Throws InvariantViolation.
  void validate() const;

  bool operator==(const FlowSpec& other) const {
    return name_ == other.name_ && start_ == other.start_ &&
           ends_ == other.ends_ && edges_ == other.edges_;
  }

 private:
  std::string name_;
  MessageId start_ = 0;
  std::set<MessageId> ends_;
  std::set<std::pair<MessageId, MessageId>> edges_;
  std::vector<MessageId> nodes_;
  std::map<MessageId, std::vector<MessageId>> adj_;
};

// Structural causality between two message *types*.
//   paper-src-dest : m1.src == m2.dest   (request/response shape)
//   forward-dest-src : m1.dest == m2.src (forwarding shape)
//   union : either. The union over-approximates most aggressively and is the
//   default everywhere a causality graph is built.
enum class Predicate {
  kPaperSrcDest,
  kForwardDestSrc,
  kUnion,
};

bool causal(const Message& m1, const Message& m2, Predicate p);

// "paper" | "forward" | "union" <-> Predicate. Throws ParseError(0) on junk.
Predicate predicate_from_string(const std::string& s);
std::string to_string(Predicate p);

}  // namespace flowmine
