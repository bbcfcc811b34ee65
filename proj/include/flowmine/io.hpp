#pragma once

#include <string>
#include <vector>

#include "flowmine/types.hpp"

namespace flowmine {

// ---- .cat ------------------------------------------------------------------
// Body lines are `id,src,dest,cmd`. `start: <id list>` / `end: <id list>`
// declare the mining annotations (space separated, may appear anywhere).
// `#` begins a comment line. Round-trips bit-exactly through serialize.
Catalog parse_catalog(const std::string& text);
std::string serialize_catalog(const Catalog& catalog);

// ---- .trc ------------------------------------------------------------------
// One trace per line, space separated decimal ids. Blank lines are ignored.
// Every id must exist in the catalog (UnknownId otherwise).
std::vector<Trace> parse_traces(const std::string& text, const Catalog& catalog);
std::string serialize_traces(const std::vector<Trace>& traces);

// ---- .flow -----------------------------------------------------------------
// Line oriented blocks:
//   flow <name>
//   start <id>
//   end <id>          (one line per end)
//   edge <src> <dst>
// A file may hold several blocks; `#` begins a comment. Ids are checked
// against the catalog and each flow's invariants are validated.
std::vector<FlowSpec> parse_flows(const std::string& text,
                                  const Catalog& catalog);
std::string serialize_flows(const std::vector<FlowSpec>& flows);

// Graphviz export of a flow. Node labels are `msg_<id>\n<src>:<dest>:<cmd>`;
// the start node is green and end nodes are purple.
std::string flow_to_dot(const FlowSpec& flow, const Catalog& catalog);

// File helpers (throw flowmine::Error with the path on failure).
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace flowmine
