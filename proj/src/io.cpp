#include "flowmine/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace flowmine {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

MessageId parse_id(const std::string& tok, std::size_t line) {
  if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos) {
    throw ParseError(line, "expected a message id, got '" + tok + "'");
  }
  unsigned long long v = 0;
  try {
    v = std::stoull(tok);
  } catch (const std::exception&) {
    throw ParseError(line, "message id out of range: '" + tok + "'");
  }
  if (v == 0 || v > 0xffffffffull) {
    throw ParseError(line, "message id must be in [1, 2^32): '" + tok + "'");
  }
  return static_cast<MessageId>(v);
}

}  // namespace

/* ---- .cat ---- */

Catalog parse_catalog(const std::string& text) {
  Catalog catalog;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("start:", 0) == 0 || line.rfind("end:", 0) == 0) {
      bool is_start = line[0] == 's';
      std::string rest = line.substr(line.find(':') + 1);
      auto toks = split_ws(rest);
      if (toks.empty()) {
        throw ParseError(lineno, "empty id list in directive");
      }
      for (const auto& tok : toks) {
        MessageId id = parse_id(tok, lineno);
        if (is_start) {
          catalog.add_start(id);
        } else {
          catalog.add_end(id);
        }
      }
      continue;
    }
    auto fields = split(line, ',');
    if (fields.size() != 4) {
      throw ParseError(lineno, "expected `id,src,dest,cmd`, got '" + line + "'");
    }
    Message m;
    m.id = parse_id(trim(fields[0]), lineno);
    m.src = trim(fields[1]);
    m.dest = trim(fields[2]);
    m.cmd = trim(fields[3]);
    if (m.src.empty() || m.dest.empty() || m.cmd.empty()) {
      throw ParseError(lineno, "empty src/dest/cmd field");
    }
    try {
      catalog.add(std::move(m));
    } catch (const DuplicateMessage&) {
      throw;  // keep the typed error; line context is recoverable from id
    }
  }
  catalog.validate_annotations();
  return catalog;
}

std::string serialize_catalog(const Catalog& catalog) {
  std::ostringstream out;
  out << "# id,src,dest,cmd\n";
  if (!catalog.start_ids().empty()) {
    out << "start:";
    for (MessageId id : catalog.start_ids()) out << ' ' << id;
    out << '\n';
  }
  if (!catalog.end_ids().empty()) {
    out << "end:";
    for (MessageId id : catalog.end_ids()) out << ' ' << id;
    out << '\n';
  }
  for (const Message& m : catalog.messages()) {
    out << m.id << ',' << m.src << ',' << m.dest << ',' << m.cmd << '\n';
  }
  return out.str();
}

/* ---- .trc ---- */

std::vector<Trace> parse_traces(const std::string& text,
                                const Catalog& catalog) {
  std::vector<Trace> traces;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto toks = split_ws(trim(raw));
    if (toks.empty()) continue;
    Trace t;
    t.events.reserve(toks.size());
    for (const auto& tok : toks) {
      MessageId id = parse_id(tok, lineno);
      if (!catalog.contains(id)) {
        throw UnknownId(id, "trace line " + std::to_string(lineno));
      }
      t.events.push_back(id);
    }
    traces.push_back(std::move(t));
  }
  return traces;
}

std::string serialize_traces(const std::vector<Trace>& traces) {
  std::ostringstream out;
  for (const Trace& t : traces) {
    for (std::size_t i = 0; i < t.events.size(); ++i) {
      if (i) out << ' ';
      out << t.events[i];
    }
    out << '\n';
  }
  return out.str();
}

/* ---- .flow ---- */

namespace {

struct FlowDraft {
  std::string name;
  MessageId start = 0;
  bool has_start = false;
  std::set<MessageId> ends;
  std::set<std::pair<MessageId, MessageId>> edges;
  std::size_t line = 0;
};

FlowSpec finish_flow(const FlowDraft& d, const Catalog& catalog) {
  if (!d.has_start) {
    throw ParseError(d.line, "flow '" + d.name + "' has no start line");
  }
  if (d.ends.empty()) {
    throw ParseError(d.line, "flow '" + d.name + "' has no end line");
  }
  FlowSpec flow(d.name, d.start, d.ends, d.edges);
  for (MessageId n : flow.nodes()) {
    if (!catalog.contains(n)) {
      throw UnknownId(n, "flow '" + d.name + "'");
    }
  }
  flow.validate();
  return flow;
}

}  // namespace

std::vector<FlowSpec> parse_flows(const std::string& text,
                                  const Catalog& catalog) {
  std::vector<FlowSpec> flows;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  FlowDraft draft;
  bool open = false;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto toks = split_ws(line);
    const std::string& kw = toks[0];
    if (kw == "flow") {
      if (toks.size() != 2) throw ParseError(lineno, "expected `flow <name>`");
      if (open) flows.push_back(finish_flow(draft, catalog));
      draft = FlowDraft{};
      draft.name = toks[1];
      draft.line = lineno;
      open = true;
      continue;
    }
    if (!open) {
      throw ParseError(lineno, "'" + kw + "' before any `flow` line");
    }
    if (kw == "start") {
      if (toks.size() != 2) throw ParseError(lineno, "expected `start <id>`");
      if (draft.has_start) {
        throw ParseError(lineno, "flow '" + draft.name +
                                     "' declares start twice");
      }
      draft.start = parse_id(toks[1], lineno);
      draft.has_start = true;
    } else if (kw == "end") {
      if (toks.size() != 2) throw ParseError(lineno, "expected `end <id>`");
      draft.ends.insert(parse_id(toks[1], lineno));
    } else if (kw == "edge") {
      if (toks.size() != 3) {
        throw ParseError(lineno, "expected `edge <src> <dst>`");
      }
      draft.edges.emplace(parse_id(toks[1], lineno), parse_id(toks[2], lineno));
    } else {
      throw ParseError(lineno, "unknown keyword '" + kw + "'");
    }
  }
  if (open) flows.push_back(finish_flow(draft, catalog));
  return flows;
}

std::string serialize_flows(const std::vector<FlowSpec>& flows) {
  std::ostringstream out;
  for (const FlowSpec& f : flows) {
    out << "flow " << f.name() << '\n';
    out << "start " << f.start() << '\n';
    for (MessageId e : f.ends()) out << "end " << e << '\n';
    for (const auto& [a, b] : f.edges()) {
      out << "edge " << a << ' ' << b << '\n';
    }
  }
  return out.str();
}

std::string flow_to_dot(const FlowSpec& flow, const Catalog& catalog) {
  std::ostringstream out;
  out << "digraph " << (flow.name().empty() ? "flow" : flow.name()) << " {\n";
  for (MessageId n : flow.nodes()) {
    const Message& m = catalog.at(n);
    out << "  msg_" << n << " [label=\"msg_" << n << "\\n"
        << m.src << ':' << m.dest << ':' << m.cmd << '"';
    if (n == flow.start()) {
      out << ", style=filled, fillcolor=green";
    } else if (flow.is_end(n)) {
      out << ", style=filled, fillcolor=purple";
    }
    out << "];\n";
  }
  for (const auto& [a, b] : flow.edges()) {
    out << "  msg_" << a << " -> msg_" << b << ";\n";
  }
  out << "}\n";
  return out.str();
}

/* ---- files ---- */

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  out << content;
  if (!out) throw Error("write failed: " + path);
}

}  // namespace flowmine
