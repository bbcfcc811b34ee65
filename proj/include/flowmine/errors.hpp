#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace flowmine {

// Base class for every error raised by the toolchain. Subclasses mark the
// condition; the what() string carries the detail (line numbers, ids, ...).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A line of an input file could not be parsed.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& msg)
      : Error("parse error at line " + std::to_string(line) + ": " + msg),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A message id was declared twice in a catalog.
class DuplicateMessage : public Error {
 public:
  explicit DuplicateMessage(std::uint32_t id)
      : Error("duplicate message id " + std::to_string(id)), id_(id) {}
  std::uint32_t id() const { return id_; }

 private:
  std::uint32_t id_;
};

// An id referenced by a trace, flow or annotation is not in the catalog.
class UnknownId : public Error {
 public:
  explicit UnknownId(std::uint32_t id, const std::string& where = "")
      : Error("unknown message id " + std::to_string(id) +
              (where.empty() ? "" : " (" + where + ")")),
        id_(id) {}
  std::uint32_t id() const { return id_; }

 private:
  std::uint32_t id_;
};

// A structural invariant of a flow or mined result does not hold.
class InvariantViolation : public Error {
 public:
  explicit InvariantViolation(const std::string& msg)
      : Error("invariant violation: " + msg) {}
};

// No start->end path exists in a causality graph.
class NoPath : public Error {
 public:
  NoPath(std::uint32_t start, std::uint32_t end)
      : Error("no path from msg_" + std::to_string(start) + " to msg_" +
              std::to_string(end)),
        start_(start),
        end_(end) {}
  std::uint32_t start() const { return start_; }
  std::uint32_t end() const { return end_; }

 private:
  std::uint32_t start_, end_;
};

// Training was requested on a corpus with nothing to learn from.
class EmptyCorpus : public Error {
 public:
  explicit EmptyCorpus(const std::string& msg) : Error("empty corpus: " + msg) {}
};

// The training loss became NaN or infinite.
class NonFiniteLoss : public Error {
 public:
  explicit NonFiniteLoss(std::size_t epoch)
      : Error("non-finite loss at epoch " + std::to_string(epoch)),
        epoch_(epoch) {}
  std::size_t epoch() const { return epoch_; }

 private:
  std::size_t epoch_;
};

// next_score was asked about a message that never occurs in the traces.
class NoOccurrence : public Error {
 public:
  explicit NoOccurrence(std::uint32_t id)
      : Error("message id " + std::to_string(id) +
              " has no occurrence in the given traces"),
        id_(id) {}
  std::uint32_t id() const { return id_; }

 private:
  std::uint32_t id_;
};

// A model file has the wrong magic or an unsupported version.
class VersionMismatch : public Error {
 public:
  explicit VersionMismatch(const std::string& msg)
      : Error("version mismatch: " + msg) {}
};

// A model file is truncated or fails its checksum.
class CorruptFile : public Error {
 public:
  explicit CorruptFile(const std::string& msg) : Error("corrupt file: " + msg) {}
};

// generate_negative could not produce a trace the oracle rejects.
class InfeasibleCorruption : public Error {
 public:
  explicit InfeasibleCorruption(const std::string& msg)
      : Error("infeasible corruption: " + msg) {}
};

}  // namespace flowmine
