// Trainable scorers over message sequences.
//
// Two scorer families share one interface: a small bidirectional attention
// encoder trained with masked-token prediction, and an n-gram baseline with
// additive smoothing. A scorer maps (context, position) to a probability
// distribution over the token vocabulary for the message at that position;
// `next_score` turns that into the probability that one message follows
// another, averaged over sampled occurrences in a trace corpus.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "flowmine/types.hpp"

namespace flowmine {

// Reserved id usable inside score() contexts to mean "masked position".
// Catalog ids are always >= 1, so 0 is free.
inline constexpr MessageId kMaskId = 0;

// Bijection between catalog ids and token indices. PAD is token 0, catalog
// ids (sorted ascending) take tokens 1..n, MASK is the last token (n + 1).
class Vocab {
 public:
  static constexpr int kPad = 0;

  explicit Vocab(const Catalog& catalog);
  explicit Vocab(std::vector<MessageId> sorted_ids);  // deserialization path

  std::size_t size() const { return ids_.size() + 2; }
  int mask() const { return static_cast<int>(ids_.size()) + 1; }
  bool has_id(MessageId id) const;
  int token(MessageId id) const;   // throws UnknownId
  MessageId id(int token) const;   // catalog tokens only; throws UnknownId
  const std::vector<MessageId>& ids() const { return ids_; }

  bool operator==(const Vocab& other) const { return ids_ == other.ids_; }

 private:
  std::vector<MessageId> ids_;          // sorted
  std::map<MessageId, int> to_token_;
};

// Probability-emitting model over token positions. Implementations replace
// the token at `position` with MASK before scoring, so callers may leave the
// true value in place or pass kMaskId; both give the same answer.
class Scorer {
 public:
  virtual ~Scorer() = default;

  // Distribution over the vocabulary (size vocab().size(), indexed by token)
  // for the message at `position` within `context`. Entries are nonnegative
  // and sum to 1 within 1e-6.
  virtual std::vector<double> score(const std::vector<MessageId>& context,
                                    std::size_t position) const = 0;

  virtual const Vocab& vocab() const = 0;
  virtual std::size_t window() const = 0;       // max usable context length
  virtual std::string family() const = 0;       // "attention" | "ngram"
};

struct ModelConfig {
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t dim = 64;      // must be divisible by heads
  std::size_t window = 64;   // max sequence length
  double mask_prob = 0.15;   // in (0, 1)
  std::size_t epochs = 1500;
  double learning_rate = 1e-3;
  std::size_t batch = 32;    // windows per optimizer step
  std::uint64_t seed = 0;
};

class AttentionScorer;  // defined in attention.hpp
class NgramScorer;      // defined below

// Trains the attention scorer with masked-token prediction. Traces are first
// causality-sliced (union predicate, default slice window), slices are cut
// into chunks of at most config.window tokens, and chunks shorter than two
// tokens are dropped. Deterministic for a fixed config.seed.
// Throws EmptyCorpus if nothing trainable remains and NonFiniteLoss if the
// loss diverges (reported with the failing epoch).
std::unique_ptr<AttentionScorer> train(const std::vector<Trace>& traces,
                                       const Catalog& catalog,
                                       const ModelConfig& config);

// Conditional-frequency scorer of the given order (2 or 3) with additive
// smoothing constant k, counted over the raw (unsliced) traces.
std::unique_ptr<NgramScorer> train_ngram(const std::vector<Trace>& traces,
                                         const Catalog& catalog, int order,
                                         double smoothing);

inline constexpr std::size_t kDefaultNextScoreSamples = 1024;

// Mean probability that m2 immediately follows m1: over up to `samples`
// occurrences of m1 (deterministic stride over all occurrences, trace order),
// score a window centered on the occurrence with the following position
// masked, and average the mass on m2. An occurrence at the very end of a
// trace contributes an appended masked slot. Throws NoOccurrence if m1 never
// appears.
double next_score(const Scorer& scorer, const std::vector<Trace>& traces,
                  MessageId m1, MessageId m2,
                  std::size_t samples = kDefaultNextScoreSamples);

// Same, for many candidate successors at once; runs each window's forward
// pass once and reads all candidates off the same distribution.
std::map<MessageId, double> next_score_multi(
    const Scorer& scorer, const std::vector<Trace>& traces, MessageId m1,
    const std::vector<MessageId>& candidates,
    std::size_t samples = kDefaultNextScoreSamples);

// Model file round-trip (magic "FMLM", versioned, CRC-checked). Scores from a
// loaded scorer are bit-identical to the saved one.
void save_scorer(const Scorer& scorer, const std::string& path);
std::unique_ptr<Scorer> load_scorer(const std::string& path);

// ---- n-gram scorer ---------------------------------------------------------

class NgramScorer : public Scorer {
 public:
  NgramScorer(Vocab vocab, int order, double smoothing);

  void count_trace(const std::vector<int>& tokens);

  std::vector<double> score(const std::vector<MessageId>& context,
                            std::size_t position) const override;
  const Vocab& vocab() const override { return vocab_; }
  std::size_t window() const override { return 16; }
  std::string family() const override { return "ngram"; }

  int order() const { return order_; }
  double smoothing() const { return smoothing_; }

  // Distribution over tokens given the (possibly empty) preceding tokens;
  // backs off order 3 -> 2 -> unigram -> uniform when a context is unusable
  // (out of range, masked, or unseen with zero smoothing).
  std::vector<double> distribution(const std::vector<int>& prev) const;

  // Serialization accessors.
  const std::vector<double>& unigram() const { return uni_; }
  const std::map<std::uint64_t, double>& bigram() const { return big_; }
  const std::map<std::uint64_t, double>& trigram() const { return tri_; }
  void set_counts(std::vector<double> uni, std::map<std::uint64_t, double> big,
                  std::map<std::uint64_t, double> tri);

 private:
  Vocab vocab_;
  int order_;
  double smoothing_;
  std::vector<double> uni_;                 // token -> count
  double total_ = 0;                        // sum of uni_
  std::map<std::uint64_t, double> big_;     // prev * V + tok -> count
  std::vector<double> big_ctx_;             // prev -> count
  std::map<std::uint64_t, double> tri_;     // (p2 * V + p1) * V + tok -> count
  std::map<std::uint64_t, double> tri_ctx_; // p2 * V + p1 -> count

  void rebuild_context_totals();
};

}  // namespace flowmine
