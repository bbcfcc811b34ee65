#include <algorithm>

#include "flowmine/errors.hpp"
#include "flowmine/seqmodel.hpp"

namespace flowmine {

NgramScorer::NgramScorer(Vocab vocab, int order, double smoothing)
    : vocab_(std::move(vocab)), order_(order), smoothing_(smoothing) {
  if (order_ != 2 && order_ != 3) {
    throw InvariantViolation("ngram: order must be 2 or 3");
  }
  if (smoothing_ < 0.0) {
    throw InvariantViolation("ngram: smoothing must be nonnegative");
  }
  uni_.assign(vocab_.size(), 0.0);
  big_ctx_.assign(vocab_.size(), 0.0);
}

void NgramScorer::count_trace(const std::vector<int>& tokens) {
  std::size_t v = vocab_.size();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    int t = tokens[i];
    uni_[static_cast<std::size_t>(t)] += 1.0;
    total_ += 1.0;
    if (i >= 1) {
      std::uint64_t prev = static_cast<std::uint64_t>(tokens[i - 1]);
      big_[prev * v + static_cast<std::uint64_t>(t)] += 1.0;
      big_ctx_[static_cast<std::size_t>(prev)] += 1.0;
    }
    if (order_ == 3 && i >= 2) {
      std::uint64_t ctx = static_cast<std::uint64_t>(tokens[i - 2]) * v +
                          static_cast<std::uint64_t>(tokens[i - 1]);
      tri_[ctx * v + static_cast<std::uint64_t>(t)] += 1.0;
      tri_ctx_[ctx] += 1.0;
    }
  }
}

std::vector<double> NgramScorer::distribution(
    const std::vector<int>& prev) const {
  std::size_t v = vocab_.size();
  int mask = vocab_.mask();
  auto usable = [&](int t) { return t >= 1 && t < mask; };  // a catalog token

  // Trigram context (two usable preceding tokens), when the order allows.
  if (order_ == 3 && prev.size() >= 2) {
    int p2 = prev[prev.size() - 2], p1 = prev[prev.size() - 1];
    if (usable(p2) && usable(p1)) {
      std::uint64_t ctx =
          static_cast<std::uint64_t>(p2) * v + static_cast<std::uint64_t>(p1);
      auto cit = tri_ctx_.find(ctx);
      double ctx_count = cit == tri_ctx_.end() ? 0.0 : cit->second;
      if (ctx_count > 0.0 || smoothing_ > 0.0) {
        std::vector<double> dist(v, 0.0);
        double denom = ctx_count + smoothing_ * static_cast<double>(v);
        for (std::size_t t = 0; t < v; ++t) {
          auto it = tri_.find(ctx * v + t);
          double c = it == tri_.end() ? 0.0 : it->second;
          dist[t] = (c + smoothing_) / denom;
        }
        return dist;
      }
    }
  }

  // Bigram context.
  if (!prev.empty()) {
    int p1 = prev.back();
    if (usable(p1)) {
      double ctx_count = big_ctx_[static_cast<std::size_t>(p1)];
      if (ctx_count > 0.0 || smoothing_ > 0.0) {
        std::vector<double> dist(v, 0.0);
        double denom = ctx_count + smoothing_ * static_cast<double>(v);
        std::uint64_t base = static_cast<std::uint64_t>(p1) * v;
        for (std::size_t t = 0; t < v; ++t) {
          auto it = big_.find(base + t);
          double c = it == big_.end() ? 0.0 : it->second;
          dist[t] = (c + smoothing_) / denom;
        }
        return dist;
      }
    }
  }

  // Unigram, then uniform.
  if (total_ > 0.0 || smoothing_ > 0.0) {
    std::vector<double> dist(v, 0.0);
    double denom = total_ + smoothing_ * static_cast<double>(v);
    for (std::size_t t = 0; t < v; ++t) {
      dist[t] = (uni_[t] + smoothing_) / denom;
    }
    return dist;
  }
  return std::vector<double>(v, 1.0 / static_cast<double>(v));
}

std::vector<double> NgramScorer::score(const std::vector<MessageId>& context,
                                       std::size_t position) const {
  if (position >= context.size()) {
    throw InvariantViolation("score: position out of range");
  }
  std::vector<int> prev;
  std::size_t take = std::min<std::size_t>(position, 2);
  for (std::size_t i = position - take; i < position; ++i) {
    prev.push_back(context[i] == kMaskId ? vocab_.mask()
                                         : vocab_.token(context[i]));
  }
  // Validate the rest of the context so bad ids fail loudly here too.
  for (std::size_t i = position; i < context.size(); ++i) {
    if (context[i] != kMaskId) (void)vocab_.token(context[i]);
  }
  return distribution(prev);
}

void NgramScorer::set_counts(std::vector<double> uni,
                             std::map<std::uint64_t, double> big,
                             std::map<std::uint64_t, double> tri) {
  if (uni.size() != vocab_.size()) {
    throw CorruptFile("ngram unigram table size mismatch");
  }
  uni_ = std::move(uni);
  big_ = std::move(big);
  tri_ = std::move(tri);
  rebuild_context_totals();
}

void NgramScorer::rebuild_context_totals() {
  std::size_t v = vocab_.size();
  total_ = 0.0;
  for (double c : uni_) total_ += c;
  big_ctx_.assign(v, 0.0);
  for (const auto& [key, c] : big_) {
    big_ctx_[static_cast<std::size_t>(key / v)] += c;
  }
  tri_ctx_.clear();
  for (const auto& [key, c] : tri_) {
    tri_ctx_[key / v] += c;
  }
}

std::unique_ptr<NgramScorer> train_ngram(const std::vector<Trace>& traces,
                                         const Catalog& catalog, int order,
                                         double smoothing) {
  std::size_t events = 0;
  for (const auto& t : traces) events += t.size();
  if (events == 0) throw EmptyCorpus("train_ngram: no events in corpus");

  Vocab vocab(catalog);
  auto scorer = std::make_unique<NgramScorer>(vocab, order, smoothing);
  std::vector<int> tokens;
  for (const auto& trace : traces) {
    tokens.clear();
    tokens.reserve(trace.size());
    for (MessageId id : trace.events) tokens.push_back(vocab.token(id));
    scorer->count_trace(tokens);
  }
  return scorer;
}

}  // namespace flowmine
