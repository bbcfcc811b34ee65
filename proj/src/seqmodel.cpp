#include "flowmine/seqmodel.hpp"

#include <algorithm>
#include <cmath>

#include "flowmine/attention.hpp"
#include "flowmine/errors.hpp"
#include "flowmine/rng.hpp"
#include "flowmine/slicing.hpp"

namespace flowmine {

namespace {

// Causality-sliced, window-chunked token sequences for masked-LM training.
std::vector<std::vector<int>> training_windows(const std::vector<Trace>& traces,
                                               const Catalog& catalog,
                                               const Vocab& vocab,
                                               std::size_t window) {
  std::vector<std::vector<int>> out;
  for (const Trace& trace : traces) {
    for (const Trace& slice :
         causality_slice(trace, catalog, Predicate::kUnion)) {
      for (std::size_t off = 0; off < slice.size(); off += window) {
        std::size_t len = std::min(window, slice.size() - off);
        if (len < 2) continue;  // a single token teaches nothing
        std::vector<int> tokens;
        tokens.reserve(len);
        for (std::size_t i = 0; i < len; ++i) {
          tokens.push_back(vocab.token(slice.events[off + i]));
        }
        out.push_back(std::move(tokens));
      }
    }
  }
  return out;
}

MaskedExample make_example(const std::vector<int>& tokens, double mask_prob,
                           int mask_token, Rng& rng) {
  MaskedExample ex;
  ex.tokens = tokens;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (rng.uniform() < mask_prob) {
      ex.positions.push_back(i);
      ex.targets.push_back(tokens[i]);
      ex.tokens[i] = mask_token;
    }
  }
  if (ex.positions.empty()) {  // force at least one masked position
    std::size_t i = rng.below(tokens.size());
    ex.positions.push_back(i);
    ex.targets.push_back(tokens[i]);
    ex.tokens[i] = mask_token;
  }
  return ex;
}

}  // namespace

std::unique_ptr<AttentionScorer> train(const std::vector<Trace>& traces,
                                       const Catalog& catalog,
                                       const ModelConfig& config) {
  Vocab vocab(catalog);
  auto scorer = std::make_unique<AttentionScorer>(vocab, config);

  std::vector<std::vector<int>> windows =
      training_windows(traces, catalog, vocab, config.window);
  if (windows.empty()) {
    throw EmptyCorpus("train: no usable windows after slicing");
  }

  // Separate stream from the init draws inside the scorer constructor.
  Rng rng(config.seed ^ 0xa5a5c3c30f0f9696ull);
  std::vector<std::size_t> order(windows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::size_t batch_size = std::max<std::size_t>(1, config.batch);
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_ce = 0.0;
    std::size_t epoch_masked = 0;
    for (std::size_t at = 0; at < order.size(); at += batch_size) {
      std::vector<MaskedExample> batch;
      std::size_t hi = std::min(order.size(), at + batch_size);
      std::size_t batch_masked = 0;
      for (std::size_t k = at; k < hi; ++k) {
        batch.push_back(make_example(windows[order[k]], config.mask_prob,
                                     vocab.mask(), rng));
        batch_masked += batch.back().positions.size();
      }
      double mean_ce = scorer->loss_and_grad(batch);
      if (!std::isfinite(mean_ce)) throw NonFiniteLoss(epoch);
      scorer->adam_step(config.learning_rate);
      epoch_ce += mean_ce * static_cast<double>(batch_masked);
      epoch_masked += batch_masked;
    }
    double epoch_loss = epoch_ce / static_cast<double>(epoch_masked);
    if (!std::isfinite(epoch_loss)) throw NonFiniteLoss(epoch);
    scorer->epoch_losses.push_back(epoch_loss);
  }
  return scorer;
}

std::map<MessageId, double> next_score_multi(
    const Scorer& scorer, const std::vector<Trace>& traces, MessageId m1,
    const std::vector<MessageId>& candidates, std::size_t samples) {
  const Vocab& vocab = scorer.vocab();
  (void)vocab.token(m1);  // unknown ids fail loudly
  std::map<MessageId, std::size_t> token_of;
  for (MessageId c : candidates) {
    token_of[c] = static_cast<std::size_t>(vocab.token(c));
  }

  // All occurrences of m1 in corpus order.
  std::vector<std::pair<std::size_t, std::size_t>> occ;  // (trace, position)
  for (std::size_t t = 0; t < traces.size(); ++t) {
    for (std::size_t p = 0; p < traces[t].size(); ++p) {
      if (traces[t].events[p] == m1) occ.emplace_back(t, p);
    }
  }
  if (occ.empty()) throw NoOccurrence(m1);
  if (samples == 0) samples = 1;

  std::vector<std::size_t> picks;
  if (occ.size() <= samples) {
    for (std::size_t i = 0; i < occ.size(); ++i) picks.push_back(i);
  } else {
    for (std::size_t k = 0; k < samples; ++k) {
      picks.push_back(k * occ.size() / samples);  // deterministic stride
    }
  }

  std::size_t w = scorer.window();
  std::map<MessageId, double> sums;
  for (const auto& [c, tok] : token_of) {
    (void)tok;
    sums[c] = 0.0;
  }
  for (std::size_t pick : picks) {
    const Trace& tr = traces[occ[pick].first];
    std::size_t p = occ[pick].second;
    std::size_t n = tr.size();
    std::size_t q = p + 1;  // the position whose token we mask and read

    std::vector<MessageId> context;
    std::size_t pos_in_ctx;
    if (q == n) {
      // Occurrence at the end of the trace: append a masked slot.
      std::size_t a = (n + 1 > w) ? n + 1 - w : 0;
      context.assign(tr.events.begin() + static_cast<long>(a), tr.events.end());
      context.push_back(kMaskId);
      pos_in_ctx = context.size() - 1;
    } else {
      // Window centered on the masked position.
      std::size_t a = (q > w / 2) ? q - w / 2 : 0;
      std::size_t b = std::min(n, a + w);
      if (b - a < w && a > 0) a = (b > w) ? b - w : 0;
      context.assign(tr.events.begin() + static_cast<long>(a),
                     tr.events.begin() + static_cast<long>(b));
      pos_in_ctx = q - a;
    }
    std::vector<double> dist = scorer.score(context, pos_in_ctx);
    for (const auto& [c, tok] : token_of) {
      sums[c] += dist[tok];
    }
  }

  for (auto& [id, sum] : sums) {
    (void)id;
    sum /= static_cast<double>(picks.size());
  }
  return sums;
}

double next_score(const Scorer& scorer, const std::vector<Trace>& traces,
                  MessageId m1, MessageId m2, std::size_t samples) {
  return next_score_multi(scorer, traces, m1, {m2}, samples).at(m2);
}

}  // namespace flowmine
