// Bidirectional attention encoder trained with masked-token prediction.
//
// Architecture: token embedding + learned positional embedding, N pre-norm
// encoder blocks (multi-head self-attention, then a 2-layer feed-forward with
// 4x expansion and exact GELU), a final layer norm, and an output projection
// tied to the token embeddings through a learned scalar gate:
//
//   logits = gamma * Xf * E^T + b_out
//
// gamma starts at 0, so an untrained model scores every token uniformly. All
// arithmetic is 64-bit; gradients are hand-derived and checkable against
// finite differences parameter by parameter.

#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "flowmine/seqmodel.hpp"

namespace flowmine {

using Mat = Eigen::MatrixXd;

// One training window, already masked: `tokens` contains MASK at each entry
// of `positions`, and `targets` holds the tokens that were there.
struct MaskedExample {
  std::vector<int> tokens;
  std::vector<std::size_t> positions;
  std::vector<int> targets;
};

// Named view of one parameter tensor and its gradient buffer.
struct ParamRef {
  std::string name;
  Mat* value = nullptr;
  Mat* grad = nullptr;
};

class AttentionScorer : public Scorer {
 public:
  AttentionScorer(Vocab vocab, const ModelConfig& config);

  std::vector<double> score(const std::vector<MessageId>& context,
                            std::size_t position) const override;
  const Vocab& vocab() const override { return vocab_; }
  std::size_t window() const override { return config_.window; }
  std::string family() const override { return "attention"; }

  const ModelConfig& config() const { return config_; }

  // Mean cross-entropy of the true tokens at masked positions. Forward only.
  double loss(const std::vector<MaskedExample>& batch) const;

  // Same value, but also fills every gradient buffer (overwriting).
  double loss_and_grad(const std::vector<MaskedExample>& batch);

  // One adaptive-moment update (beta1 0.9, beta2 0.999, eps 1e-8) from the
  // current gradient buffers.
  void adam_step(double learning_rate);

  // Stable-ordered access to all parameter tensors (used by the optimizer,
  // serialization, and the finite-difference gradient check).
  std::vector<ParamRef> parameters();

  // Distribution over tokens at `position` of a raw token window.
  std::vector<double> distribution(const std::vector<int>& tokens,
                                   std::size_t position) const;

  // Mean masked loss per epoch, recorded by train().
  std::vector<double> epoch_losses;

 private:
  struct LayerParams {
    Mat ln1_g, ln1_b;         // 1 x d
    Mat Wq, Wk, Wv, Wo;       // d x d
    Mat bq, bk, bv, bo;       // 1 x d
    Mat ln2_g, ln2_b;         // 1 x d
    Mat W1, b1, W2, b2;       // d x 4d, 1 x 4d, 4d x d, 1 x d
  };
  struct LayerGrads {
    Mat ln1_g, ln1_b, Wq, Wk, Wv, Wo, bq, bk, bv, bo, ln2_g, ln2_b, W1, b1,
        W2, b2;
  };

  Vocab vocab_;
  ModelConfig config_;

  Mat E_;  // V x d token embeddings (also the tied output projection)
  Mat P_;  // window x d positional embeddings
  std::vector<LayerParams> layers_;
  Mat lnf_g_, lnf_b_;  // 1 x d
  Mat out_gamma_;      // 1 x 1 scalar gate
  Mat out_b_;          // 1 x V

  // Gradient buffers, same shapes.
  Mat gE_, gP_;
  std::vector<LayerGrads> glayers_;
  Mat glnf_g_, glnf_b_, gout_gamma_, gout_b_;

  // Adam state.
  std::vector<Mat> adam_m_, adam_v_;
  std::uint64_t adam_t_ = 0;

  struct Cache;  // forward intermediates, defined in the implementation
  void forward(const std::vector<int>& tokens, Cache& cache) const;
  double backward(const MaskedExample& ex, const Cache& cache);
  void zero_grads();
};

}  // namespace flowmine
