#include "flowmine/attention.hpp"

#include <cmath>
#include <limits>

#include "flowmine/errors.hpp"
#include "flowmine/rng.hpp"

namespace flowmine {

namespace {

constexpr double kLnEps = 1e-5;
constexpr double kInitScale = 0.02;

// Row-wise layer norm with the statistics needed for the backward pass.
struct LnCache {
  Mat xhat;             // normalized input
  Eigen::VectorXd istd; // 1/sqrt(var + eps) per row
};

Mat layer_norm(const Mat& x, const Mat& g, const Mat& b, LnCache& cache) {
  Eigen::Index T = x.rows(), d = x.cols();
  cache.xhat.resize(T, d);
  cache.istd.resize(T);
  Mat y(T, d);
  for (Eigen::Index i = 0; i < T; ++i) {
    double mu = x.row(i).mean();
    double var = (x.row(i).array() - mu).square().mean();
    double istd = 1.0 / std::sqrt(var + kLnEps);
    cache.istd(i) = istd;
    cache.xhat.row(i) = (x.row(i).array() - mu) * istd;
    y.row(i) =
        cache.xhat.row(i).cwiseProduct(g.row(0)) + b.row(0);
  }
  return y;
}

// dy -> dx, accumulating parameter gradients.
Mat layer_norm_backward(const Mat& dy, const Mat& g, const LnCache& cache,
                        Mat& dg, Mat& db) {
  Eigen::Index T = dy.rows(), d = dy.cols();
  Mat dx(T, d);
  for (Eigen::Index i = 0; i < T; ++i) {
    auto xhat = cache.xhat.row(i);
    auto dxhat = dy.row(i).cwiseProduct(g.row(0));
    dg.row(0) += dy.row(i).cwiseProduct(xhat);
    db.row(0) += dy.row(i);
    double m1 = dxhat.mean();
    double m2 = dxhat.cwiseProduct(xhat).mean();
    dx.row(i) =
        (dxhat.array() - m1 - xhat.array() * m2) * cache.istd(i);
  }
  return dx;
}

Mat softmax_rows(const Mat& s) {
  Mat p(s.rows(), s.cols());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    double mx = s.row(i).maxCoeff();
    Eigen::ArrayXd e = (s.row(i).array() - mx).exp();
    p.row(i) = e / e.sum();
  }
  return p;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

double gelu_grad(double x) {
  constexpr double inv_sqrt2 = 0.7071067811865475244;
  constexpr double inv_sqrt2pi = 0.3989422804014326779;  // 1/sqrt(2*pi)
  double cdf = 0.5 * (1.0 + std::erf(x * inv_sqrt2));
  double pdf = inv_sqrt2pi * std::exp(-0.5 * x * x);
  return cdf + x * pdf;
}

}  // namespace

// Everything the backward pass needs from one forward evaluation.
struct AttentionScorer::Cache {
  struct Layer {
    LnCache ln1, ln2;
    Mat A, Q, K, V;              // post-ln1 input and projections
    std::vector<Mat> attn;       // per-head softmax weights (T x T)
    Mat C;                       // concatenated head outputs, pre-Wo
    Mat X1;                      // after attention residual
    Mat B, Hpre, Hact;           // feed-forward intermediates
  };
  std::vector<int> tokens;
  Mat X0;                        // embedded input
  std::vector<Layer> layers;
  Mat Xlast;                     // input to the final layer norm
  LnCache lnf;
  Mat Xf;                        // final normalized states
  Mat G;                         // Xf * E^T (pre-gate logits share)
  Mat logits;                    // gamma * G + b_out
  Mat probs;                     // row-softmaxed logits
};

AttentionScorer::AttentionScorer(Vocab vocab, const ModelConfig& config)
    : vocab_(std::move(vocab)), config_(config) {
  if (config_.dim == 0 || config_.heads == 0 || config_.layers == 0 ||
      config_.window == 0) {
    throw InvariantViolation("model config: sizes must be positive");
  }
  if (config_.dim % config_.heads != 0) {
    throw InvariantViolation("model config: dim must be divisible by heads");
  }
  if (!(config_.mask_prob > 0.0 && config_.mask_prob < 1.0)) {
    throw InvariantViolation("model config: mask_prob must be in (0, 1)");
  }

  auto V = static_cast<Eigen::Index>(vocab_.size());
  auto d = static_cast<Eigen::Index>(config_.dim);
  auto W = static_cast<Eigen::Index>(config_.window);
  auto h = static_cast<Eigen::Index>(4 * config_.dim);

  Rng rng(config_.seed);
  auto gaussian = [&](Eigen::Index r, Eigen::Index c) {
    Mat m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
      for (Eigen::Index j = 0; j < c; ++j) {
        m(i, j) = rng.normal() * kInitScale;
      }
    }
    return m;
  };

  E_ = gaussian(V, d);
  P_ = gaussian(W, d);
  layers_.resize(config_.layers);
  for (auto& l : layers_) {
    l.ln1_g = Mat::Ones(1, d);
    l.ln1_b = Mat::Zero(1, d);
    l.Wq = gaussian(d, d);
    l.Wk = gaussian(d, d);
    l.Wv = gaussian(d, d);
    l.Wo = gaussian(d, d);
    l.bq = Mat::Zero(1, d);
    l.bk = Mat::Zero(1, d);
    l.bv = Mat::Zero(1, d);
    l.bo = Mat::Zero(1, d);
    l.ln2_g = Mat::Ones(1, d);
    l.ln2_b = Mat::Zero(1, d);
    l.W1 = gaussian(d, h);
    l.b1 = Mat::Zero(1, h);
    l.W2 = gaussian(h, d);
    l.b2 = Mat::Zero(1, d);
  }
  lnf_g_ = Mat::Ones(1, d);
  lnf_b_ = Mat::Zero(1, d);
  out_gamma_ = Mat::Zero(1, 1);  // zero gate: untrained model scores uniform
  out_b_ = Mat::Zero(1, V);

  gE_ = Mat::Zero(V, d);
  gP_ = Mat::Zero(W, d);
  glayers_.resize(config_.layers);
  for (auto& g : glayers_) {
    g.ln1_g = Mat::Zero(1, d);
    g.ln1_b = Mat::Zero(1, d);
    g.Wq = Mat::Zero(d, d);
    g.Wk = Mat::Zero(d, d);
    g.Wv = Mat::Zero(d, d);
    g.Wo = Mat::Zero(d, d);
    g.bq = Mat::Zero(1, d);
    g.bk = Mat::Zero(1, d);
    g.bv = Mat::Zero(1, d);
    g.bo = Mat::Zero(1, d);
    g.ln2_g = Mat::Zero(1, d);
    g.ln2_b = Mat::Zero(1, d);
    g.W1 = Mat::Zero(d, h);
    g.b1 = Mat::Zero(1, h);
    g.W2 = Mat::Zero(h, d);
    g.b2 = Mat::Zero(1, d);
  }
  glnf_g_ = Mat::Zero(1, d);
  glnf_b_ = Mat::Zero(1, d);
  gout_gamma_ = Mat::Zero(1, 1);
  gout_b_ = Mat::Zero(1, V);
}

void AttentionScorer::forward(const std::vector<int>& tokens,
                              Cache& cache) const {
  auto T = static_cast<Eigen::Index>(tokens.size());
  auto d = static_cast<Eigen::Index>(config_.dim);
  auto H = static_cast<Eigen::Index>(config_.heads);
  Eigen::Index dh = d / H;
  double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  if (tokens.empty()) {
    throw InvariantViolation("forward: empty token window");
  }
  if (tokens.size() > config_.window) {
    throw InvariantViolation("forward: window longer than model window");
  }

  cache.tokens = tokens;
  cache.X0.resize(T, d);
  for (Eigen::Index t = 0; t < T; ++t) {
    int tok = tokens[static_cast<std::size_t>(t)];
    if (tok < 0 || tok >= static_cast<int>(vocab_.size())) {
      throw InvariantViolation("forward: token out of range");
    }
    cache.X0.row(t) = E_.row(tok) + P_.row(t);
  }

  cache.layers.resize(layers_.size());
  Mat X = cache.X0;
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const LayerParams& p = layers_[li];
    auto& c = cache.layers[li];

    c.A = layer_norm(X, p.ln1_g, p.ln1_b, c.ln1);
    c.Q = (c.A * p.Wq).rowwise() + p.bq.row(0);
    c.K = (c.A * p.Wk).rowwise() + p.bk.row(0);
    c.V = (c.A * p.Wv).rowwise() + p.bv.row(0);

    c.attn.resize(static_cast<std::size_t>(H));
    c.C.resize(T, d);
    for (Eigen::Index hh = 0; hh < H; ++hh) {
      auto Qh = c.Q.middleCols(hh * dh, dh);
      auto Kh = c.K.middleCols(hh * dh, dh);
      auto Vh = c.V.middleCols(hh * dh, dh);
      Mat S = (Qh * Kh.transpose()) * scale;
      Mat W = softmax_rows(S);
      c.attn[static_cast<std::size_t>(hh)] = W;
      c.C.middleCols(hh * dh, dh) = W * Vh;
    }
    Mat O = (c.C * p.Wo).rowwise() + p.bo.row(0);
    c.X1 = X + O;

    c.B = layer_norm(c.X1, p.ln2_g, p.ln2_b, c.ln2);
    c.Hpre = (c.B * p.W1).rowwise() + p.b1.row(0);
    c.Hact = c.Hpre.unaryExpr([](double x) { return gelu(x); });
    Mat F = (c.Hact * p.W2).rowwise() + p.b2.row(0);
    X = c.X1 + F;
  }

  cache.Xlast = X;
  cache.Xf = layer_norm(X, lnf_g_, lnf_b_, cache.lnf);
  cache.G = cache.Xf * E_.transpose();
  cache.logits = (out_gamma_(0, 0) * cache.G).rowwise() + out_b_.row(0);
  cache.probs = softmax_rows(cache.logits);
}

double AttentionScorer::backward(const MaskedExample& ex, const Cache& cache) {
  auto T = static_cast<Eigen::Index>(ex.tokens.size());
  auto d = static_cast<Eigen::Index>(config_.dim);
  auto H = static_cast<Eigen::Index>(config_.heads);
  Eigen::Index dh = d / H;
  double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  // Cross-entropy at masked positions; gradient of the SUM (caller rescales).
  double ce = 0.0;
  Mat dlogits = Mat::Zero(T, cache.probs.cols());
  for (std::size_t k = 0; k < ex.positions.size(); ++k) {
    auto pos = static_cast<Eigen::Index>(ex.positions[k]);
    int target = ex.targets[k];
    double p = cache.probs(pos, target);
    ce -= std::log(std::max(p, std::numeric_limits<double>::min()));
    dlogits.row(pos) += cache.probs.row(pos);
    dlogits(pos, target) -= 1.0;
  }

  gout_b_.row(0) += dlogits.colwise().sum();
  gout_gamma_(0, 0) += (dlogits.cwiseProduct(cache.G)).sum();
  double gamma = out_gamma_(0, 0);
  Mat dXf = gamma * (dlogits * E_);
  gE_ += gamma * (dlogits.transpose() * cache.Xf);

  Mat dX = layer_norm_backward(dXf, lnf_g_, cache.lnf, glnf_g_, glnf_b_);

  for (std::size_t li = layers_.size(); li-- > 0;) {
    const LayerParams& p = layers_[li];
    LayerGrads& g = glayers_[li];
    const auto& c = cache.layers[li];

    // X2 = X1 + F, F = gelu(B W1 + b1) W2 + b2
    const Mat& dX2 = dX;
    Mat dF = dX2;
    g.b2.row(0) += dF.colwise().sum();
    g.W2 += c.Hact.transpose() * dF;
    Mat dHact = dF * p.W2.transpose();
    Mat dHpre =
        dHact.cwiseProduct(c.Hpre.unaryExpr([](double x) { return gelu_grad(x); }));
    g.b1.row(0) += dHpre.colwise().sum();
    g.W1 += c.B.transpose() * dHpre;
    Mat dB = dHpre * p.W1.transpose();
    Mat dX1 = dX2 + layer_norm_backward(dB, p.ln2_g, c.ln2, g.ln2_g, g.ln2_b);

    // X1 = X + O, O = C Wo + bo
    Mat dO = dX1;
    g.bo.row(0) += dO.colwise().sum();
    g.Wo += c.C.transpose() * dO;
    Mat dC = dO * p.Wo.transpose();

    Mat dQ = Mat::Zero(T, d), dK = Mat::Zero(T, d), dV = Mat::Zero(T, d);
    for (Eigen::Index hh = 0; hh < H; ++hh) {
      auto Vh = c.V.middleCols(hh * dh, dh);
      auto Qh = c.Q.middleCols(hh * dh, dh);
      auto Kh = c.K.middleCols(hh * dh, dh);
      const Mat& W = c.attn[static_cast<std::size_t>(hh)];
      Mat dCh = dC.middleCols(hh * dh, dh);
      Mat dW = dCh * Vh.transpose();
      dV.middleCols(hh * dh, dh) = W.transpose() * dCh;
      // Softmax backward, row-wise: ds = w .* (dw - (dw . w))
      Mat dS(T, T);
      for (Eigen::Index i = 0; i < T; ++i) {
        double dot = W.row(i).dot(dW.row(i));
        dS.row(i) =
            W.row(i).array() * (dW.row(i).array() - dot);
      }
      dS *= scale;
      dQ.middleCols(hh * dh, dh) = dS * Kh;
      dK.middleCols(hh * dh, dh) = dS.transpose() * Qh;
    }

    g.bq.row(0) += dQ.colwise().sum();
    g.bk.row(0) += dK.colwise().sum();
    g.bv.row(0) += dV.colwise().sum();
    g.Wq += c.A.transpose() * dQ;
    g.Wk += c.A.transpose() * dK;
    g.Wv += c.A.transpose() * dV;
    Mat dA = dQ * p.Wq.transpose() + dK * p.Wk.transpose() +
             dV * p.Wv.transpose();

    dX = dX1 + layer_norm_backward(dA, p.ln1_g, c.ln1, g.ln1_g, g.ln1_b);
  }

  for (Eigen::Index t = 0; t < T; ++t) {
    int tok = ex.tokens[static_cast<std::size_t>(t)];
    gE_.row(tok) += dX.row(t);
    gP_.row(t) += dX.row(t);
  }
  return ce;
}

void AttentionScorer::zero_grads() {
  for (ParamRef& ref : parameters()) ref.grad->setZero();
}

double AttentionScorer::loss(const std::vector<MaskedExample>& batch) const {
  double ce = 0.0;
  std::size_t masked = 0;
  Cache cache;
  for (const auto& ex : batch) {
    forward(ex.tokens, cache);
    for (std::size_t k = 0; k < ex.positions.size(); ++k) {
      double p = cache.probs(static_cast<Eigen::Index>(ex.positions[k]),
                             ex.targets[k]);
      ce -= std::log(std::max(p, std::numeric_limits<double>::min()));
      ++masked;
    }
  }
  if (masked == 0) {
    throw InvariantViolation("loss: batch has no masked positions");
  }
  return ce / static_cast<double>(masked);
}

double AttentionScorer::loss_and_grad(const std::vector<MaskedExample>& batch) {
  zero_grads();
  double ce = 0.0;
  std::size_t masked = 0;
  Cache cache;
  for (const auto& ex : batch) {
    forward(ex.tokens, cache);
    ce += backward(ex, cache);
    masked += ex.positions.size();
  }
  if (masked == 0) {
    throw InvariantViolation("loss_and_grad: batch has no masked positions");
  }
  double inv = 1.0 / static_cast<double>(masked);
  for (ParamRef& ref : parameters()) *ref.grad *= inv;
  return ce * inv;
}

void AttentionScorer::adam_step(double learning_rate) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  std::vector<ParamRef> refs = parameters();
  if (adam_m_.empty()) {
    for (const ParamRef& ref : refs) {
      adam_m_.push_back(Mat::Zero(ref.value->rows(), ref.value->cols()));
      adam_v_.push_back(Mat::Zero(ref.value->rows(), ref.value->cols()));
    }
  }
  ++adam_t_;
  double c1 = 1.0 - std::pow(b1, static_cast<double>(adam_t_));
  double c2 = 1.0 - std::pow(b2, static_cast<double>(adam_t_));
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const Mat& g = *refs[i].grad;
    adam_m_[i] = b1 * adam_m_[i] + (1.0 - b1) * g;
    adam_v_[i] = b2 * adam_v_[i] + (1.0 - b2) * g.cwiseProduct(g);
    Mat mhat = adam_m_[i] / c1;
    Mat vhat = adam_v_[i] / c2;
    *refs[i].value -=
        learning_rate *
        mhat.cwiseQuotient(vhat.cwiseSqrt() + Mat::Constant(
                                                  vhat.rows(), vhat.cols(), eps));
  }
}

std::vector<ParamRef> AttentionScorer::parameters() {
  std::vector<ParamRef> refs;
  refs.push_back({"E", &E_, &gE_});
  refs.push_back({"P", &P_, &gP_});
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    std::string p = "l" + std::to_string(i) + ".";
    LayerParams& l = layers_[i];
    LayerGrads& g = glayers_[i];
    refs.push_back({p + "ln1_g", &l.ln1_g, &g.ln1_g});
    refs.push_back({p + "ln1_b", &l.ln1_b, &g.ln1_b});
    refs.push_back({p + "Wq", &l.Wq, &g.Wq});
    refs.push_back({p + "bq", &l.bq, &g.bq});
    refs.push_back({p + "Wk", &l.Wk, &g.Wk});
    refs.push_back({p + "bk", &l.bk, &g.bk});
    refs.push_back({p + "Wv", &l.Wv, &g.Wv});
    refs.push_back({p + "bv", &l.bv, &g.bv});
    refs.push_back({p + "Wo", &l.Wo, &g.Wo});
    refs.push_back({p + "bo", &l.bo, &g.bo});
    refs.push_back({p + "ln2_g", &l.ln2_g, &g.ln2_g});
    refs.push_back({p + "ln2_b", &l.ln2_b, &g.ln2_b});
    refs.push_back({p + "W1", &l.W1, &g.W1});
    refs.push_back({p + "b1", &l.b1, &g.b1});
    refs.push_back({p + "W2", &l.W2, &g.W2});
    refs.push_back({p + "b2", &l.b2, &g.b2});
  }
  refs.push_back({"lnf_g", &lnf_g_, &glnf_g_});
  refs.push_back({"lnf_b", &lnf_b_, &glnf_b_});
  refs.push_back({"out_gamma", &out_gamma_, &gout_gamma_});
  refs.push_back({"out_b", &out_b_, &gout_b_});
  return refs;
}

std::vector<double> AttentionScorer::distribution(
    const std::vector<int>& tokens, std::size_t position) const {
  if (position >= tokens.size()) {
    throw InvariantViolation("distribution: position out of range");
  }
  std::vector<int> masked = tokens;
  masked[position] = vocab_.mask();
  Cache cache;
  forward(masked, cache);
  Eigen::RowVectorXd row = cache.probs.row(static_cast<Eigen::Index>(position));
  return std::vector<double>(row.data(), row.data() + row.size());
}

std::vector<double> AttentionScorer::score(
    const std::vector<MessageId>& context, std::size_t position) const {
  if (position >= context.size()) {
    throw InvariantViolation("score: position out of range");
  }
  std::vector<int> tokens;
  tokens.reserve(context.size());
  for (MessageId id : context) {
    tokens.push_back(id == kMaskId ? vocab_.mask() : vocab_.token(id));
  }
  return distribution(tokens, position);
}

}  // namespace flowmine
