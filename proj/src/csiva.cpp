#include "cwb/csiva.hpp"

#include <cmath>

#include "cwb/rng.hpp"

namespace cwb {

using ad::BoundParams;
using ad::Tape;
using ad::Tensor;

void ModelConfig::validate() const {
  if (embed_dim <= 0 || embed_dim % 2 != 0)
    throw ConfigError("model: embed_dim must be positive and even");
  if (heads <= 0 || embed_dim % heads != 0)
    throw ConfigError("model: embed_dim must be divisible by heads");
  if (hidden_dim <= 0) throw ConfigError("model: hidden_dim must be positive");
  if (enc_layers <= 0 || dec_layers <= 0)
    throw ConfigError("model: layer counts must be positive");
  if (value_mlp_hidden <= 0)
    throw ConfigError("model: value_mlp_hidden must be positive");
  if (max_nodes != 2)
    throw ConfigError("model: this architecture is fixed to 2 nodes");
}

namespace {

constexpr int kStartToken = 2;
constexpr int kPositions = 4;  // d^2 adjacency entries
constexpr double kMaskValue = -1e30;

struct ParamShape {
  std::string name;
  Index rows;
  Index cols;
  bool is_bias;
};

// Canonical parameter enumeration; initialization draw order and checkpoint
// payload order both follow it.
std::vector<ParamShape> enumerate_params(const ModelConfig& c) {
  const Index e = c.embed_dim, h = c.hidden_dim, half = c.embed_dim / 2;
  const Index vh = c.value_mlp_hidden, ff = 4 * c.embed_dim;
  std::vector<ParamShape> out;
  auto weight = [&](std::string name, Index r, Index cc) {
    out.push_back({std::move(name), r, cc, false});
  };
  auto bias = [&](std::string name, Index r, Index cc) {
    out.push_back({std::move(name), r, cc, true});
  };

  weight("embed.w1", 1, vh);
  bias("embed.b1", 1, vh);
  weight("embed.w2", vh, half);
  bias("embed.b2", 1, half);
  weight("embed.summary", 1, half);

  char prefix[32];
  for (int l = 0; l < c.enc_layers; ++l) {
    std::snprintf(prefix, sizeof(prefix), "enc.%02d.", l);
    std::string p = prefix;
    for (const char* att : {"attr.", "samp."}) {
      weight(p + att + "wq", e, e);
      weight(p + att + "wk", e, e);
      weight(p + att + "wv", e, e);
      weight(p + att + "wo", e, e);
      bias(p + att + "bo", 1, e);
    }
    for (const char* mlp : {"mlp1.", "mlp2."}) {
      weight(p + mlp + "w1", e, ff);
      bias(p + mlp + "b1", 1, ff);
      weight(p + mlp + "w2", ff, e);
      bias(p + mlp + "b2", 1, e);
    }
  }

  weight("summary.wq", e, e);
  weight("summary.wk", e, e);
  weight("summary.wv", e, e);
  weight("summary.wo", e, h);
  bias("summary.bo", 1, h);

  weight("dec.tok", 3, e);
  weight("dec.pos", kPositions, e);
  for (int l = 0; l < c.dec_layers; ++l) {
    std::snprintf(prefix, sizeof(prefix), "dec.%02d.", l);
    std::string p = prefix;
    weight(p + "self.wq", e, e);
    weight(p + "self.wk", e, e);
    weight(p + "self.wv", e, e);
    weight(p + "self.wo", e, e);
    bias(p + "self.bo", 1, e);
    weight(p + "cross.wq", e, e);
    weight(p + "cross.wk", h, e);
    weight(p + "cross.wv", h, e);
    weight(p + "cross.wo", e, e);
    bias(p + "cross.bo", 1, e);
    weight(p + "mlp.w1", e, ff);
    bias(p + "mlp.b1", 1, ff);
    weight(p + "mlp.w2", ff, e);
    bias(p + "mlp.b2", 1, e);
  }

  weight("head.w", e, 1);
  bias("head.b", 1, 1);
  return out;
}

Tensor param(const BoundParams& bound, const std::string& name) {
  auto it = bound.find(name);
  require(it != bound.end(), "missing parameter: " + name);
  return it->second;
}

// Two-layer MLP with GELU: x W1 + b1 -> gelu -> W2 + b2.
Tensor mlp_block(Tape& tape, const BoundParams& bound, const std::string& prefix,
                 Tensor x) {
  Tensor h = ad::gelu(ad::add(ad::matmul(x, param(bound, prefix + "w1")),
                              param(bound, prefix + "b1")));
  return ad::add(ad::matmul(h, param(bound, prefix + "w2")),
                 param(bound, prefix + "b2"));
}

// Standard multi-head self-attention over the rows of x, optionally with an
// additive score mask (already scaled; applied to every head).
Tensor row_attention(Tape& tape, Tensor q_src, Tensor kv_src, int heads,
                     const BoundParams& bound, const std::string& prefix,
                     const Matrix* mask) {
  const Index e = param(bound, prefix + "wo").value().rows();
  const Index hd = e / heads;
  Tensor q = ad::matmul(q_src, param(bound, prefix + "wq"));
  Tensor k = ad::matmul(kv_src, param(bound, prefix + "wk"));
  Tensor v = ad::matmul(kv_src, param(bound, prefix + "wv"));
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(hd));

  Tensor heads_out;
  for (int h = 0; h < heads; ++h) {
    Tensor qh = ad::slice(q, 0, h * hd, q.rows(), hd);
    Tensor kh = ad::slice(k, 0, h * hd, k.rows(), hd);
    Tensor vh = ad::slice(v, 0, h * hd, v.rows(), hd);
    Tensor scores = ad::scale(ad::matmul(qh, ad::transpose(kh)), inv_sqrt);
    if (mask != nullptr) scores = ad::add(scores, tape.constant(*mask));
    Tensor ctx = ad::matmul(ad::softmax(scores, 1), vh);
    heads_out = h == 0 ? ctx : ad::concat(heads_out, ctx, 1);
  }
  return ad::add(ad::matmul(heads_out, param(bound, prefix + "wo")),
                 param(bound, prefix + "bo"));
}

// Attention across the two node positions within every sample row. Queries,
// keys and values are per-node projections of the (n+1, E) blocks; for each
// sample row the softmax runs over the d=2 node tokens.
NodeStack attr_attention(Tape& tape, const NodeStack& x, int heads,
                         const BoundParams& bound, const std::string& prefix) {
  const Index e = param(bound, prefix + "wo").value().rows();
  const Index hd = e / heads;
  const Index n1 = x.node[0].rows();
  Tensor ones_hd = tape.constant(Matrix::Ones(hd, 1));
  Tensor ones_row = tape.constant(Matrix::Ones(1, hd));

  std::array<Tensor, 2> q, k, v;
  for (int node = 0; node < 2; ++node) {
    q[node] = ad::matmul(x.node[node], param(bound, prefix + "wq"));
    k[node] = ad::matmul(x.node[node], param(bound, prefix + "wk"));
    v[node] = ad::matmul(x.node[node], param(bound, prefix + "wv"));
  }

  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(hd));
  NodeStack out;
  for (int node = 0; node < 2; ++node) {
    Tensor heads_out;
    for (int h = 0; h < heads; ++h) {
      Tensor qh = ad::slice(q[node], 0, h * hd, n1, hd);
      std::array<Tensor, 2> score;
      std::array<Tensor, 2> vh;
      for (int other = 0; other < 2; ++other) {
        Tensor kh = ad::slice(k[other], 0, h * hd, n1, hd);
        vh[other] = ad::slice(v[other], 0, h * hd, n1, hd);
        // Rowwise q.k dot products: (n+1, 1).
        score[other] = ad::scale(ad::matmul(ad::mul(qh, kh), ones_hd), inv_sqrt);
      }
      Tensor weights = ad::softmax(ad::concat(score[0], score[1], 1), 1);
      Tensor w0 = ad::matmul(ad::slice(weights, 0, 0, n1, 1), ones_row);
      Tensor w1 = ad::matmul(ad::slice(weights, 0, 1, n1, 1), ones_row);
      Tensor ctx = ad::add(ad::mul(w0, vh[0]), ad::mul(w1, vh[1]));
      heads_out = h == 0 ? ctx : ad::concat(heads_out, ctx, 1);
    }
    out.node[node] = ad::add(ad::matmul(heads_out, param(bound, prefix + "wo")),
                             param(bound, prefix + "bo"));
  }
  return out;
}

Matrix node_identity_row(int node, Index half) {
  Matrix row(1, half);
  for (Index i = 0; i < half; ++i) {
    double rate = std::pow(10000.0, -static_cast<double>(i - (i % 2)) /
                                        static_cast<double>(half));
    double t = node * rate;
    row(0, i) = (i % 2 == 0) ? std::sin(t) : std::cos(t);
  }
  return row;
}

Matrix causal_mask(Index len) {
  Matrix mask = Matrix::Zero(len, len);
  for (Index i = 0; i < len; ++i)
    for (Index j = i + 1; j < len; ++j) mask(i, j) = kMaskValue;
  return mask;
}

// Shared decoder trunk: token+position embeddings for [start, bits...],
// dec_layers pre-norm blocks, final layer norm, scalar head per position.
Tensor decoder_logits_for_tokens(Tape& tape, const BoundParams& bound,
                                 const ModelConfig& config, Tensor summary,
                                 const std::vector<int>& token_ids) {
  const Index len = static_cast<Index>(token_ids.size());
  std::vector<int> positions(token_ids.size());
  for (std::size_t i = 0; i < token_ids.size(); ++i)
    positions[i] = static_cast<int>(i);

  Tensor x = ad::add(ad::embedding_lookup(param(bound, "dec.tok"), token_ids),
                     ad::embedding_lookup(param(bound, "dec.pos"), positions));
  Matrix mask = causal_mask(len);
  char prefix[32];
  for (int l = 0; l < config.dec_layers; ++l) {
    std::snprintf(prefix, sizeof(prefix), "dec.%02d.", l);
    std::string p = prefix;
    Tensor ln1 = ad::layer_norm(x, 1);
    x = ad::add(x, row_attention(tape, ln1, ln1, config.heads, bound, p + "self.",
                                 &mask));
    Tensor ln2 = ad::layer_norm(x, 1);
    x = ad::add(x, row_attention(tape, ln2, summary, config.heads, bound,
                                 p + "cross.", nullptr));
    Tensor ln3 = ad::layer_norm(x, 1);
    x = ad::add(x, mlp_block(tape, bound, p + "mlp.", ln3));
  }
  x = ad::layer_norm(x, 1);
  return ad::add(ad::matmul(x, param(bound, "head.w")), param(bound, "head.b"));
}

}  // namespace

ad::BoundParams bind(Tape& tape, const Parameters& params) {
  BoundParams bound;
  for (const auto& [name, value] : params.weights)
    bound[name] = tape.input(value);
  return bound;
}

Parameters Parameters::init(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Parameters p;
  p.config = config;
  RngStream rng(seed);
  for (const ParamShape& shape : enumerate_params(config)) {
    Matrix m(shape.rows, shape.cols);
    if (shape.is_bias) {
      m.setZero();
    } else {
      double limit = std::sqrt(6.0 / static_cast<double>(shape.rows + shape.cols));
      for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform(-limit, limit);
    }
    p.weights.emplace(shape.name, std::move(m));
  }
  return p;
}

NodeStack embed(Tape& tape, const BoundParams& bound, const ModelConfig& config,
                const Matrix& values) {
  require(values.rows() >= 1, "embed: dataset must have at least one sample");
  require(values.cols() == 2, "embed: expected an n x 2 value matrix");
  const Index n = values.rows();
  const Index half = config.embed_dim / 2;

  NodeStack out;
  Tensor ones = tape.constant(Matrix::Ones(n + 1, 1));
  for (int node = 0; node < 2; ++node) {
    Tensor col = tape.constant(values.col(node));
    Tensor hidden = ad::gelu(ad::add(ad::matmul(col, param(bound, "embed.w1")),
                                     param(bound, "embed.b1")));
    Tensor value_half = ad::add(ad::matmul(hidden, param(bound, "embed.w2")),
                                param(bound, "embed.b2"));
    // Learned summary-token value embedding occupies row n.
    value_half = ad::concat(value_half, param(bound, "embed.summary"), 0);
    Tensor identity =
        ad::matmul(ones, tape.constant(node_identity_row(node, half)));
    out.node[node] = ad::concat(value_half, identity, 1);
  }
  return out;
}

NodeStack encoder_forward(Tape& tape, const BoundParams& bound,
                          const ModelConfig& config, NodeStack x) {
  char prefix[32];
  for (int l = 0; l < config.enc_layers; ++l) {
    std::snprintf(prefix, sizeof(prefix), "enc.%02d.", l);
    std::string p = prefix;

    NodeStack ln;
    for (int node = 0; node < 2; ++node)
      ln.node[node] = ad::layer_norm(x.node[node], 1);
    NodeStack attr = attr_attention(tape, ln, config.heads, bound, p + "attr.");
    for (int node = 0; node < 2; ++node) {
      x.node[node] = ad::add(x.node[node], attr.node[node]);
      x.node[node] = ad::add(
          x.node[node],
          mlp_block(tape, bound, p + "mlp1.", ad::layer_norm(x.node[node], 1)));
    }

    for (int node = 0; node < 2; ++node) {
      Tensor ln2 = ad::layer_norm(x.node[node], 1);
      x.node[node] = ad::add(
          x.node[node],
          row_attention(tape, ln2, ln2, config.heads, bound, p + "samp.", nullptr));
      x.node[node] = ad::add(
          x.node[node],
          mlp_block(tape, bound, p + "mlp2.", ad::layer_norm(x.node[node], 1)));
    }
  }
  return x;
}

ad::Tensor summarize(Tape& tape, const BoundParams& bound,
                     const ModelConfig& config, const NodeStack& encoded) {
  const Index n1 = encoded.node[0].rows();
  require(n1 >= 2, "summarize: need at least one sample row plus the summary row");
  const Index n = n1 - 1;
  const Index e = config.embed_dim;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(e));

  Tensor summary;
  for (int node = 0; node < 2; ++node) {
    Tensor enc = ad::layer_norm(encoded.node[node], 1);
    Tensor query_row = ad::slice(enc, n, 0, 1, e);
    Tensor samples = ad::slice(enc, 0, 0, n, e);
    Tensor q = ad::matmul(query_row, param(bound, "summary.wq"));
    Tensor k = ad::matmul(samples, param(bound, "summary.wk"));
    Tensor v = ad::matmul(samples, param(bound, "summary.wv"));
    Tensor weights = ad::softmax(ad::scale(ad::matmul(q, ad::transpose(k)), inv_sqrt), 1);
    Tensor ctx = ad::matmul(weights, v);  // (1, E)
    Tensor s = ad::add(ad::matmul(ctx, param(bound, "summary.wo")),
                       param(bound, "summary.bo"));
    summary = node == 0 ? s : ad::concat(summary, s, 0);
  }
  return summary;  // (2, H)
}

ad::Tensor decode_nll(Tape& tape, const BoundParams& bound,
                      const ModelConfig& config, Tensor summary,
                      const std::array<int, 4>& target) {
  for (int t : target)
    require(t == 0 || t == 1, "decode_nll: target entries must be binary");
  // Teacher forcing: position l sees the start token then target bits < l.
  std::vector<int> tokens = {kStartToken, target[0], target[1], target[2]};
  Tensor logits = decoder_logits_for_tokens(tape, bound, config, summary, tokens);
  return ad::bce_with_logits(
      logits, {static_cast<double>(target[0]), static_cast<double>(target[1]),
               static_cast<double>(target[2]), static_cast<double>(target[3])});
}

ad::Tensor decode_logits(Tape& tape, const BoundParams& bound,
                         const ModelConfig& config, Tensor summary,
                         const std::vector<int>& prefix_bits) {
  require(prefix_bits.size() < kPositions,
          "decode_logits: prefix must leave at least one position to decode");
  std::vector<int> tokens = {kStartToken};
  for (int b : prefix_bits) {
    require(b == 0 || b == 1, "decode_logits: prefix bits must be binary");
    tokens.push_back(b);
  }
  return decoder_logits_for_tokens(tape, bound, config, summary, tokens);
}

namespace {

Tensor forward_nll(Tape& tape, const Parameters& params, const Dataset& d,
                   const BoundParams& bound) {
  NodeStack x = embed(tape, bound, params.config, d.values);
  NodeStack enc = encoder_forward(tape, bound, params.config, std::move(x));
  Tensor s = summarize(tape, bound, params.config, enc);
  return decode_nll(tape, bound, params.config, s, adjacency_of(d.label));
}

}  // namespace

double dataset_nll(const Parameters& params, const Dataset& d) {
  Tape tape;
  BoundParams bound = bind(tape, params);
  return forward_nll(tape, params, d, bound).value()(0, 0);
}

GradResult nll_and_gradients(const Parameters& params, const Dataset& d) {
  Tape tape;
  BoundParams bound = bind(tape, params);
  Tensor loss = forward_nll(tape, params, d, bound);
  tape.backward(loss);
  GradResult out;
  out.nll = loss.value()(0, 0);
  for (const auto& [name, tensor] : bound) out.grads[name] = tape.grad(tensor);
  return out;
}

AdjacencyPrediction predict(const Parameters& params, const Dataset& d) {
  AdjacencyPrediction pred;
  // The encoder pass does not depend on decoded bits; run it once and share
  // the summary across the four decoder invocations.
  Tape tape;
  BoundParams bound = bind(tape, params);
  NodeStack x = embed(tape, bound, params.config, d.values);
  NodeStack enc = encoder_forward(tape, bound, params.config, std::move(x));
  Tensor s = summarize(tape, bound, params.config, enc);
  std::vector<int> bits;
  for (int l = 0; l < kPositions; ++l) {
    Tensor logits = decode_logits(tape, bound, params.config, s, bits);
    double z = logits.value()(l, 0);
    double p = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z))
                        : std::exp(z) / (1.0 + std::exp(z));
    pred.probs[static_cast<std::size_t>(l)] = p;
    int bit = p > 0.5 ? 1 : 0;
    pred.adjacency[static_cast<std::size_t>(l)] = bit;
    bits.push_back(bit);
  }
  pred.graph = graph_label_from_adjacency(pred.adjacency);
  return pred;
}

}  // namespace cwb
