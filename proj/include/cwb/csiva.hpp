#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "cwb/common.hpp"
#include "cwb/scm.hpp"
#include "cwb/tensor.hpp"

namespace cwb {

// Dataset-to-graph transformer: embeddings over (sample, node) scalars, an
// encoder alternating attention across the two node positions and across
// sample rows, a per-node attention summary, and an autoregressive decoder
// emitting one Bernoulli logit per adjacency entry.
struct ModelConfig {
  int embed_dim = 32;        // E; even and divisible by heads
  int hidden_dim = 32;       // H: width of the encoder summary
  int enc_layers = 2;
  int dec_layers = 2;
  int heads = 4;
  int value_mlp_hidden = 16;
  int max_nodes = 2;         // d; the architecture here is fixed to 2
  bool three_class = false;  // adds the Empty graph to the label set

  void validate() const;
};

struct Parameters {
  ModelConfig config;
  ad::ParamMap weights;

  // Xavier-uniform weights, zero biases; draw order follows the canonical
  // parameter enumeration, so (config, seed) pins every byte.
  static Parameters init(const ModelConfig& config, std::uint64_t seed);
};

struct AdjacencyPrediction {
  std::array<double, 4> probs{};     // row-major (A00, A01, A10, A11)
  std::array<int, 4> adjacency{};    // probs thresholded at 0.5
  std::optional<GraphLabel> graph;   // nullopt = invalid (diagonal/bidirected)
};

// Logical (n+1, d, E) activation stack, stored as one (n+1, E) tensor per
// node position. Row n is the summary token.
struct NodeStack {
  std::array<ad::Tensor, 2> node;
};

ad::BoundParams bind(ad::Tape& tape, const Parameters& params);

// Value-MLP halves plus sinusoidal node-identity halves, with the learned
// summary-token value row appended at row n.
NodeStack embed(ad::Tape& tape, const ad::BoundParams& bound,
                const ModelConfig& config, const Matrix& values);

// enc_layers blocks of: attention across the d node positions per sample
// row, then attention across the n+1 sample rows per node, each sublayer
// pre-norm with residual and followed by a pre-norm MLP sublayer.
NodeStack encoder_forward(ad::Tape& tape, const ad::BoundParams& bound,
                          const ModelConfig& config, NodeStack x);

// Single-head attention per node: the summary row queries, sample rows
// provide keys/values; then a linear map E -> H. Output (d, H).
ad::Tensor summarize(ad::Tape& tape, const ad::BoundParams& bound,
                     const ModelConfig& config, const NodeStack& encoded);

// Teacher-forced decoder loss: autoregressive transformer over the d^2
// adjacency positions (causal self-attention + cross-attention into the
// summary); binary cross-entropy summed over positions.
ad::Tensor decode_nll(ad::Tape& tape, const ad::BoundParams& bound,
                      const ModelConfig& config, ad::Tensor summary,
                      const std::array<int, 4>& target);

// Decoder logits for an arbitrary prefix of already-decoded bits (length
// 0..3); returns the logit column for all prefix positions plus the next.
ad::Tensor decode_logits(ad::Tape& tape, const ad::BoundParams& bound,
                         const ModelConfig& config, ad::Tensor summary,
                         const std::vector<int>& prefix_bits);

// Forward-only mean NLL of one dataset/graph pair.
double dataset_nll(const Parameters& params, const Dataset& d);

struct GradResult {
  double nll = 0.0;
  ad::ParamMap grads;
};

GradResult nll_and_gradients(const Parameters& params, const Dataset& d);

// Greedy autoregressive decoding: threshold each Bernoulli at 0.5 and feed
// the bit back. No acyclicity constraint is enforced.
AdjacencyPrediction predict(const Parameters& params, const Dataset& d);

}  // namespace cwb
