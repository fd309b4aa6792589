#pragma once

#include <string>

#include "vedit/rng.h"
#include "vedit/tape.h"

namespace vedit {

struct AttentionOut {
    Var out;             // q_rows x d, after the output projection
    Mat head_avg_probs;  // q_rows x kv_rows, head-averaged; empty unless requested
};

// Scaled-dot-product multi-head attention. Parameters live under
// prefix + ".wq/.bq/.wk/.bk/.wv/.bv/.wo/.bo" (square d x d projections with
// 1 x d biases). allow_mask, when given, marks admissible (query, key) pairs
// with values > 0.5; masked rows renormalize over the survivors. want_probs
// additionally returns the head-averaged probability matrix as plain values
// for trace recording.
AttentionOut multihead_attention(ParamCtx& ctx, const Var& q_in, const Var& kv_in,
                                 const std::string& prefix, int heads,
                                 const Mat* allow_mask = nullptr,
                                 bool want_probs = false);

// Xavier-uniform draw, row-major fill order so the sequence of rng calls is
// part of the format.
Mat xavier_uniform(int rows, int cols, Rng& rng);

// Registers the eight attention parameters under prefix.
void attention_init(ParamStore& params, const std::string& prefix, int d, Rng& rng);

}  // namespace vedit
