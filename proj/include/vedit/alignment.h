#pragma once

#include "vedit/backbone.h"
#include "vedit/config.h"
#include "vedit/rng.h"

namespace vedit {

struct AlignmentConfig {
    double tau = 0.07;
    double lambda = 0.75;

    static AlignmentConfig from_config(const Config& cfg);
    void validate() const;  // throws ConfigError
};

// Plain-value row normalization (epsilon-floored), for callers outside the
// graph.
Mat normalize_rows(const Mat& a);

// Symmetric InfoNCE mutual-information lower bound over row-normalized
// feature matrices; the i-th rows are positives, all other rows negatives.
// Returns a 1 x 1 node. Inputs must already be row-normalized.
Var infonce_mi_node(const Var& norm_a, const Var& norm_b, double tau);
// Convenience scalar wrapper that normalizes and evaluates without gradients.
double infonce_mi(const Mat& a, const Mat& b, double tau);

// Uniform over {1, ..., l}.
int sample_depth(int l, Rng& rng);

struct AlignOut {
    Var loss;       // 1 x 1, the negated bound
    int depth = 0;  // 1-based block index the loss was taken at
    double mi = 0;  // bound value, for logging
};

// Alignment loss at a fixed depth. Reference features are detached here, so
// gradients reach only the editing branch.
AlignOut align_loss_at(const AttentionTrace& edit_trace, const AttentionTrace& ref_trace,
                       const AlignmentConfig& cfg, int depth);
// Same, sampling the depth uniformly from the trace's block range.
AlignOut align_loss(const AttentionTrace& edit_trace, const AttentionTrace& ref_trace,
                    const AlignmentConfig& cfg, Rng& rng);

}  // namespace vedit
