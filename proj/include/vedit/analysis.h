#pragma once

#include <vector>

#include "vedit/backbone.h"
#include "vedit/synthdata.h"

namespace vedit {

struct MassSplit {
    double edit_fraction = 0.0;
    double native_fraction = 0.0;
};

// Mean attention mass landing on the edit-token columns vs the native
// (visual + text) columns. Shallow layouts (edit only) return exactly
// {1.0, 0.0}. LayoutError when the layout does not cover the matrix.
MassSplit attention_mass_split(const Mat& probs, const ContextLayout& layout);

// Mean per-row Shannon entropy in nats, with 0*log(0) = 0. Rows are
// renormalized defensively; negative entries beyond tolerance raise
// NumericError.
double spatial_entropy(const Mat& probs);

// Mean per-row cosine similarity between two feature matrices.
double trace_cosine(const Mat& a, const Mat& b);

// Mean per-row Jensen-Shannon divergence in nats, bounded by log 2.
// ComparabilityError when the column counts differ (traces recorded under
// different routing configs are not comparable).
double trace_js_divergence(const Mat& p, const Mat& q);

struct BlockProfile {
    int block = 0;  // 1-based
    double edit_mass = 0.0;
    double native_mass = 0.0;
    double entropy = 0.0;
    bool has_cross = false;  // cross-branch stats, deep blocks only
    double cosine = 0.0;
    double js = 0.0;
};

// Depth-wise trace statistics averaged over a held-out batch and over flow
// times {0.1, 0.5, 0.9}: both branches are run without gradients on the same
// noised latents, masses and entropies come from the editing branch, cosine
// and JS compare the branches at deep blocks.
std::vector<BlockProfile> depth_profile(const std::vector<Sample>& batch,
                                        const ParamStore& params,
                                        const ModelConfig& mc);

}  // namespace vedit
