#pragma once

#include <utility>
#include <vector>

#include "vedit/model_config.h"
#include "vedit/tokenizer.h"

namespace vedit {

enum class Branch { Edit, Reference };

// What the forward pass records per block. Features are enough for the
// alignment loss; Full adds head-averaged probability maps for analysis.
enum class TraceMode { None, Features, Full };

struct BlockTrace {
    Var features;  // S x d cross-attention output, before the residual add
    Mat probs;     // S x M head-averaged, populated only in Full mode
    ContextLayout layout;
};

using AttentionTrace = std::vector<BlockTrace>;

// Cross-attention context for a 1-based block index: edit tokens alone in
// shallow blocks, [edit; visual; text] in deep ones.
std::pair<Var, ContextLayout> route_context(int block_idx, const RoutingConfig& rc,
                                            const TokenBundle& bundle);

void backbone_init(ParamStore& params, const ModelConfig& mc, Rng& rng);

struct ForwardResult {
    Var velocity;          // S x latent_dim
    AttentionTrace trace;  // one entry per block when mode != None
};

// One denoising forward: z is the S x latent_dim noisy latent, t the flow
// time in [0,1]. Increments the forward counters (and the reference counter
// for Branch::Reference).
ForwardResult backbone_forward(ParamCtx& ctx, const Var& z, double t,
                               const TokenBundle& bundle, const ModelConfig& mc,
                               TraceMode mode = TraceMode::None,
                               Branch branch = Branch::Edit);

}  // namespace vedit
