#pragma once

#include "vedit/common.h"
#include "vedit/config.h"

namespace vedit {

// Block-index routing rule for cross-attention context. Blocks are numbered
// 1..l; a block is "shallow" (edit tokens only) when its index is at most ls
// and ls < l. Setting ls = l turns routing off: every block sees the full
// context, which is the "routing disabled" ablation switch.
struct RoutingConfig {
    int l = 8;
    int ls = 4;

    bool shallow(int block_idx) const { return block_idx <= ls && ls < l; }
};

/**
 * Shape and size settings for the tokenizer and backbone.
 *
 * Data-facing fields mirror DataConfig so a checkpoint's config echo fully
 * determines the network. Defaults are desk-scale; the reference-scale
 * values (l=34, ls=17, k=512) are far beyond what a laptop trains and live
 * in configuration files only.
 */
struct ModelConfig {
    // Clip geometry, mirrored from the data settings.
    int T = 4, H = 16, W = 16, C = 3;
    int instr_len = 8;
    int vocab = 64;

    // Network shape.
    int d = 32;             // token width
    int k = 8;              // learned editing tokens
    int l = 8;              // backbone blocks
    int ls = 4;             // routing split
    int heads = 2;          // attention heads
    int ffn_mult = 4;       // feed-forward expansion
    int patch = 4;          // square patch side
    int extractor_blocks = 2;

    static ModelConfig from_config(const Config& cfg);
    void validate() const;  // throws ConfigError

    int latent_dim() const { return patch * patch * C; }
    int patches_y() const { return H / patch; }
    int patches_x() const { return W / patch; }
    int n_visual() const { return T * patches_y() * patches_x(); }
    int n_text() const { return instr_len; }
    RoutingConfig routing() const { return RoutingConfig{l, ls}; }
};

}  // namespace vedit
