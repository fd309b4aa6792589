#pragma once

#include <string>
#include <vector>

#include "vedit/model_config.h"
#include "vedit/rng.h"
#include "vedit/tape.h"
#include "vedit/video.h"

namespace vedit {

// Column ranges of the conditioning streams inside one attention context.
// Shallow blocks carry only the edit range; deep blocks carry all three,
// edit tokens first.
struct ContextLayout {
    int edit_begin = 0, edit_end = 0;
    int visual_begin = 0, visual_end = 0;
    int text_begin = 0, text_end = 0;
    int total = 0;

    int edit_count() const { return edit_end - edit_begin; }
    int native_count() const {
        return (visual_end - visual_begin) + (text_end - text_begin);
    }
};

// The three conditioning streams of one sample: k learned editing tokens,
// the patch tokens of the conditioning video, and the embedded instruction.
struct TokenBundle {
    Var edit;
    Var visual;
    Var text;

    ContextLayout full_layout() const;
};

// Fixed sin/cos position table, n rows of width d (d even).
Mat sinusoid_positions(int n, int d);
// 1 x d sin/cos encoding of a scalar time in [0,1], scaled by 1000 like a
// position index.
Mat time_code(double t, int d);

// Flow-space latent: one row per patch, flattened pixels mapped to [-1, 1].
Mat video_to_latent(const Video& v, int patch);
// Inverse of video_to_latent with clamping into [0, 1].
Video latent_to_video(const Mat& z, const ModelConfig& mc);

void tokenizer_init(ParamStore& params, const ModelConfig& mc, Rng& rng);

// Linear patch embedding plus position codes; rows ordered (t, py, px).
Var patchify(ParamCtx& ctx, const Video& v, const ModelConfig& mc);
// Embedding-table lookup plus position codes. VocabError on out-of-range.
Var encode_instruction(ParamCtx& ctx, const std::vector<int>& codes, const ModelConfig& mc);
// Runs the causal extractor over [visual; text; placeholders] and returns the
// hidden states at the last k positions.
Var extract_edit_tokens(ParamCtx& ctx, const Var& visual, const Var& text,
                        const ModelConfig& mc);
// Full tokenization of (video, instruction) into the three streams.
TokenBundle tokenize(ParamCtx& ctx, const Video& v, const std::vector<int>& codes,
                     const ModelConfig& mc);

}  // namespace vedit
