#include "vedit/tokenizer.h"

#include <algorithm>
#include <cmath>

#include "vedit/attention.h"
#include "vedit/counters.h"

namespace vedit {

ContextLayout TokenBundle::full_layout() const {
    ContextLayout lay;
    const int k = static_cast<int>(val(edit).rows());
    const int nv = static_cast<int>(val(visual).rows());
    const int nt = static_cast<int>(val(text).rows());
    lay.edit_begin = 0;
    lay.edit_end = k;
    lay.visual_begin = k;
    lay.visual_end = k + nv;
    lay.text_begin = k + nv;
    lay.text_end = k + nv + nt;
    lay.total = k + nv + nt;
    return lay;
}

Mat sinusoid_positions(int n, int d) {
    if (n < 1 || d < 2 || d % 2 != 0)
        throw ShapeError("sinusoid_positions: need n >= 1 and even d >= 2");
    Mat m(n, d);
    for (int pos = 0; pos < n; ++pos) {
        for (int j = 0; j < d / 2; ++j) {
            double freq = std::pow(10000.0, -2.0 * j / d);
            m(pos, 2 * j) = std::sin(pos * freq);
            m(pos, 2 * j + 1) = std::cos(pos * freq);
        }
    }
    return m;
}

Mat time_code(double t, int d) {
    if (!std::isfinite(t)) throw NumericError("time_code: non-finite time");
    if (d < 2 || d % 2 != 0) throw ShapeError("time_code: even d >= 2 required");
    Mat m(1, d);
    double scaled = t * 1000.0;
    for (int j = 0; j < d / 2; ++j) {
        double freq = std::pow(10000.0, -2.0 * j / d);
        m(0, 2 * j) = std::sin(scaled * freq);
        m(0, 2 * j + 1) = std::cos(scaled * freq);
    }
    return m;
}

namespace {

// Flattened pixels of one patch in (y, x, channel) order.
void check_patchable(const Video& v, int patch) {
    if (v.T < 1 || v.H < 1 || v.W < 1 || v.C < 1)
        throw ShapeError("patchify: empty video");
    if (patch < 1 || v.H % patch != 0 || v.W % patch != 0)
        throw ShapeError("patchify: patch " + std::to_string(patch) +
                         " does not divide " + std::to_string(v.H) + "x" +
                         std::to_string(v.W));
}

Mat flatten_patches(const Video& v, int patch) {
    check_patchable(v, patch);
    const int py = v.H / patch, px = v.W / patch;
    const int n = v.T * py * px;
    const int width = patch * patch * v.C;
    Mat m(n, width);
    int row = 0;
    for (int t = 0; t < v.T; ++t)
        for (int gy = 0; gy < py; ++gy)
            for (int gx = 0; gx < px; ++gx) {
                int col = 0;
                for (int dy = 0; dy < patch; ++dy)
                    for (int dx = 0; dx < patch; ++dx)
                        for (int c = 0; c < v.C; ++c)
                            m(row, col++) = v.at(t, gy * patch + dy, gx * patch + dx, c);
                ++row;
            }
    return m;
}

}  // namespace

Mat video_to_latent(const Video& v, int patch) {
    Mat m = flatten_patches(v, patch);
    m *= 2.0;
    m.array() -= 1.0;
    return m;
}

Video latent_to_video(const Mat& z, const ModelConfig& mc) {
    if (z.rows() != mc.n_visual() || z.cols() != mc.latent_dim())
        throw ShapeError("latent_to_video: got " + std::to_string(z.rows()) + "x" +
                         std::to_string(z.cols()) + ", want " +
                         std::to_string(mc.n_visual()) + "x" +
                         std::to_string(mc.latent_dim()));
    Video v(mc.T, mc.H, mc.W, mc.C);
    const int py = mc.patches_y(), px = mc.patches_x(), p = mc.patch;
    int row = 0;
    for (int t = 0; t < mc.T; ++t)
        for (int gy = 0; gy < py; ++gy)
            for (int gx = 0; gx < px; ++gx) {
                int col = 0;
                for (int dy = 0; dy < p; ++dy)
                    for (int dx = 0; dx < p; ++dx)
                        for (int c = 0; c < mc.C; ++c) {
                            double x = (z(row, col++) + 1.0) / 2.0;
                            v.at(t, gy * p + dy, gx * p + dx, c) =
                                std::clamp(x, 0.0, 1.0);
                        }
                ++row;
            }
    return v;
}

void tokenizer_init(ParamStore& params, const ModelConfig& mc, Rng& rng) {
    params["tok.patch_w"] = xavier_uniform(mc.latent_dim(), mc.d, rng);
    params["tok.patch_b"] = Mat::Zero(1, mc.d);
    Mat embed(mc.vocab, mc.d);
    for (int r = 0; r < mc.vocab; ++r)
        for (int c = 0; c < mc.d; ++c) embed(r, c) = rng.uniform(-0.1, 0.1);
    params["tok.embed"] = embed;
    Mat ph(mc.k, mc.d);
    for (int r = 0; r < mc.k; ++r)
        for (int c = 0; c < mc.d; ++c) ph(r, c) = rng.uniform(-0.1, 0.1);
    params["tok.placeholder"] = ph;

    const int fd = mc.d * mc.ffn_mult;
    for (int b = 1; b <= mc.extractor_blocks; ++b) {
        std::string pre = "ext.b" + std::to_string(b);
        params[pre + ".ln1.g"] = Mat::Ones(1, mc.d);
        params[pre + ".ln1.b"] = Mat::Zero(1, mc.d);
        attention_init(params, pre + ".attn", mc.d, rng);
        params[pre + ".ln2.g"] = Mat::Ones(1, mc.d);
        params[pre + ".ln2.b"] = Mat::Zero(1, mc.d);
        params[pre + ".ffn.w1"] = xavier_uniform(mc.d, fd, rng);
        params[pre + ".ffn.b1"] = Mat::Zero(1, fd);
        params[pre + ".ffn.w2"] = xavier_uniform(fd, mc.d, rng);
        params[pre + ".ffn.b2"] = Mat::Zero(1, mc.d);
    }
}

Var patchify(ParamCtx& ctx, const Video& v, const ModelConfig& mc) {
    if (v.T != mc.T || v.H != mc.H || v.W != mc.W || v.C != mc.C)
        throw ShapeError("patchify: video shape does not match the model config");
    Mat flat = flatten_patches(v, mc.patch);
    Var tokens = add_rowvec(matmul(make_constant(flat), ctx.get("tok.patch_w")),
                            ctx.get("tok.patch_b"));
    return add(tokens, make_constant(sinusoid_positions(mc.n_visual(), mc.d)));
}

Var encode_instruction(ParamCtx& ctx, const std::vector<int>& codes,
                       const ModelConfig& mc) {
    if (codes.empty()) throw ShapeError("encode_instruction: empty code sequence");
    for (int c : codes)
        if (c < 0 || c >= mc.vocab)
            throw VocabError("encode_instruction: code " + std::to_string(c) +
                             " outside vocabulary of " + std::to_string(mc.vocab));
    Var rows = gather_rows(ctx.get("tok.embed"), codes);
    return add(rows, make_constant(
                         sinusoid_positions(static_cast<int>(codes.size()), mc.d)));
}

Var extract_edit_tokens(ParamCtx& ctx, const Var& visual, const Var& text,
                        const ModelConfig& mc) {
    if (val(visual).cols() != mc.d || val(text).cols() != mc.d)
        throw ShapeError("extract_edit_tokens: stream width mismatch");
    Var x = concat_rows({visual, text, ctx.get("tok.placeholder")});
    const int n = static_cast<int>(val(x).rows());
    x = add(x, make_constant(sinusoid_positions(n, mc.d)));

    Mat causal = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) causal(i, j) = 1.0;

    for (int b = 1; b <= mc.extractor_blocks; ++b) {
        std::string pre = "ext.b" + std::to_string(b);
        Var h = layer_norm_rows(x, ctx.get(pre + ".ln1.g"), ctx.get(pre + ".ln1.b"), 1e-5);
        AttentionOut att =
            multihead_attention(ctx, h, h, pre + ".attn", mc.heads, &causal, false);
        x = add(x, att.out);
        Var h2 = layer_norm_rows(x, ctx.get(pre + ".ln2.g"), ctx.get(pre + ".ln2.b"), 1e-5);
        Var mid = silu(add_rowvec(matmul(h2, ctx.get(pre + ".ffn.w1")),
                                  ctx.get(pre + ".ffn.b1")));
        Var out = add_rowvec(matmul(mid, ctx.get(pre + ".ffn.w2")),
                             ctx.get(pre + ".ffn.b2"));
        x = add(x, out);
    }
    counters::edit_token_extractions.fetch_add(1, std::memory_order_relaxed);
    return slice_rows(x, n - mc.k, mc.k);
}

TokenBundle tokenize(ParamCtx& ctx, const Video& v, const std::vector<int>& codes,
                     const ModelConfig& mc) {
    if (static_cast<int>(codes.size()) != mc.instr_len)
        throw ShapeError("tokenize: instruction length " +
                         std::to_string(codes.size()) + ", config says " +
                         std::to_string(mc.instr_len));
    TokenBundle b;
    b.visual = patchify(ctx, v, mc);
    b.text = encode_instruction(ctx, codes, mc);
    b.edit = extract_edit_tokens(ctx, b.visual, b.text, mc);
    return b;
}

}  // namespace vedit
