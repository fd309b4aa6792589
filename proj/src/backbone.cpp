#include "vedit/backbone.h"

#include <cmath>
#include <string>

#include "vedit/attention.h"
#include "vedit/counters.h"

namespace vedit {

std::pair<Var, ContextLayout> route_context(int block_idx, const RoutingConfig& rc,
                                            const TokenBundle& bundle) {
    if (block_idx < 1 || block_idx > rc.l)
        throw IndexError("route_context: block " + std::to_string(block_idx) +
                         " outside 1.." + std::to_string(rc.l));
    if (rc.shallow(block_idx)) {
        ContextLayout lay;
        lay.edit_begin = 0;
        lay.edit_end = static_cast<int>(val(bundle.edit).rows());
        lay.total = lay.edit_end;
        return {bundle.edit, lay};
    }
    Var full = concat_rows({bundle.edit, bundle.visual, bundle.text});
    return {full, bundle.full_layout()};
}

void backbone_init(ParamStore& params, const ModelConfig& mc, Rng& rng) {
    const int fd = mc.d * mc.ffn_mult;
    params["bb.in_w"] = xavier_uniform(mc.latent_dim(), mc.d, rng);
    params["bb.in_b"] = Mat::Zero(1, mc.d);
    params["bb.time.w1"] = xavier_uniform(mc.d, mc.d, rng);
    params["bb.time.b1"] = Mat::Zero(1, mc.d);
    params["bb.time.w2"] = xavier_uniform(mc.d, mc.d, rng);
    params["bb.time.b2"] = Mat::Zero(1, mc.d);
    for (int b = 1; b <= mc.l; ++b) {
        std::string pre = "bb.b" + std::to_string(b);
        params[pre + ".ln1.g"] = Mat::Ones(1, mc.d);
        params[pre + ".ln1.b"] = Mat::Zero(1, mc.d);
        attention_init(params, pre + ".self", mc.d, rng);
        params[pre + ".ln2.g"] = Mat::Ones(1, mc.d);
        params[pre + ".ln2.b"] = Mat::Zero(1, mc.d);
        attention_init(params, pre + ".cross", mc.d, rng);
        params[pre + ".ln3.g"] = Mat::Ones(1, mc.d);
        params[pre + ".ln3.b"] = Mat::Zero(1, mc.d);
        params[pre + ".ffn.w1"] = xavier_uniform(mc.d, fd, rng);
        params[pre + ".ffn.b1"] = Mat::Zero(1, fd);
        params[pre + ".ffn.w2"] = xavier_uniform(fd, mc.d, rng);
        params[pre + ".ffn.b2"] = Mat::Zero(1, mc.d);
    }
    params["bb.out_ln.g"] = Mat::Ones(1, mc.d);
    params["bb.out_ln.b"] = Mat::Zero(1, mc.d);
    params["bb.out_w"] = xavier_uniform(mc.d, mc.latent_dim(), rng);
    params["bb.out_b"] = Mat::Zero(1, mc.latent_dim());
}

ForwardResult backbone_forward(ParamCtx& ctx, const Var& z, double t,
                               const TokenBundle& bundle, const ModelConfig& mc,
                               TraceMode mode, Branch branch) {
    if (val(z).rows() != mc.n_visual() || val(z).cols() != mc.latent_dim())
        throw ShapeError("backbone_forward: latent is " +
                         std::to_string(val(z).rows()) + "x" +
                         std::to_string(val(z).cols()) + ", config wants " +
                         std::to_string(mc.n_visual()) + "x" +
                         std::to_string(mc.latent_dim()));
    if (!val(z).allFinite()) throw NumericError("backbone_forward: non-finite latent");
    counters::backbone_forwards.fetch_add(1, std::memory_order_relaxed);
    if (branch == Branch::Reference)
        counters::reference_forwards.fetch_add(1, std::memory_order_relaxed);

    const RoutingConfig rc = mc.routing();
    Var x = add_rowvec(matmul(z, ctx.get("bb.in_w")), ctx.get("bb.in_b"));
    x = add(x, make_constant(sinusoid_positions(mc.n_visual(), mc.d)));
    Var tmid = silu(add_rowvec(matmul(make_constant(time_code(t, mc.d)),
                                      ctx.get("bb.time.w1")),
                               ctx.get("bb.time.b1")));
    Var tvec = add_rowvec(matmul(tmid, ctx.get("bb.time.w2")), ctx.get("bb.time.b2"));
    x = add_rowvec(x, tvec);

    ForwardResult res;
    if (mode != TraceMode::None) res.trace.reserve(mc.l);
    for (int b = 1; b <= mc.l; ++b) {
        std::string pre = "bb.b" + std::to_string(b);
        Var h = layer_norm_rows(x, ctx.get(pre + ".ln1.g"), ctx.get(pre + ".ln1.b"), 1e-5);
        AttentionOut self_att =
            multihead_attention(ctx, h, h, pre + ".self", mc.heads, nullptr, false);
        x = add(x, self_att.out);

        Var h2 = layer_norm_rows(x, ctx.get(pre + ".ln2.g"), ctx.get(pre + ".ln2.b"), 1e-5);
        auto [context, layout] = route_context(b, rc, bundle);
        AttentionOut cross = multihead_attention(ctx, h2, context, pre + ".cross",
                                                 mc.heads, nullptr,
                                                 mode == TraceMode::Full);
        if (mode != TraceMode::None)
            res.trace.push_back(BlockTrace{cross.out, std::move(cross.head_avg_probs),
                                           layout});
        x = add(x, cross.out);

        Var h3 = layer_norm_rows(x, ctx.get(pre + ".ln3.g"), ctx.get(pre + ".ln3.b"), 1e-5);
        Var mid = silu(add_rowvec(matmul(h3, ctx.get(pre + ".ffn.w1")),
                                  ctx.get(pre + ".ffn.b1")));
        Var ffn_out = add_rowvec(matmul(mid, ctx.get(pre + ".ffn.w2")),
                                 ctx.get(pre + ".ffn.b2"));
        x = add(x, ffn_out);
    }

    Var y = layer_norm_rows(x, ctx.get("bb.out_ln.g"), ctx.get("bb.out_ln.b"), 1e-5);
    res.velocity = add_rowvec(matmul(y, ctx.get("bb.out_w")), ctx.get("bb.out_b"));
    return res;
}

}  // namespace vedit
