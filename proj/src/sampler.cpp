#include "vedit/sampler.h"

#include <string>

#include "vedit/rng.h"
#include "vedit/tokenizer.h"

namespace vedit {

SamplerConfig SamplerConfig::from_config(const Config& cfg) {
    SamplerConfig sc;
    sc.t_steps = static_cast<int>(cfg.get_int("sample.steps", sc.t_steps));
    sc.seed = static_cast<uint64_t>(cfg.get_int("sample.seed", static_cast<int64_t>(sc.seed)));
    sc.validate();
    return sc;
}

void SamplerConfig::validate() const {
    if (t_steps < 1) throw ConfigError("sample.steps must be >= 1");
}

std::vector<double> SamplerConfig::schedule() const {
    std::vector<double> t(t_steps + 1);
    for (int k = 0; k <= t_steps; ++k)
        t[k] = static_cast<double>(k) / static_cast<double>(t_steps);
    return t;
}

Mat euler_step(const Mat& z, const Mat& velocity, double t_k, double t_prev) {
    if (z.rows() != velocity.rows() || z.cols() != velocity.cols())
        throw ShapeError("euler_step: latent and velocity shapes differ");
    if (!(t_prev < t_k))
        throw ScheduleError("euler_step: times must decrease, got " +
                            std::to_string(t_k) + " -> " + std::to_string(t_prev));
    return z + (t_prev - t_k) * velocity;
}

Video sample_edit(const Video& v, const std::vector<int>& instr_tokens,
                  const ParamStore& params, const ModelConfig& mc,
                  const SamplerConfig& sc) {
    sc.validate();
    ParamCtx ctx(params, false);
    // Conditioning depends only on (v, instruction): built once, reused by
    // every step below.
    TokenBundle bundle = tokenize(ctx, v, instr_tokens, mc);

    Rng rng(stream_seed(sc.seed, "latent"));
    Mat z(mc.n_visual(), mc.latent_dim());
    for (long r = 0; r < z.rows(); ++r)
        for (long c = 0; c < z.cols(); ++c) z(r, c) = rng.normal();

    std::vector<double> t = sc.schedule();
    // Noise level t[k] corresponds to flow time 1 - t[k]; the state moves
    // from pure noise (k = t_steps) down to data (k = 0). The backbone
    // predicts the velocity toward data in flow time, so the descending
    // noise-level step feeds its negation to the literal Euler update.
    for (int k = sc.t_steps; k >= 1; --k) {
        ForwardResult fwd =
            backbone_forward(ctx, make_constant(z), 1.0 - t[k], bundle, mc,
                             TraceMode::None, Branch::Edit);
        Mat neg_vel = -val(fwd.velocity);
        z = euler_step(z, neg_vel, t[k], t[k - 1]);
    }
    return latent_to_video(z, mc);
}

}  // namespace vedit
