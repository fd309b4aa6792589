#include "vedit/trainer.h"

#include <chrono>
#include <cmath>

#include "vedit/tokenizer.h"

namespace vedit {

TrainConfig TrainConfig::from_config(const Config& cfg) {
    TrainConfig tc;
    tc.steps = cfg.get_int("train.steps", tc.steps);
    tc.batch = static_cast<int>(cfg.get_int("train.batch", tc.batch));
    tc.lr = cfg.get_double("train.lr", tc.lr);
    tc.beta1 = cfg.get_double("train.beta1", tc.beta1);
    tc.beta2 = cfg.get_double("train.beta2", tc.beta2);
    tc.eps = cfg.get_double("train.eps", tc.eps);
    tc.weight_decay = cfg.get_double("train.weight_decay", tc.weight_decay);
    tc.clip_norm = cfg.get_double("train.clip_norm", tc.clip_norm);
    tc.seed = static_cast<uint64_t>(cfg.get_int("train.seed", static_cast<int64_t>(tc.seed)));
    tc.checkpoint_every = cfg.get_int("train.checkpoint_every", tc.checkpoint_every);
    tc.log_every = cfg.get_int("train.log_every", tc.log_every);
    tc.validate();
    return tc;
}

void TrainConfig::validate() const {
    if (steps < 1) throw ConfigError("train.steps must be >= 1");
    if (batch < 1) throw ConfigError("train.batch must be >= 1");
    if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("train.lr must be positive");
    if (beta1 < 0.0 || beta1 >= 1.0) throw ConfigError("train.beta1 must lie in [0,1)");
    if (beta2 < 0.0 || beta2 >= 1.0) throw ConfigError("train.beta2 must lie in [0,1)");
    if (!(eps > 0.0)) throw ConfigError("train.eps must be positive");
    if (weight_decay < 0.0) throw ConfigError("train.weight_decay must be >= 0");
    if (clip_norm < 0.0) throw ConfigError("train.clip_norm must be >= 0");
}

std::pair<Mat, Mat> flow_target(const Mat& noise, const Mat& target, double t) {
    if (noise.rows() != target.rows() || noise.cols() != target.cols())
        throw ShapeError("flow_target: noise and target shapes differ");
    if (!(t >= 0.0 && t <= 1.0))
        throw DomainError("flow_target: t = " + std::to_string(t) +
                          " outside [0, 1]");
    Mat z = (1.0 - t) * noise + t * target;
    Mat u = target - noise;
    return {z, u};
}

BatchLossStats batch_loss(const std::vector<Sample>& batch, const ParamStore& params,
                          const ModelConfig& mc, const AlignmentConfig& ac,
                          uint64_t noise_seed, int depth, ParamStore* grads,
                          const ParamStore* ref_params) {
    if (batch.empty()) throw ConfigError("batch_loss: empty batch");
    ac.validate();
    const bool with_align = ac.lambda > 0.0;
    const double inv_b = 1.0 / static_cast<double>(batch.size());

    BatchLossStats stats;
    stats.depth = with_align ? depth : 0;
    for (size_t i = 0; i < batch.size(); ++i) {
        const Sample& s = batch[i];
        Rng srng(stream_seed(noise_seed, "sample", i));
        double t = srng.uniform01();
        Mat noise(mc.n_visual(), mc.latent_dim());
        for (long r = 0; r < noise.rows(); ++r)
            for (long c = 0; c < noise.cols(); ++c) noise(r, c) = srng.normal();
        Mat target = video_to_latent(s.edited, mc.patch);
        auto [zt, u] = flow_target(noise, target, t);

        ParamCtx ctx(params, grads != nullptr);
        TokenBundle bundle = tokenize(ctx, s.source, s.instruction.tokens, mc);
        ForwardResult fwd = backbone_forward(
            ctx, make_constant(zt), t, bundle, mc,
            with_align ? TraceMode::Features : TraceMode::None, Branch::Edit);
        Var loss = mean_sq_diff(fwd.velocity, u);
        stats.fm += val(loss)(0, 0) * inv_b;

        if (with_align) {
            ParamCtx ref_ctx(ref_params ? *ref_params : params, false);
            TokenBundle ref_bundle = tokenize(ref_ctx, s.edited, s.caption, mc);
            ForwardResult ref_fwd =
                backbone_forward(ref_ctx, make_constant(zt), t, ref_bundle, mc,
                                 TraceMode::Features, Branch::Reference);
            AlignOut al = align_loss_at(fwd.trace, ref_fwd.trace, ac, depth);
            stats.align += val(al.loss)(0, 0) * inv_b;
            stats.mi += al.mi * inv_b;
            loss = add(loss, scale(al.loss, ac.lambda));
        }
        stats.total += val(loss)(0, 0) * inv_b;

        if (grads) {
            backward(scale(loss, inv_b));
            for (const auto& [name, leaf] : ctx.leaves()) {
                if (!leaf->requires_grad || leaf->grad.size() == 0) continue;
                auto it = grads->find(name);
                if (it == grads->end())
                    (*grads)[name] = leaf->grad;
                else
                    it->second += leaf->grad;
            }
        }
    }
    return stats;
}

Trainer::Trainer(const Config& cfg) {
    dc_ = DataConfig::from_config(cfg);
    mc_ = ModelConfig::from_config(cfg);
    ac_ = AlignmentConfig::from_config(cfg);
    tc_ = TrainConfig::from_config(cfg);
    echo_ = cfg.echo();
    Rng irng(stream_seed(tc_.seed, "init"));
    tokenizer_init(params_, mc_, irng);
    backbone_init(params_, mc_, irng);
}

Trainer Trainer::from_checkpoint(const Checkpoint& ck) {
    Config cfg = Config::from_string(ck.config_echo);
    Trainer tr(cfg);
    tr.params_ = ck.params;
    tr.m_ = ck.adam_m;
    tr.v_ = ck.adam_v;
    tr.adam_t_ = ck.adam_t;
    tr.step_ = static_cast<int64_t>(ck.step);
    tr.tc_.seed = ck.master_seed;
    return tr;
}

Checkpoint Trainer::to_checkpoint() const {
    Checkpoint ck;
    ck.config_echo = echo_;
    ck.step = static_cast<uint64_t>(step_);
    ck.master_seed = tc_.seed;
    ck.params = params_;
    ck.adam_m = m_;
    ck.adam_v = v_;
    ck.adam_t = adam_t_;
    return ck;
}

std::vector<Sample> Trainer::draw_batch(int64_t step) const {
    std::vector<Sample> batch;
    batch.reserve(tc_.batch);
    for (int i = 0; i < tc_.batch; ++i)
        batch.push_back(generate_sample(
            stream_seed(tc_.seed, "data", static_cast<uint64_t>(step), i), dc_));
    return batch;
}

StepReport Trainer::training_step(const std::vector<Sample>& batch) {
    auto t0 = std::chrono::steady_clock::now();
    int depth = 0;
    if (ac_.lambda > 0.0) {
        Rng drng(stream_seed(tc_.seed, "depth", static_cast<uint64_t>(step_)));
        depth = sample_depth(mc_.l, drng);
    }
    ParamStore grads;
    BatchLossStats st =
        batch_loss(batch, params_, mc_, ac_,
                   stream_seed(tc_.seed, "noise", static_cast<uint64_t>(step_)),
                   depth, &grads);

    double sq_norm = 0.0;
    for (const auto& [name, g] : grads) sq_norm += g.squaredNorm();
    double grad_norm = std::sqrt(sq_norm);

    StepReport rep;
    rep.step = step_;
    rep.loss_fm = st.fm;
    rep.loss_align = st.align;
    rep.loss_total = st.total;
    rep.depth = st.depth;
    rep.mi = st.mi;
    rep.grad_norm = grad_norm;

    auto done = [&]() {
        rep.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
    };
    if (!std::isfinite(st.total) || !std::isfinite(grad_norm)) {
        done();
        throw NumericDivergence("training_step: non-finite loss or gradient at step " +
                                    std::to_string(step_),
                                rep);
    }

    if (tc_.clip_norm > 0.0 && grad_norm > tc_.clip_norm) {
        double f = tc_.clip_norm / grad_norm;
        for (auto& [name, g] : grads) g *= f;
    }

    ++adam_t_;
    const double bc1 = 1.0 - std::pow(tc_.beta1, static_cast<double>(adam_t_));
    const double bc2 = 1.0 - std::pow(tc_.beta2, static_cast<double>(adam_t_));
    for (auto& [name, theta] : params_) {
        Mat g = Mat::Zero(theta.rows(), theta.cols());
        auto it = grads.find(name);
        if (it != grads.end()) g = it->second;
        Mat& m = m_.try_emplace(name, Mat::Zero(theta.rows(), theta.cols())).first->second;
        Mat& v = v_.try_emplace(name, Mat::Zero(theta.rows(), theta.cols())).first->second;
        m = tc_.beta1 * m + (1.0 - tc_.beta1) * g;
        v = tc_.beta2 * v + (1.0 - tc_.beta2) * g.cwiseProduct(g);
        Mat mhat = m / bc1;
        Mat vhat = v / bc2;
        Mat denom = vhat.cwiseSqrt();
        denom.array() += tc_.eps;
        theta -= tc_.lr * (mhat.cwiseQuotient(denom) + tc_.weight_decay * theta);
    }

    ++step_;
    done();
    return rep;
}

}  // namespace vedit
