#include "vedit/analysis.h"

#include <cmath>
#include <string>

#include "vedit/rng.h"
#include "vedit/tokenizer.h"
#include "vedit/trainer.h"

namespace vedit {

MassSplit attention_mass_split(const Mat& probs, const ContextLayout& layout) {
    if (layout.total != probs.cols())
        throw LayoutError("attention_mass_split: layout covers " +
                          std::to_string(layout.total) + " columns, matrix has " +
                          std::to_string(probs.cols()));
    if (layout.edit_count() < 1)
        throw LayoutError("attention_mass_split: layout lacks an edit range");
    if (probs.rows() < 1) throw ShapeError("attention_mass_split: empty matrix");
    if (layout.native_count() == 0) {
        // Shallow block: the context is the edit tokens, the split is forced.
        return MassSplit{1.0, 0.0};
    }
    double edit = 0.0;
    for (long r = 0; r < probs.rows(); ++r)
        edit += probs.row(r)
                    .segment(layout.edit_begin, layout.edit_count())
                    .sum();
    edit /= static_cast<double>(probs.rows());
    return MassSplit{edit, 1.0 - edit};
}

namespace {

// Shared row cleanup: tolerate tiny negatives, renormalize to a proper
// distribution, reject anything clearly non-stochastic.
Eigen::VectorXd clean_row(const Mat& p, long r, const char* who) {
    Eigen::VectorXd row = p.row(r);
    double sum = 0.0;
    for (long j = 0; j < row.size(); ++j) {
        double x = row(j);
        if (x < -1e-9)
            throw NumericError(std::string(who) + ": negative probability " +
                               std::to_string(x));
        if (x < 0.0) x = 0.0;
        row(j) = x;
        sum += x;
    }
    if (sum <= 0.0)
        throw NumericError(std::string(who) + ": zero-mass row");
    row /= sum;
    return row;
}

double row_entropy(const Eigen::VectorXd& row) {
    double h = 0.0;
    for (long j = 0; j < row.size(); ++j)
        if (row(j) > 0.0) h -= row(j) * std::log(row(j));
    return h;
}

}  // namespace

double spatial_entropy(const Mat& probs) {
    if (probs.rows() < 1 || probs.cols() < 1)
        throw ShapeError("spatial_entropy: empty matrix");
    double total = 0.0;
    for (long r = 0; r < probs.rows(); ++r)
        total += row_entropy(clean_row(probs, r, "spatial_entropy"));
    return total / static_cast<double>(probs.rows());
}

double trace_cosine(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeError("trace_cosine: shapes differ");
    if (a.rows() < 1) throw ShapeError("trace_cosine: empty matrices");
    double total = 0.0;
    for (long r = 0; r < a.rows(); ++r) {
        double na = std::max(a.row(r).norm(), 1e-12);
        double nb = std::max(b.row(r).norm(), 1e-12);
        total += a.row(r).dot(b.row(r)) / (na * nb);
    }
    return total / static_cast<double>(a.rows());
}

double trace_js_divergence(const Mat& p, const Mat& q) {
    if (p.cols() != q.cols())
        throw ComparabilityError(
            "trace_js_divergence: traces have different context widths (" +
            std::to_string(p.cols()) + " vs " + std::to_string(q.cols()) +
            "), likely recorded under different routing configs");
    if (p.rows() != q.rows())
        throw ShapeError("trace_js_divergence: row counts differ");
    if (p.rows() < 1) throw ShapeError("trace_js_divergence: empty matrices");
    double total = 0.0;
    for (long r = 0; r < p.rows(); ++r) {
        Eigen::VectorXd a = clean_row(p, r, "trace_js_divergence");
        Eigen::VectorXd b = clean_row(q, r, "trace_js_divergence");
        Eigen::VectorXd m = 0.5 * (a + b);
        double kl_a = 0.0, kl_b = 0.0;
        for (long j = 0; j < a.size(); ++j) {
            if (a(j) > 0.0) kl_a += a(j) * std::log(a(j) / m(j));
            if (b(j) > 0.0) kl_b += b(j) * std::log(b(j) / m(j));
        }
        total += 0.5 * kl_a + 0.5 * kl_b;
    }
    return total / static_cast<double>(p.rows());
}

std::vector<BlockProfile> depth_profile(const std::vector<Sample>& batch,
                                        const ParamStore& params,
                                        const ModelConfig& mc) {
    if (batch.empty()) throw ConfigError("depth_profile: empty batch");
    const double times[] = {0.1, 0.5, 0.9};
    std::vector<BlockProfile> profile(mc.l);
    for (int b = 0; b < mc.l; ++b) profile[b].block = b + 1;
    std::vector<int> cross_counts(mc.l, 0);
    int count = 0;

    for (const Sample& s : batch) {
        Mat target = video_to_latent(s.edited, mc.patch);
        for (int ti = 0; ti < 3; ++ti) {
            Rng nrng(stream_seed(s.seed, "profile", ti));
            Mat noise(mc.n_visual(), mc.latent_dim());
            for (long r = 0; r < noise.rows(); ++r)
                for (long c = 0; c < noise.cols(); ++c) noise(r, c) = nrng.normal();
            Mat zt = flow_target(noise, target, times[ti]).first;

            ParamCtx ctx(params, false);
            TokenBundle bundle = tokenize(ctx, s.source, s.instruction.tokens, mc);
            ForwardResult fwd = backbone_forward(ctx, make_constant(zt), times[ti],
                                                 bundle, mc, TraceMode::Full,
                                                 Branch::Edit);
            ParamCtx ref_ctx(params, false);
            TokenBundle ref_bundle = tokenize(ref_ctx, s.edited, s.caption, mc);
            ForwardResult ref = backbone_forward(ref_ctx, make_constant(zt), times[ti],
                                                 ref_bundle, mc, TraceMode::Full,
                                                 Branch::Reference);
            ++count;
            for (int b = 0; b < mc.l; ++b) {
                const BlockTrace& bt = fwd.trace[b];
                MassSplit ms = attention_mass_split(bt.probs, bt.layout);
                profile[b].edit_mass += ms.edit_fraction;
                profile[b].native_mass += ms.native_fraction;
                profile[b].entropy += spatial_entropy(bt.probs);
                const BlockTrace& rt = ref.trace[b];
                if (bt.layout.native_count() > 0 && rt.layout.native_count() > 0) {
                    profile[b].cosine +=
                        trace_cosine(val(bt.features), val(rt.features));
                    profile[b].js += trace_js_divergence(bt.probs, rt.probs);
                    ++cross_counts[b];
                }
            }
        }
    }

    for (int b = 0; b < mc.l; ++b) {
        profile[b].edit_mass /= count;
        profile[b].native_mass /= count;
        profile[b].entropy /= count;
        if (cross_counts[b] > 0) {
            profile[b].has_cross = true;
            profile[b].cosine /= cross_counts[b];
            profile[b].js /= cross_counts[b];
        }
    }
    return profile;
}

}  // namespace vedit
