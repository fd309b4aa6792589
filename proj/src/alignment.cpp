#include "vedit/alignment.h"

#include <cmath>
#include <string>

namespace vedit {

AlignmentConfig AlignmentConfig::from_config(const Config& cfg) {
    AlignmentConfig ac;
    ac.tau = cfg.get_double("align.tau", ac.tau);
    ac.lambda = cfg.get_double("align.lambda", ac.lambda);
    ac.validate();
    return ac;
}

void AlignmentConfig::validate() const {
    if (!(tau > 0.0)) throw ConfigError("align.tau must be positive");
    if (lambda < 0.0) throw ConfigError("align.lambda must be non-negative");
}

Mat normalize_rows(const Mat& a) {
    Mat out = a;
    for (long r = 0; r < a.rows(); ++r) {
        double n = a.row(r).norm();
        out.row(r) /= (n + 1e-12);
    }
    return out;
}

Var infonce_mi_node(const Var& norm_a, const Var& norm_b, double tau) {
    if (!(tau > 0.0)) throw ConfigError("infonce: temperature must be positive");
    if (val(norm_a).rows() != val(norm_b).rows() ||
        val(norm_a).cols() != val(norm_b).cols())
        throw ShapeError("infonce: feature shapes differ, " +
                         std::to_string(val(norm_a).rows()) + "x" +
                         std::to_string(val(norm_a).cols()) + " vs " +
                         std::to_string(val(norm_b).rows()) + "x" +
                         std::to_string(val(norm_b).cols()));
    Var sim = scale(matmul(norm_a, transpose(norm_b)), 1.0 / tau);
    Var fwd = diag_mean(log_softmax_rows(sim));
    Var bwd = diag_mean(log_softmax_rows(transpose(sim)));
    return scale(add(fwd, bwd), 0.5);
}

double infonce_mi(const Mat& a, const Mat& b, double tau) {
    Var mi = infonce_mi_node(make_constant(normalize_rows(a)),
                             make_constant(normalize_rows(b)), tau);
    return val(mi)(0, 0);
}

int sample_depth(int l, Rng& rng) {
    if (l < 1) throw ConfigError("sample_depth: block count must be >= 1");
    return 1 + static_cast<int>(rng.uniform_int(static_cast<uint64_t>(l)));
}

AlignOut align_loss_at(const AttentionTrace& edit_trace, const AttentionTrace& ref_trace,
                       const AlignmentConfig& cfg, int depth) {
    cfg.validate();
    if (edit_trace.size() != ref_trace.size())
        throw ShapeError("align_loss: traces disagree on block count");
    if (edit_trace.empty()) throw ShapeError("align_loss: empty trace");
    if (depth < 1 || depth > static_cast<int>(edit_trace.size()))
        throw IndexError("align_loss: depth " + std::to_string(depth) +
                         " outside 1.." + std::to_string(edit_trace.size()));
    const Var& a = edit_trace[depth - 1].features;
    const Var& b = ref_trace[depth - 1].features;
    if (val(a).rows() != val(b).rows())
        throw ShapeError("align_loss: branches disagree on position count");
    Var na = l2_normalize_rows(a);
    Var nb = l2_normalize_rows(detach(b));
    Var mi = infonce_mi_node(na, nb, cfg.tau);
    AlignOut out;
    out.loss = scale(mi, -1.0);
    out.depth = depth;
    out.mi = val(mi)(0, 0);
    return out;
}

AlignOut align_loss(const AttentionTrace& edit_trace, const AttentionTrace& ref_trace,
                    const AlignmentConfig& cfg, Rng& rng) {
    if (edit_trace.empty()) throw ShapeError("align_loss: empty trace");
    int depth = sample_depth(static_cast<int>(edit_trace.size()), rng);
    return align_loss_at(edit_trace, ref_trace, cfg, depth);
}

}  // namespace vedit
