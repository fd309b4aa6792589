#include "vedit/attention.h"

#include <cmath>
#include <vector>

namespace vedit {

Mat xavier_uniform(int rows, int cols, Rng& rng) {
    double a = std::sqrt(6.0 / (static_cast<double>(rows) + cols));
    Mat m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(-a, a);
    return m;
}

void attention_init(ParamStore& params, const std::string& prefix, int d, Rng& rng) {
    for (const char* w : {".wq", ".wk", ".wv", ".wo"})
        params[prefix + w] = xavier_uniform(d, d, rng);
    for (const char* b : {".bq", ".bk", ".bv", ".bo"})
        params[prefix + b] = Mat::Zero(1, d);
}

AttentionOut multihead_attention(ParamCtx& ctx, const Var& q_in, const Var& kv_in,
                                 const std::string& prefix, int heads,
                                 const Mat* allow_mask, bool want_probs) {
    if (!val(q_in).allFinite() || !val(kv_in).allFinite())
        throw NumericError("attention: non-finite input at " + prefix);
    const int d = static_cast<int>(val(q_in).cols());
    if (val(kv_in).cols() != d)
        throw ShapeError("attention: query width " + std::to_string(d) +
                         " vs context width " + std::to_string(val(kv_in).cols()));
    if (heads < 1 || d % heads != 0)
        throw ConfigError("attention: width " + std::to_string(d) +
                          " not divisible into " + std::to_string(heads) + " heads");
    const int dh = d / heads;
    const long nq = val(q_in).rows();
    const long nk = val(kv_in).rows();
    if (allow_mask && (allow_mask->rows() != nq || allow_mask->cols() != nk))
        throw ShapeError("attention: mask shape mismatch at " + prefix);

    Var q = add_rowvec(matmul(q_in, ctx.get(prefix + ".wq")), ctx.get(prefix + ".bq"));
    Var k = add_rowvec(matmul(kv_in, ctx.get(prefix + ".wk")), ctx.get(prefix + ".bk"));
    Var v = add_rowvec(matmul(kv_in, ctx.get(prefix + ".wv")), ctx.get(prefix + ".bv"));

    std::vector<Var> head_outs;
    head_outs.reserve(heads);
    Mat avg_probs;
    if (want_probs) avg_probs = Mat::Zero(nq, nk);
    for (int h = 0; h < heads; ++h) {
        Var qh = slice_cols(q, h * dh, dh);
        Var kh = slice_cols(k, h * dh, dh);
        Var vh = slice_cols(v, h * dh, dh);
        Var scores = scale(matmul(qh, transpose(kh)), 1.0 / std::sqrt(static_cast<double>(dh)));
        Var probs = allow_mask ? softmax_rows_masked(scores, *allow_mask) : softmax_rows(scores);
        if (want_probs) avg_probs += val(probs);
        head_outs.push_back(matmul(probs, vh));
    }
    if (want_probs) avg_probs /= static_cast<double>(heads);

    Var merged = heads == 1 ? head_outs[0] : concat_cols(head_outs);
    Var out = add_rowvec(matmul(merged, ctx.get(prefix + ".wo")), ctx.get(prefix + ".bo"));
    return AttentionOut{out, std::move(avg_probs)};
}

}  // namespace vedit
