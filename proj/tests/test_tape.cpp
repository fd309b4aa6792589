#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "vedit/rng.h"
#include "vedit/tape.h"

using vedit::Mat;
using vedit::Var;

namespace {

Mat random_mat(int r, int c, vedit::Rng& rng) {
    Mat m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = rng.normal();
    return m;
}

// Central-difference check of d(scalar f)/d(inputs) for a graph builder that
// maps leaf values to a 1x1 output.
void check_grads(const std::vector<Mat>& inputs,
                 const std::function<Var(const std::vector<Var>&)>& build,
                 double tol = 1e-5) {
    std::vector<Var> leaves;
    for (const Mat& m : inputs) leaves.push_back(vedit::make_leaf(m));
    Var out = build(leaves);
    REQUIRE(val(out).rows() == 1);
    REQUIRE(val(out).cols() == 1);
    vedit::backward(out);

    const double h = 1e-6;
    for (size_t k = 0; k < inputs.size(); ++k) {
        REQUIRE(leaves[k]->grad.rows() == inputs[k].rows());
        for (int i = 0; i < inputs[k].rows(); ++i) {
            for (int j = 0; j < inputs[k].cols(); ++j) {
                std::vector<Mat> plus = inputs, minus = inputs;
                plus[k](i, j) += h;
                minus[k](i, j) -= h;
                std::vector<Var> lp, lm;
                for (const Mat& m : plus) lp.push_back(vedit::make_constant(m));
                for (const Mat& m : minus) lm.push_back(vedit::make_constant(m));
                double fd =
                    (val(build(lp))(0, 0) - val(build(lm))(0, 0)) / (2.0 * h);
                double an = leaves[k]->grad(i, j);
                CHECK(std::abs(an - fd) <
                      tol * std::max({1.0, std::abs(an), std::abs(fd)}));
            }
        }
    }
}

// Reduce an arbitrary matrix node to a scalar with fixed weights, so each
// output element contributes a distinct gradient signal.
Var weighted_sum(const Var& x) {
    Mat w(val(x).rows(), val(x).cols());
    for (int i = 0; i < w.rows(); ++i)
        for (int j = 0; j < w.cols(); ++j) w(i, j) = 0.3 + 0.1 * i - 0.07 * j;
    Var ww = vedit::make_constant(w);
    Var prod = vedit::mul_elem(x, ww);
    Mat ones = Mat::Ones(1, w.rows());
    Mat onesc = Mat::Ones(w.cols(), 1);
    return vedit::matmul(vedit::matmul(vedit::make_constant(ones), prod),
                         vedit::make_constant(onesc));
}

}  // namespace

TEST_CASE("gradients: arithmetic ops") {
    vedit::Rng rng(1);
    Mat a = random_mat(3, 4, rng), b = random_mat(3, 4, rng);
    check_grads({a, b}, [](const std::vector<Var>& v) {
        return weighted_sum(vedit::add(v[0], vedit::scale(vedit::sub(v[0], v[1]), 0.7)));
    });
    check_grads({a, b}, [](const std::vector<Var>& v) {
        return weighted_sum(vedit::mul_elem(v[0], v[1]));
    });
}

TEST_CASE("gradients: matmul, transpose, rowvec broadcast") {
    vedit::Rng rng(2);
    Mat a = random_mat(3, 4, rng), b = random_mat(4, 2, rng), r = random_mat(1, 2, rng);
    check_grads({a, b, r}, [](const std::vector<Var>& v) {
        return weighted_sum(vedit::add_rowvec(vedit::matmul(v[0], v[1]), v[2]));
    });
    check_grads({a}, [](const std::vector<Var>& v) {
        return weighted_sum(vedit::transpose(v[0]));
    });
}

TEST_CASE("gradients: concat and slice") {
    vedit::Rng rng(3);
    Mat a = random_mat(2, 3, rng), b = random_mat(4, 3, rng), c = random_mat(2, 5, rng);
    check_grads({a, b}, [](const std::vector<Var>& v) {
        return weighted_sum(vedit::slice_rows(vedit::concat_rows({v[0], v[1]}), 1, 4));
    });
    check_grads({a, c}, [](const std::vector<Var>& v) {
        Var cc = vedit::concat_cols({v[0], v[1]});
        return weighted_sum(vedit::slice_cols(cc, 2, 4));
    });
}

TEST_CASE("gradients: softmax family") {
    vedit::Rng rng(4);
    Mat a = random_mat(3, 5, rng);
    check_grads({a}, [](const std::vector<Var>& v) {
        return weighted_sum(vedit::softmax_rows(v[0]));
    });
    check_grads({a}, [](const std::vector<Var>& v) {
        return weighted_sum(vedit::log_softmax_rows(v[0]));
    });
    Mat allow = Mat::Zero(3, 5);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j <= i + 1; ++j) allow(i, j) = 1.0;
    check_grads({a}, [&](const std::vector<Var>& v) {
        return weighted_sum(vedit::softmax_rows_masked(v[0], allow));
    });
}

TEST_CASE("masked softmax zeroes excluded columns and renormalizes") {
    Mat a(1, 4);
    a << 0.0, 1.0, 2.0, 3.0;
    Mat allow(1, 4);
    allow << 1.0, 0.0, 1.0, 0.0;
    Var p = vedit::softmax_rows_masked(vedit::make_constant(a), allow);
    CHECK(val(p)(0, 1) == 0.0);
    CHECK(val(p)(0, 3) == 0.0);
    CHECK(val(p)(0, 0) + val(p)(0, 2) == doctest::Approx(1.0));
    double e0 = std::exp(0.0), e2 = std::exp(2.0);
    CHECK(val(p)(0, 2) == doctest::Approx(e2 / (e0 + e2)));
}

TEST_CASE("gradients: layer norm, silu, l2 normalize") {
    vedit::Rng rng(5);
    Mat x = random_mat(3, 6, rng), g = random_mat(1, 6, rng), b = random_mat(1, 6, rng);
    check_grads({x, g, b}, [](const std::vector<Var>& v) {
        return weighted_sum(vedit::layer_norm_rows(v[0], v[1], v[2], 1e-5));
    });
    check_grads({x}, [](const std::vector<Var>& v) {
        return weighted_sum(vedit::silu(v[0]));
    });
    check_grads({x}, [](const std::vector<Var>& v) {
        return weighted_sum(vedit::l2_normalize_rows(v[0]));
    });
}

TEST_CASE("gradients: gather, diag mean, mean squared difference") {
    vedit::Rng rng(6);
    Mat table = random_mat(5, 3, rng), sq = random_mat(4, 4, rng);
    Mat target = random_mat(4, 4, rng);
    check_grads({table}, [](const std::vector<Var>& v) {
        return weighted_sum(vedit::gather_rows(v[0], {4, 0, 2, 0}));
    });
    check_grads({sq}, [](const std::vector<Var>& v) { return vedit::diag_mean(v[0]); });
    check_grads({sq}, [&](const std::vector<Var>& v) {
        return vedit::mean_sq_diff(v[0], target);
    });
}

TEST_CASE("detach blocks gradient flow but keeps the value bitwise") {
    vedit::Rng rng(7);
    Mat a = random_mat(3, 3, rng);
    Var leaf = vedit::make_leaf(a);
    Var stopped = vedit::detach(vedit::silu(leaf));
    CHECK(val(stopped) == val(vedit::silu(vedit::make_constant(a))));
    Var loss = vedit::mean_sq_diff(stopped, Mat::Zero(3, 3));
    vedit::backward(loss);
    CHECK(leaf->grad.size() == 0);  // never accumulated
}

TEST_CASE("gradient accumulates across reuse of one node") {
    Mat a(1, 1);
    a << 2.0;
    Var leaf = vedit::make_leaf(a);
    Var out = vedit::mul_elem(leaf, leaf);  // x^2
    vedit::backward(out);
    CHECK(leaf->grad(0, 0) == doctest::Approx(4.0));
}

TEST_CASE("ParamCtx reuses one leaf per name and lists only touched params") {
    vedit::ParamStore params;
    params["w"] = Mat::Ones(2, 2);
    params["b"] = Mat::Zero(1, 2);
    vedit::ParamCtx ctx(params, true);
    Var w1 = ctx.get("w");
    Var w2 = ctx.get("w");
    CHECK(w1.get() == w2.get());
    CHECK(ctx.leaves().size() == 1);
    CHECK(ctx.leaves().count("w") == 1);
    vedit::ParamCtx frozen(params, false);
    CHECK_FALSE(frozen.get("w")->requires_grad);
    CHECK_THROWS_AS(ctx.get("missing"), vedit::IndexError);
}

TEST_CASE("shape errors on mismatched operands") {
    Var a = vedit::make_constant(Mat::Zero(2, 3));
    Var b = vedit::make_constant(Mat::Zero(3, 2));
    CHECK_THROWS_AS(vedit::add(a, b), vedit::ShapeError);
    CHECK_THROWS_AS(vedit::mul_elem(a, b), vedit::ShapeError);
    CHECK_THROWS_AS(vedit::matmul(a, a), vedit::ShapeError);
    CHECK_THROWS_AS(vedit::diag_mean(a), vedit::ShapeError);
    CHECK_THROWS_AS(vedit::slice_rows(a, 1, 5), vedit::IndexError);
    CHECK_THROWS_AS(vedit::gather_rows(a, {2}), vedit::IndexError);
}
