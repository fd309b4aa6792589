#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "vedit/alignment.h"
#include "vedit/rng.h"
#include "vedit/tape.h"

using namespace vedit;

namespace {

Mat random_mat(int r, int c, uint64_t seed) {
    Rng rng(seed);
    Mat m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = rng.normal();
    return m;
}

AttentionTrace const_trace(const std::vector<Mat>& feats) {
    AttentionTrace tr;
    for (const Mat& f : feats) {
        BlockTrace bt;
        bt.features = make_constant(f);
        tr.push_back(bt);
    }
    return tr;
}

}  // namespace

TEST_CASE("row normalization: 3-4-5 and the zero-row floor") {
    Mat a(2, 2);
    a << 3.0, 4.0, 0.0, 0.0;
    Mat n = normalize_rows(a);
    CHECK(n(0, 0) == doctest::Approx(0.6));
    CHECK(n(0, 1) == doctest::Approx(0.8));
    // The zero row survives via the epsilon floor instead of dividing by zero.
    CHECK(n(1, 0) == 0.0);
    CHECK(n(1, 1) == 0.0);
}

TEST_CASE("single-pair bound is exactly zero") {
    Mat a(1, 4), b(1, 4);
    a << 1, 0, 0, 0;
    b << 0.5, 0.5, 0.5, 0.5;
    CHECK(infonce_mi(a, b, 0.07) == doctest::Approx(0.0));
}

TEST_CASE("identity pair at unit temperature hits the closed form") {
    // Two orthonormal rows, a == b, tau = 1: every diagonal term is
    // 1 - log(1 + e), a fixed point worked out independently of this code.
    Mat a = Mat::Identity(2, 2);
    CHECK(infonce_mi(a, a, 1.0) == doctest::Approx(-0.3132616875182228).epsilon(1e-12));
}

TEST_CASE("bound never exceeds log S") {
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        int s = 2 + static_cast<int>(seed % 7);
        Mat a = random_mat(s, 6, seed);
        Mat b = random_mat(s, 6, seed + 100);
        double mi = infonce_mi(a, b, 0.07);
        CHECK(mi <= std::log(static_cast<double>(s)) + 1e-9);
    }
}

TEST_CASE("perfectly matched orthogonal rows approach the ceiling") {
    // Orthonormal rows matched with themselves at low temperature: each
    // positive dominates its row, so the mean diagonal log-probability
    // approaches its maximum of zero from below.
    Mat a = Mat::Identity(8, 8);
    double mi = infonce_mi(a, a, 0.07);
    CHECK(mi > -1e-4);
    CHECK(mi <= 0.0);
}

TEST_CASE("the bound is symmetric in its arguments") {
    Mat a = random_mat(5, 7, 3);
    Mat b = random_mat(5, 7, 4);
    CHECK(infonce_mi(a, b, 0.07) == doctest::Approx(infonce_mi(b, a, 0.07)).epsilon(1e-12));
}

TEST_CASE("per-row positive rescaling leaves the bound unchanged") {
    Mat a = random_mat(4, 5, 7);
    Mat b = random_mat(4, 5, 8);
    Mat a2 = a;
    for (int i = 0; i < a2.rows(); ++i) a2.row(i) *= (1.0 + i) * 3.0;
    CHECK(infonce_mi(a2, b, 0.07) == doctest::Approx(infonce_mi(a, b, 0.07)).epsilon(1e-12));
}

TEST_CASE("mi node rejects bad inputs") {
    Var a = make_constant(Mat::Identity(2, 2));
    Var b = make_constant(Mat::Identity(3, 3));
    CHECK_THROWS_AS(infonce_mi_node(a, b, 0.07), ShapeError);
    CHECK_THROWS_AS(infonce_mi_node(a, a, 0.0), ConfigError);
    CHECK_THROWS_AS(infonce_mi_node(a, a, -1.0), ConfigError);
}

TEST_CASE("alignment config parses and validates") {
    Config c = Config::from_string("align.tau = 0.1\nalign.lambda = 0.5\n");
    AlignmentConfig ac = AlignmentConfig::from_config(c);
    CHECK(ac.tau == doctest::Approx(0.1));
    CHECK(ac.lambda == doctest::Approx(0.5));
    Config bad_tau = Config::from_string("align.tau = 0\n");
    CHECK_THROWS_AS(AlignmentConfig::from_config(bad_tau), ConfigError);
    Config bad_lambda = Config::from_string("align.lambda = -0.1\n");
    CHECK_THROWS_AS(AlignmentConfig::from_config(bad_lambda), ConfigError);
}

TEST_CASE("sample_depth covers the whole 1-based range") {
    Rng rng(17);
    std::set<int> seen;
    for (int i = 0; i < 500; ++i) seen.insert(sample_depth(8, rng));
    CHECK(*seen.begin() == 1);
    CHECK(*seen.rbegin() == 8);
    CHECK(seen.size() == 8);
    CHECK_THROWS_AS(sample_depth(0, rng), ConfigError);
}

TEST_CASE("align_loss_at negates the bound of the chosen block") {
    Mat f1 = random_mat(6, 4, 21), f2 = random_mat(6, 4, 22);
    Mat g1 = random_mat(6, 4, 23), g2 = random_mat(6, 4, 24);
    AttentionTrace edit = const_trace({f1, f2});
    AttentionTrace ref = const_trace({g1, g2});
    AlignmentConfig ac;

    AlignOut out = align_loss_at(edit, ref, ac, 2);
    CHECK(out.depth == 2);
    CHECK(out.mi == doctest::Approx(infonce_mi(f2, g2, ac.tau)).epsilon(1e-12));
    CHECK(val(out.loss)(0, 0) == doctest::Approx(-out.mi).epsilon(1e-12));

    CHECK_THROWS_AS(align_loss_at(edit, ref, ac, 0), IndexError);
    CHECK_THROWS_AS(align_loss_at(edit, ref, ac, 3), IndexError);
    AttentionTrace shorter = const_trace({g1});
    CHECK_THROWS_AS(align_loss_at(edit, shorter, ac, 1), ShapeError);
}

TEST_CASE("alignment gradients stop at the reference branch") {
    Mat fa = random_mat(5, 4, 31), fb = random_mat(5, 4, 32);
    Var leaf_edit = make_leaf(fa);
    Var leaf_ref = make_leaf(fb);
    BlockTrace be, br;
    be.features = leaf_edit;
    br.features = leaf_ref;
    AttentionTrace edit{be}, ref{br};
    AlignmentConfig ac;
    AlignOut out = align_loss_at(edit, ref, ac, 1);
    backward(out.loss);
    CHECK(leaf_edit->grad.size() > 0);
    CHECK(leaf_edit->grad.cwiseAbs().maxCoeff() > 0.0);
    CHECK(leaf_ref->grad.size() == 0);
}

TEST_CASE("align_loss draws its depth from the given stream") {
    Mat f = random_mat(4, 3, 41);
    std::vector<Mat> feats(8, f);
    AttentionTrace edit = const_trace(feats);
    AttentionTrace ref = const_trace(feats);
    AlignmentConfig ac;
    std::set<int> seen;
    Rng rng(55);
    for (int i = 0; i < 200; ++i) seen.insert(align_loss(edit, ref, ac, rng).depth);
    CHECK(seen.size() == 8);
}
