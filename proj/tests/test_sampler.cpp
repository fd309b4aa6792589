#include <doctest.h>

#include <cmath>
#include <vector>

#include "vedit/backbone.h"
#include "vedit/counters.h"
#include "vedit/sampler.h"
#include "vedit/synthdata.h"
#include "vedit/tokenizer.h"

using namespace vedit;

namespace {

ModelConfig desk_model() {
    ModelConfig mc;
    mc.validate();
    return mc;
}

ParamStore sampler_params(const ModelConfig& mc, uint64_t seed = 3) {
    ParamStore params;
    Rng rng(stream_seed(seed, "init"));
    tokenizer_init(params, mc, rng);
    backbone_init(params, mc, rng);
    return params;
}

Mat initial_latent(const ModelConfig& mc, uint64_t sampler_seed) {
    Rng rng(stream_seed(sampler_seed, "latent"));
    Mat z(mc.n_visual(), mc.latent_dim());
    for (long r = 0; r < z.rows(); ++r)
        for (long c = 0; c < z.cols(); ++c) z(r, c) = rng.normal();
    return z;
}

Sample desk_sample(uint64_t seed) {
    DataConfig dc;
    return generate_sample(seed, dc);
}

}  // namespace

TEST_CASE("schedule spans [0,1] with uniform spacing") {
    SamplerConfig sc;
    sc.t_steps = 4;
    std::vector<double> t = sc.schedule();
    REQUIRE(t.size() == 5);
    CHECK(t.front() == 0.0);
    CHECK(t.back() == 1.0);
    for (int k = 1; k <= 4; ++k) CHECK(t[static_cast<size_t>(k)] == doctest::Approx(k / 4.0));
    sc.t_steps = 0;
    CHECK_THROWS_AS(sc.validate(), ConfigError);
}

TEST_CASE("euler_step applies the literal first-order update") {
    Mat z(2, 2), vel(2, 2);
    z << 1, 2, 3, 4;
    vel << 10, 20, 30, 40;
    Mat z2 = euler_step(z, vel, 0.5, 0.25);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(z2(i, j) == doctest::Approx(z(i, j) - 0.25 * vel(i, j)));

    CHECK_THROWS_AS(euler_step(z, vel, 0.25, 0.5), ScheduleError);
    CHECK_THROWS_AS(euler_step(z, vel, 0.5, 0.5), ScheduleError);
    CHECK_THROWS_AS(euler_step(z, Mat::Zero(1, 2), 0.5, 0.25), ShapeError);
}

TEST_CASE("zero velocity keeps the initial noise") {
    ModelConfig mc = desk_model();
    ParamStore params = sampler_params(mc);
    params.at("bb.out_w").setZero();
    params.at("bb.out_b").setZero();
    Sample s = desk_sample(50);
    SamplerConfig sc;
    sc.t_steps = 7;
    sc.seed = 99;
    Video out = sample_edit(s.source, s.instruction.tokens, params, mc, sc);
    Video expect = latent_to_video(initial_latent(mc, sc.seed), mc);
    CHECK(out.data == expect.data);
}

TEST_CASE("constant velocity integrates exactly regardless of step count") {
    ModelConfig mc = desk_model();
    ParamStore params = sampler_params(mc);
    params.at("bb.out_w").setZero();
    params.at("bb.out_b").setConstant(0.25);
    Sample s = desk_sample(51);

    SamplerConfig one;
    one.t_steps = 1;
    one.seed = 5;
    SamplerConfig many;
    many.t_steps = 100;
    many.seed = 5;
    Video a = sample_edit(s.source, s.instruction.tokens, params, mc, one);
    Video b = sample_edit(s.source, s.instruction.tokens, params, mc, many);
    REQUIRE(a.data.size() == b.data.size());
    for (size_t i = 0; i < a.data.size(); ++i)
        CHECK(a.data[i] == doctest::Approx(b.data[i]).epsilon(1e-9));

    // And the integral moves the latent by exactly -(-velocity) = +0.25.
    Mat z0 = initial_latent(mc, one.seed);
    Video expect = latent_to_video(Mat(z0.array() + 0.25), mc);
    for (size_t i = 0; i < a.data.size(); ++i)
        CHECK(a.data[i] == doctest::Approx(expect.data[i]).epsilon(1e-9));
}

TEST_CASE("sampling runs the backbone once per step and never the reference") {
    ModelConfig mc = desk_model();
    ParamStore params = sampler_params(mc);
    Sample s = desk_sample(52);
    SamplerConfig sc;
    sc.t_steps = 25;
    sc.seed = 1;

    counters::reset();
    sample_edit(s.source, s.instruction.tokens, params, mc, sc);
    CHECK(counters::backbone_forwards.load() == 25);
    CHECK(counters::reference_forwards.load() == 0);
    // Conditioning is tokenized exactly once, not per step.
    CHECK(counters::edit_token_extractions.load() == 1);
}

TEST_CASE("sampling is deterministic in all of its seeds") {
    ModelConfig mc = desk_model();
    ParamStore params = sampler_params(mc);
    Sample s = desk_sample(53);
    SamplerConfig sc;
    sc.t_steps = 5;
    sc.seed = 11;
    Video a = sample_edit(s.source, s.instruction.tokens, params, mc, sc);
    Video b = sample_edit(s.source, s.instruction.tokens, params, mc, sc);
    CHECK(a.data == b.data);

    sc.seed = 12;
    Video c = sample_edit(s.source, s.instruction.tokens, params, mc, sc);
    bool same = a.data == c.data;
    CHECK_FALSE(same);
}

TEST_CASE("output clips stay inside the pixel range") {
    ModelConfig mc = desk_model();
    ParamStore params = sampler_params(mc);
    Sample s = desk_sample(54);
    SamplerConfig sc;
    sc.t_steps = 3;
    sc.seed = 2;
    Video out = sample_edit(s.source, s.instruction.tokens, params, mc, sc);
    CHECK(out.T == mc.T);
    CHECK(out.H == mc.H);
    CHECK(out.W == mc.W);
    CHECK(out.C == mc.C);
    for (double x : out.data) {
        CHECK(x >= 0.0);
        CHECK(x <= 1.0);
    }
}
