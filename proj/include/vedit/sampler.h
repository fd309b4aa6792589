#pragma once

#include <cstdint>
#include <vector>

#include "vedit/backbone.h"
#include "vedit/config.h"
#include "vedit/video.h"

namespace vedit {

struct SamplerConfig {
    int t_steps = 25;
    uint64_t seed = 0;

    static SamplerConfig from_config(const Config& cfg);
    void validate() const;  // throws ConfigError

    // Noise levels t_k = k / t_steps for k = 0..t_steps; index t_steps is
    // pure noise, index 0 is data. Sampling walks the list downward.
    std::vector<double> schedule() const;
};

// One explicit Euler update from time t_k to the earlier time t_prev
// (t_prev < t_k): z' = z + (t_prev - t_k) * velocity. ScheduleError on a
// non-decreasing pair.
Mat euler_step(const Mat& z, const Mat& velocity, double t_k, double t_prev);

// Reference-free sampling: tokenize (v, instruction) once, cache the edit
// tokens, integrate the learned velocity field from Gaussian noise over the
// schedule, decode and clamp. Exactly t_steps backbone forwards, zero
// reference-branch calls.
Video sample_edit(const Video& v, const std::vector<int>& instr_tokens,
                  const ParamStore& params, const ModelConfig& mc,
                  const SamplerConfig& sc);

}  // namespace vedit
