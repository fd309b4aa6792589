#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vedit/alignment.h"
#include "vedit/backbone.h"
#include "vedit/serialize.h"
#include "vedit/synthdata.h"

namespace vedit {

struct TrainConfig {
    int64_t steps = 2000;
    int batch = 16;
    double lr = 1e-5;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    double weight_decay = 0.01;
    double clip_norm = 1.0;
    uint64_t seed = 1;
    int64_t checkpoint_every = 500;
    int64_t log_every = 50;

    static TrainConfig from_config(const Config& cfg);
    void validate() const;  // throws ConfigError
};

struct StepReport {
    int64_t step = 0;
    double loss_fm = 0.0;
    double loss_align = 0.0;
    double loss_total = 0.0;
    int depth = 0;    // 0 when alignment is off
    double mi = 0.0;  // bound value at the sampled depth
    double grad_norm = 0.0;  // before clipping
    double wall_ms = 0.0;
};

// Non-finite loss or gradient; carries the offending report so the caller
// can log it. The parameter update is not applied.
struct NumericDivergence : NumericError {
    StepReport report;
    NumericDivergence(const std::string& m, StepReport r)
        : NumericError(m), report(std::move(r)) {}
};

// Rectified linear interpolant: z_t = (1-t)*noise + t*target, velocity
// target u = target - noise. DomainError outside t in [0,1].
std::pair<Mat, Mat> flow_target(const Mat& noise, const Mat& target, double t);

struct BatchLossStats {
    double fm = 0.0;
    double align = 0.0;
    double total = 0.0;
    double mi = 0.0;
    int depth = 0;
};

// Joint loss over a batch: flow matching on the editing branch plus the
// alignment term at the given depth (ignored when lambda is 0, where the
// reference branch is skipped entirely). Per-sample time and noise come from
// substreams of noise_seed. When grads is non-null, parameter gradients of
// the batch-mean loss are accumulated into it. ref_params, when given, runs
// the reference branch on a separate frozen parameter set (used to prove
// detachment); by default both branches share `params`.
BatchLossStats batch_loss(const std::vector<Sample>& batch, const ParamStore& params,
                          const ModelConfig& mc, const AlignmentConfig& ac,
                          uint64_t noise_seed, int depth, ParamStore* grads,
                          const ParamStore* ref_params = nullptr);

class Trainer {
public:
    // Fresh run: parses data/model/align/train settings, validates, and
    // initializes parameters from the master seed.
    explicit Trainer(const Config& cfg);
    static Trainer from_checkpoint(const Checkpoint& ck);

    StepReport training_step(const std::vector<Sample>& batch);
    std::vector<Sample> draw_batch(int64_t step) const;

    Checkpoint to_checkpoint() const;

    int64_t step() const { return step_; }
    const ParamStore& params() const { return params_; }
    const ModelConfig& model_config() const { return mc_; }
    const DataConfig& data_config() const { return dc_; }
    const AlignmentConfig& align_config() const { return ac_; }
    const TrainConfig& train_config() const { return tc_; }
    const std::string& config_echo() const { return echo_; }

private:
    Trainer() = default;

    DataConfig dc_;
    ModelConfig mc_;
    AlignmentConfig ac_;
    TrainConfig tc_;
    std::string echo_;
    ParamStore params_;
    ParamStore m_, v_;
    uint64_t adam_t_ = 0;
    int64_t step_ = 0;
};

}  // namespace vedit
