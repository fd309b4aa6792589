#pragma once

#include <cstdint>
#include <string_view>

namespace vedit {

/**
 * Deterministic random stream with hand-rolled distributions.
 *
 * The standard <random> distributions are implementation-defined, so two
 * builds of the same seed can disagree across standard libraries. Everything
 * here is fixed integer arithmetic (splitmix64) plus explicitly spelled-out
 * float construction, which keeps generated datasets identical across
 * platforms at fixed floating-point precision.
 */
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64();

    // Uniform on [0,1), 53-bit resolution.
    double uniform01();
    // Uniform on [lo,hi).
    double uniform(double lo, double hi);
    // Uniform integer on [0,n), unbiased (rejection sampling). n >= 1.
    uint64_t uniform_int(uint64_t n);
    // Standard normal via Box-Muller; the spare draw is cached.
    double normal();

private:
    uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Stateless mixing used to derive independent substreams from one master
// seed, e.g. stream_seed(master, "noise", step, sample). The tag is hashed
// with FNV-1a so call sites stay readable.
uint64_t mix_seed(uint64_t a, uint64_t b);
uint64_t stream_seed(uint64_t master, std::string_view tag, uint64_t a = 0, uint64_t b = 0);

}  // namespace vedit
