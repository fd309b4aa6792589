#include "vedit/rng.h"

#include <cmath>

#include "vedit/common.h"

namespace vedit {

namespace {

inline uint64_t splitmix64(uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t fnv1a(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

uint64_t Rng::next_u64() { return splitmix64(state_); }

double Rng::uniform01() {
    // Top 53 bits -> [0,1) on the representable grid.
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

uint64_t Rng::uniform_int(uint64_t n) {
    if (n == 0) throw ConfigError("uniform_int: n must be >= 1");
    // Reject draws above the largest multiple of n to avoid modulo bias.
    const uint64_t rem = (UINT64_MAX % n + 1) % n;  // 2^64 mod n
    const uint64_t limit = UINT64_MAX - rem;        // last accepted value
    uint64_t x;
    do {
        x = next_u64();
    } while (x > limit);
    return x % n;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Box-Muller on u1 in (0,1] so the log never sees zero.
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

uint64_t mix_seed(uint64_t a, uint64_t b) {
    uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
    return splitmix64(x);
}

uint64_t stream_seed(uint64_t master, std::string_view tag, uint64_t a, uint64_t b) {
    return mix_seed(mix_seed(mix_seed(master, fnv1a(tag)), a), b);
}

}  // namespace vedit
