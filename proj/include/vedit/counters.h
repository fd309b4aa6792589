#pragma once

#include <atomic>
#include <cstdint>

namespace vedit::counters {

// Process-wide instrumentation. The sampler's no-reference-at-inference
// guarantee is asserted through these rather than through code inspection:
// reset(), run, then read.
extern std::atomic<uint64_t> backbone_forwards;
extern std::atomic<uint64_t> reference_forwards;
extern std::atomic<uint64_t> edit_token_extractions;
// Zero rows hitting the epsilon floor in row normalization; a nonzero count
// is the degeneracy warning the alignment loss logs instead of aborting.
extern std::atomic<uint64_t> degenerate_rows;

void reset();

}  // namespace vedit::counters
