#include "vedit/counters.h"

namespace vedit::counters {

std::atomic<uint64_t> backbone_forwards{0};
std::atomic<uint64_t> reference_forwards{0};
std::atomic<uint64_t> edit_token_extractions{0};
std::atomic<uint64_t> degenerate_rows{0};

void reset() {
    backbone_forwards = 0;
    reference_forwards = 0;
    edit_token_extractions = 0;
    degenerate_rows = 0;
}

}  // namespace vedit::counters
