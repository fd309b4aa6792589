#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace vedit {

// Dense clip, T frames of H x W pixels with C channels, values in [0, 1].
struct Video {
    int T = 0, H = 0, W = 0, C = 0;
    std::vector<double> data;

    Video() = default;
    Video(int t, int h, int w, int c)
        : T(t), H(h), W(w), C(c), data(static_cast<size_t>(t) * h * w * c, 0.0) {}

    size_t idx(int t, int y, int x, int c) const {
        return ((static_cast<size_t>(t) * H + y) * W + x) * C + c;
    }
    double& at(int t, int y, int x, int c) { return data[idx(t, y, x, c)]; }
    double at(int t, int y, int x, int c) const { return data[idx(t, y, x, c)]; }

    bool same_shape(const Video& o) const {
        return T == o.T && H == o.H && W == o.W && C == o.C;
    }
};

// Per-pixel edit region, one flag per (t, y, x).
struct Mask {
    int T = 0, H = 0, W = 0;
    std::vector<uint8_t> data;

    Mask() = default;
    Mask(int t, int h, int w, uint8_t fill = 0)
        : T(t), H(h), W(w), data(static_cast<size_t>(t) * h * w, fill) {}

    size_t idx(int t, int y, int x) const {
        return (static_cast<size_t>(t) * H + y) * W + x;
    }
    uint8_t& at(int t, int y, int x) { return data[idx(t, y, x)]; }
    uint8_t at(int t, int y, int x) const { return data[idx(t, y, x)]; }

    size_t count_set() const {
        size_t n = 0;
        for (uint8_t v : data) n += (v != 0);
        return n;
    }
};

}  // namespace vedit
