#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <string>
#include <vector>

#include <jpeglib.h>

#include "vedit/judge.h"

namespace vedit {

std::vector<int> frame_indices(int total, int wanted) {
    if (total < 1) throw DomainError("frame_indices: clip has no frames");
    if (wanted < 1) throw ConfigError("frame_indices: wanted must be >= 1");
    std::vector<int> idx;
    if (total <= wanted) {
        idx.resize(total);
        for (int i = 0; i < total; ++i) idx[i] = i;
        return idx;
    }
    idx.resize(wanted);
    if (wanted == 1) {
        idx[0] = 0;
        return idx;
    }
    for (int i = 0; i < wanted; ++i)
        idx[i] = static_cast<int>(std::llround(
            static_cast<double>(i) * (total - 1) / (wanted - 1)));
    return idx;
}

namespace {

struct JpegErrorTrap {
    jpeg_error_mgr mgr;
    jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_trap(j_common_ptr cinfo) {
    auto* trap = reinterpret_cast<JpegErrorTrap*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, trap->message);
    longjmp(trap->jump, 1);
}

// Map output pixel centers back into the source grid (half-pixel alignment)
// and mix the four neighbors.
std::vector<unsigned char> resize_bilinear_rgb(const Video& v, int frame,
                                               int out_h, int out_w) {
    std::vector<unsigned char> rgb(static_cast<size_t>(out_h) * out_w * 3);
    const double sy = static_cast<double>(v.H) / out_h;
    const double sx = static_cast<double>(v.W) / out_w;
    size_t o = 0;
    for (int oy = 0; oy < out_h; ++oy) {
        double fy = std::clamp((oy + 0.5) * sy - 0.5, 0.0, v.H - 1.0);
        int y0 = static_cast<int>(fy);
        int y1 = std::min(y0 + 1, v.H - 1);
        double wy = fy - y0;
        for (int ox = 0; ox < out_w; ++ox) {
            double fx = std::clamp((ox + 0.5) * sx - 0.5, 0.0, v.W - 1.0);
            int x0 = static_cast<int>(fx);
            int x1 = std::min(x0 + 1, v.W - 1);
            double wx = fx - x0;
            for (int c = 0; c < 3; ++c) {
                double top = v.at(frame, y0, x0, c) * (1.0 - wx) +
                             v.at(frame, y0, x1, c) * wx;
                double bot = v.at(frame, y1, x0, c) * (1.0 - wx) +
                             v.at(frame, y1, x1, c) * wx;
                double mixed = top * (1.0 - wy) + bot * wy;
                int byte = static_cast<int>(std::lround(mixed * 255.0));
                rgb[o++] = static_cast<unsigned char>(std::clamp(byte, 0, 255));
            }
        }
    }
    return rgb;
}

}  // namespace

std::string encode_frame_jpeg(const Video& v, int frame, int max_side, int quality) {
    if (v.T < 1 || v.H < 1 || v.W < 1) throw ShapeError("encode_frame_jpeg: empty clip");
    if (v.C != 3) throw ShapeError("encode_frame_jpeg: 3-channel frames expected");
    if (frame < 0 || frame >= v.T)
        throw IndexError("encode_frame_jpeg: frame " + std::to_string(frame) +
                         " outside 0.." + std::to_string(v.T - 1));
    if (max_side < 1) throw ConfigError("encode_frame_jpeg: max_side must be >= 1");
    if (quality < 1 || quality > 100)
        throw ConfigError("encode_frame_jpeg: quality must lie in [1, 100]");

    const int longer = std::max(v.H, v.W);
    const double scale = longer > max_side
                             ? static_cast<double>(max_side) / longer
                             : 1.0;
    const int out_h = std::max(1, static_cast<int>(std::llround(v.H * scale)));
    const int out_w = std::max(1, static_cast<int>(std::llround(v.W * scale)));

    std::vector<unsigned char> rgb = resize_bilinear_rgb(v, frame, out_h, out_w);

    jpeg_compress_struct cinfo;
    JpegErrorTrap trap;
    cinfo.err = jpeg_std_error(&trap.mgr);
    trap.mgr.error_exit = jpeg_error_trap;
    unsigned char* buf = nullptr;
    unsigned long buf_size = 0;
    if (setjmp(trap.jump)) {
        jpeg_destroy_compress(&cinfo);
        if (buf) free(buf);
        throw IoError(std::string("encode_frame_jpeg: ") + trap.message);
    }
    jpeg_create_compress(&cinfo);
    jpeg_mem_dest(&cinfo, &buf, &buf_size);
    cinfo.image_width = static_cast<JDIMENSION>(out_w);
    cinfo.image_height = static_cast<JDIMENSION>(out_h);
    cinfo.input_components = 3;
    cinfo.in_color_space = JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    jpeg_start_compress(&cinfo, TRUE);
    const size_t stride = static_cast<size_t>(out_w) * 3;
    while (cinfo.next_scanline < cinfo.image_height) {
        JSAMPROW row = rgb.data() + cinfo.next_scanline * stride;
        jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    std::string bytes(reinterpret_cast<char*>(buf), buf_size);
    jpeg_destroy_compress(&cinfo);
    free(buf);
    return bytes;
}

}  // namespace vedit
