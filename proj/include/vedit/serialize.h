#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "vedit/common.h"
#include "vedit/video.h"

namespace vedit {

// Little-endian primitives shared by every binary artifact the tool writes.
// Reads throw IoError on truncation, writes throw IoError on stream failure.
void write_u32(std::ostream& out, uint32_t v);
void write_u64(std::ostream& out, uint64_t v);
void write_f32(std::ostream& out, float v);
void write_f64(std::ostream& out, double v);
void write_string(std::ostream& out, const std::string& s);
void write_mat_f32(std::ostream& out, const Mat& m);
void write_video(std::ostream& out, const Video& v);
void write_mask(std::ostream& out, const Mask& m);

uint32_t read_u32(std::istream& in);
uint64_t read_u64(std::istream& in);
float read_f32(std::istream& in);
double read_f64(std::istream& in);
std::string read_string(std::istream& in);
Mat read_mat_f32(std::istream& in);
Video read_video(std::istream& in);
Mask read_mask(std::istream& in);

void write_magic(std::ostream& out, const char magic[4]);
void expect_magic(std::istream& in, const char magic[4], const std::string& what);

// Full training state; tensors round-trip through f32.
struct Checkpoint {
    std::string config_echo;
    uint64_t step = 0;
    uint64_t master_seed = 0;
    std::map<std::string, Mat> params;
    std::map<std::string, Mat> adam_m;
    std::map<std::string, Mat> adam_v;
    uint64_t adam_t = 0;
};

void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

// Named clip bundle, e.g. a generated sample next to its source and target.
void save_videos(const std::string& path,
                 const std::vector<std::pair<std::string, Video>>& clips);
std::vector<std::pair<std::string, Video>> load_videos(const std::string& path);

}  // namespace vedit
