#include "vedit/serialize.h"

#include <cstring>
#include <fstream>
#include <ostream>
#include <vector>

namespace vedit {

namespace {

void put_bytes(std::ostream& out, const unsigned char* b, size_t n) {
    out.write(reinterpret_cast<const char*>(b), static_cast<std::streamsize>(n));
    if (!out) throw IoError("serialize: write failed");
}

void get_bytes(std::istream& in, unsigned char* b, size_t n) {
    in.read(reinterpret_cast<char*>(b), static_cast<std::streamsize>(n));
    if (static_cast<size_t>(in.gcount()) != n) throw IoError("serialize: unexpected end of stream");
}

}  // namespace

void write_u32(std::ostream& out, uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    put_bytes(out, b, 4);
}

void write_u64(std::ostream& out, uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    put_bytes(out, b, 8);
}

void write_f32(std::ostream& out, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    write_u32(out, bits);
}

void write_f64(std::ostream& out, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    write_u64(out, bits);
}

void write_string(std::ostream& out, const std::string& s) {
    write_u32(out, static_cast<uint32_t>(s.size()));
    if (!s.empty()) put_bytes(out, reinterpret_cast<const unsigned char*>(s.data()), s.size());
}

uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    get_bytes(in, b, 4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
    return v;
}

uint64_t read_u64(std::istream& in) {
    unsigned char b[8];
    get_bytes(in, b, 8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return v;
}

float read_f32(std::istream& in) {
    uint32_t bits = read_u32(in);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

double read_f64(std::istream& in) {
    uint64_t bits = read_u64(in);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

std::string read_string(std::istream& in) {
    uint32_t n = read_u32(in);
    if (n > (1u << 28)) throw IoError("serialize: implausible string length");
    std::string s(n, '\0');
    if (n) get_bytes(in, reinterpret_cast<unsigned char*>(s.data()), n);
    return s;
}

void write_mat_f32(std::ostream& out, const Mat& m) {
    write_u32(out, static_cast<uint32_t>(m.rows()));
    write_u32(out, static_cast<uint32_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            write_f32(out, static_cast<float>(m(r, c)));
}

Mat read_mat_f32(std::istream& in) {
    uint32_t rows = read_u32(in);
    uint32_t cols = read_u32(in);
    if (static_cast<uint64_t>(rows) * cols > (1ull << 30))
        throw IoError("serialize: implausible matrix size");
    Mat m(rows, cols);
    for (uint32_t r = 0; r < rows; ++r)
        for (uint32_t c = 0; c < cols; ++c)
            m(r, c) = static_cast<double>(read_f32(in));
    return m;
}

void write_video(std::ostream& out, const Video& v) {
    write_u32(out, static_cast<uint32_t>(v.T));
    write_u32(out, static_cast<uint32_t>(v.H));
    write_u32(out, static_cast<uint32_t>(v.W));
    write_u32(out, static_cast<uint32_t>(v.C));
    for (double x : v.data) write_f32(out, static_cast<float>(x));
}

Video read_video(std::istream& in) {
    uint32_t t = read_u32(in), h = read_u32(in), w = read_u32(in), c = read_u32(in);
    if (static_cast<uint64_t>(t) * h * w * c > (1ull << 30))
        throw IoError("serialize: implausible clip size");
    Video v(static_cast<int>(t), static_cast<int>(h), static_cast<int>(w), static_cast<int>(c));
    for (double& x : v.data) x = static_cast<double>(read_f32(in));
    return v;
}

void write_mask(std::ostream& out, const Mask& m) {
    write_u32(out, static_cast<uint32_t>(m.T));
    write_u32(out, static_cast<uint32_t>(m.H));
    write_u32(out, static_cast<uint32_t>(m.W));
    // Bitset, LSB-first within each byte.
    std::vector<unsigned char> packed((m.data.size() + 7) / 8, 0);
    for (size_t i = 0; i < m.data.size(); ++i)
        if (m.data[i]) packed[i / 8] |= static_cast<unsigned char>(1u << (i % 8));
    if (!packed.empty()) put_bytes(out, packed.data(), packed.size());
}

Mask read_mask(std::istream& in) {
    uint32_t t = read_u32(in), h = read_u32(in), w = read_u32(in);
    if (static_cast<uint64_t>(t) * h * w > (1ull << 30))
        throw IoError("serialize: implausible mask size");
    Mask m(static_cast<int>(t), static_cast<int>(h), static_cast<int>(w));
    std::vector<unsigned char> packed((m.data.size() + 7) / 8);
    if (!packed.empty()) get_bytes(in, packed.data(), packed.size());
    for (size_t i = 0; i < m.data.size(); ++i)
        m.data[i] = (packed[i / 8] >> (i % 8)) & 1u;
    return m;
}

void write_magic(std::ostream& out, const char magic[4]) {
    put_bytes(out, reinterpret_cast<const unsigned char*>(magic), 4);
}

void expect_magic(std::istream& in, const char magic[4], const std::string& what) {
    unsigned char b[4];
    get_bytes(in, b, 4);
    if (std::memcmp(b, magic, 4) != 0) throw IoError("serialize: " + what + ": bad magic");
}

namespace {
constexpr uint32_t kCheckpointVersion = 1;
constexpr uint32_t kClipBundleVersion = 1;

void write_named_mats(std::ostream& out, const std::map<std::string, Mat>& mats) {
    write_u32(out, static_cast<uint32_t>(mats.size()));
    for (const auto& [name, m] : mats) {
        write_string(out, name);
        write_mat_f32(out, m);
    }
}

std::map<std::string, Mat> read_named_mats(std::istream& in) {
    uint32_t n = read_u32(in);
    std::map<std::string, Mat> mats;
    for (uint32_t i = 0; i < n; ++i) {
        std::string name = read_string(in);
        mats[name] = read_mat_f32(in);
    }
    return mats;
}
}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("checkpoint: cannot open " + path + " for writing");
    write_magic(out, "VCKP");
    write_u32(out, kCheckpointVersion);
    write_string(out, ck.config_echo);
    write_u64(out, ck.step);
    write_u64(out, ck.master_seed);
    write_named_mats(out, ck.params);
    write_named_mats(out, ck.adam_m);
    write_named_mats(out, ck.adam_v);
    write_u64(out, ck.adam_t);
    if (!out) throw IoError("checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("checkpoint: cannot open " + path);
    expect_magic(in, "VCKP", path);
    uint32_t version = read_u32(in);
    if (version != kCheckpointVersion)
        throw IoError("checkpoint: unsupported version in " + path);
    Checkpoint ck;
    ck.config_echo = read_string(in);
    ck.step = read_u64(in);
    ck.master_seed = read_u64(in);
    ck.params = read_named_mats(in);
    ck.adam_m = read_named_mats(in);
    ck.adam_v = read_named_mats(in);
    ck.adam_t = read_u64(in);
    return ck;
}

void save_videos(const std::string& path,
                 const std::vector<std::pair<std::string, Video>>& clips) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("clips: cannot open " + path + " for writing");
    write_magic(out, "VSMP");
    write_u32(out, kClipBundleVersion);
    write_u32(out, static_cast<uint32_t>(clips.size()));
    for (const auto& [name, clip] : clips) {
        write_string(out, name);
        write_video(out, clip);
    }
    if (!out) throw IoError("clips: write failed for " + path);
}

std::vector<std::pair<std::string, Video>> load_videos(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("clips: cannot open " + path);
    expect_magic(in, "VSMP", path);
    uint32_t version = read_u32(in);
    if (version != kClipBundleVersion) throw IoError("clips: unsupported version in " + path);
    uint32_t n = read_u32(in);
    std::vector<std::pair<std::string, Video>> clips;
    clips.reserve(n);
    for (uint32_t i = 0; i < n; ++i) {
        std::string name = read_string(in);
        clips.emplace_back(std::move(name), read_video(in));
    }
    return clips;
}

}  // namespace vedit
