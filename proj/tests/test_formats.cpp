#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "vedit/serialize.h"
#include "vedit/synthdata.h"

using namespace vedit;
namespace fs = std::filesystem;

namespace {

fs::path tmp_file(const char* name) { return fs::temp_directory_path() / name; }

void write_garbage(const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    out << "GARB and then some trailing bytes";
}

}  // namespace

TEST_CASE("primitive round trips are bit-exact") {
    std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
    write_u32(ss, 0);
    write_u32(ss, 0xDEADBEEFu);
    write_u64(ss, 0x0123456789ABCDEFull);
    write_f32(ss, 3.14159f);
    write_f32(ss, -0.0f);
    write_f64(ss, 2.718281828459045);
    write_string(ss, "hello");
    write_string(ss, "");
    write_string(ss, std::string("nul\0inside", 10));

    CHECK(read_u32(ss) == 0);
    CHECK(read_u32(ss) == 0xDEADBEEFu);
    CHECK(read_u64(ss) == 0x0123456789ABCDEFull);
    CHECK(read_f32(ss) == 3.14159f);
    float neg_zero = read_f32(ss);
    CHECK(neg_zero == 0.0f);
    CHECK(std::signbit(neg_zero));
    CHECK(read_f64(ss) == 2.718281828459045);
    CHECK(read_string(ss) == "hello");
    CHECK(read_string(ss).empty());
    CHECK(read_string(ss) == std::string("nul\0inside", 10));
}

TEST_CASE("serialization is little-endian on the wire") {
    std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
    write_u32(ss, 0x01020304u);
    std::string bytes = ss.str();
    REQUIRE(bytes.size() == 4);
    CHECK(static_cast<unsigned char>(bytes[0]) == 0x04);
    CHECK(static_cast<unsigned char>(bytes[1]) == 0x03);
    CHECK(static_cast<unsigned char>(bytes[2]) == 0x02);
    CHECK(static_cast<unsigned char>(bytes[3]) == 0x01);
}

TEST_CASE("truncated streams raise IoError") {
    std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
    write_u32(ss, 7);
    read_u32(ss);
    CHECK_THROWS_AS(read_u32(ss), IoError);

    std::stringstream ss2(std::ios::in | std::ios::out | std::ios::binary);
    write_u32(ss2, 100);  // claims a 100-byte string, provides none
    CHECK_THROWS_AS(read_string(ss2), IoError);
}

TEST_CASE("matrices round-trip through f32") {
    Mat m(2, 3);
    m << 1.5, -2.25, 0.0,
         8.0, 0.125, -1024.5;  // all exactly representable in f32
    std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
    write_mat_f32(ss, m);
    Mat back = read_mat_f32(ss);
    REQUIRE(back.rows() == 2);
    REQUIRE(back.cols() == 3);
    CHECK(back == m);

    Mat precise(1, 1);
    precise(0, 0) = 0.1234567890123456;  // not f32-exact, nearby after the trip
    std::stringstream ss2(std::ios::in | std::ios::out | std::ios::binary);
    write_mat_f32(ss2, precise);
    Mat p2 = read_mat_f32(ss2);
    CHECK(p2(0, 0) == doctest::Approx(precise(0, 0)).epsilon(1e-6));
    CHECK(p2(0, 0) != precise(0, 0));

    Mat empty(0, 0);
    std::stringstream ss3(std::ios::in | std::ios::out | std::ios::binary);
    write_mat_f32(ss3, empty);
    Mat e2 = read_mat_f32(ss3);
    CHECK(e2.rows() == 0);
    CHECK(e2.cols() == 0);
}

TEST_CASE("videos and masks round-trip") {
    Video v(2, 3, 4, 3);
    for (size_t i = 0; i < v.data.size(); ++i)
        v.data[i] = static_cast<double>(i % 256) / 256.0;  // f32-exact values
    std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
    write_video(ss, v);
    Video v2 = read_video(ss);
    CHECK(v2.T == v.T);
    CHECK(v2.H == v.H);
    CHECK(v2.W == v.W);
    CHECK(v2.C == v.C);
    CHECK(v2.data == v.data);

    // 9 flags per frame, so the packed bitset has a partial trailing byte.
    Mask m(3, 3, 3);
    for (size_t i = 0; i < m.data.size(); ++i) m.data[i] = (i % 3 == 0) ? 1 : 0;
    std::stringstream ss2(std::ios::in | std::ios::out | std::ios::binary);
    write_mask(ss2, m);
    Mask m2 = read_mask(ss2);
    CHECK(m2.T == m.T);
    CHECK(m2.H == m.H);
    CHECK(m2.W == m.W);
    CHECK(m2.data == m.data);
    CHECK(m2.count_set() == m.count_set());
}

TEST_CASE("checkpoints round-trip everything") {
    Checkpoint ck;
    ck.config_echo = "model.width = 32\ntrain.steps = 10\n";
    ck.step = 1234;
    ck.master_seed = 0xFEEDFACEull;
    ck.adam_t = 77;
    Mat w(2, 2);
    w << 0.5, -0.25, 1.0, 2.0;
    Mat b(1, 2);
    b << 0.0, -8.5;
    ck.params["layer.w"] = w;
    ck.params["layer.b"] = b;
    ck.adam_m["layer.w"] = Mat::Zero(2, 2);
    ck.adam_m["layer.b"] = Mat::Zero(1, 2);
    ck.adam_v["layer.w"] = Mat::Constant(2, 2, 0.125);
    ck.adam_v["layer.b"] = Mat::Constant(1, 2, 0.0625);

    fs::path path = tmp_file("vedit_test_ck.vckp");
    save_checkpoint(path.string(), ck);
    Checkpoint back = load_checkpoint(path.string());
    fs::remove(path);

    CHECK(back.config_echo == ck.config_echo);
    CHECK(back.step == ck.step);
    CHECK(back.master_seed == ck.master_seed);
    CHECK(back.adam_t == ck.adam_t);
    REQUIRE(back.params.size() == 2);
    CHECK(back.params.at("layer.w") == w);
    CHECK(back.params.at("layer.b") == b);
    CHECK(back.adam_m.at("layer.w") == Mat::Zero(2, 2));
    CHECK(back.adam_v.at("layer.w") == Mat::Constant(2, 2, 0.125));
}

TEST_CASE("checkpoint tensors survive within f32 precision") {
    Checkpoint ck;
    ck.config_echo = "x = 1\n";
    Mat w(3, 3);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) w(r, c) = 0.001 * (r * 3 + c) + 1.0 / 3.0;
    ck.params["w"] = w;
    fs::path path = tmp_file("vedit_test_ck2.vckp");
    save_checkpoint(path.string(), ck);
    Checkpoint back = load_checkpoint(path.string());
    fs::remove(path);
    const Mat& bw = back.params.at("w");
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            CHECK(bw(r, c) == doctest::Approx(w(r, c)).epsilon(1e-6));
}

TEST_CASE("clip bundles preserve names and order") {
    Video a(1, 2, 2, 3);
    a.data.assign(a.data.size(), 0.5);
    Video b(2, 2, 2, 3);
    b.data.assign(b.data.size(), 0.25);
    fs::path path = tmp_file("vedit_test_clips.vsmp");
    save_videos(path.string(), {{"source", a}, {"generated", b}});
    auto clips = load_videos(path.string());
    fs::remove(path);
    REQUIRE(clips.size() == 2);
    CHECK(clips[0].first == "source");
    CHECK(clips[1].first == "generated");
    CHECK(clips[0].second.data == a.data);
    CHECK(clips[1].second.T == 2);
}

TEST_CASE("datasets round-trip samples and the config echo") {
    DataConfig dc;
    std::vector<Sample> samples;
    for (uint64_t s = 1; s <= 3; ++s) samples.push_back(generate_sample(s, dc));
    fs::path path = tmp_file("vedit_test_data.vrec");
    save_dataset(path.string(), samples, "data.frames = 4\n");
    auto [back, echo] = load_dataset(path.string());
    fs::remove(path);

    CHECK(echo == "data.frames = 4\n");
    REQUIRE(back.size() == 3);
    for (size_t i = 0; i < 3; ++i) {
        CHECK(back[i].seed == samples[i].seed);
        CHECK(back[i].instruction.category == samples[i].instruction.category);
        CHECK(back[i].instruction.tokens == samples[i].instruction.tokens);
        CHECK(back[i].instruction.text == samples[i].instruction.text);
        CHECK(back[i].caption == samples[i].caption);
        // Pixel data was synthesized from a small palette; the palette colors
        // are f32-exact by construction, so the trip is lossless.
        CHECK(back[i].source.data == samples[i].source.data);
        CHECK(back[i].edited.data == samples[i].edited.data);
        CHECK(back[i].mask.data == samples[i].mask.data);
    }
}

TEST_CASE("bad magic raises IoError in every loader") {
    fs::path path = tmp_file("vedit_test_garbage.bin");
    write_garbage(path);
    CHECK_THROWS_AS(load_checkpoint(path.string()), IoError);
    CHECK_THROWS_AS(load_videos(path.string()), IoError);
    CHECK_THROWS_AS(load_dataset(path.string()), IoError);
    fs::remove(path);

    CHECK_THROWS_AS(load_checkpoint("/nonexistent/x.vckp"), IoError);
    CHECK_THROWS_AS(load_videos("/nonexistent/x.vsmp"), IoError);
    CHECK_THROWS_AS(load_dataset("/nonexistent/x.vrec"), IoError);
}

TEST_CASE("truncated checkpoint raises IoError") {
    Checkpoint ck;
    ck.config_echo = "a = 1\n";
    ck.params["w"] = Mat::Constant(4, 4, 1.0);
    fs::path path = tmp_file("vedit_test_trunc.vckp");
    save_checkpoint(path.string(), ck);
    auto size = fs::file_size(path);
    fs::resize_file(path, size / 2);
    CHECK_THROWS_AS(load_checkpoint(path.string()), IoError);
    fs::remove(path);
}
