#include "vedit/synthdata.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "vedit/rng.h"
#include "vedit/serialize.h"

namespace vedit {

namespace {

using Color = std::array<double, 3>;

// Channel levels quantized to float32 so a clip survives the float32 record
// format bit-exactly; the oracle recovers scenes by exact color equality.
constexpr double q(double x) { return static_cast<double>(static_cast<float>(x)); }
constexpr double kLo = q(0.15), kMid = q(0.45), kHi = q(0.75);

const std::array<Color, 16> kPalette = {{
    {kLo, kLo, kLo},     // 0 background
    {kMid, kMid, kMid},  // 1 gray
    {kHi, kHi, kHi},     // 2 light gray
    {kHi, kLo, kLo},     // 3 red
    {kLo, kHi, kLo},     // 4 green
    {kLo, kLo, kHi},     // 5 blue
    {kHi, kHi, kLo},     // 6 yellow
    {kHi, kLo, kHi},     // 7 magenta
    {kLo, kHi, kHi},     // 8 cyan
    {kHi, kMid, kLo},    // 9 orange
    {kMid, kLo, kHi},    // 10 purple
    {kLo, kMid, kHi},    // 11 azure
    {kMid, kHi, kLo},    // 12 lime
    {kHi, kLo, kMid},    // 13 pink
    {kLo, kHi, kMid},    // 14 spring green
    {kMid, kMid, kLo},   // 15 olive
}};

const char* kColorNames[16] = {
    "background", "gray",   "light gray", "red",  "green",        "blue",
    "yellow",     "magenta", "cyan",      "orange", "purple",     "azure",
    "lime",       "pink",    "spring green", "olive"};

const char* kStyleNames[4] = {"identity", "duotone", "grayscale", "warm"};

const std::array<std::pair<int, int>, 5> kSizes = {{{3, 3}, {4, 4}, {5, 5}, {4, 6}, {6, 4}}};

Color pixel(const Video& v, int t, int y, int x) {
    return {v.at(t, y, x, 0), v.at(t, y, x, 1), v.at(t, y, x, 2)};
}

void put_pixel(Video& v, int t, int y, int x, const Color& c) {
    v.at(t, y, x, 0) = c[0];
    v.at(t, y, x, 1) = c[1];
    v.at(t, y, x, 2) = c[2];
}

struct Box {
    int y0, x0, y1, x1;  // inclusive
};

// True when the boxes are closer than one empty pixel in both axes.
bool too_close(const Box& a, const Box& b) {
    return !(a.x1 + 1 < b.x0 || b.x1 + 1 < a.x0 || a.y1 + 1 < b.y0 || b.y1 + 1 < a.y0);
}

Box rect_box(const RectSpec& r, int t) {
    int y = r.y0 + r.vy * t;
    int x = r.x0 + r.vx * t;
    return {y, x, y + r.h - 1, x + r.w - 1};
}

int nearest_in(const Color& c, const std::vector<int>& subset) {
    int best = subset[0];
    double best_d = std::numeric_limits<double>::infinity();
    for (int idx : subset) {
        const Color& p = kPalette[static_cast<size_t>(idx)];
        double d = 0;
        for (int ch = 0; ch < 3; ++ch) d += (c[ch] - p[ch]) * (c[ch] - p[ch]);
        if (d < best_d) {
            best_d = d;
            best = idx;
        }
    }
    return best;
}

}  // namespace

const std::array<std::array<double, 3>, 16>& palette() { return kPalette; }

const char* color_name(int palette_idx) {
    if (palette_idx < 0 || palette_idx >= 16) throw IndexError("color_name: index out of range");
    return kColorNames[palette_idx];
}

const std::vector<int>& style_palette(int style_idx) {
    static const std::vector<int> styles[4] = {
        {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15},  // identity
        {0, 6},                                                   // duotone
        {0, 1, 2},                                                // grayscale
        {0, 3, 6, 9, 13},                                         // warm
    };
    if (style_idx < 0 || style_idx >= 4) throw IndexError("style_palette: index out of range");
    return styles[style_idx];
}

const char* style_name(int style_idx) {
    if (style_idx < 0 || style_idx >= 4) throw IndexError("style_name: index out of range");
    return kStyleNames[style_idx];
}

const std::array<std::pair<int, int>, 5>& size_table() { return kSizes; }

std::string category_name(EditCategory c) {
    switch (c) {
        case EditCategory::LocalChange: return "local_change";
        case EditCategory::LocalRemove: return "local_remove";
        case EditCategory::LocalAdd: return "local_add";
        case EditCategory::GlobalStyle: return "global_style";
    }
    throw IndexError("category_name: bad category");
}

EditCategory category_from_name(const std::string& name) {
    if (name == "local_change") return EditCategory::LocalChange;
    if (name == "local_remove") return EditCategory::LocalRemove;
    if (name == "local_add") return EditCategory::LocalAdd;
    if (name == "global_style") return EditCategory::GlobalStyle;
    throw ConfigError("unknown edit category '" + name + "'");
}

DataConfig DataConfig::from_config(const Config& cfg) {
    DataConfig d;
    d.T = static_cast<int>(cfg.get_int("data.frames", d.T));
    d.H = static_cast<int>(cfg.get_int("data.height", d.H));
    d.W = static_cast<int>(cfg.get_int("data.width", d.W));
    d.C = static_cast<int>(cfg.get_int("data.channels", d.C));
    d.instr_len = static_cast<int>(cfg.get_int("data.instr_len", d.instr_len));
    d.vocab = static_cast<int>(cfg.get_int("data.vocab", d.vocab));
    d.min_rects = static_cast<int>(cfg.get_int("data.min_rects", d.min_rects));
    d.max_rects = static_cast<int>(cfg.get_int("data.max_rects", d.max_rects));
    std::string cats = cfg.get_string("data.categories", "all");
    if (cats != "all") {
        d.categories.clear();
        std::istringstream in(cats);
        std::string item;
        while (std::getline(in, item, ',')) {
            size_t a = item.find_first_not_of(" \t");
            size_t b = item.find_last_not_of(" \t");
            if (a == std::string::npos) continue;
            d.categories.push_back(category_from_name(item.substr(a, b - a + 1)));
        }
    }
    d.validate();
    return d;
}

void DataConfig::validate() const {
    if (T < 2) throw ConfigError("data.frames must be >= 2");
    if (H < 8 || W < 8) throw ConfigError("data.height/width must be >= 8");
    if (C != 3) throw ConfigError("data.channels must be 3 (scenes are RGB)");
    if (instr_len < 4 || instr_len > 64) throw ConfigError("data.instr_len must be in [4,64]");
    if (vocab < tok::kVocab) throw ConfigError("data.vocab must be >= 64");
    if (min_rects < 1 || max_rects > 3 || min_rects > max_rects)
        throw ConfigError("rect counts must satisfy 1 <= min <= max <= 3");
    if (categories.empty()) throw ConfigError("data.categories must not be empty");
}

Video render_scene(const Scene& s) {
    Video v(s.T, s.H, s.W, 3);
    const Color& bg = kPalette[static_cast<size_t>(s.bg_color)];
    for (int t = 0; t < s.T; ++t)
        for (int y = 0; y < s.H; ++y)
            for (int x = 0; x < s.W; ++x) put_pixel(v, t, y, x, bg);
    for (const RectSpec& r : s.rects) {
        const Color& c = kPalette[static_cast<size_t>(r.color)];
        for (int t = 0; t < s.T; ++t) {
            Box b = rect_box(r, t);
            for (int y = b.y0; y <= b.y1; ++y)
                for (int x = b.x0; x <= b.x1; ++x) put_pixel(v, t, y, x, c);
        }
    }
    return v;
}

RecoveredScene recover_scene(const Video& v) {
    if (v.C != 3) throw ShapeError("recover_scene: clip must have 3 channels");
    if (v.T < 1 || v.H < 1 || v.W < 1) throw ShapeError("recover_scene: empty clip");

    // Background is the most frequent exact color of the first frame.
    std::map<Color, int> counts;
    for (int y = 0; y < v.H; ++y)
        for (int x = 0; x < v.W; ++x) ++counts[pixel(v, 0, y, x)];
    Color bg = counts.begin()->first;
    int best = -1;
    for (const auto& [c, n] : counts)
        if (n > best) {
            best = n;
            bg = c;
        }
    int bg_idx = -1;
    for (int i = 0; i < 16; ++i)
        if (kPalette[static_cast<size_t>(i)] == bg) bg_idx = i;

    struct FrameRect {
        Color color;
        int y, x, h, w;
    };
    std::vector<std::vector<FrameRect>> frames(static_cast<size_t>(v.T));

    for (int t = 0; t < v.T; ++t) {
        std::vector<uint8_t> seen(static_cast<size_t>(v.H) * v.W, 0);
        for (int sy = 0; sy < v.H; ++sy) {
            for (int sx = 0; sx < v.W; ++sx) {
                if (seen[static_cast<size_t>(sy) * v.W + sx]) continue;
                if (pixel(v, t, sy, sx) == bg) continue;
                Color col = pixel(v, t, sy, sx);
                std::vector<std::pair<int, int>> stack{{sy, sx}};
                seen[static_cast<size_t>(sy) * v.W + sx] = 1;
                int y0 = sy, y1 = sy, x0 = sx, x1 = sx;
                size_t count = 0;
                while (!stack.empty()) {
                    auto [y, x] = stack.back();
                    stack.pop_back();
                    ++count;
                    if (pixel(v, t, y, x) != col)
                        throw DomainError("recover_scene: component is not a single color");
                    y0 = std::min(y0, y); y1 = std::max(y1, y);
                    x0 = std::min(x0, x); x1 = std::max(x1, x);
                    const int dy[4] = {1, -1, 0, 0};
                    const int dx[4] = {0, 0, 1, -1};
                    for (int k = 0; k < 4; ++k) {
                        int ny = y + dy[k], nx = x + dx[k];
                        if (ny < 0 || ny >= v.H || nx < 0 || nx >= v.W) continue;
                        if (seen[static_cast<size_t>(ny) * v.W + nx]) continue;
                        if (pixel(v, t, ny, nx) == bg) continue;
                        seen[static_cast<size_t>(ny) * v.W + nx] = 1;
                        stack.emplace_back(ny, nx);
                    }
                }
                int h = y1 - y0 + 1, w = x1 - x0 + 1;
                if (count != static_cast<size_t>(h) * w)
                    throw DomainError("recover_scene: component is not a filled rectangle");
                for (const FrameRect& other : frames[static_cast<size_t>(t)])
                    if (other.color == col)
                        throw DomainError("recover_scene: repeated color within a frame");
                frames[static_cast<size_t>(t)].push_back({col, y0, x0, h, w});
            }
        }
    }

    const auto& f0 = frames[0];
    for (int t = 1; t < v.T; ++t)
        if (frames[static_cast<size_t>(t)].size() != f0.size())
            throw DomainError("recover_scene: object count changes across frames");

    std::vector<size_t> order(f0.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (f0[a].y != f0[b].y) return f0[a].y < f0[b].y;
        return f0[a].x < f0[b].x;
    });

    RecoveredScene sc;
    sc.bg_color = bg_idx;
    if (bg_idx < 0) throw DomainError("recover_scene: background is not a palette color");
    for (size_t oi : order) {
        RecoveredObject obj;
        const FrameRect& r0 = f0[oi];
        int color_idx = -1;
        for (int i = 0; i < 16; ++i)
            if (kPalette[static_cast<size_t>(i)] == r0.color) color_idx = i;
        if (color_idx < 0) throw DomainError("recover_scene: object color is not in the palette");
        obj.color = color_idx;
        obj.h = r0.h;
        obj.w = r0.w;
        for (int t = 0; t < v.T; ++t) {
            const FrameRect* match = nullptr;
            for (const FrameRect& r : frames[static_cast<size_t>(t)])
                if (r.color == r0.color) match = &r;
            if (!match || match->h != r0.h || match->w != r0.w)
                throw DomainError("recover_scene: object changes shape or vanishes");
            obj.pos.emplace_back(match->y, match->x);
        }
        sc.objects.push_back(std::move(obj));
    }
    return sc;
}

ParsedInstruction parse_instruction(const std::vector<int>& tokens) {
    if (tokens.empty()) throw VocabError("instruction is empty");
    std::vector<int> body;
    bool padding = false;
    for (int t : tokens) {
        if (t < 0 || t >= tok::kVocab) throw VocabError("token out of vocabulary");
        if (t == tok::kPad) {
            padding = true;
            continue;
        }
        if (padding) throw VocabError("padding must be a suffix");
        body.push_back(t);
    }
    if (body.empty()) throw VocabError("instruction has no verb");

    auto expect_args = [&](size_t n) {
        if (body.size() != n + 1)
            throw VocabError("instruction has wrong argument count");
    };
    auto in_range = [&](int v, int lo, int hi, const char* what) {
        if (v < lo || v >= hi) throw VocabError(std::string("instruction argument is not a ") + what);
        return v;
    };

    ParsedInstruction pi;
    switch (body[0]) {
        case tok::kVerbRecolor:
            pi.category = EditCategory::LocalChange;
            expect_args(2);
            pi.object = in_range(body[1], tok::kObj0, tok::kObj0 + 3, "object code") - tok::kObj0;
            pi.color = in_range(body[2], tok::kColor0, tok::kColor0 + 16, "color code") - tok::kColor0;
            break;
        case tok::kVerbRemove:
            pi.category = EditCategory::LocalRemove;
            expect_args(1);
            pi.object = in_range(body[1], tok::kObj0, tok::kObj0 + 3, "object code") - tok::kObj0;
            break;
        case tok::kVerbAdd:
            pi.category = EditCategory::LocalAdd;
            expect_args(3);
            pi.color = in_range(body[1], tok::kColor0, tok::kColor0 + 16, "color code") - tok::kColor0;
            pi.pos = in_range(body[2], tok::kPos0, tok::kPos0 + 16, "position code") - tok::kPos0;
            pi.size = in_range(body[3], tok::kSize0, tok::kSize0 + 5, "size code") - tok::kSize0;
            break;
        case tok::kVerbStyle:
            pi.category = EditCategory::GlobalStyle;
            expect_args(1);
            pi.style = in_range(body[1], tok::kStyle0, tok::kStyle0 + 4, "style code") - tok::kStyle0;
            break;
        default:
            throw VocabError("instruction does not start with a verb");
    }
    return pi;
}

std::pair<Video, Mask> oracle_edit(const Video& v, const std::vector<int>& instr_tokens) {
    ParsedInstruction pi = parse_instruction(instr_tokens);
    Video target = v;

    if (pi.category == EditCategory::GlobalStyle) {
        if (pi.style != 0) {
            const std::vector<int>& subset = style_palette(pi.style);
            for (int t = 0; t < v.T; ++t)
                for (int y = 0; y < v.H; ++y)
                    for (int x = 0; x < v.W; ++x)
                        put_pixel(target, t, y, x,
                                  kPalette[static_cast<size_t>(nearest_in(pixel(v, t, y, x), subset))]);
        }
    } else {
        RecoveredScene sc = recover_scene(v);
        if (pi.category == EditCategory::LocalAdd) {
            auto [h, w] = kSizes[static_cast<size_t>(pi.size)];
            int ay = 4 * (pi.pos / 4), ax = 4 * (pi.pos % 4);
            if (ay + h > v.H || ax + w > v.W)
                throw UnsatisfiableInstructionError("insertion does not fit inside the frame");
            Box nb{ay, ax, ay + h - 1, ax + w - 1};
            for (const RecoveredObject& obj : sc.objects)
                for (const auto& [oy, ox] : obj.pos)
                    if (too_close(nb, Box{oy, ox, oy + obj.h - 1, ox + obj.w - 1}))
                        throw UnsatisfiableInstructionError("insertion collides with an existing object");
            const Color& c = kPalette[static_cast<size_t>(pi.color)];
            for (int t = 0; t < v.T; ++t)
                for (int y = nb.y0; y <= nb.y1; ++y)
                    for (int x = nb.x0; x <= nb.x1; ++x) put_pixel(target, t, y, x, c);
        } else {
            if (pi.object >= static_cast<int>(sc.objects.size()))
                throw UnsatisfiableInstructionError("the clip has no rectangle " +
                                                    std::to_string(pi.object + 1));
            const RecoveredObject& obj = sc.objects[static_cast<size_t>(pi.object)];
            int paint = pi.category == EditCategory::LocalChange ? pi.color : sc.bg_color;
            const Color& c = kPalette[static_cast<size_t>(paint)];
            for (int t = 0; t < v.T; ++t) {
                auto [oy, ox] = obj.pos[static_cast<size_t>(t)];
                for (int y = oy; y < oy + obj.h; ++y)
                    for (int x = ox; x < ox + obj.w; ++x) put_pixel(target, t, y, x, c);
            }
        }
    }

    Mask mask(v.T, v.H, v.W);
    for (int t = 0; t < v.T; ++t)
        for (int y = 0; y < v.H; ++y)
            for (int x = 0; x < v.W; ++x)
                mask.at(t, y, x) = pixel(v, t, y, x) != pixel(target, t, y, x) ? 1 : 0;
    return {std::move(target), std::move(mask)};
}

namespace {

std::optional<Scene> draw_scene(Rng& rng, const DataConfig& cfg) {
    Scene s;
    s.T = cfg.T;
    s.H = cfg.H;
    s.W = cfg.W;
    int n = cfg.min_rects + static_cast<int>(rng.uniform_int(
                                static_cast<uint64_t>(cfg.max_rects - cfg.min_rects + 1)));
    std::vector<int> used_colors;
    for (int i = 0; i < n; ++i) {
        int c;
        do {
            c = 2 + static_cast<int>(rng.uniform_int(14));
        } while (std::find(used_colors.begin(), used_colors.end(), c) != used_colors.end());
        used_colors.push_back(c);
    }
    for (int i = 0; i < n; ++i) {
        bool placed = false;
        for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
            RectSpec r;
            r.color = used_colors[static_cast<size_t>(i)];
            r.h = 3 + static_cast<int>(rng.uniform_int(5));
            r.w = 3 + static_cast<int>(rng.uniform_int(5));
            r.vy = static_cast<int>(rng.uniform_int(3)) - 1;
            r.vx = static_cast<int>(rng.uniform_int(3)) - 1;
            int span = cfg.T - 1;
            int ylo = std::max(0, -r.vy * span);
            int yhi = cfg.H - r.h - std::max(0, r.vy * span);
            int xlo = std::max(0, -r.vx * span);
            int xhi = cfg.W - r.w - std::max(0, r.vx * span);
            if (yhi < ylo || xhi < xlo) continue;
            r.y0 = ylo + static_cast<int>(rng.uniform_int(static_cast<uint64_t>(yhi - ylo + 1)));
            r.x0 = xlo + static_cast<int>(rng.uniform_int(static_cast<uint64_t>(xhi - xlo + 1)));
            bool ok = true;
            for (int t = 0; t < cfg.T && ok; ++t) {
                Box b = rect_box(r, t);
                for (const RectSpec& other : s.rects)
                    if (too_close(b, rect_box(other, t))) {
                        ok = false;
                        break;
                    }
            }
            if (ok) {
                s.rects.push_back(r);
                placed = true;
            }
        }
        if (!placed) return std::nullopt;
    }
    // recover_scene reads the background off a frame's strict color majority,
    // so a rectangle covering half of a small canvas makes the clip
    // unreadable. Reject such layouts; on the small canvases where this can
    // trigger the caller simply redraws.
    int covered = 0, largest = 0;
    for (const RectSpec& r : s.rects) {
        covered += r.h * r.w;
        largest = std::max(largest, r.h * r.w);
    }
    if (s.H * s.W - covered <= largest) return std::nullopt;
    std::sort(s.rects.begin(), s.rects.end(), [](const RectSpec& a, const RectSpec& b) {
        if (a.y0 != b.y0) return a.y0 < b.y0;
        return a.x0 < b.x0;
    });
    return s;
}

std::optional<Instruction> draw_instruction(Rng& rng, const Scene& s, EditCategory cat,
                                            const DataConfig& cfg) {
    Instruction ins;
    ins.category = cat;
    std::ostringstream text;
    int n = static_cast<int>(s.rects.size());

    switch (cat) {
        case EditCategory::LocalChange: {
            int k = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(n)));
            int c;
            do {
                c = 2 + static_cast<int>(rng.uniform_int(14));
            } while (c == s.rects[static_cast<size_t>(k)].color);
            ins.tokens = {tok::kVerbRecolor, tok::kObj0 + k, tok::kColor0 + c};
            text << "recolor rectangle " << (k + 1) << " to " << kColorNames[c];
            break;
        }
        case EditCategory::LocalRemove: {
            int k = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(n)));
            ins.tokens = {tok::kVerbRemove, tok::kObj0 + k};
            text << "remove rectangle " << (k + 1);
            break;
        }
        case EditCategory::LocalAdd: {
            int c;
            bool clash;
            do {
                c = 2 + static_cast<int>(rng.uniform_int(14));
                clash = false;
                for (const RectSpec& r : s.rects) clash = clash || r.color == c;
            } while (clash);
            bool found = false;
            int pos = 0, size = 0;
            for (int attempt = 0; attempt < 200 && !found; ++attempt) {
                pos = static_cast<int>(rng.uniform_int(16));
                size = static_cast<int>(rng.uniform_int(5));
                auto [h, w] = kSizes[static_cast<size_t>(size)];
                int ay = 4 * (pos / 4), ax = 4 * (pos % 4);
                if (ay + h > s.H || ax + w > s.W) continue;
                Box nb{ay, ax, ay + h - 1, ax + w - 1};
                bool ok = true;
                for (int t = 0; t < s.T && ok; ++t)
                    for (const RectSpec& r : s.rects)
                        if (too_close(nb, rect_box(r, t))) {
                            ok = false;
                            break;
                        }
                found = ok;
            }
            if (!found) return std::nullopt;
            auto [h, w] = kSizes[static_cast<size_t>(size)];
            ins.tokens = {tok::kVerbAdd, tok::kColor0 + c, tok::kPos0 + pos, tok::kSize0 + size};
            text << "add a " << kColorNames[c] << " rectangle of " << h << "x" << w
                 << " pixels with its top-left corner at row " << 4 * (pos / 4) << ", column "
                 << 4 * (pos % 4);
            break;
        }
        case EditCategory::GlobalStyle: {
            int st = 1 + static_cast<int>(rng.uniform_int(3));
            ins.tokens = {tok::kVerbStyle, tok::kStyle0 + st};
            text << "restyle the whole clip into the " << kStyleNames[st] << " palette";
            break;
        }
    }
    while (static_cast<int>(ins.tokens.size()) < cfg.instr_len) ins.tokens.push_back(tok::kPad);
    ins.text = text.str();
    return ins;
}

}  // namespace

Sample generate_sample(uint64_t seed, const DataConfig& cfg) {
    cfg.validate();
    Rng rng(stream_seed(seed, "sample"));
    EditCategory cat =
        cfg.categories[static_cast<size_t>(rng.uniform_int(cfg.categories.size()))];

    for (int attempt = 0; attempt < 100; ++attempt) {
        std::optional<Scene> scene = draw_scene(rng, cfg);
        if (!scene) continue;
        std::optional<Instruction> ins = draw_instruction(rng, *scene, cat, cfg);
        if (!ins) continue;

        Sample sample;
        sample.seed = seed;
        sample.instruction = *ins;
        sample.source = render_scene(*scene);
        auto [target, mask] = oracle_edit(sample.source, ins->tokens);
        sample.edited = std::move(target);
        sample.mask = std::move(mask);

        sample.caption.push_back(tok::kResult0 + static_cast<int>(cat));
        for (size_t i = 1; i < ins->tokens.size(); ++i) {
            if (ins->tokens[i] == tok::kPad) break;
            sample.caption.push_back(ins->tokens[i]);
        }
        while (static_cast<int>(sample.caption.size()) < cfg.instr_len)
            sample.caption.push_back(tok::kPad);
        return sample;
    }
    throw ConfigError("generate_sample: no satisfiable scene after 100 attempts");
}

ProxyScores proxy_metrics(const Video& source, const std::vector<int>& instr_tokens,
                          const Video& generated, const Video& target) {
    if (!source.same_shape(generated) || !source.same_shape(target))
        throw ShapeError("proxy_metrics: clip dimensions differ");
    Mask mask = oracle_edit(source, instr_tokens).second;

    ProxyScores ps;
    size_t mask_px = 0, hit = 0;
    size_t off_terms = 0;
    double off_sum = 0.0;
    for (int t = 0; t < source.T; ++t) {
        for (int y = 0; y < source.H; ++y) {
            for (int x = 0; x < source.W; ++x) {
                if (mask.at(t, y, x)) {
                    ++mask_px;
                    bool ok = true;
                    for (int c = 0; c < source.C; ++c)
                        ok = ok && std::abs(generated.at(t, y, x, c) - target.at(t, y, x, c)) <= 0.15;
                    hit += ok ? 1 : 0;
                } else {
                    for (int c = 0; c < source.C; ++c) {
                        off_sum += std::abs(generated.at(t, y, x, c) - source.at(t, y, x, c));
                        ++off_terms;
                    }
                }
            }
        }
    }
    ps.ic = mask_px ? static_cast<double>(hit) / static_cast<double>(mask_px) : 1.0;
    ps.cf = off_terms ? off_sum / static_cast<double>(off_terms) : 0.0;

    double jitter = 0.0;
    size_t jitter_terms = 0;
    for (int t = 1; t < source.T; ++t) {
        for (int y = 0; y < source.H; ++y) {
            for (int x = 0; x < source.W; ++x) {
                bool moving = false;
                for (int c = 0; c < source.C; ++c)
                    moving = moving || source.at(t, y, x, c) != source.at(t - 1, y, x, c);
                if (moving) continue;
                for (int c = 0; c < source.C; ++c) {
                    jitter += std::abs(generated.at(t, y, x, c) - generated.at(t - 1, y, x, c));
                    ++jitter_terms;
                }
            }
        }
    }
    ps.vq = jitter_terms ? jitter / static_cast<double>(jitter_terms) : 0.0;
    return ps;
}

void save_dataset(const std::string& path, const std::vector<Sample>& samples,
                  const std::string& config_echo) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("dataset: cannot open " + path + " for writing");
    write_magic(out, "VREC");
    write_u32(out, 1);
    write_string(out, config_echo);
    write_u32(out, static_cast<uint32_t>(samples.size()));
    for (const Sample& s : samples) {
        write_u64(out, s.seed);
        write_u32(out, static_cast<uint32_t>(s.instruction.category));
        write_u32(out, static_cast<uint32_t>(s.instruction.tokens.size()));
        for (int t : s.instruction.tokens) write_u32(out, static_cast<uint32_t>(t));
        write_u32(out, static_cast<uint32_t>(s.caption.size()));
        for (int t : s.caption) write_u32(out, static_cast<uint32_t>(t));
        write_string(out, s.instruction.text);
        write_video(out, s.source);
        write_video(out, s.edited);
        write_mask(out, s.mask);
    }
    if (!out) throw IoError("dataset: write failed for " + path);
}

std::pair<std::vector<Sample>, std::string> load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("dataset: cannot open " + path);
    expect_magic(in, "VREC", path);
    if (read_u32(in) != 1) throw IoError("dataset: unsupported version in " + path);
    std::string echo = read_string(in);
    uint32_t count = read_u32(in);
    std::vector<Sample> samples;
    samples.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        Sample s;
        s.seed = read_u64(in);
        s.instruction.category = static_cast<EditCategory>(read_u32(in));
        uint32_t nt = read_u32(in);
        for (uint32_t k = 0; k < nt; ++k)
            s.instruction.tokens.push_back(static_cast<int>(read_u32(in)));
        uint32_t nc = read_u32(in);
        for (uint32_t k = 0; k < nc; ++k) s.caption.push_back(static_cast<int>(read_u32(in)));
        s.instruction.text = read_string(in);
        s.source = read_video(in);
        s.edited = read_video(in);
        s.mask = read_mask(in);
        samples.push_back(std::move(s));
    }
    return {std::move(samples), std::move(echo)};
}

}  // namespace vedit
