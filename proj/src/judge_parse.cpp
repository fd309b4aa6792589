#include <cmath>
#include <regex>
#include <string>
#include <vector>

#include "vedit/judge.h"

namespace vedit {

namespace {

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char ch : text) {
        if (ch == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) lines.push_back(cur);
    return lines;
}

// Drops leading whitespace, list bullets (-, *, +, the UTF-8 bullet dot) and
// numbering like "1." so the label regex sees the line body.
std::string strip_list_prefix(const std::string& line) {
    size_t i = 0;
    auto skip_ws = [&] {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    };
    skip_ws();
    for (int rounds = 0; rounds < 3; ++rounds) {
        if (i < line.size() && (line[i] == '-' || line[i] == '+')) {
            // A dash that directly precedes the label text is a separator,
            // not a bullet; only treat it as a bullet when followed by space.
            if (i + 1 < line.size() && line[i + 1] == ' ') {
                ++i;
                skip_ws();
                continue;
            }
        }
        if (i < line.size() && line[i] == '*') {
            // '*' doubles as emphasis; treat as a bullet only with a space.
            if (i + 1 < line.size() && line[i + 1] == ' ') {
                ++i;
                skip_ws();
                continue;
            }
        }
        if (i + 3 <= line.size() && line.compare(i, 3, "\xE2\x80\xA2") == 0) {
            i += 3;
            skip_ws();
            continue;
        }
        break;
    }
    return line.substr(i);
}

const std::regex& axis_regex(int axis) {
    auto make = [](const char* label) {
        return std::regex(std::string("^[*_`~\\s]*") + label +
                              "[*_`~\\s]*[:\\-][*_`~\\s]*(-?[0-9]+(?:\\.[0-9]+)?).*$",
                          std::regex::icase);
    };
    static const std::regex re_ic = make("Instruction Compliance");
    static const std::regex re_cf = make("Consistency & Detail Fidelity");
    static const std::regex re_vq = make("Visual Quality & Stability");
    switch (axis) {
        case 0: return re_ic;
        case 1: return re_cf;
        default: return re_vq;
    }
}

const std::regex& reasoning_regex() {
    static const std::regex re("^[*_`~\\s]*Brief reasoning[*_`~\\s]*[:\\-]\\s*(.*)$",
                               std::regex::icase);
    return re;
}

const char* axis_label(int axis) {
    switch (axis) {
        case 0: return "Instruction Compliance";
        case 1: return "Consistency & Detail Fidelity";
        default: return "Visual Quality & Stability";
    }
}

// Half away from zero, matching llround. Values far outside the scale are
// pinned to a sentinel that fails the range check instead of overflowing.
int coerce_score(const std::string& number) {
    double x = std::stod(number);
    if (!std::isfinite(x) || std::fabs(x) > 1e6) return 1000001;
    return static_cast<int>(std::llround(x));
}

}  // namespace

std::variant<ParsedScores, FormatFailure> parse_response(const std::string& text) {
    std::vector<std::string> raw = split_lines(text);
    std::vector<std::string> lines;
    lines.reserve(raw.size());
    for (const std::string& l : raw) lines.push_back(strip_list_prefix(l));

    int scores[3] = {0, 0, 0};
    for (int axis = 0; axis < 3; ++axis) {
        bool found = false;
        for (const std::string& line : lines) {
            std::smatch m;
            if (std::regex_match(line, m, axis_regex(axis))) {
                int v = coerce_score(m[1].str());
                if (v < 1 || v > 100)
                    return FormatFailure{
                        "out-of-range",
                        std::string(axis_label(axis)) + " = " + m[1].str()};
                scores[axis] = v;
                found = true;
                break;
            }
        }
        if (!found) return FormatFailure{"missing-axis", axis_label(axis)};
    }

    ParsedScores out;
    out.ic = scores[0];
    out.cf = scores[1];
    out.vq = scores[2];
    for (const std::string& line : lines) {
        std::smatch m;
        if (std::regex_match(line, m, reasoning_regex())) {
            out.reasoning = m[1].str();
            break;
        }
    }
    return out;
}

std::string canonical_response(const ParsedScores& s) {
    std::string reasoning = s.reasoning;
    for (char& ch : reasoning)
        if (ch == '\n' || ch == '\r') ch = ' ';
    return "Brief reasoning: " + reasoning +
           "\nInstruction Compliance: " + std::to_string(s.ic) +
           "\nConsistency & Detail Fidelity: " + std::to_string(s.cf) +
           "\nVisual Quality & Stability: " + std::to_string(s.vq) + "\n";
}

}  // namespace vedit
