#include <cstdlib>
#include <string>
#include <utility>
#include <vector>

#include "vedit/judge.h"
#include "vedit/rng.h"

// httplib drags in <resolv.h>, whose _res macro mangles any later header
// with a parameter of that name (Eigen has several), so it comes after the
// project headers and the macro is dropped.
#include <httplib.h>
#ifdef _res
#undef _res
#endif
#include <json.hpp>

namespace vedit {

namespace {

const char* rubric_for(EditCategory category) {
    switch (category) {
        case EditCategory::LocalChange: return prompts::local_change();
        case EditCategory::LocalRemove: return prompts::local_remove();
        case EditCategory::LocalAdd: return prompts::local_add();
        case EditCategory::GlobalStyle: return prompts::global_style();
    }
    throw ConfigError("build_prompt: unknown category");
}

// Replaces every {edit_prompt} placeholder in one left-to-right pass, so
// instruction text containing the marker is not re-expanded.
std::string substitute_instruction(const std::string& tmpl, const std::string& instr) {
    static const std::string marker = "{edit_prompt}";
    std::string out;
    out.reserve(tmpl.size() + instr.size());
    size_t pos = 0;
    while (true) {
        size_t hit = tmpl.find(marker, pos);
        if (hit == std::string::npos) {
            out.append(tmpl, pos, std::string::npos);
            return out;
        }
        out.append(tmpl, pos, hit - pos);
        out.append(instr);
        pos = hit + marker.size();
    }
}

}  // namespace

std::string build_prompt(EditCategory category, const std::string& edit_prompt) {
    const std::string rubric = rubric_for(category);
    std::string assembled;
    assembled.reserve(rubric.size() + 2048);
    size_t pos = 0;
    while (pos < rubric.size()) {
        size_t eol = rubric.find('\n', pos);
        if (eol == std::string::npos) eol = rubric.size();
        std::string line = rubric.substr(pos, eol - pos);
        if (line == "<COMMON_RULES>") {
            assembled += prompts::common_rules();
        } else if (line == "<RESPONSE_FORMAT>") {
            assembled += prompts::response_format();
        } else {
            assembled += line;
            assembled += '\n';
        }
        pos = eol + 1;
    }
    return substitute_instruction(assembled, edit_prompt);
}

std::pair<std::string, std::vector<JudgeImage>> assemble_message(const JudgeRequest& r) {
    if (r.source_frames.empty() || r.source_frames.size() != r.edited_frames.size())
        throw ShapeError("assemble_message: source and edited frame counts differ");
    if (r.source_frames.size() > 5)
        throw ShapeError("assemble_message: at most 5 frames per clip");
    std::string text = build_prompt(r.category, r.instruction);
    text += "\nSource video frames, in temporal order:\n";
    std::vector<JudgeImage> images;
    images.reserve(r.source_frames.size() * 2);
    for (size_t i = 0; i < r.source_frames.size(); ++i)
        images.push_back(JudgeImage{"source_" + std::to_string(i + 1),
                                    r.source_frames[i]});
    text += "Edited video frames, in temporal order:\n";
    for (size_t i = 0; i < r.edited_frames.size(); ++i)
        images.push_back(JudgeImage{"edited_" + std::to_string(i + 1),
                                    r.edited_frames[i]});
    text += "Compare the edited video against the source video and score the "
            "edit according to the rubric and response format above.\n";
    return {std::move(text), std::move(images)};
}

std::variant<JudgeRecord, DroppedSample> score_with_retries(JudgeEndpoint& endpoint,
                                                            const JudgeRequest& r) {
    auto [prompt, images] = assemble_message(r);
    std::string last_reason = "no attempt made";
    const int max_attempts = 3;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        std::string text;
        try {
            text = endpoint.score(prompt, images);
        } catch (const std::exception& e) {
            last_reason = std::string("transport: ") + e.what();
            continue;
        }
        auto parsed = parse_response(text);
        if (auto* ok = std::get_if<ParsedScores>(&parsed)) {
            JudgeRecord rec;
            rec.judge_id = r.judge_id;
            rec.category = r.category;
            rec.sample_id = r.sample_id;
            rec.ic = ok->ic;
            rec.cf = ok->cf;
            rec.vq = ok->vq;
            rec.reasoning = ok->reasoning;
            return rec;
        }
        const auto& ff = std::get<FormatFailure>(parsed);
        last_reason = "format: " + ff.rule + " (" + ff.detail + ")";
    }
    return DroppedSample{r.judge_id, r.category, r.sample_id, last_reason,
                         max_attempts};
}

std::string MockJudgeEndpoint::score(const std::string& prompt,
                                     const std::vector<JudgeImage>& images) {
    uint64_t h = 1469598103934665603ull;
    auto mix = [&](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
    };
    mix(prompt);
    for (const JudgeImage& im : images) {
        mix(im.name);
        mix(im.jpeg);
    }
    Rng rng(h);
    ParsedScores s;
    s.ic = 40 + static_cast<int>(rng.uniform_int(56));
    s.cf = 40 + static_cast<int>(rng.uniform_int(56));
    s.vq = 40 + static_cast<int>(rng.uniform_int(56));
    s.reasoning = "Deterministic mock rating derived from the request bytes.";
    return canonical_response(s);
}

std::string ScriptedJudgeEndpoint::score(const std::string& prompt,
                                         const std::vector<JudgeImage>& images) {
    (void)prompt;
    (void)images;
    if (calls_ >= static_cast<int>(script_.size()))
        throw IoError("scripted endpoint: script exhausted after " +
                      std::to_string(calls_) + " calls");
    const auto& entry = script_[calls_++];
    if (!entry) throw IoError("scripted endpoint: simulated transport failure");
    return *entry;
}

namespace {

std::string base64_encode(const std::string& bytes) {
    static const char* alphabet =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    size_t i = 0;
    while (i + 3 <= bytes.size()) {
        uint32_t n = (static_cast<unsigned char>(bytes[i]) << 16) |
                     (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                     static_cast<unsigned char>(bytes[i + 2]);
        out.push_back(alphabet[(n >> 18) & 63]);
        out.push_back(alphabet[(n >> 12) & 63]);
        out.push_back(alphabet[(n >> 6) & 63]);
        out.push_back(alphabet[n & 63]);
        i += 3;
    }
    size_t rest = bytes.size() - i;
    if (rest == 1) {
        uint32_t n = static_cast<unsigned char>(bytes[i]) << 16;
        out.push_back(alphabet[(n >> 18) & 63]);
        out.push_back(alphabet[(n >> 12) & 63]);
        out += "==";
    } else if (rest == 2) {
        uint32_t n = (static_cast<unsigned char>(bytes[i]) << 16) |
                     (static_cast<unsigned char>(bytes[i + 1]) << 8);
        out.push_back(alphabet[(n >> 18) & 63]);
        out.push_back(alphabet[(n >> 12) & 63]);
        out.push_back(alphabet[(n >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

}  // namespace

HttpJudgeEndpoint::HttpJudgeEndpoint(const std::string& url,
                                     const std::string& token_env) {
    const std::string http = "http://";
    const std::string https = "https://";
    if (url.rfind(https, 0) == 0)
        throw ConfigError("judge endpoint: https is not supported in this build, "
                          "use an http endpoint or a local proxy");
    if (url.rfind(http, 0) != 0)
        throw ConfigError("judge endpoint: expected an http:// URL, got " + url);
    size_t host_begin = http.size();
    size_t slash = url.find('/', host_begin);
    if (slash == std::string::npos) {
        base_ = url;
        path_ = "/";
    } else {
        base_ = url.substr(0, slash);
        path_ = url.substr(slash);
    }
    if (base_.size() == http.size())
        throw ConfigError("judge endpoint: URL has no host: " + url);
    if (!token_env.empty()) {
        const char* tok = std::getenv(token_env.c_str());
        if (tok) token_ = tok;
    }
}

std::string HttpJudgeEndpoint::score(const std::string& prompt,
                                     const std::vector<JudgeImage>& images) {
    nlohmann::json body;
    body["prompt"] = prompt;
    body["images"] = nlohmann::json::array();
    for (const JudgeImage& im : images)
        body["images"].push_back({{"name", im.name}, {"jpeg_b64", base64_encode(im.jpeg)}});

    httplib::Client cli(base_);
    cli.set_connection_timeout(30, 0);
    cli.set_read_timeout(300, 0);
    httplib::Headers headers;
    if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
    auto res = cli.Post(path_, headers, body.dump(), "application/json");
    if (!res)
        throw IoError("judge endpoint: transport failure: " +
                      httplib::to_string(res.error()));
    if (res->status != 200)
        throw IoError("judge endpoint: HTTP " + std::to_string(res->status));
    try {
        nlohmann::json parsed = nlohmann::json::parse(res->body);
        if (parsed.is_object() && parsed.contains("text") && parsed["text"].is_string())
            return parsed["text"].get<std::string>();
    } catch (const nlohmann::json::exception&) {
        // Raw completion text is an accepted response body.
    }
    return res->body;
}

}  // namespace vedit
