#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "vedit/synthdata.h"
#include "vedit/video.h"

namespace vedit {

// Verbatim prompt text, kept byte-identical to the files under
// assets/prompts/ (a test enforces this).
namespace prompts {
const char* common_rules();
const char* response_format();
const char* local_change();
const char* local_remove();
const char* local_add();
const char* global_style();
}  // namespace prompts

struct JudgeRequest {
    EditCategory category = EditCategory::LocalChange;
    std::string instruction;
    std::vector<std::string> source_frames;  // JPEG bytes, temporal order
    std::vector<std::string> edited_frames;
    std::string judge_id;
    std::string sample_id;
};

struct JudgeRecord {
    std::string judge_id;
    EditCategory category = EditCategory::LocalChange;
    std::string sample_id;
    int ic = 0, cf = 0, vq = 0;  // each in [1, 100]
    std::string reasoning;
};

struct ParsedScores {
    int ic = 0, cf = 0, vq = 0;
    std::string reasoning;
};

// A response that violates the format rules; names the first violated rule.
struct FormatFailure {
    std::string rule;    // e.g. "missing-axis", "out-of-range"
    std::string detail;
};

struct DroppedSample {
    std::string judge_id;
    EditCategory category = EditCategory::LocalChange;
    std::string sample_id;
    std::string reason;
    int attempts = 0;
};

// The n evenly spaced frame positions round(i*(T-1)/(n-1)); all frames when
// T <= n. DomainError on an empty clip.
std::vector<int> frame_indices(int total, int wanted);

// One frame resized so its longer side is at most max_side (aspect
// preserved, bilinear, never upscaled) and JPEG-encoded.
std::string encode_frame_jpeg(const Video& v, int frame, int max_side = 512,
                              int quality = 85);

// Category rubric with the shared rule and format blocks substituted in and
// the instruction embedded verbatim.
std::string build_prompt(EditCategory category, const std::string& edit_prompt);

// Parses a judge response under the tolerant rules: axis labels matched
// case-insensitively through markdown emphasis and list bullets, scores
// coerced from floats (half away from zero), then range-checked.
std::variant<ParsedScores, FormatFailure> parse_response(const std::string& text);

// Renders scores in the exact four-line response format; parse_response on
// the result reproduces the scores.
std::string canonical_response(const ParsedScores& s);

struct JudgeImage {
    std::string name;
    std::string jpeg;
};

// Abstract judge: prompt text plus ordered images in, raw response text out.
// Transport problems surface as exceptions and count as failed attempts.
class JudgeEndpoint {
public:
    virtual ~JudgeEndpoint() = default;
    virtual std::string score(const std::string& prompt,
                              const std::vector<JudgeImage>& images) = 0;
};

// Deterministic stand-in: scores are a pure function of the request bytes.
class MockJudgeEndpoint : public JudgeEndpoint {
public:
    std::string score(const std::string& prompt,
                      const std::vector<JudgeImage>& images) override;
};

// Test endpoint with a programmable response sequence; nullopt entries throw
// as transport failures. Counts calls.
class ScriptedJudgeEndpoint : public JudgeEndpoint {
public:
    explicit ScriptedJudgeEndpoint(std::vector<std::optional<std::string>> script)
        : script_(std::move(script)) {}
    std::string score(const std::string& prompt,
                      const std::vector<JudgeImage>& images) override;
    int calls() const { return calls_; }

private:
    std::vector<std::optional<std::string>> script_;
    int calls_ = 0;
};

// Remote judge over HTTP POST. The bearer token, when the named environment
// variable is set, goes into the Authorization header. The response body is
// either {"text": "..."} or the raw completion text.
class HttpJudgeEndpoint : public JudgeEndpoint {
public:
    explicit HttpJudgeEndpoint(const std::string& url,
                               const std::string& token_env = "VEDIT_JUDGE_TOKEN");
    std::string score(const std::string& prompt,
                      const std::vector<JudgeImage>& images) override;

private:
    std::string base_;  // scheme://host[:port]
    std::string path_;
    std::string token_;
};

// Full prompt-plus-frames message for one request: source frames first, then
// edited frames, each group introduced by a header line, closing with the
// comparison instruction.
std::pair<std::string, std::vector<JudgeImage>> assemble_message(const JudgeRequest& r);

// At most 3 attempts; the first parseable response wins; otherwise the
// sample is dropped with the last failure as the reason.
std::variant<JudgeRecord, DroppedSample> score_with_retries(JudgeEndpoint& endpoint,
                                                            const JudgeRequest& r);

struct CategoryStats {
    int count = 0;  // records aggregated into this cell
    double ic = 0.0, cf = 0.0, vq = 0.0;  // axis means

    double average() const { return (ic + cf + vq) / 3.0; }
};

struct JudgeStats {
    std::map<std::string, CategoryStats> categories;  // keyed by category name
    // Mean over all present category-axis cells; absent when no records.
    std::optional<double> overall;
};

struct AggregateReport {
    std::map<std::string, JudgeStats> judges;
};

AggregateReport aggregate(const std::vector<JudgeRecord>& records);
// Delimited table, values displayed at 2 decimals, absent cells as "-".
std::string render_report(const AggregateReport& rep);

// JSONL round-trip for records and drop markers.
std::string record_to_json(const JudgeRecord& r);
std::string drop_to_json(const DroppedSample& d);
// Loads records from a JSONL file, skipping drop markers (no imputation).
std::vector<JudgeRecord> load_records(const std::string& path);

}  // namespace vedit
