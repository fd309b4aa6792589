#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vedit/judge.h"

namespace vedit {

AggregateReport aggregate(const std::vector<JudgeRecord>& records) {
    // Sum first, divide once per cell; category averages and the overall are
    // recomputed from the axis means so the arithmetic matches the stated
    // pipeline exactly.
    struct CellSum {
        long n = 0;
        double ic = 0, cf = 0, vq = 0;
    };
    std::map<std::string, std::map<std::string, CellSum>> sums;
    for (const JudgeRecord& r : records) {
        if (r.ic < 1 || r.ic > 100 || r.cf < 1 || r.cf > 100 || r.vq < 1 ||
            r.vq > 100)
            throw DomainError("aggregate: record " + r.sample_id +
                              " carries a score outside [1, 100]");
        CellSum& cell = sums[r.judge_id][category_name(r.category)];
        ++cell.n;
        cell.ic += r.ic;
        cell.cf += r.cf;
        cell.vq += r.vq;
    }

    AggregateReport rep;
    for (const auto& [judge, cells] : sums) {
        JudgeStats js;
        double cell_sum = 0.0;
        int cell_count = 0;
        for (const auto& [cat, sum] : cells) {
            CategoryStats cs;
            cs.count = static_cast<int>(sum.n);
            cs.ic = sum.ic / sum.n;
            cs.cf = sum.cf / sum.n;
            cs.vq = sum.vq / sum.n;
            cell_sum += cs.ic + cs.cf + cs.vq;
            cell_count += 3;
            js.categories.emplace(cat, cs);
        }
        if (cell_count > 0) js.overall = cell_sum / cell_count;
        rep.judges.emplace(judge, js);
    }
    return rep;
}

namespace {

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace

std::string render_report(const AggregateReport& rep) {
    std::ostringstream out;
    out << "judge\tcategory\tn\tic\tcf\tvq\tcategory_avg\n";
    const char* cats[] = {"local_change", "local_remove", "local_add", "global_style"};
    for (const auto& [judge, js] : rep.judges) {
        for (const char* cat : cats) {
            auto it = js.categories.find(cat);
            if (it == js.categories.end()) {
                out << judge << '\t' << cat << "\t0\t-\t-\t-\t-\n";
                continue;
            }
            const CategoryStats& cs = it->second;
            out << judge << '\t' << cat << '\t' << cs.count << '\t' << fmt2(cs.ic)
                << '\t' << fmt2(cs.cf) << '\t' << fmt2(cs.vq) << '\t'
                << fmt2(cs.average()) << '\n';
        }
        out << judge << "\toverall\t-\t-\t-\t-\t"
            << (js.overall ? fmt2(*js.overall) : std::string("-")) << '\n';
    }
    return out.str();
}

std::string record_to_json(const JudgeRecord& r) {
    nlohmann::json j;
    j["judge_id"] = r.judge_id;
    j["category"] = category_name(r.category);
    j["sample_id"] = r.sample_id;
    j["ic"] = r.ic;
    j["cf"] = r.cf;
    j["vq"] = r.vq;
    j["reasoning"] = r.reasoning;
    return j.dump();
}

std::string drop_to_json(const DroppedSample& d) {
    nlohmann::json j;
    j["dropped"] = true;
    j["judge_id"] = d.judge_id;
    j["category"] = category_name(d.category);
    j["sample_id"] = d.sample_id;
    j["reason"] = d.reason;
    j["attempts"] = d.attempts;
    return j.dump();
}

std::vector<JudgeRecord> load_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_records: cannot open " + path);
    std::vector<JudgeRecord> records;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw IoError("load_records: " + path + ":" + std::to_string(lineno) +
                          ": " + e.what());
        }
        if (j.value("dropped", false)) continue;
        try {
            JudgeRecord r;
            r.judge_id = j.at("judge_id").get<std::string>();
            r.category = category_from_name(j.at("category").get<std::string>());
            r.sample_id = j.at("sample_id").get<std::string>();
            r.ic = j.at("ic").get<int>();
            r.cf = j.at("cf").get<int>();
            r.vq = j.at("vq").get<int>();
            r.reasoning = j.value("reasoning", "");
            records.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw IoError("load_records: " + path + ":" + std::to_string(lineno) +
                          ": " + e.what());
        }
    }
    return records;
}

}  // namespace vedit
