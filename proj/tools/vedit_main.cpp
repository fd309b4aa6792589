// Command-line front end: data generation, training, sampling, trace
// analysis, ablation sweeps, and the judge pipeline, all over one flat
// config format with --set overrides.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vedit/analysis.h"
#include "vedit/config.h"
#include "vedit/counters.h"
#include "vedit/judge.h"
#include "vedit/sampler.h"
#include "vedit/serialize.h"
#include "vedit/synthdata.h"
#include "vedit/trainer.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

vedit::Config load_config(const std::string& path,
                          const std::vector<std::string>& sets) {
    vedit::Config cfg =
        path.empty() ? vedit::Config() : vedit::Config::from_file(path);
    for (const std::string& s : sets) cfg.apply_override(s);
    return cfg;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw vedit::IoError("cannot open " + path + " for writing");
    out << text;
    if (!out) throw vedit::IoError("short write to " + path);
}

json report_to_json(const vedit::StepReport& r) {
    return json{{"step", r.step},           {"loss_fm", r.loss_fm},
                {"loss_align", r.loss_align}, {"loss_total", r.loss_total},
                {"depth", r.depth},         {"mi", r.mi},
                {"grad_norm", r.grad_norm}, {"wall_ms", r.wall_ms}};
}

int cmd_gen_data(const std::string& config_path, const std::string& out,
                 const std::vector<std::string>& sets) {
    vedit::Config cfg = load_config(config_path, sets);
    vedit::DataConfig dc = vedit::DataConfig::from_config(cfg);
    const int count = static_cast<int>(cfg.get_int("data.count", 128));
    const uint64_t seed = static_cast<uint64_t>(cfg.get_int("data.seed", 1));
    if (count < 1) throw vedit::ConfigError("data.count must be >= 1");
    std::vector<vedit::Sample> samples;
    samples.reserve(count);
    for (int i = 0; i < count; ++i)
        samples.push_back(
            vedit::generate_sample(vedit::stream_seed(seed, "dataset", i), dc));
    vedit::save_dataset(out, samples, cfg.echo());
    std::cout << "wrote " << count << " samples to " << out << "\n";
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& out,
              const std::vector<std::string>& sets) {
    vedit::Config cfg = load_config(config_path, sets);
    fs::create_directories(out);
    vedit::Trainer tr(cfg);
    const vedit::TrainConfig& tc = tr.train_config();
    std::ofstream log(fs::path(out) / "log.jsonl", std::ios::binary);
    if (!log) throw vedit::IoError("cannot open training log in " + out);
    const std::string ckpt_path = (fs::path(out) / "checkpoint.vckp").string();

    for (int64_t step = tr.step(); step < tc.steps; ++step) {
        std::vector<vedit::Sample> batch = tr.draw_batch(step);
        vedit::StepReport rep;
        try {
            rep = tr.training_step(batch);
        } catch (const vedit::NumericDivergence& e) {
            log << report_to_json(e.report).dump() << "\n";
            log.flush();
            throw;
        }
        log << report_to_json(rep).dump() << "\n";
        if (tc.log_every > 0 && rep.step % tc.log_every == 0) {
            std::cout << "step " << rep.step << " total " << rep.loss_total
                      << " fm " << rep.loss_fm << " align " << rep.loss_align
                      << " depth " << rep.depth << "\n";
            log.flush();
        }
        if (tc.checkpoint_every > 0 && (step + 1) % tc.checkpoint_every == 0)
            vedit::save_checkpoint(ckpt_path, tr.to_checkpoint());
    }
    vedit::save_checkpoint(ckpt_path, tr.to_checkpoint());
    std::cout << "trained " << tr.step() << " steps, checkpoint at " << ckpt_path
              << "\n";
    return 0;
}

int cmd_sample(const std::string& ckpt_path, uint64_t seed, const std::string& out,
               const std::vector<std::string>& sets) {
    vedit::Checkpoint ck = vedit::load_checkpoint(ckpt_path);
    vedit::Config cfg = vedit::Config::from_string(ck.config_echo);
    for (const std::string& s : sets) cfg.apply_override(s);
    vedit::DataConfig dc = vedit::DataConfig::from_config(cfg);
    vedit::ModelConfig mc = vedit::ModelConfig::from_config(cfg);
    vedit::SamplerConfig sc = vedit::SamplerConfig::from_config(cfg);
    sc.seed = vedit::stream_seed(seed, "sampler");

    vedit::Sample s = vedit::generate_sample(seed, dc);
    vedit::Video generated =
        vedit::sample_edit(s.source, s.instruction.tokens, ck.params, mc, sc);

    vedit::save_videos(out, {{"source", s.source},
                             {"reference", s.edited},
                             {"generated", generated}});
    json side;
    side["seed"] = seed;
    side["category"] = vedit::category_name(s.instruction.category);
    side["instruction_text"] = s.instruction.text;
    side["instruction_tokens"] = s.instruction.tokens;
    write_text(out + ".json", side.dump(2) + "\n");
    std::cout << "wrote " << out << " and " << out << ".json\n";
    return 0;
}

int cmd_analyze(const std::string& ckpt_path, const std::string& data_path,
                const std::string& out, const std::vector<std::string>& sets) {
    vedit::Checkpoint ck = vedit::load_checkpoint(ckpt_path);
    vedit::Config cfg = vedit::Config::from_string(ck.config_echo);
    for (const std::string& s : sets) cfg.apply_override(s);
    vedit::ModelConfig mc = vedit::ModelConfig::from_config(cfg);

    auto [samples, echo] = vedit::load_dataset(data_path);
    const int cap = static_cast<int>(cfg.get_int("analysis.batch", 8));
    if (cap < 1) throw vedit::ConfigError("analysis.batch must be >= 1");
    if (static_cast<int>(samples.size()) > cap) samples.resize(cap);

    std::vector<vedit::BlockProfile> profile =
        vedit::depth_profile(samples, ck.params, mc);

    std::ostringstream table;
    table << "block\tedit_mass\tnative_mass\tentropy\tcosine\tjs\n";
    json dump = json::array();
    for (const vedit::BlockProfile& b : profile) {
        char line[256];
        if (b.has_cross)
            std::snprintf(line, sizeof line, "%d\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\n",
                          b.block, b.edit_mass, b.native_mass, b.entropy, b.cosine,
                          b.js);
        else
            std::snprintf(line, sizeof line, "%d\t%.6f\t%.6f\t%.6f\t-\t-\n", b.block,
                          b.edit_mass, b.native_mass, b.entropy);
        table << line;
        json row{{"block", b.block},       {"edit_mass", b.edit_mass},
                 {"native_mass", b.native_mass}, {"entropy", b.entropy}};
        if (b.has_cross) {
            row["cosine"] = b.cosine;
            row["js"] = b.js;
        }
        dump.push_back(row);
    }
    write_text(out, table.str());
    write_text(out + ".json", dump.dump(2) + "\n");
    std::cout << table.str();
    return 0;
}

struct VariantSpec {
    std::string id;
    std::vector<std::string> overrides;
};

int cmd_ablate(const std::string& plan_path, const std::string& out,
               const std::vector<std::string>& sets) {
    vedit::Config plan = load_config(plan_path, sets);
    fs::create_directories(out);

    // Base config: every non-plan key, shared verbatim (including the seed)
    // by all variants so rows differ only in the swept fields.
    vedit::Config base;
    for (const auto& [k, v] : plan.entries())
        if (k.rfind("plan.", 0) != 0) base.set(k, v);

    std::vector<VariantSpec> variants;
    {
        std::string comps =
            plan.get_string("plan.components", "full,wo_grtc,wo_raaa,wo_both");
        std::stringstream ss(comps);
        std::string id;
        vedit::ModelConfig base_mc = vedit::ModelConfig::from_config(base);
        while (std::getline(ss, id, ',')) {
            while (!id.empty() && id.front() == ' ') id.erase(id.begin());
            while (!id.empty() && id.back() == ' ') id.pop_back();
            if (id.empty()) continue;
            if (id == "full")
                variants.push_back({"full", {}});
            else if (id == "wo_grtc")
                variants.push_back(
                    {"wo_grtc", {"model.split=" + std::to_string(base_mc.l)}});
            else if (id == "wo_raaa")
                variants.push_back({"wo_raaa", {"align.lambda=0"}});
            else if (id == "wo_both")
                variants.push_back(
                    {"wo_both", {"model.split=" + std::to_string(base_mc.l),
                                 "align.lambda=0"}});
            else
                throw vedit::ConfigError("ablate: unknown component variant " + id);
        }
    }
    for (double ls : plan.get_list("plan.ls_sweep", {})) {
        int v = static_cast<int>(ls);
        variants.push_back({"ls" + std::to_string(v),
                            {"model.split=" + std::to_string(v)}});
    }
    for (double lam : plan.get_list("plan.lambda_sweep", {})) {
        char idbuf[32], valbuf[32];
        std::snprintf(valbuf, sizeof valbuf, "%g", lam);
        std::snprintf(idbuf, sizeof idbuf, "lam%03d",
                      static_cast<int>(std::llround(lam * 100.0)));
        variants.push_back({idbuf, {std::string("align.lambda=") + valbuf}});
    }
    if (variants.empty()) throw vedit::ConfigError("ablate: empty variant list");

    const int eval_count = static_cast<int>(plan.get_int("plan.eval_count", 16));
    if (eval_count < 1) throw vedit::ConfigError("plan.eval_count must be >= 1");

    std::ostringstream table;
    table << "id\tls\tlambda\tic\tcf\tvq\tfinal_fm\tfinal_align\tfinal_total"
             "\tstatus\n";
    json dump = json::array();
    for (const VariantSpec& spec : variants) {
        vedit::Config vcfg = base;
        for (const std::string& o : spec.overrides) vcfg.apply_override(o);
        vedit::Trainer tr(vcfg);
        const vedit::TrainConfig& tc = tr.train_config();
        const vedit::ModelConfig& mc = tr.model_config();
        const vedit::DataConfig& dc = tr.data_config();

        std::string status = "ok";
        vedit::StepReport last;
        try {
            for (int64_t step = 0; step < tc.steps; ++step)
                last = tr.training_step(tr.draw_batch(step));
        } catch (const vedit::NumericDivergence& e) {
            status = std::string("diverged: ") + e.what();
            last = e.report;
        }

        double ic = 0, cf = 0, vq = 0;
        if (status == "ok") {
            vedit::SamplerConfig sc = vedit::SamplerConfig::from_config(vcfg);
            for (int i = 0; i < eval_count; ++i) {
                vedit::Sample s = vedit::generate_sample(
                    vedit::stream_seed(tc.seed, "heldout", i), dc);
                sc.seed = vedit::stream_seed(tc.seed, "heldout_noise", i);
                vedit::Video gen = vedit::sample_edit(s.source, s.instruction.tokens,
                                                      tr.params(), mc, sc);
                vedit::ProxyScores ps = vedit::proxy_metrics(
                    s.source, s.instruction.tokens, gen, s.edited);
                ic += ps.ic / eval_count;
                cf += ps.cf / eval_count;
                vq += ps.vq / eval_count;
            }
            vedit::save_checkpoint((fs::path(out) / (spec.id + ".vckp")).string(),
                                   tr.to_checkpoint());
        }

        char line[512];
        std::snprintf(line, sizeof line,
                      "%s\t%d\t%g\t%.4f\t%.4f\t%.4f\t%.6f\t%.6f\t%.6f\t%s\n",
                      spec.id.c_str(), mc.ls, tr.align_config().lambda, ic, cf, vq,
                      last.loss_fm, last.loss_align, last.loss_total,
                      status.c_str());
        table << line;
        std::cout << line;
        dump.push_back(json{{"id", spec.id},
                            {"ls", mc.ls},
                            {"lambda", tr.align_config().lambda},
                            {"ic", ic},
                            {"cf", cf},
                            {"vq", vq},
                            {"final_fm", last.loss_fm},
                            {"final_align", last.loss_align},
                            {"final_total", last.loss_total},
                            {"status", status},
                            {"config", vcfg.echo()}});
    }
    write_text((fs::path(out) / "report.tsv").string(), table.str());
    write_text((fs::path(out) / "report.json").string(), dump.dump(2) + "\n");
    return 0;
}

int cmd_judge_run(const std::string& endpoint_arg, const std::string& dir,
                  const std::string& out) {
    std::unique_ptr<vedit::JudgeEndpoint> endpoint;
    if (endpoint_arg == "mock")
        endpoint = std::make_unique<vedit::MockJudgeEndpoint>();
    else
        endpoint = std::make_unique<vedit::HttpJudgeEndpoint>(endpoint_arg);

    std::vector<fs::path> inputs;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".vsmp")
            inputs.push_back(entry.path());
    std::sort(inputs.begin(), inputs.end());
    if (inputs.empty())
        throw vedit::IoError("judge-run: no .vsmp files under " + dir);

    std::ofstream records(out, std::ios::binary);
    if (!records) throw vedit::IoError("judge-run: cannot open " + out);
    int scored = 0, dropped = 0;
    for (const fs::path& p : inputs) {
        std::ifstream side_in(p.string() + ".json", std::ios::binary);
        if (!side_in)
            throw vedit::IoError("judge-run: missing sidecar " + p.string() +
                                 ".json");
        json side = json::parse(side_in);

        auto clips = vedit::load_videos(p.string());
        const vedit::Video* source = nullptr;
        const vedit::Video* generated = nullptr;
        for (const auto& [name, clip] : clips) {
            if (name == "source") source = &clip;
            if (name == "generated") generated = &clip;
        }
        if (!source || !generated)
            throw vedit::IoError("judge-run: " + p.string() +
                                 " lacks source/generated clips");

        vedit::JudgeRequest req;
        req.category =
            vedit::category_from_name(side.at("category").get<std::string>());
        req.instruction = side.at("instruction_text").get<std::string>();
        req.judge_id = endpoint_arg;
        req.sample_id = p.stem().string();
        for (int idx : vedit::frame_indices(source->T, 5))
            req.source_frames.push_back(vedit::encode_frame_jpeg(*source, idx));
        for (int idx : vedit::frame_indices(generated->T, 5))
            req.edited_frames.push_back(vedit::encode_frame_jpeg(*generated, idx));

        auto res = vedit::score_with_retries(*endpoint, req);
        if (auto* rec = std::get_if<vedit::JudgeRecord>(&res)) {
            records << vedit::record_to_json(*rec) << "\n";
            ++scored;
        } else {
            records << vedit::drop_to_json(std::get<vedit::DroppedSample>(res))
                    << "\n";
            ++dropped;
        }
    }
    std::cout << "scored " << scored << " samples, dropped " << dropped << ", to "
              << out << "\n";
    return 0;
}

int cmd_judge_aggregate(const std::vector<std::string>& inputs,
                        const std::string& out) {
    std::vector<vedit::JudgeRecord> records;
    for (const std::string& path : inputs) {
        std::vector<vedit::JudgeRecord> part = vedit::load_records(path);
        records.insert(records.end(), part.begin(), part.end());
    }
    vedit::AggregateReport rep = vedit::aggregate(records);
    std::string table = vedit::render_report(rep);
    write_text(out, table);
    std::cout << table;
    return 0;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const vedit::ConfigError*>(&e)) return 2;
    if (dynamic_cast<const vedit::ShapeError*>(&e)) return 3;
    if (dynamic_cast<const vedit::VocabError*>(&e)) return 4;
    if (dynamic_cast<const vedit::IndexError*>(&e)) return 5;
    if (dynamic_cast<const vedit::NumericError*>(&e)) return 6;
    if (dynamic_cast<const vedit::ScheduleError*>(&e)) return 7;
    if (dynamic_cast<const vedit::LayoutError*>(&e)) return 8;
    if (dynamic_cast<const vedit::ComparabilityError*>(&e)) return 9;
    if (dynamic_cast<const vedit::UnsatisfiableInstructionError*>(&e)) return 10;
    if (dynamic_cast<const vedit::IoError*>(&e)) return 11;
    if (dynamic_cast<const vedit::DomainError*>(&e)) return 12;
    return 1;
}

const char* category_label(const std::exception& e) {
    if (dynamic_cast<const vedit::ConfigError*>(&e)) return "config";
    if (dynamic_cast<const vedit::ShapeError*>(&e)) return "shape";
    if (dynamic_cast<const vedit::VocabError*>(&e)) return "vocab";
    if (dynamic_cast<const vedit::IndexError*>(&e)) return "index";
    if (dynamic_cast<const vedit::NumericError*>(&e)) return "numeric";
    if (dynamic_cast<const vedit::ScheduleError*>(&e)) return "schedule";
    if (dynamic_cast<const vedit::LayoutError*>(&e)) return "layout";
    if (dynamic_cast<const vedit::ComparabilityError*>(&e)) return "comparability";
    if (dynamic_cast<const vedit::UnsatisfiableInstructionError*>(&e))
        return "unsatisfiable";
    if (dynamic_cast<const vedit::IoError*>(&e)) return "io";
    if (dynamic_cast<const vedit::DomainError*>(&e)) return "domain";
    return "error";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Micro video-edit diffusion workbench"};
    app.require_subcommand(1);

    std::string config_path, out, ckpt_path, data_path, plan_path, endpoint;
    std::vector<std::string> sets, agg_inputs;
    uint64_t seed = 1;

    auto add_sets = [&](CLI::App* sub) {
        sub->add_option("--set", sets, "key=value config override (repeatable)");
    };

    CLI::App* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset");
    gen->add_option("--config", config_path, "Config file");
    gen->add_option("--out", out, "Output dataset path")->required();
    add_sets(gen);

    CLI::App* train = app.add_subcommand("train", "Train a model");
    train->add_option("--config", config_path, "Config file");
    train->add_option("--out", out, "Output directory")->required();
    add_sets(train);

    CLI::App* sample = app.add_subcommand("sample", "Sample an edit from a checkpoint");
    sample->add_option("--ckpt", ckpt_path, "Checkpoint file")->required();
    sample->add_option("--seed", seed, "Scenario seed")->required();
    sample->add_option("--out", out, "Output clip bundle path")->required();
    add_sets(sample);

    CLI::App* analyze = app.add_subcommand("analyze", "Depth-wise trace metrics");
    analyze->add_option("--ckpt", ckpt_path, "Checkpoint file")->required();
    analyze->add_option("--data", data_path, "Held-out dataset path")->required();
    analyze->add_option("--out", out, "Report path")->required();
    add_sets(analyze);

    CLI::App* ablate = app.add_subcommand("ablate", "Run an ablation plan");
    ablate->add_option("--plan", plan_path, "Plan file")->required();
    ablate->add_option("--out", out, "Output directory")->required();
    add_sets(ablate);

    CLI::App* jrun = app.add_subcommand("judge-run", "Score sampled clips");
    jrun->add_option("--endpoint", endpoint, "\"mock\" or an http:// URL")
        ->required();
    jrun->add_option("--dir", data_path, "Directory of .vsmp bundles")->required();
    jrun->add_option("--out", out, "Output JSONL path")->required();

    CLI::App* jagg = app.add_subcommand("judge-aggregate", "Aggregate judge records");
    jagg->add_option("--in", agg_inputs, "Input JSONL file(s)")->required();
    jagg->add_option("--out", out, "Report path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen_data(config_path, out, sets);
        if (train->parsed()) return cmd_train(config_path, out, sets);
        if (sample->parsed()) return cmd_sample(ckpt_path, seed, out, sets);
        if (analyze->parsed()) return cmd_analyze(ckpt_path, data_path, out, sets);
        if (ablate->parsed()) return cmd_ablate(plan_path, out, sets);
        if (jrun->parsed()) return cmd_judge_run(endpoint, data_path, out);
        if (jagg->parsed()) return cmd_judge_aggregate(agg_inputs, out);
    } catch (const std::exception& e) {
        std::cerr << "error [" << category_label(e) << "]: " << e.what() << "\n";
        return exit_code_for(e);
    }
    return 0;
}
