#include "vedit/model_config.h"

#include <string>

namespace vedit {

ModelConfig ModelConfig::from_config(const Config& cfg) {
    ModelConfig mc;
    mc.T = static_cast<int>(cfg.get_int("data.frames", mc.T));
    mc.H = static_cast<int>(cfg.get_int("data.height", mc.H));
    mc.W = static_cast<int>(cfg.get_int("data.width", mc.W));
    mc.C = static_cast<int>(cfg.get_int("data.channels", mc.C));
    mc.instr_len = static_cast<int>(cfg.get_int("data.instr_len", mc.instr_len));
    mc.vocab = static_cast<int>(cfg.get_int("data.vocab", mc.vocab));
    mc.d = static_cast<int>(cfg.get_int("model.width", mc.d));
    mc.k = static_cast<int>(cfg.get_int("model.edit_tokens", mc.k));
    mc.l = static_cast<int>(cfg.get_int("model.blocks", mc.l));
    mc.ls = static_cast<int>(cfg.get_int("model.split", mc.ls));
    mc.heads = static_cast<int>(cfg.get_int("model.heads", mc.heads));
    mc.ffn_mult = static_cast<int>(cfg.get_int("model.ffn_mult", mc.ffn_mult));
    mc.patch = static_cast<int>(cfg.get_int("model.patch", mc.patch));
    mc.extractor_blocks =
        static_cast<int>(cfg.get_int("model.extractor_blocks", mc.extractor_blocks));
    mc.validate();
    return mc;
}

void ModelConfig::validate() const {
    auto bad = [](const std::string& m) { throw ConfigError("model config: " + m); };
    if (T < 1) bad("frames must be >= 1");
    if (H < 1 || W < 1) bad("frame size must be positive");
    if (C < 1) bad("channels must be >= 1");
    if (instr_len < 1) bad("instr_len must be >= 1");
    if (vocab < 1) bad("vocab must be >= 1");
    if (d < 2 || d % 2 != 0) bad("width must be even and >= 2 for sin/cos codes");
    if (k < 1) bad("edit_tokens must be >= 1");
    if (l < 1) bad("blocks must be >= 1");
    if (ls < 1 || ls > l)
        bad("split must lie in [1, blocks], got " + std::to_string(ls));
    if (heads < 1 || d % heads != 0) bad("width must divide into heads");
    if (ffn_mult < 1) bad("ffn_mult must be >= 1");
    if (patch < 1 || H % patch != 0 || W % patch != 0)
        bad("patch must divide height and width");
    if (extractor_blocks < 1) bad("extractor_blocks must be >= 1");
}

}  // namespace vedit
