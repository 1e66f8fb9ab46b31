#pragma once

#include <charconv>
#include <functional>
#include <type_traits>
#include <istream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ddm/data/synthetic.hpp"
#include "ddm/error.hpp"
#include "ddm/pipeline.hpp"

namespace ddm::cli {

/// Everything a command can be told: the pipeline plus CLI-only paths and generator settings.
struct Settings {
    PipelineConfig pipeline;
    data::SynthSpec synth;
    std::string synth_out = "synthetic";
    std::string dictionary = "dictionary.scspft";
    std::string query;
};

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::string format_double(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T v{};
    const char* end = text.data() + text.size();
    auto r = std::from_chars(text.data(), end, v);
    if (text.empty() || r.ec != std::errc{} || r.ptr != end)
        throw ConfigError("'" + key + "': cannot parse '" + text + "'");
    return v;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw ConfigError("'" + key + "': expected true or false, got '" + text + "'");
}

inline std::vector<std::size_t> parse_sizes(const std::string& key, const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number<std::size_t>(key, trim(item)));
    if (out.empty()) throw ConfigError("'" + key + "': empty list");
    return out;
}

inline std::string join_sizes(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

/// "WxHxD", e.g. 3x3x3
inline scsp::BlockSpec parse_block(const std::string& key, const std::string& text) {
    std::vector<std::size_t> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, 'x')) parts.push_back(parse_number<std::size_t>(key, trim(item)));
    if (parts.size() != 3) throw ConfigError("'" + key + "': expected WxHxD, got '" + text + "'");
    return {parts[0], parts[1], parts[2]};
}

struct Key {
    std::string name;
    std::string help;
    std::function<void(Settings&, const std::string&)> set;
    std::function<std::string(const Settings&)> get;
};

namespace detail {

// `field` is a generic lambda returning a reference into Settings, usable on const and mutable.
template <typename Field>
Key number(std::string name, std::string help, Field field) {
    return {name, std::move(help),
            [name, field](Settings& s, const std::string& v) {
                auto& f = field(s);
                f = parse_number<std::remove_reference_t<decltype(f)>>(name, v);
            },
            [field](const Settings& s) {
                const auto v = field(s);
                if constexpr (std::is_floating_point_v<decltype(v)>) return format_double(v);
                else return std::to_string(v);
            }};
}

template <typename Field>
Key text(std::string name, std::string help, Field field) {
    return {std::move(name), std::move(help), [field](Settings& s, const std::string& v) { field(s) = v; },
            [field](const Settings& s) { return std::string(field(s)); }};
}

} // namespace detail

#define DDM_FIELD(expr) [](auto& s) -> auto& { return s.expr; }

/// Every recognised key, in echo order.
inline const std::vector<Key>& keys() {
    using detail::number;
    using detail::text;
    static const std::vector<Key> table = {
        {"block", "block size WxHxD",
         [](Settings& s, const std::string& v) { s.pipeline.block = parse_block("block", v); },
         [](const Settings& s) { return s.pipeline.block.to_string(); }},
        number("lambda", "lasso penalty", DDM_FIELD(pipeline.lambda)),
        number("segment_length", "frames per dictionary segment (0: block depth)", DDM_FIELD(pipeline.segment_length)),
        number("sequence_length", "frames per feature sequence (0: one per segment)", DDM_FIELD(pipeline.sequence_length)),
        {"use_scsp", "SCSP features (false: pooled raw frames)",
         [](Settings& s, const std::string& v) { s.pipeline.use_scsp = parse_bool("use_scsp", v); },
         [](const Settings& s) { return std::string(s.pipeline.use_scsp ? "true" : "false"); }},
        number("raw_downsample", "pooling factor for raw frames", DDM_FIELD(pipeline.raw_downsample)),
        {"scsp_scaling", "none | frame_max",
         [](Settings& s, const std::string& v) { s.pipeline.scsp_scaling = parse_input_scaling(v); },
         [](const Settings& s) { return to_string(s.pipeline.scsp_scaling); }},
        {"layer_sizes", "encoder layer widths, comma separated",
         [](Settings& s, const std::string& v) { s.pipeline.layer_sizes = parse_sizes("layer_sizes", v); },
         [](const Settings& s) { return join_sizes(s.pipeline.layer_sizes); }},
        number("cd_lr", "GRBM learning rate", DDM_FIELD(pipeline.cd.lr)),
        number("cd_epochs", "GRBM epochs", DDM_FIELD(pipeline.cd.epochs)),
        number("cd_batch", "GRBM mini-batch (frames)", DDM_FIELD(pipeline.cd.batch)),
        number("cd_k", "Gibbs steps per update", DDM_FIELD(pipeline.cd.k)),
        number("cd_init_range", "GRBM weight init half-width", DDM_FIELD(pipeline.cd.init_range)),
        number("pretrain_subset", "videos drawn for pre-training", DDM_FIELD(pipeline.pretrain_subset)),
        number("standardize_floor", "minimum scale in GRBM standardization", DDM_FIELD(pipeline.standardize_floor)),
        number("ft_lr", "fine-tune learning rate", DDM_FIELD(pipeline.ft.lr)),
        number("ft_decay", "learning-rate factor per epoch", DDM_FIELD(pipeline.ft.decay)),
        number("ft_epochs", "fine-tune epochs", DDM_FIELD(pipeline.ft.epochs)),
        number("ft_batch", "videos per fine-tune step", DDM_FIELD(pipeline.ft.batch)),
        number("lambda_wd", "weight decay", DDM_FIELD(pipeline.ft.lambda_wd)),
        number("lambda_sp", "sparsity weight", DDM_FIELD(pipeline.ft.lambda_sp)),
        number("rho", "sparsity target", DDM_FIELD(pipeline.ft.rho)),
        number("seed", "root seed", DDM_FIELD(pipeline.seed)),
        number("threads", "worker cap (0: all cores)", DDM_FIELD(pipeline.threads)),
        text("manifest", "corpus manifest", DDM_FIELD(pipeline.manifest)),
        text("test_manifest", "test corpus for protocol = split", DDM_FIELD(pipeline.test_manifest)),
        text("feature_dir", "feature file directory", DDM_FIELD(pipeline.feature_dir)),
        text("dictionary", "dictionary file", DDM_FIELD(dictionary)),
        text("model", "model file", DDM_FIELD(pipeline.model)),
        text("pretrain_file", "pre-trained GRBM stack file", DDM_FIELD(pipeline.pretrain_file)),
        text("report", "classification report (JSON)", DDM_FIELD(pipeline.report)),
        text("eval_out", "evaluation output prefix", DDM_FIELD(pipeline.eval_out)),
        text("protocol", "loo | split", DDM_FIELD(pipeline.protocol)),
        text("query", "video (RVT1) or feature file (SCSPFTv1) to classify", DDM_FIELD(query)),
        number("synth_classes", "synthetic classes", DDM_FIELD(synth.classes)),
        number("synth_per_class", "synthetic videos per class", DDM_FIELD(synth.per_class)),
        number("synth_frames", "synthetic frames", DDM_FIELD(synth.frames)),
        number("synth_height", "synthetic height", DDM_FIELD(synth.height)),
        number("synth_width", "synthetic width", DDM_FIELD(synth.width)),
        number("synth_channels", "synthetic channels", DDM_FIELD(synth.channels)),
        number("synth_seed", "synthetic seed", DDM_FIELD(synth.seed)),
        number("synth_noise", "synthetic pixel noise", DDM_FIELD(synth.noise)),
        text("synth_out", "synthetic corpus directory", DDM_FIELD(synth_out)),
    };
    return table;
}

#undef DDM_FIELD

inline const Key& find_key(const std::string& name) {
    for (const auto& k : keys())
        if (k.name == name) return k;
    throw ConfigError("unknown config key '" + name + "'");
}

inline void apply(Settings& s, const std::string& key, const std::string& value) { find_key(key).set(s, value); }

/// `key = value` lines; `#` starts a comment.
inline std::vector<std::pair<std::string, std::string>> parse_config(std::istream& in, const std::string& source) {
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
        auto key = trim(line.substr(0, eq));
        auto value = trim(line.substr(eq + 1));
        try {
            find_key(key);
        } catch (const ConfigError& e) {
            throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
        }
        out.emplace_back(std::move(key), std::move(value));
    }
    return out;
}

/// The effective value of every key.
inline nlohmann::json echo(const Settings& s) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& k : keys()) j[k.name] = k.get(s);
    return j;
}

} // namespace ddm::cli
