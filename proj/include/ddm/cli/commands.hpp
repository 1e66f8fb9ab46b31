#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ddm/cli/config.hpp"
#include "ddm/data/corpus.hpp"
#include "ddm/data/embedding.hpp"
#include "ddm/data/evaluate.hpp"
#include "ddm/data/synthetic.hpp"
#include "ddm/hddm/model_io.hpp"
#include "ddm/pipeline.hpp"
#include "ddm/scsp/feature_io.hpp"

namespace ddm::cli {

namespace fs = std::filesystem;

inline constexpr const char* feature_index = "index.tsv";
inline constexpr const char* embedding_file = "embedding.csv";

/// File stem for a corpus item: the manifest path with separators flattened and extension dropped.
inline std::string feature_stem(const std::string& id) {
    fs::path p(id);
    std::string s = (p.parent_path() / p.stem()).generic_string();
    std::replace(s.begin(), s.end(), '/', '_');
    return s;
}

inline nlohmann::json config_meta(const Settings& s, const std::string& command) {
    return {{"command", command}, {"config", echo(s)}};
}

inline const std::string& require(const std::string& value, const char* key) {
    if (value.empty()) throw ConfigError(std::string("'") + key + "' is not set");
    return value;
}

inline data::LabeledCorpus load_manifest(const std::string& path, const char* key) {
    require(path, key);
    if (!fs::exists(path)) throw ConfigError("manifest '" + path + "' does not exist");
    return data::load_corpus(path);
}

inline int cmd_synth(const Settings& s, std::ostream& out) {
    auto corpus = data::generate_synthetic(s.synth);
    corpus.provenance = config_meta(s, "synth").dump();
    const auto manifest = data::write_corpus(s.synth_out, corpus);
    out << "wrote " << corpus.size() << " videos, manifest " << manifest.string() << "\n";
    return 0;
}

inline int cmd_extract(const Settings& s, std::ostream& out) {
    const PipelineConfig& cfg = s.pipeline;
    cfg.validate();
    const auto corpus = load_manifest(cfg.manifest, "manifest");

    std::set<std::string> stems;
    for (const auto& it : corpus.items)
        if (!stems.insert(feature_stem(it.id)).second)
            throw DataError("two manifest entries map to feature file '" + feature_stem(it.id) + "'");

    const auto meta = config_meta(s, "extract");
    std::optional<scsp::Dictionary> dict;
    if (cfg.use_scsp) {
        std::vector<scsp::VideoTensor> vids;
        std::vector<std::string> ids;
        for (const auto& it : corpus.items) {
            vids.push_back(it.video);
            ids.push_back(it.id);
        }
        dict = scsp::build_dictionary(vids, ids, cfg.block, cfg.segment_length);
        scsp::write_dictionary(s.dictionary, *dict, meta);
        out << "dictionary " << s.dictionary << ": " << dict->size() << " atoms of dimension "
            << dict->feature_dim() << "\n";
    }
    const FeatureModel fm(cfg, dict);
    std::vector<scsp::ScspSequence> seqs(corpus.size());
    data::parallel_for(corpus.size(), cfg.threads, [&](std::size_t i) {
        const auto& it = corpus.items[i];
        seqs[i] = fm.features(it.video, it.id, it.label);
    });

    fs::create_directories(cfg.feature_dir);
    std::string index;
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        const std::string name = feature_stem(corpus.items[i].id) + ".scspft";
        scsp::write_sequence(fs::path(cfg.feature_dir) / name, seqs[i], meta);
        index += name + "\t" + std::to_string(seqs[i].label) + "\n";
    }
    io::write_text(fs::path(cfg.feature_dir) / feature_index, index);
    io::write_text(fs::path(cfg.feature_dir) / embedding_file, data::embedding_csv(seqs));
    out << "wrote " << seqs.size() << " feature files to " << cfg.feature_dir << "\n";
    return 0;
}

/// Sequences listed in the feature directory's index, in index order.
inline std::vector<scsp::ScspSequence> read_features(const PipelineConfig& cfg) {
    const fs::path dir(require(cfg.feature_dir, "feature_dir"));
    const fs::path index = dir / feature_index;
    std::ifstream f(index);
    if (!f) throw DataError("no feature index '" + index.string() + "'; run extract first");
    std::vector<scsp::ScspSequence> seqs;
    for (const auto& e : data::parse_manifest(f, index.string()))
        seqs.push_back(scsp::read_sequence(dir / e.path).sequence);
    if (seqs.empty()) throw DataError("feature index '" + index.string() + "' lists no files");
    for (const auto& q : seqs)
        if (q.label < 1) throw DataError("feature file for '" + q.video_id + "' has no class label");
    return seqs;
}

inline std::vector<scsp::ScspSequence> scaled(const std::vector<scsp::ScspSequence>& seqs, InputScaling scaling) {
    std::vector<scsp::ScspSequence> out;
    for (const auto& q : seqs) out.push_back(model_input(q, scaling));
    return out;
}

inline void log_pretraining(const grbm::PretrainedStack& stack, std::ostream& out) {
    for (std::size_t i = 0; i < stack.epoch_errors.size(); ++i) {
        const auto& e = stack.epoch_errors[i];
        if (e.empty()) continue;
        out << "grbm " << i + 1 << ": " << stack.layers[i].visible() << " -> " << stack.layers[i].hidden()
            << ", reconstruction error " << e.front() << " -> " << e.back() << "\n";
    }
}

inline int cmd_pretrain(const Settings& s, std::ostream& out) {
    const PipelineConfig& cfg = s.pipeline;
    cfg.validate();
    const std::string& path = require(cfg.pretrain_file, "pretrain_file");
    const auto inputs = scaled(read_features(cfg), cfg.input_scaling());
    auto pre = pretrain(inputs, cfg);
    log_pretraining(pre.stack, out);
    hddm::ModelFile m;
    m.pretrained = std::move(pre.stack);
    m.input_scaling = to_string(cfg.input_scaling());
    m.meta = config_meta(s, "pretrain");
    m.meta["pretrain_videos"] = pre.video_ids;
    hddm::write_model(path, m);
    out << "wrote " << path << "\n";
    return 0;
}

inline int cmd_train(const Settings& s, std::ostream& out) {
    const PipelineConfig& cfg = s.pipeline;
    cfg.validate();
    const InputScaling scaling = cfg.input_scaling();
    const auto inputs = scaled(read_features(cfg), scaling);

    hddm::ModelFile m;
    m.input_scaling = to_string(scaling);
    m.meta = config_meta(s, "train");
    if (!cfg.pretrain_file.empty()) {
        if (!fs::exists(cfg.pretrain_file))
            throw ConfigError("pretrain_file '" + cfg.pretrain_file + "' does not exist");
        auto pre = hddm::read_model(cfg.pretrain_file);
        if (pre.pretrained.layers.empty())
            throw DataError("'" + cfg.pretrain_file + "' holds no pre-trained layers");
        if (pre.input_scaling != m.input_scaling)
            throw ConfigError("'" + cfg.pretrain_file + "' was pre-trained with input scaling '" +
                              pre.input_scaling + "', current setting is '" + m.input_scaling + "'");
        m.pretrained = std::move(pre.pretrained);
        m.meta["pretrain_file"] = cfg.pretrain_file;
    } else {
        auto pre = pretrain(inputs, cfg);
        log_pretraining(pre.stack, out);
        m.pretrained = std::move(pre.stack);
        m.meta["pretrain_videos"] = pre.video_ids;
    }
    if (m.pretrained.layers.front().visible() != inputs.front().frame_dim())
        throw ShapeError("pre-trained stack expects frames of dimension " +
                         std::to_string(m.pretrained.layers.front().visible()) + ", features have " +
                         std::to_string(inputs.front().frame_dim()));

    m.classes = train_classes(inputs, initial_hddm(m.pretrained), cfg);
    for (const auto& c : m.classes) {
        for (std::size_t e = 0; e < c.cost_history.size(); ++e)
            out << "class " << c.label << " epoch " << e + 1 << " cost " << c.cost_history[e] << "\n";
    }
    hddm::write_model(cfg.model, m);
    out << "wrote " << cfg.model << " with " << m.classes.size() << " class models\n";
    return 0;
}

inline scsp::ScspSequence query_features(const Settings& s) {
    const std::string& path = require(s.query, "query");
    if (!fs::exists(path)) throw DataError("query '" + path + "' does not exist");
    if (io::has_magic(path, scsp::feature_magic)) return scsp::read_sequence(path).sequence;
    if (!io::has_magic(path, data::video_magic))
        throw DataError("query '" + path + "' is neither an RVT1 video nor an SCSPFTv1 feature file");
    const auto video = data::read_video(path);
    std::optional<scsp::Dictionary> dict;
    if (s.pipeline.use_scsp) {
        if (!fs::exists(s.dictionary)) throw ConfigError("dictionary '" + s.dictionary + "' does not exist");
        dict = scsp::read_dictionary(s.dictionary).dictionary;
    }
    return FeatureModel(s.pipeline, std::move(dict)).features(video, path);
}

inline int cmd_classify(const Settings& s, std::ostream& out) {
    const PipelineConfig& cfg = s.pipeline;
    cfg.validate();
    if (!fs::exists(cfg.model)) throw ConfigError("model '" + cfg.model + "' does not exist");
    const auto model = hddm::read_model(cfg.model);
    const auto query = query_features(s);
    if (!model.classes.empty() && query.frame_dim() != model.classes.front().params.input_dim())
        throw ShapeError("query '" + s.query + "' has frames of dimension " + std::to_string(query.frame_dim()) +
                         " but model '" + cfg.model + "' expects " +
                         std::to_string(model.classes.front().params.input_dim()) +
                         "; extract features with the settings the model was trained on");
    const auto report = classify::classify(model_input(query, parse_input_scaling(model.input_scaling)), model.classes);
    nlohmann::json j = config_meta(s, "classify");
    j["query"] = s.query;
    j["report"] = report.to_json();
    io::write_text(cfg.report, j.dump(2) + "\n");
    out << report.to_table();
    return 0;
}

inline int cmd_evaluate(const Settings& s, std::ostream& out) {
    const PipelineConfig& cfg = s.pipeline;
    cfg.validate();
    const auto corpus = load_manifest(cfg.manifest, "manifest");
    data::EvalResult r;
    if (cfg.protocol == "loo") {
        r = data::loo_evaluate(corpus, cfg);
    } else {
        const auto test = load_manifest(cfg.test_manifest, "test_manifest");
        r = data::split_evaluate(corpus, test, cfg);
    }
    const std::string prefix = require(cfg.eval_out, "eval_out");
    nlohmann::json j = config_meta(s, "evaluate");
    j["result"] = r.to_json();
    io::write_text(prefix + ".json", j.dump(2) + "\n");
    io::write_text(prefix + "_confusion.csv", "# " + j["config"].dump() + "\n" + r.confusion.to_csv());

    out << "protocol " << r.protocol << ", seed " << r.seed << "\n";
    out << "accuracy " << std::fixed << std::setprecision(4) << r.accuracy << "\n";
    out << "mAP      " << r.map.map << "\n";
    out << r.confusion.to_csv();
    return 0;
}

/// Parses `args` (without the program name) and runs one subcommand. Returns the exit code.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Deep discriminative models over sparse spatiotemporal features"};
    app.name("ddm");
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    app.add_option("--config", config_path, "key = value config file");
    std::map<std::string, std::string> flag_values;
    for (const auto& k : keys()) app.add_option("--" + k.name, flag_values[k.name], k.help);

    struct Command {
        const char* name;
        const char* help;
        int (*fn)(const Settings&, std::ostream&);
    };
    const Command commands[] = {
        {"synth", "write a synthetic corpus", cmd_synth},
        {"extract", "build the dictionary and write one feature file per video", cmd_extract},
        {"pretrain", "pre-train the GRBM stack", cmd_pretrain},
        {"train", "fine-tune one model per class", cmd_train},
        {"classify", "classify a query video or feature file", cmd_classify},
        {"evaluate", "leave-one-out or split evaluation", cmd_evaluate},
    };
    for (const auto& c : commands) app.add_subcommand(c.name, c.help);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : exit_code(ErrorKind::config);
    }

    try {
        Settings s;
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) throw ConfigError("cannot open config '" + config_path + "'");
            for (const auto& [k, v] : parse_config(f, config_path)) apply(s, k, v);
        }
        for (const auto& k : keys())
            if (app.count("--" + k.name) > 0) apply(s, k.name, flag_values[k.name]);
        for (const auto& c : commands)
            if (app.got_subcommand(c.name)) return c.fn(s, out);
        return exit_code(ErrorKind::config);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code(ErrorKind::data);
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace ddm::cli
