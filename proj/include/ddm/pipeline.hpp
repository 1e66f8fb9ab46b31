#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ddm/classify/vote.hpp"
#include "ddm/error.hpp"
#include "ddm/grbm/pretrain.hpp"
#include "ddm/hddm/train.hpp"
#include "ddm/numeric/rng.hpp"
#include "ddm/scsp/dictionary.hpp"

namespace ddm {

/// How sequences are mapped before they reach the sigmoid autoencoder.
enum class InputScaling { none, frame_max };

inline std::string to_string(InputScaling s) { return s == InputScaling::none ? "none" : "frame_max"; }

inline InputScaling parse_input_scaling(const std::string& s) {
    if (s == "none") return InputScaling::none;
    if (s == "frame_max") return InputScaling::frame_max;
    throw ConfigError("scsp_scaling must be 'none' or 'frame_max', got '" + s + "'");
}

inline scsp::ScspSequence model_input(scsp::ScspSequence s, InputScaling scaling) {
    return scaling == InputScaling::frame_max ? scsp::scaled_to_unit_range(std::move(s)) : s;
}

/// Every tunable of the pipeline. Defaults follow the published settings where they exist
/// and desk-scale values elsewhere.
struct PipelineConfig {
    scsp::BlockSpec block{3, 3, 3};
    double lambda = 0.1;
    std::size_t segment_length = 0;  ///< 0: block depth
    std::size_t sequence_length = 0; ///< 0: temporal slabs per video
    bool use_scsp = true;
    std::size_t raw_downsample = 4;  ///< pooling factor when use_scsp is false
    InputScaling scsp_scaling = InputScaling::frame_max; ///< applied to SCSP codes only

    std::vector<std::size_t> layer_sizes{64, 32, 16, 8};
    grbm::CdConfig cd{};
    std::size_t pretrain_subset = 200; ///< videos drawn for GRBM pre-training
    double standardize_floor = 1e-2;
    hddm::FineTuneConfig ft{};

    std::uint64_t seed = 7;
    std::size_t threads = 0; ///< 0: hardware concurrency

    std::string manifest;
    std::string test_manifest;
    std::string feature_dir = "features";
    std::string model = "model.ddm";
    std::string pretrain_file;
    std::string report = "report.json";
    std::string eval_out = "eval";
    std::string protocol = "loo";

    void validate() const {
        block.validate();
        if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
        if (raw_downsample < 1) throw ConfigError("raw_downsample must be >= 1");
        if (layer_sizes.empty()) throw ConfigError("layer_sizes must list at least one layer");
        for (auto s : layer_sizes)
            if (s < 1) throw ConfigError("layer sizes must be >= 1");
        if (pretrain_subset < 1) throw ConfigError("pretrain_subset must be >= 1");
        if (!(standardize_floor > 0.0)) throw ConfigError("standardize_floor must be > 0");
        cd.validate();
        ft.validate();
        if (protocol != "loo" && protocol != "split") throw ConfigError("protocol must be 'loo' or 'split'");
    }

    /// Raw frames are already intensities in [0, 1].
    InputScaling input_scaling() const noexcept { return use_scsp ? scsp_scaling : InputScaling::none; }

    scsp::ScspOptions scsp_options() const {
        scsp::ScspOptions o;
        o.block = block;
        o.segment_length = segment_length;
        o.lambda = lambda;
        o.sequence_length = sequence_length;
        return o;
    }
};

/// Average-pools each frame by `factor` (remainder rows/cols dropped); one frame per row,
/// channel values interleaved as in the source.
inline scsp::ScspSequence raw_sequence(const scsp::VideoTensor& v, std::size_t factor,
                                       const std::string& id) {
    const std::size_t gh = v.height() / factor, gw = v.width() / factor;
    if (gh == 0 || gw == 0) throw ShapeError("video '" + id + "' is smaller than the pooling window");
    const double inv = 1.0 / static_cast<double>(factor * factor);
    numeric::Matrix frames(v.frames(), gh * gw * v.channels());
    for (std::size_t t = 0; t < v.frames(); ++t) {
        auto row = frames.row(t);
        for (std::size_t y = 0; y < gh; ++y)
            for (std::size_t x = 0; x < gw; ++x)
                for (std::size_t c = 0; c < v.channels(); ++c) {
                    double s = 0.0;
                    for (std::size_t dy = 0; dy < factor; ++dy)
                        for (std::size_t dx = 0; dx < factor; ++dx)
                            s += v.at(t, y * factor + dy, x * factor + dx, c);
                    row[(y * gw + x) * v.channels() + c] = s * inv;
                }
    }
    return {id, 0, std::move(frames)};
}

/// Turns videos into model input sequences: SCSP codes over a dictionary, or pooled raw frames.
class FeatureModel {
public:
    FeatureModel(const PipelineConfig& cfg, std::optional<scsp::Dictionary> dict)
        : cfg_(cfg), dict_(std::move(dict)) {
        if (cfg_.use_scsp && !dict_) throw ConfigError("SCSP features need a dictionary");
    }

    /// Dictionary built from the given training videos (none in raw mode).
    static FeatureModel fit(const PipelineConfig& cfg, std::span<const scsp::VideoTensor> videos,
                            std::span<const std::string> ids) {
        if (!cfg.use_scsp) return FeatureModel(cfg, std::nullopt);
        return FeatureModel(cfg, scsp::build_dictionary(videos, ids, cfg.block, cfg.segment_length));
    }

    bool uses_scsp() const noexcept { return cfg_.use_scsp; }
    const std::optional<scsp::Dictionary>& dictionary() const noexcept { return dict_; }

    /// A dictionary member is coded without its own atoms.
    scsp::ScspSequence features(const scsp::VideoTensor& v, const std::string& id, int label = 0) const {
        scsp::ScspSequence s = cfg_.use_scsp
                                   ? scsp::scsp_features(v, *dict_, cfg_.scsp_options(), id, id)
                                   : raw_sequence(v, cfg_.raw_downsample, id);
        s.label = label;
        return s;
    }

private:
    PipelineConfig cfg_;
    std::optional<scsp::Dictionary> dict_;
};

struct PretrainOutcome {
    grbm::PretrainedStack stack;
    std::vector<std::string> video_ids; ///< sequences drawn for pre-training
};

/// Draws up to `pretrain_subset` sequences at random and trains the GRBM stack on all of
/// their frames.
inline PretrainOutcome pretrain(std::span<const scsp::ScspSequence> seqs, const PipelineConfig& cfg) {
    if (seqs.empty()) throw DataError("pre-training needs at least one sequence");
    numeric::RngStream rng = numeric::RngStream(cfg.seed).derive(0x5052455452ULL);
    std::vector<std::size_t> order(seqs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    order.resize(std::min(order.size(), cfg.pretrain_subset));
    std::sort(order.begin(), order.end());

    PretrainOutcome out;
    for (std::size_t i : order) out.video_ids.push_back(seqs[i].video_id);
    grbm::CdConfig cd = cfg.cd;
    cd.seed = rng.derive(1).next_u64();
    out.stack = grbm::pretrain_stack(hddm::stack_frames(seqs, order), cfg.layer_sizes, cd,
                                     {true, cfg.standardize_floor});
    return out;
}

inline hddm::HddmParams initial_hddm(const grbm::PretrainedStack& stack) {
    const auto folded = stack.unstandardized();
    return hddm::init_from_pretraining(folded);
}

/// Fine-tunes one model per label, in ascending label order, each from the same start.
inline std::vector<hddm::ClassModel> train_classes(std::span<const scsp::ScspSequence> seqs,
                                                   const hddm::HddmParams& init,
                                                   const PipelineConfig& cfg,
                                                   std::map<int, std::vector<std::string>>* used = nullptr) {
    std::map<int, std::vector<scsp::ScspSequence>> by_label;
    for (const auto& s : seqs) by_label[s.label].push_back(s);
    std::vector<hddm::ClassModel> models;
    for (auto& [label, data] : by_label) {
        if (used)
            for (const auto& s : data) (*used)[label].push_back(s.video_id);
        numeric::RngStream rng = numeric::RngStream(cfg.seed).derive(0x46540000ULL + static_cast<std::uint64_t>(label));
        try {
            models.push_back(hddm::fine_tune(data, init, cfg.ft, rng, label));
        } catch (const hddm::DivergenceError& e) {
            throw NumericError(std::string("training class ") + std::to_string(label) + " failed: " + e.what());
        }
    }
    return models;
}

/// Records which videos fed each training stage, for leakage checks.
struct TrainingProvenance {
    std::vector<std::string> dictionary_videos;
    std::vector<std::string> pretrain_videos;
    std::map<int, std::vector<std::string>> finetune_videos;
};

struct TrainedPipeline {
    InputScaling scaling = InputScaling::none;
    grbm::PretrainedStack stack;
    std::vector<hddm::ClassModel> models;
    TrainingProvenance provenance;
};

/// `seqs` are feature sequences as extracted; the configured input scaling is applied here.
inline TrainedPipeline train_pipeline(std::span<const scsp::ScspSequence> seqs, const PipelineConfig& cfg) {
    TrainedPipeline t;
    t.scaling = cfg.input_scaling();
    std::vector<scsp::ScspSequence> inputs;
    for (const auto& s : seqs) inputs.push_back(model_input(s, t.scaling));
    PretrainOutcome pre = pretrain(inputs, cfg);
    t.provenance.pretrain_videos = std::move(pre.video_ids);
    t.stack = std::move(pre.stack);
    t.models = train_classes(inputs, initial_hddm(t.stack), cfg, &t.provenance.finetune_videos);
    return t;
}

inline classify::ClassificationReport classify_sequence(const scsp::ScspSequence& query,
                                                        const TrainedPipeline& t) {
    return classify::classify(model_input(query, t.scaling), t.models);
}

} // namespace ddm
