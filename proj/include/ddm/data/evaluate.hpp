#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "ddm/classify/vote.hpp"
#include "ddm/data/corpus.hpp"
#include "ddm/data/metrics.hpp"
#include "ddm/pipeline.hpp"

namespace ddm::data {

struct FoldResult {
    std::vector<std::string> query_ids;
    std::vector<int> truth;
    std::vector<classify::ClassificationReport> reports;
    TrainingProvenance provenance;
};

struct EvalResult {
    std::string protocol;
    std::uint64_t seed = 0;
    std::vector<FoldResult> folds;
    ConfusionMatrix confusion;
    double accuracy = 0.0;
    MapResult map;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["protocol"] = protocol;
        j["seed"] = seed;
        j["accuracy"] = accuracy;
        j["map"] = map.map;
        j["average_precision"] = map.average_precision;
        j["map_excluded_classes"] = map.excluded;
        nlohmann::json conf = nlohmann::json::array();
        for (std::size_t i = 0; i < confusion.classes; ++i) {
            std::vector<std::size_t> row;
            for (std::size_t k = 0; k < confusion.classes; ++k) row.push_back(confusion.at(i, k));
            conf.push_back(row);
        }
        j["confusion"] = conf;
        nlohmann::json preds = nlohmann::json::array();
        for (const auto& f : folds)
            for (std::size_t q = 0; q < f.reports.size(); ++q)
                preds.push_back({{"video_id", f.query_ids[q]},
                                 {"truth", f.truth[q]},
                                 {"predicted", f.reports[q].predicted},
                                 {"weights", f.reports[q].weights}});
        j["predictions"] = preds;
        return j;
    }
};

/// Runs `work(i)` for i in [0, n) on up to `threads` workers; the first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& work) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) work(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    work(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

/// Trains on `train` and classifies every item of `test`. The feature dictionary, the
/// standardization statistics and all model parameters come from `train` only.
inline FoldResult run_fold(std::span<const CorpusItem* const> train, std::span<const CorpusItem* const> test,
                           const PipelineConfig& cfg, const std::optional<scsp::Dictionary>& corpus_dict) {
    FoldResult f;
    std::set<int> labels;
    for (const auto* it : train) labels.insert(it->label);

    std::optional<scsp::Dictionary> dict;
    if (cfg.use_scsp) {
        std::vector<std::string> test_ids;
        for (const auto* it : test) test_ids.push_back(it->id);
        bool subset_ok = corpus_dict.has_value();
        if (subset_ok) {
            // Every training atom must be present for the restricted dictionary to be exact.
            std::set<std::string> have;
            for (const auto& p : corpus_dict->provenance()) have.insert(p.video_id);
            for (const auto* it : train) subset_ok = subset_ok && have.count(it->id) > 0;
        }
        if (subset_ok) {
            dict = corpus_dict->without_videos(test_ids);
        } else {
            std::vector<scsp::VideoTensor> vids;
            std::vector<std::string> ids;
            for (const auto* it : train) {
                vids.push_back(it->video);
                ids.push_back(it->id);
            }
            dict = scsp::build_dictionary(vids, ids, cfg.block, cfg.segment_length);
        }
        std::set<std::string> seen;
        for (const auto& p : dict->provenance())
            if (seen.insert(p.video_id).second) f.provenance.dictionary_videos.push_back(p.video_id);
    }
    const FeatureModel fm(cfg, dict);

    std::vector<scsp::ScspSequence> train_seqs;
    for (const auto* it : train) train_seqs.push_back(fm.features(it->video, it->id, it->label));

    TrainedPipeline trained = train_pipeline(train_seqs, cfg);
    f.provenance.pretrain_videos = trained.provenance.pretrain_videos;
    f.provenance.finetune_videos = trained.provenance.finetune_videos;

    for (const auto* it : test) {
        const auto q = fm.features(it->video, it->id, it->label);
        f.query_ids.push_back(it->id);
        f.truth.push_back(it->label);
        f.reports.push_back(classify_sequence(q, trained));
    }
    return f;
}

inline void summarize(EvalResult& r, int num_classes) {
    r.confusion = ConfusionMatrix(static_cast<std::size_t>(num_classes));
    std::vector<int> truth;
    std::vector<std::vector<double>> rows;
    for (const auto& f : r.folds) {
        for (std::size_t q = 0; q < f.reports.size(); ++q) {
            r.confusion.add(f.truth[q], f.reports[q].predicted);
            truth.push_back(f.truth[q]);
            std::vector<double> row(static_cast<std::size_t>(num_classes), 0.0);
            const auto& rep = f.reports[q];
            for (std::size_t c = 0; c < rep.labels.size(); ++c) row[rep.labels[c] - 1] = rep.weights[c];
            rows.push_back(std::move(row));
        }
    }
    r.accuracy = r.confusion.accuracy();
    numeric::Matrix scores(rows.size(), static_cast<std::size_t>(num_classes));
    for (std::size_t q = 0; q < rows.size(); ++q)
        std::copy(rows[q].begin(), rows[q].end(), scores.row(q).begin());
    r.map = mean_average_precision(scores, truth);
}

/// Leave-one-out: each item is classified by models trained on all the others.
inline EvalResult loo_evaluate(const LabeledCorpus& corpus, const PipelineConfig& cfg) {
    cfg.validate();
    if (corpus.size() < 2) throw DataError("leave-one-out needs at least 2 videos");
    const int classes = corpus.num_classes;
    for (std::size_t held = 0; held < corpus.size(); ++held) {
        for (int label = 1; label <= classes; ++label) {
            bool present = false;
            for (std::size_t i = 0; i < corpus.size(); ++i)
                present = present || (i != held && corpus.items[i].label == label);
            if (!present)
                throw DataError("leave-one-out fold for '" + corpus.items[held].id +
                                "' has no training video of class " + std::to_string(label));
        }
    }

    // One dictionary over the whole corpus; each fold drops the held-out item's atoms.
    // Atoms are normalized independently, so the restriction equals a fold-local build.
    std::optional<scsp::Dictionary> corpus_dict;
    if (cfg.use_scsp) {
        std::vector<scsp::VideoTensor> vids;
        std::vector<std::string> ids;
        for (const auto& it : corpus.items) {
            vids.push_back(it.video);
            ids.push_back(it.id);
        }
        corpus_dict = scsp::build_dictionary(vids, ids, cfg.block, cfg.segment_length);
    }

    EvalResult r;
    r.protocol = "loo";
    r.seed = cfg.seed;
    r.folds.resize(corpus.size());
    parallel_for(corpus.size(), cfg.threads, [&](std::size_t held) {
        std::vector<const CorpusItem*> train, test{&corpus.items[held]};
        for (std::size_t i = 0; i < corpus.size(); ++i)
            if (i != held) train.push_back(&corpus.items[i]);
        PipelineConfig fold_cfg = cfg;
        fold_cfg.seed = numeric::RngStream(cfg.seed).derive(held).next_u64();
        r.folds[held] = run_fold(train, test, fold_cfg, corpus_dict);
    });
    summarize(r, classes);
    return r;
}

/// Fixed train/test split.
inline EvalResult split_evaluate(const LabeledCorpus& train, const LabeledCorpus& test,
                                 const PipelineConfig& cfg) {
    cfg.validate();
    std::vector<const CorpusItem*> tr, te;
    for (const auto& it : train.items) tr.push_back(&it);
    for (const auto& it : test.items) te.push_back(&it);
    if (tr.empty() || te.empty()) throw DataError("split evaluation needs train and test videos");
    EvalResult r;
    r.protocol = "split";
    r.seed = cfg.seed;
    r.folds.push_back(run_fold(tr, te, cfg, std::nullopt));
    summarize(r, std::max(train.num_classes, test.num_classes));
    return r;
}

} // namespace ddm::data
