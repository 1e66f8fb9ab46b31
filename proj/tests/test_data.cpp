#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "ddm/data/corpus.hpp"
#include "ddm/data/embedding.hpp"
#include "ddm/data/evaluate.hpp"
#include "ddm/data/metrics.hpp"
#include "ddm/data/synthetic.hpp"

using namespace ddm;
using namespace ddm::data;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("ddm_test_data_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

VideoTensor constant_video(double value, std::size_t t = 6, std::size_t hw = 6) {
    return VideoTensor(t, hw, hw, 1, quantize(value) / 255.0);
}

PipelineConfig small_config(bool scsp) {
    PipelineConfig cfg;
    cfg.use_scsp = scsp;
    cfg.raw_downsample = 3;
    cfg.layer_sizes = {4, 2};
    cfg.cd.epochs = 5;
    cfg.cd.batch = 4;
    cfg.ft.lr = 0.1;
    cfg.ft.decay = 1.0;
    cfg.ft.epochs = 30;
    cfg.ft.batch = 1;
    cfg.threads = 1;
    return cfg;
}

} // namespace

TEST(Corpus, EmptyManifestIsError) {
    const auto dir = scratch_dir("empty");
    io::write_text(dir / "m.tsv", "# nothing here\n\n");
    EXPECT_THROW(load_corpus(dir / "m.tsv"), DataError);
}

TEST(Corpus, MissingManifestIsConfigError) {
    EXPECT_THROW(load_corpus(scratch_dir("missing") / "absent.tsv"), ConfigError);
}

TEST(Corpus, TwoFilesTwoClasses) {
    const auto dir = scratch_dir("two");
    write_video(dir / "a.rvt", constant_video(0.2));
    write_video(dir / "b.rvt", constant_video(0.8));
    io::write_text(dir / "m.tsv", "a.rvt\t1\nb.rvt\t2\n");
    const auto c = load_corpus(dir / "m.tsv");
    EXPECT_EQ(c.size(), 2u);
    EXPECT_EQ(c.num_classes, 2);
    EXPECT_EQ(c.items[1].label, 2);
    EXPECT_EQ(c.items[0].video, constant_video(0.2));
}

TEST(Corpus, MissingVideoAndBadLabelAreDataErrors) {
    const auto dir = scratch_dir("bad");
    io::write_text(dir / "m.tsv", "nope.rvt\t1\n");
    EXPECT_THROW(load_corpus(dir / "m.tsv"), DataError);
    write_video(dir / "a.rvt", constant_video(0.2));
    io::write_text(dir / "m2.tsv", "a.rvt\tone\n");
    EXPECT_THROW(load_corpus(dir / "m2.tsv"), DataError);
}

TEST(Corpus, WriteThenLoadIsBitExact) {
    SynthSpec spec;
    spec.classes = 2;
    spec.per_class = 2;
    spec.frames = 6;
    spec.height = 8;
    spec.width = 8;
    spec.channels = 3;
    const auto c = generate_synthetic(spec);
    const auto dir = scratch_dir("roundtrip");
    const auto back = load_corpus(write_corpus(dir, c));
    ASSERT_EQ(back.size(), c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        EXPECT_EQ(back.items[i].video, c.items[i].video);
        EXPECT_EQ(back.items[i].label, c.items[i].label);
    }
}

TEST(Corpus, RvtHeaderLayout) {
    const auto bytes = encode_video(constant_video(1.0, 2, 3));
    ASSERT_EQ(bytes.size(), 8u + 16u + 18u);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "RVT1");
    EXPECT_EQ(bytes[8], 2);
    EXPECT_EQ(bytes[12], 3);
    EXPECT_EQ(bytes[20], 1);
    EXPECT_EQ(bytes.back(), 255);
    EXPECT_THROW(decode_video(io::Bytes(bytes.begin(), bytes.end() - 1), "short"), DataError);
}

TEST(Synthetic, SameSeedSameCorpus) {
    SynthSpec spec;
    spec.per_class = 2;
    const auto a = generate_synthetic(spec), b = generate_synthetic(spec);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.items[i].video, b.items[i].video);
    spec.seed += 1;
    EXPECT_NE(generate_synthetic(spec).items[0].video, a.items[0].video);
}

TEST(Synthetic, PixelsInUnitRange) {
    SynthSpec spec;
    spec.per_class = 2;
    spec.noise = 0.3;
    for (const auto& it : generate_synthetic(spec).items) {
        const auto [lo, hi] = std::minmax_element(it.video.pixels().begin(), it.video.pixels().end());
        EXPECT_GE(*lo, 0.0);
        EXPECT_LE(*hi, 1.0);
    }
}

TEST(Synthetic, ClassOrientationsDiffer) {
    SynthSpec spec;
    spec.per_class = 4;
    const auto c = generate_synthetic(spec);
    auto mean_orientation = [&](int label) {
        double s = 0.0, k = 0.0; // doubled-angle average, orientations are mod π
        for (const auto& it : c.items)
            if (it.label == label) {
                s += std::sin(2 * gradient_orientation(it.video));
                k += std::cos(2 * gradient_orientation(it.video));
            }
        double a = 0.5 * std::atan2(s, k);
        return a < 0 ? a + std::numbers::pi : a;
    };
    const double a = mean_orientation(1), b = mean_orientation(2);
    double gap = std::abs(a - b);
    gap = std::min(gap, std::numbers::pi - gap);
    EXPECT_GT(gap, 0.5);
}

TEST(Metrics, PerfectRankingGivesOne) {
    const numeric::Matrix scores = numeric::Matrix::from_rows({{0.9, 0.1}, {0.8, 0.3}, {0.2, 0.7}});
    const std::vector<int> truth{1, 1, 2};
    EXPECT_EQ(mean_average_precision(scores, truth).map, 1.0);
}

TEST(Metrics, SingleQuery) {
    const numeric::Matrix scores = numeric::Matrix::from_rows({{0.4}});
    const std::vector<int> truth{1};
    EXPECT_EQ(mean_average_precision(scores, truth).map, 1.0);
}

TEST(Metrics, HandExampleWithOneInversion) {
    // class 1 ranking: q0 (+), q2 (-), q1 (+), q3 (-)  -> AP = (1/1 + 2/3) / 2
    // class 2 ranking: q3 (+), q1 (-), q2 (+), q0 (-)  -> AP = (1/1 + 2/3) / 2
    const numeric::Matrix scores =
        numeric::Matrix::from_rows({{0.9, 0.1}, {0.4, 0.6}, {0.6, 0.4}, {0.1, 0.9}});
    const std::vector<int> truth{1, 1, 2, 2};
    const auto r = mean_average_precision(scores, truth);
    EXPECT_NEAR(r.average_precision[0], 5.0 / 6.0, 1e-15);
    EXPECT_NEAR(r.average_precision[1], 5.0 / 6.0, 1e-15);
    EXPECT_NEAR(r.map, 5.0 / 6.0, 1e-15);
}

TEST(Metrics, ClassesWithoutPositivesAreExcluded) {
    const numeric::Matrix scores = numeric::Matrix::from_rows({{0.9, 0.1, 0.5}, {0.2, 0.8, 0.5}});
    const std::vector<int> truth{1, 2};
    const auto r = mean_average_precision(scores, truth);
    EXPECT_EQ(r.excluded, std::vector<int>{3});
    EXPECT_EQ(r.map, 1.0);
}

TEST(Metrics, ConfusionRowsAndAccuracy) {
    ConfusionMatrix m(3);
    const std::vector<std::pair<int, int>> pairs{{1, 1}, {1, 2}, {2, 2}, {3, 3}, {3, 1}, {3, 3}};
    for (auto [t, p] : pairs) m.add(t, p);
    EXPECT_EQ(m.at(0, 0) + m.at(0, 1) + m.at(0, 2), 2u);
    EXPECT_EQ(m.at(2, 0) + m.at(2, 1) + m.at(2, 2), 3u);
    EXPECT_EQ(m.total(), 6u);
    EXPECT_DOUBLE_EQ(m.accuracy(), static_cast<double>(m.trace()) / m.total());
    EXPECT_DOUBLE_EQ(m.accuracy(), 4.0 / 6.0);
    EXPECT_THROW(m.add(4, 1), DataError);
    EXPECT_EQ(m.to_csv(), "truth\\predicted,1,2,3\n1,1,1,0\n2,0,1,0\n3,1,0,2\n");
}

TEST(Embedding, OneRowPerVideo) {
    const std::vector<scsp::ScspSequence> seqs{{"a", 1, numeric::Matrix::from_rows({{0.5, 0.25}})},
                                               {"b", 2, numeric::Matrix::from_rows({{1.0}, {0.0}})}};
    EXPECT_EQ(embedding_csv(seqs), "video_id,label,values...\na,1,0.5,0.25\nb,2,1,0\n");
}

TEST(Loo, TwoItemsTwoFolds) {
    LabeledCorpus c;
    c.num_classes = 1;
    c.items = {{"a", constant_video(0.2), 1}, {"b", constant_video(0.25), 1}};
    const auto r = loo_evaluate(c, small_config(false));
    EXPECT_EQ(r.folds.size(), 2u);
    EXPECT_EQ(r.accuracy, 1.0);
}

TEST(Loo, ConstantVideoClassesAreSeparated) {
    LabeledCorpus c;
    c.num_classes = 3;
    const double level[3] = {0.15, 0.5, 0.85};
    for (int k = 0; k < 3; ++k)
        for (int v = 0; v < 3; ++v)
            c.items.push_back({"c" + std::to_string(k) + "_" + std::to_string(v), constant_video(level[k]), k + 1});
    const auto r = loo_evaluate(c, small_config(false));
    EXPECT_EQ(r.accuracy, 1.0);
    EXPECT_EQ(r.confusion.trace(), 9u);
    const auto again = loo_evaluate(c, small_config(false));
    EXPECT_EQ(r.to_json().dump(), again.to_json().dump());
}

TEST(Loo, HeldOutItemNeverReachesTraining) {
    SynthSpec spec;
    spec.classes = 2;
    spec.per_class = 3;
    spec.frames = 9;
    spec.height = 12;
    spec.width = 12;
    const auto c = generate_synthetic(spec);
    PipelineConfig cfg = small_config(true);
    cfg.ft.epochs = 2;
    const auto r = loo_evaluate(c, cfg);
    ASSERT_EQ(r.folds.size(), c.size());
    for (std::size_t f = 0; f < r.folds.size(); ++f) {
        const auto& fold = r.folds[f];
        ASSERT_EQ(fold.query_ids, std::vector<std::string>{c.items[f].id});
        const std::string& held = fold.query_ids[0];
        auto absent = [&](const std::vector<std::string>& ids) {
            return std::find(ids.begin(), ids.end(), held) == ids.end();
        };
        EXPECT_TRUE(absent(fold.provenance.dictionary_videos));
        EXPECT_EQ(fold.provenance.dictionary_videos.size(), c.size() - 1);
        EXPECT_TRUE(absent(fold.provenance.pretrain_videos));
        for (const auto& [label, ids] : fold.provenance.finetune_videos) EXPECT_TRUE(absent(ids));
    }
}

TEST(Loo, FoldWithoutAClassIsError) {
    LabeledCorpus c;
    c.num_classes = 2;
    c.items = {{"a", constant_video(0.2), 1}, {"b", constant_video(0.8), 2}};
    EXPECT_THROW(loo_evaluate(c, small_config(false)), DataError);
}

TEST(Split, TrainsOnTrainOnly) {
    LabeledCorpus train, test;
    train.num_classes = test.num_classes = 2;
    train.items = {{"a", constant_video(0.2), 1}, {"b", constant_video(0.8), 2}};
    test.items = {{"c", constant_video(0.2), 1}, {"d", constant_video(0.8), 2}};
    const auto r = split_evaluate(train, test, small_config(false));
    ASSERT_EQ(r.folds.size(), 1u);
    EXPECT_EQ(r.folds[0].query_ids, (std::vector<std::string>{"c", "d"}));
    EXPECT_EQ(r.accuracy, 1.0);
}
