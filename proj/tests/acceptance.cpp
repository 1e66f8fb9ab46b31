// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "ddm/cli/commands.hpp"
#include "ddm/data/evaluate.hpp"
#include "ddm/data/synthetic.hpp"
#include "ddm/hddm/model_io.hpp"
#include "ddm/scsp/feature_io.hpp"
#include "oracles.hpp"

using namespace ddm;
using numeric::Matrix;
using numeric::RngStream;
using numeric::Vector;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int n, bool ok, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", n, detail.c_str());
    std::fflush(stdout);
    failures += !ok;
}

class Stopwatch {
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();

public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Matrix random_matrix(std::size_t r, std::size_t c, RngStream& rng) {
    Matrix m(r, c);
    for (double& v : m.values()) v = rng.normal();
    return m;
}

Vector random_vector(std::size_t n, RngStream& rng) {
    Vector v(n);
    for (double& x : v) x = rng.normal();
    return v;
}

Matrix random_batch(std::size_t n, std::size_t dim, RngStream& rng) {
    Matrix m(n, dim);
    for (double& v : m.values()) v = rng.uniform();
    return m;
}

hddm::HddmParams random_net(std::size_t in, const std::vector<std::size_t>& sizes, RngStream& rng) {
    auto p = hddm::random_hddm(in, sizes, rng, 0.5);
    for (hddm::Layer* l : p.chain())
        for (double& b : l->b) b = rng.normal(0.0, 0.3);
    return p;
}

grbm::GrbmParams random_grbm(std::size_t v, std::size_t h, RngStream& rng, double scale = 1.0) {
    grbm::GrbmParams p{Matrix(v, h), Vector(v), Vector(h), 1.0};
    for (double& w : p.W.values()) w = scale * rng.normal();
    for (double& b : p.b) b = rng.normal();
    for (double& c : p.c) c = rng.normal();
    return p;
}

std::vector<oracle::Vec> rows_of(const Matrix& m) {
    std::vector<oracle::Vec> out;
    for (std::size_t r = 0; r < m.rows(); ++r) out.emplace_back(m.row(r).begin(), m.row(r).end());
    return out;
}

void gradients_match_finite_differences() {
    Stopwatch t;
    RngStream rng(101);
    double worst = 0.0;
    const int instances = 12;
    for (int trial = 0; trial < instances; ++trial) {
        const std::size_t in = 3 + rng.below(4);
        std::vector<std::size_t> sizes;
        for (std::size_t i = 0, m = 1 + rng.below(3); i < m; ++i) sizes.push_back(2 + rng.below(4));
        const auto p = random_net(in, sizes, rng);
        const Matrix batch = random_batch(2 + rng.below(4), in, rng);
        hddm::FineTuneConfig cfg;
        cfg.lambda_wd = rng.uniform(0.01, 0.1);
        cfg.lambda_sp = rng.uniform(0.1, 0.5);
        cfg.rho = rng.uniform(0.05, 0.3);
        const Vector g = hddm::flatten(hddm::gradients(batch, p, cfg).grad);
        const auto fd = oracle::central_differences(
            [&](const oracle::Vec& theta) { return hddm::cost(batch, hddm::unflatten(theta, p), cfg).total; },
            hddm::flatten(p), 1e-5);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double scale = std::max(std::abs(g[i]), std::abs(fd[i]));
            if (scale > 0.0) worst = std::max(worst, std::abs(g[i] - fd[i]) / scale);
        }
    }
    const double s = t.seconds();
    report(1, worst < 1e-5 && s < 30.0,
           fmt("%d instances, worst relative error %.2e (< 1e-5), %.1f s (< 30 s)", instances, worst, s));
}

void lasso_is_optimal() {
    Stopwatch t;
    RngStream rng(202);
    const int instances = 120;
    double worst_kkt = 0.0, worst_gap = 0.0;
    for (int trial = 0; trial < instances; ++trial) {
        const std::size_t d = 1 + rng.below(8), n = 1 + rng.below(6);
        Matrix D = random_matrix(d, n, rng);
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < d; ++i) s += D(i, j) * D(i, j);
            for (std::size_t i = 0; i < d; ++i) D(i, j) /= std::sqrt(s);
        }
        const Vector x = random_vector(d, rng);
        const double lambda = rng.uniform(0.01, 1.0);
        const auto r = scsp::sparse_code(x, D, lambda);
        std::vector<oracle::Vec> cols(n, oracle::Vec(d));
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < n; ++j) cols[j][i] = D(i, j);
        const auto ref = oracle::lasso_brute_force(cols, x, lambda);
        worst_kkt = std::max(worst_kkt, r.kkt_violation);
        worst_gap = std::max(worst_gap, std::abs(oracle::lasso_objective(cols, x, r.coefficients, lambda) -
                                                 oracle::lasso_objective(cols, x, ref, lambda)));
    }
    double worst_identity = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t d = 1 + rng.below(8);
        const Vector x = random_vector(d, rng);
        const double lambda = rng.uniform(0.0, 1.5);
        const auto r = scsp::sparse_code(x, Matrix::identity(d), lambda);
        for (std::size_t i = 0; i < d; ++i) {
            const double shrunk = std::max(std::abs(x[i]) - lambda, 0.0);
            const double expected = x[i] < 0.0 ? -shrunk : shrunk;
            worst_identity = std::max(worst_identity, std::abs(r.coefficients[i] - expected));
        }
    }
    const double s = t.seconds();
    report(2, worst_kkt <= 1e-6 && worst_gap <= 1e-6 && worst_identity <= 1e-12 && s < 60.0,
           fmt("%d instances, KKT %.2e, objective gap %.2e, identity %.2e, %.1f s", instances, worst_kkt,
               worst_gap, worst_identity, s));
}

void grbm_sanity() {
    Stopwatch t;
    RngStream rng(303);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto p = random_grbm(3, 2, rng);
        Vector v(3);
        for (double& x : v) x = rng.normal(0.0, 2.0);
        const auto h = grbm::prob_h_given_v(v, p);
        const auto ref = oracle::hidden_marginals_by_enumeration(v, p);
        for (std::size_t j = 0; j < 2; ++j) worst = std::max(worst, std::abs(h[j] - ref[j]));
    }

    auto teacher = random_grbm(6, 3, rng, 0.8);
    for (double& b : teacher.b) b *= 2.0;
    Matrix data(500, 6);
    Vector v = teacher.b;
    for (std::size_t s = 0; s < data.rows(); ++s) {
        for (int step = 0; step < 5; ++step)
            v = grbm::sample_v_given_h(grbm::sample_h_given_v(v, teacher, rng), teacher, rng);
        std::copy(v.begin(), v.end(), data.row(s).begin());
    }
    grbm::CdConfig cfg;
    cfg.lr = 0.01;
    cfg.epochs = 50;
    cfg.batch = 10;
    cfg.init_range = 0.01;
    auto student = grbm::init_grbm(6, 3, cfg, rng);
    const auto r = grbm::train_grbm(data, student, cfg, rng);
    const double reduction = 1.0 - r.epoch_errors.back() / r.epoch_errors.front();
    const double s = t.seconds();
    report(3, worst <= 1e-9 && reduction >= 0.5 && s < 60.0,
           fmt("enumeration error %.2e, CD-1 error %.4f -> %.4f (%.0f%% reduction over 50 epochs), %.1f s", worst,
               r.epoch_errors.front(), r.epoch_errors.back(), 100.0 * reduction, s));
}

void tied_init_and_cost_decomposition() {
    RngStream rng(404);
    double worst = 0.0;
    bool tied = true;
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t in = 3 + rng.below(5);
        std::vector<std::size_t> sizes;
        std::vector<grbm::GrbmParams> chain;
        for (std::size_t i = 0, m = 1 + rng.below(3); i < m; ++i) {
            sizes.push_back(1 + rng.below(5));
            chain.push_back(random_grbm(i == 0 ? in : sizes[i - 1], sizes.back(), rng));
        }
        const auto p = hddm::init_from_pretraining(chain);
        const std::size_t m = p.depth();
        for (std::size_t i = 0; i < m; ++i) {
            tied = tied && p.encoder[i].W == numeric::transpose(chain[i].W) && p.encoder[i].b == chain[i].c &&
                   p.decoder[m - 1 - i].W == chain[i].W && p.decoder[m - 1 - i].b == chain[i].b;
        }
        const Matrix batch = random_batch(2 + rng.below(5), in, rng);
        hddm::FineTuneConfig cfg;
        cfg.lambda_wd = rng.uniform(0.0, 0.1);
        cfg.lambda_sp = rng.uniform(0.0, 1.0);
        cfg.rho = rng.uniform(0.01, 0.5);
        const auto c = hddm::cost(batch, p, cfg);
        const double ref = oracle::regularized_cost(p, rows_of(batch), cfg.lambda_wd, cfg.lambda_sp, cfg.rho);
        worst = std::max(worst, std::abs(c.total - ref) / std::max(1.0, std::abs(ref)));
        worst = std::max(worst, std::abs(c.total - (c.reconstruction + cfg.lambda_wd * c.weight_decay +
                                                    cfg.lambda_sp * c.sparsity)));
    }
    report(4, tied && worst <= 1e-12,
           fmt("decoder weights transposed exactly: %s, cost deviation %.2e (<= 1e-12)", tied ? "yes" : "no", worst));
}

PipelineConfig desk_config() {
    PipelineConfig cfg;
    cfg.ft.lr = 0.05;
    cfg.ft.decay = 1.0;
    cfg.ft.epochs = 50;
    cfg.ft.batch = 1;
    return cfg;
}

void end_to_end_and_block_sizes() {
    const auto corpus = data::generate_synthetic(data::SynthSpec{});
    Stopwatch t;
    PipelineConfig cfg = desk_config();
    const auto with_scsp = data::loo_evaluate(corpus, cfg);
    cfg.use_scsp = false;
    const auto raw = data::loo_evaluate(corpus, cfg);
    const double s = t.seconds();
    report(5, with_scsp.accuracy >= 0.9 && raw.accuracy <= with_scsp.accuracy && s < 600.0,
           fmt("%zu videos LOO: SCSP accuracy %.3f (>= 0.9, mAP %.3f), raw accuracy %.3f (<= SCSP, mAP %.3f), %.1f s",
               corpus.size(), with_scsp.accuracy, with_scsp.map.map, raw.accuracy, raw.map.map, s));

    std::vector<std::pair<scsp::BlockSpec, double>> rows;
    bool ok = true;
    for (const scsp::BlockSpec b : {scsp::BlockSpec{1, 1, 3}, scsp::BlockSpec{3, 3, 3}, scsp::BlockSpec{5, 5, 5}}) {
        try {
            PipelineConfig c = desk_config();
            c.block = b;
            const double acc = (b.w == 3 && b.h == 3 && b.d == 3) ? with_scsp.accuracy
                                                                  : data::loo_evaluate(corpus, c).accuracy;
            rows.emplace_back(b, acc);
        } catch (const std::exception& e) {
            std::printf("block %s failed: %s\n", b.to_string().c_str(), e.what());
            ok = false;
        }
    }
    std::printf("%-10s %s\n", "block", "accuracy");
    for (const auto& [b, acc] : rows) std::printf("%-10s %.3f\n", b.to_string().c_str(), acc);
    report(6, ok && rows.size() == 3, fmt("block-size table with %zu rows", rows.size()));
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) files[fs::relative(e.path(), dir).generic_string()] = slurp(e.path());
    return files;
}

void cli_is_deterministic() {
    const fs::path root = fs::temp_directory_path() / "ddm_acceptance_cli";
    const std::vector<std::vector<std::string>> commands{
        {"synth"},
        {"extract"},
        {"pretrain", "--pretrain_file", "stack.ddm"},
        {"train", "--pretrain_file", "stack.ddm"},
        {"classify", "--query", "corpus/c2_v1.rvt"},
        {"evaluate"},
    };
    std::map<std::string, std::string> runs[2];
    bool ok = true;
    for (int run = 0; run < 2; ++run) {
        const fs::path dir = root / std::to_string(run);
        fs::remove_all(dir);
        fs::create_directories(dir);
        std::ofstream(dir / "run.cfg") << "synth_classes = 2\nsynth_per_class = 3\nsynth_frames = 12\n"
                                          "synth_height = 12\nsynth_width = 12\nsynth_out = corpus\n"
                                          "manifest = corpus/manifest.tsv\nlayer_sizes = 8,4\ncd_epochs = 5\n"
                                          "ft_lr = 0.05\nft_decay = 1.0\nft_epochs = 10\nft_batch = 1\n";
        const fs::path cwd = fs::current_path();
        fs::current_path(dir);
        for (auto args : commands) {
            args.insert(args.end(), {"--config", "run.cfg"});
            std::ostringstream out, err;
            const int code = cli::run(args, out, err);
            if (code != 0) {
                std::printf("%s exited %d: %s\n", args[0].c_str(), code, err.str().c_str());
                ok = false;
            }
            runs[run]["stdout:" + args[0]] = out.str();
        }
        fs::current_path(cwd);
        for (auto& [name, bytes] : snapshot(dir)) runs[run][name] = std::move(bytes);
    }
    std::size_t differing = 0;
    for (const auto& [name, bytes] : runs[0]) {
        const auto other = runs[1].find(name);
        if (other == runs[1].end() || other->second != bytes) {
            std::printf("differs between runs: %s\n", name.c_str());
            ++differing;
        }
    }
    ok = ok && differing == 0 && runs[0].size() == runs[1].size();
    report(7, ok, fmt("%zu output files and streams over %zu commands, %zu differ", runs[0].size(), commands.size(),
                      differing));
}

void formats_round_trip() {
    RngStream rng(808);
    int checked = 0;
    bool ok = true;
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t c = rng.bernoulli(0.5) ? 1 : 3;
        const std::size_t t = 1 + rng.below(5), h = 1 + rng.below(7), w = 1 + rng.below(7);
        std::vector<double> px(t * h * w * c);
        for (double& p : px) p = rng.uniform();
        const auto video = data::encode_video(scsp::VideoTensor(t, h, w, c, px));
        ok = ok && data::encode_video(data::decode_video(video, "mem")) == video;

        const scsp::ScspSequence seq{"v" + std::to_string(trial), static_cast<int>(rng.below(5)),
                                     random_matrix(1 + rng.below(4), 1 + rng.below(9), rng)};
        const auto sb = scsp::encode_sequence(seq, {{"trial", trial}});
        const auto sback = scsp::decode_sequence(sb, "mem");
        ok = ok && scsp::encode_sequence(sback.sequence, sback.meta) == sb;

        const std::size_t n = 1 + rng.below(6);
        std::vector<scsp::AtomSource> prov;
        for (std::size_t j = 0; j < n; ++j) prov.push_back({"v" + std::to_string(j), j});
        const scsp::Dictionary dict(random_matrix(n, 1 + rng.below(8), rng), prov, 1 + rng.below(3), {3, 3, 3});
        const auto db = scsp::encode_dictionary(dict);
        const auto dback = scsp::decode_dictionary(db, "mem");
        ok = ok && scsp::encode_dictionary(dback.dictionary, dback.meta) == db;

        hddm::ModelFile m;
        const std::size_t in = 2 + rng.below(5);
        std::vector<std::size_t> sizes{1 + rng.below(4), 1 + rng.below(3)};
        std::size_t vis = in;
        for (std::size_t hid : sizes) {
            m.pretrained.layers.push_back(random_grbm(vis, hid, rng));
            m.pretrained.input_stats.push_back({random_vector(vis, rng), random_vector(vis, rng)});
            vis = hid;
        }
        for (int label = 1; label <= 2; ++label)
            m.classes.push_back({label, random_net(in, sizes, rng), 3, rng.uniform(), {rng.uniform(), rng.uniform()}});
        m.input_scaling = "frame_max";
        m.meta = {{"trial", trial}};
        const auto mb = hddm::encode_model(m);
        ok = ok && hddm::encode_model(hddm::decode_model(mb, "mem")) == mb;
        checked += 4;
    }
    report(8, ok, fmt("%d RVT1/SCSPFTv1/DDMMDLv1 instances rewritten byte-identically", checked));
}

} // namespace

int main() {
    try {
        gradients_match_finite_differences();
        lasso_is_optimal();
        grbm_sanity();
        tied_init_and_cost_decomposition();
        end_to_end_and_block_sizes();
        cli_is_deterministic();
        formats_round_trip();
    } catch (const std::exception& e) {
        std::printf("FAIL: unexpected error: %s\n", e.what());
        return 1;
    }
    return failures == 0 ? 0 : 1;
}
