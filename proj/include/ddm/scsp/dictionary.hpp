#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ddm/error.hpp"
#include "ddm/numeric/matrix.hpp"
#include "ddm/numeric/ops.hpp"
#include "ddm/scsp/lasso.hpp"
#include "ddm/scsp/pattern.hpp"
#include "ddm/scsp/sequence.hpp"
#include "ddm/scsp/video.hpp"

namespace ddm::scsp {

struct AtomSource {
    std::string video_id;
    std::size_t segment = 0;

    friend bool operator==(const AtomSource&, const AtomSource&) = default;
};

/// Unit-norm encoded segments used as the basis for sparse coding.
///
/// Atoms are stored one per row of `atoms` (N x d); the dictionary matrix D (d x N) is its
/// transpose. The Gram matrix DᵀD is kept alongside.
class Dictionary {
public:
    Dictionary() = default;

    Dictionary(Matrix atoms, std::vector<AtomSource> provenance, std::size_t segment_length,
               BlockSpec spec)
        : atoms_(std::move(atoms)), provenance_(std::move(provenance)),
          segment_length_(segment_length), spec_(spec) {
        if (atoms_.rows() == 0) throw DataError("dictionary needs at least one atom");
        if (provenance_.size() != atoms_.rows())
            throw ShapeError("dictionary provenance does not match atom count");
        gram_ = gram_of_rows(atoms_);
    }

    std::size_t size() const noexcept { return atoms_.rows(); }       ///< N
    std::size_t feature_dim() const noexcept { return atoms_.cols(); } ///< d
    std::size_t segment_length() const noexcept { return segment_length_; }
    const BlockSpec& block_spec() const noexcept { return spec_; }
    const Matrix& atoms() const noexcept { return atoms_; }
    const Matrix& gram() const noexcept { return gram_; }
    const std::vector<AtomSource>& provenance() const noexcept { return provenance_; }
    std::span<const double> column(std::size_t j) const noexcept { return atoms_.row(j); }

    /// D as a d x N matrix.
    Matrix matrix() const { return numeric::transpose(atoms_); }

    /// Dictionary restricted to the given atoms, in the given order.
    Dictionary subset(std::span<const std::size_t> keep) const {
        Dictionary out;
        out.atoms_ = Matrix(keep.size(), feature_dim());
        out.gram_ = Matrix(keep.size(), keep.size());
        for (std::size_t i = 0; i < keep.size(); ++i) {
            auto src = atoms_.row(keep[i]);
            std::copy(src.begin(), src.end(), out.atoms_.row(i).begin());
            out.provenance_.push_back(provenance_[keep[i]]);
            for (std::size_t j = 0; j < keep.size(); ++j) out.gram_(i, j) = gram_(keep[i], keep[j]);
        }
        if (out.atoms_.rows() == 0) throw DataError("dictionary subset is empty");
        out.segment_length_ = segment_length_;
        out.spec_ = spec_;
        return out;
    }

    /// Atoms whose source video is not in `ids`.
    Dictionary without_videos(std::span<const std::string> ids) const {
        std::vector<std::size_t> keep;
        for (std::size_t j = 0; j < size(); ++j) {
            bool drop = false;
            for (const auto& id : ids) drop = drop || provenance_[j].video_id == id;
            if (!drop) keep.push_back(j);
        }
        return subset(keep);
    }

private:
    Matrix atoms_;
    Matrix gram_;
    std::vector<AtomSource> provenance_;
    std::size_t segment_length_ = 0;
    BlockSpec spec_;
};

inline std::size_t resolve_segment_length(const BlockSpec& spec, std::size_t k) {
    return k == 0 ? spec.d : k;
}

/// Encodings of the consecutive non-overlapping k-frame segments of a video.
inline std::vector<EncodedVideo> encode_segments(const VideoTensor& video, const BlockSpec& spec,
                                                 std::size_t k, const std::string& video_id) {
    if (k == 0) throw ConfigError("segment length must be >= 1");
    const std::size_t count = video.frames() / k;
    if (count == 0) {
        throw DataError("video '" + video_id + "' has " + std::to_string(video.frames()) +
                        " frames, fewer than the segment length " + std::to_string(k));
    }
    std::vector<EncodedVideo> out;
    out.reserve(count);
    for (std::size_t s = 0; s < count; ++s) out.push_back(encode_video(video.slice_frames(s * k, k), spec));
    return out;
}

/// Scales a vector to unit Euclidean norm; zero vectors are left untouched.
inline bool normalize_in_place(std::span<double> v) {
    const double n = numeric::norm(v);
    if (n == 0.0) return false;
    for (double& x : v) x /= n;
    return true;
}

/// One unit-norm column per (video, segment), in corpus order.
inline Dictionary build_dictionary(std::span<const VideoTensor> corpus,
                                   std::span<const std::string> ids, const BlockSpec& spec,
                                   std::size_t k) {
    if (corpus.empty()) throw DataError("build_dictionary: empty corpus");
    if (ids.size() != corpus.size()) throw ShapeError("build_dictionary: one id per video required");
    k = resolve_segment_length(spec, k);

    std::vector<double> flat;
    std::vector<AtomSource> provenance;
    std::size_t dim = 0;
    for (std::size_t v = 0; v < corpus.size(); ++v) {
        auto segments = encode_segments(corpus[v], spec, k, ids[v]);
        for (std::size_t s = 0; s < segments.size(); ++s) {
            auto& f = segments[s].features;
            if (dim == 0) dim = f.size();
            if (f.size() != dim) {
                throw DataError("video '" + ids[v] + "' yields feature dimension " +
                                std::to_string(f.size()) + ", expected " + std::to_string(dim));
            }
            if (!normalize_in_place(f)) {
                throw DataError("video '" + ids[v] + "' segment " + std::to_string(s) +
                                " has an all-zero descriptor (static content)");
            }
            flat.insert(flat.end(), f.begin(), f.end());
            provenance.push_back({ids[v], s});
        }
    }
    if (dim == 0) throw DataError("build_dictionary: block spec yields empty descriptors");
    const std::size_t n = provenance.size();
    return Dictionary(Matrix(n, dim, std::move(flat)), std::move(provenance), k, spec);
}

inline Dictionary build_dictionary(std::span<const VideoTensor> corpus, const BlockSpec& spec,
                                   std::size_t k) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < corpus.size(); ++i) ids.push_back("video" + std::to_string(i));
    return build_dictionary(corpus, ids, spec, k);
}

/// Sparse code against a Dictionary, optionally ignoring atoms that came from one video.
inline LassoResult sparse_code(std::span<const double> x, const Dictionary& dict, double lambda,
                               const LassoOptions& opts = {},
                               const std::string& exclude_video = {}) {
    if (x.size() != dict.feature_dim()) {
        throw ShapeError("sparse_code: signal of length " + std::to_string(x.size()) +
                         " against dictionary with " + std::to_string(dict.feature_dim()) +
                         " rows");
    }
    const Vector corr = numeric::matvec(dict.atoms(), x);
    std::vector<std::uint8_t> mask;
    if (!exclude_video.empty()) {
        mask.resize(dict.size(), 0);
        for (std::size_t j = 0; j < dict.size(); ++j)
            mask[j] = dict.provenance()[j].video_id == exclude_video;
    }
    return lasso_gram(dict.gram(), corr, lambda, opts, mask);
}

struct ScspOptions {
    BlockSpec block{};
    std::size_t segment_length = 0;  ///< 0: one block depth
    double lambda = 0.1;
    std::size_t sequence_length = 0; ///< 0: number of temporal slabs
    LassoOptions lasso{};
};

/// Full feature path for one video: encode each segment, scale to unit norm, sparse-code
/// against the dictionary, concatenate the codes and reshape into frames.
///
/// Atoms from `exclude_video` are ignored so a dictionary member is not coded by itself.
inline ScspSequence scsp_features(const VideoTensor& video, const Dictionary& dict,
                                  const ScspOptions& opts, const std::string& video_id,
                                  const std::string& exclude_video = {}) {
    const std::size_t k = resolve_segment_length(opts.block, opts.segment_length);
    if (k != dict.segment_length() || !(opts.block == dict.block_spec())) {
        throw ConfigError("feature options (block " + opts.block.to_string() + ", k=" +
                          std::to_string(k) + ") do not match the dictionary (block " +
                          dict.block_spec().to_string() + ", k=" +
                          std::to_string(dict.segment_length()) + ")");
    }
    auto segments = encode_segments(video, opts.block, k, video_id);
    Vector code;
    code.reserve(segments.size() * dict.size());
    for (auto& seg : segments) {
        normalize_in_place(seg.features);
        const auto r = sparse_code(seg.features, dict, opts.lambda, opts.lasso, exclude_video);
        code.insert(code.end(), r.coefficients.begin(), r.coefficients.end());
    }
    std::size_t frames = opts.sequence_length;
    if (frames == 0) frames = video.frames() / opts.block.d;
    return reshape_to_sequence(code, frames, video_id);
}

} // namespace ddm::scsp
