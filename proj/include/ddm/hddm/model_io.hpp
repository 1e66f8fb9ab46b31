#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ddm/grbm/pretrain.hpp"
#include "ddm/hddm/train.hpp"
#include "ddm/io/binary.hpp"

// DDMMDLv1 container: 8-byte magic, u64 LE header length, JSON header, then LE float64
// blocks in this order:
//   for each pre-trained GRBM: W (visible x hidden), b, c, input mean, input scale
//   for each class: encoder layers 1..M (W, b), then decoder layers 1..M (W, b)

namespace ddm::hddm {

inline constexpr std::string_view model_magic = "DDMMDLv1";

struct ModelFile {
    grbm::PretrainedStack pretrained;  ///< may be empty
    std::vector<ClassModel> classes;   ///< may be empty (pre-training output)
    std::string input_scaling = "none"; ///< map applied to feature frames before the network
    io::json meta = io::json::object(); ///< config echo, seed, ...
};

inline io::Bytes encode_model(const ModelFile& m) {
    io::json h;
    h["format"] = std::string(model_magic);
    io::json g = io::json::array();
    for (const auto& l : m.pretrained.layers)
        g.push_back({{"visible", l.visible()}, {"hidden", l.hidden()}, {"sigma", l.sigma}});
    h["grbm"] = g;
    io::json classes = io::json::array();
    std::size_t depth = 0, input = 0;
    std::vector<std::size_t> sizes;
    for (const auto& c : m.classes) {
        c.params.validate();
        if (depth == 0) {
            depth = c.params.depth();
            input = c.params.input_dim();
            sizes = c.params.layer_sizes();
        } else if (c.params.depth() != depth || c.params.input_dim() != input ||
                   c.params.layer_sizes() != sizes) {
            throw ShapeError("model file: class " + std::to_string(c.label) +
                             " has a different architecture");
        }
        classes.push_back({{"label", c.label},
                           {"epochs_run", c.epochs_run},
                           {"final_cost", c.final_cost},
                           {"cost_history", c.cost_history}});
    }
    if (m.classes.empty() && !m.pretrained.layers.empty()) {
        depth = m.pretrained.layers.size();
        input = m.pretrained.layers.front().visible();
        for (const auto& l : m.pretrained.layers) sizes.push_back(l.hidden());
    }
    h["M"] = depth;
    h["input_dim"] = input;
    h["layer_sizes"] = sizes;
    h["classes"] = classes;
    h["input_scaling"] = m.input_scaling;
    h["meta"] = m.meta;

    io::Bytes out;
    io::put_header(out, model_magic, h);
    for (std::size_t i = 0; i < m.pretrained.layers.size(); ++i) {
        const auto& l = m.pretrained.layers[i];
        const auto& s = m.pretrained.input_stats.at(i);
        io::put_f64s(out, l.W.values());
        io::put_f64s(out, l.b);
        io::put_f64s(out, l.c);
        io::put_f64s(out, s.mean);
        io::put_f64s(out, s.scale);
    }
    for (const auto& c : m.classes) {
        for (const Layer* l : c.params.chain()) {
            io::put_f64s(out, l->W.values());
            io::put_f64s(out, l->b);
        }
    }
    return out;
}

inline ModelFile decode_model(std::span<const std::uint8_t> bytes, const std::string& source) {
    io::Reader in(bytes, source);
    const auto h = io::read_header(in, model_magic);
    ModelFile m;
    m.meta = h.value("meta", io::json::object());
    m.input_scaling = io::header_field<std::string>(h, "input_scaling", source);
    const auto depth = io::header_field<std::size_t>(h, "M", source);
    const auto input = io::header_field<std::size_t>(h, "input_dim", source);
    const auto sizes = io::header_field<std::vector<std::size_t>>(h, "layer_sizes", source);
    if (sizes.size() != depth) throw DataError(source + ": layer_sizes does not match M");

    for (const auto& g : h.at("grbm")) {
        const auto v = g.at("visible").get<std::size_t>();
        const auto hd = g.at("hidden").get<std::size_t>();
        grbm::GrbmParams p;
        p.W = Matrix(v, hd, in.f64s(v * hd));
        p.b = in.f64s(v);
        p.c = in.f64s(hd);
        p.sigma = g.at("sigma").get<double>();
        grbm::Standardization s{in.f64s(v), in.f64s(v)};
        m.pretrained.layers.push_back(std::move(p));
        m.pretrained.input_stats.push_back(std::move(s));
    }

    std::vector<std::size_t> dims{input};
    dims.insert(dims.end(), sizes.begin(), sizes.end());
    for (const auto& c : h.at("classes")) {
        ClassModel cm;
        cm.label = c.at("label").get<int>();
        cm.epochs_run = c.at("epochs_run").get<std::size_t>();
        cm.final_cost = c.at("final_cost").get<double>();
        cm.cost_history = c.at("cost_history").get<std::vector<double>>();
        auto read_layer = [&](std::size_t in_dim, std::size_t out_dim) {
            Layer l;
            l.W = Matrix(out_dim, in_dim, in.f64s(in_dim * out_dim));
            l.b = in.f64s(out_dim);
            return l;
        };
        for (std::size_t i = 1; i <= depth; ++i) cm.params.encoder.push_back(read_layer(dims[i - 1], dims[i]));
        for (std::size_t i = depth; i >= 1; --i) cm.params.decoder.push_back(read_layer(dims[i], dims[i - 1]));
        cm.params.validate();
        m.classes.push_back(std::move(cm));
    }
    in.expect_end();
    return m;
}

inline void write_model(const std::filesystem::path& path, const ModelFile& m) {
    io::write_file(path, encode_model(m));
}

inline ModelFile read_model(const std::filesystem::path& path) {
    return decode_model(io::read_file(path), path.string());
}

} // namespace ddm::hddm
