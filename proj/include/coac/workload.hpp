#pragma once

// CNN workloads: layer loop bounds and the JSON workload file format.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "coac/error.hpp"
#include "coac/loop_dims.hpp"

namespace coac {

enum class LayerKind : std::uint8_t { classical, depthwise };

/// One convolution layer. Stride and padding are not modeled: the input
/// extent is Ox + Fx - 1. Pointwise layers are classical with Fx = Fy = 1.
struct LayerShape {
    int id = 0;
    LayerKind kind = LayerKind::classical;
    DimArray dims{1, 1, 1, 1, 1, 1, 1};

    std::int64_t operator[](Dim d) const noexcept { return dims[index_of(d)]; }
    std::int64_t& operator[](Dim d) noexcept { return dims[index_of(d)]; }

    std::int64_t ix() const noexcept { return (*this)[Dim::OX] + (*this)[Dim::FX] - 1; }
    std::int64_t iy() const noexcept { return (*this)[Dim::OY] + (*this)[Dim::FY] - 1; }

    friend bool operator==(const LayerShape&, const LayerShape&) = default;

    static LayerShape classical(int id, std::int64_t k, std::int64_t c, std::int64_t ox,
                                std::int64_t oy, std::int64_t fx, std::int64_t fy) {
        LayerShape l;
        l.id = id;
        l.kind = LayerKind::classical;
        l.dims = {ox, oy, fx, fy, 1, c, k};
        return l;
    }

    static LayerShape depthwise(int id, std::int64_t g, std::int64_t ox, std::int64_t oy,
                                std::int64_t fx, std::int64_t fy) {
        LayerShape l;
        l.id = id;
        l.kind = LayerKind::depthwise;
        l.dims = {ox, oy, fx, fy, g, 1, 1};
        return l;
    }
};

struct Network {
    std::string name;
    std::vector<LayerShape> layers;

    friend bool operator==(const Network&, const Network&) = default;
};

/// Total multiply-accumulate count: product of all seven loop bounds.
inline std::int64_t layer_macs(const LayerShape& layer) noexcept {
    std::int64_t macs = 1;
    for (auto d : layer.dims) macs *= d;
    return macs;
}

inline std::int64_t network_macs(const Network& net) noexcept {
    std::int64_t total = 0;
    for (const auto& l : net.layers) total += layer_macs(l);
    return total;
}

inline void validate_layer(const LayerShape& l) {
    for (std::size_t i = 0; i < kNumDims; ++i)
        if (l.dims[i] < 1)
            throw ValidationError("layer " + std::to_string(l.id) + ": dimension " +
                                  std::string(kDimNames[i]) + " must be >= 1");
    if (l.kind == LayerKind::depthwise && (l[Dim::C] != 1 || l[Dim::K] != 1))
        throw ValidationError("layer " + std::to_string(l.id) +
                              ": depthwise layer must have C = K = 1");
    if (l.kind == LayerKind::classical && l[Dim::G] != 1)
        throw ValidationError("layer " + std::to_string(l.id) + ": classical layer must have G = 1");
}

inline void validate_network(const Network& net) {
    if (net.layers.empty()) throw ValidationError("network '" + net.name + "' has no layers");
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        validate_layer(net.layers[i]);
        if (i > 0 && net.layers[i].id <= net.layers[i - 1].id)
            throw ValidationError("network '" + net.name + "': layer ids must be unique and "
                                  "strictly increasing (id " +
                                  std::to_string(net.layers[i].id) + ")");
    }
}

namespace detail {

inline std::int64_t read_dim(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) return 1;
    const auto& v = j.at(key);
    if (!v.is_number_integer())
        throw ValidationError(std::string("field '") + key + "' must be an integer");
    return v.get<std::int64_t>();
}

} // namespace detail

inline Network workload_from_json(const nlohmann::json& doc) {
    static const std::set<std::string> known = {"id", "type", "K", "C", "G",
                                                "OX", "OY", "FX", "FY"};
    if (!doc.is_object()) throw ValidationError("workload must be a JSON object");
    if (!doc.contains("layers") || !doc.at("layers").is_array())
        throw ValidationError("workload: missing 'layers' array");

    Network net;
    if (doc.contains("name")) {
        if (!doc.at("name").is_string()) throw ValidationError("workload: 'name' must be a string");
        net.name = doc.at("name").get<std::string>();
    }
    for (const auto& jl : doc.at("layers")) {
        if (!jl.is_object()) throw ValidationError("workload: each layer must be an object");
        for (const auto& [key, _] : jl.items())
            if (!known.contains(key)) throw ValidationError("layer: unknown field '" + key + "'");
        if (!jl.contains("id") || !jl.at("id").is_number_integer())
            throw ValidationError("layer: missing integer 'id'");
        if (!jl.contains("type") || !jl.at("type").is_string())
            throw ValidationError("layer: missing string 'type'");

        LayerShape l;
        l.id = jl.at("id").get<int>();
        const auto type = jl.at("type").get<std::string>();
        const auto where = "layer " + std::to_string(l.id);
        if (type == "conv") {
            l.kind = LayerKind::classical;
            if (detail::read_dim(jl, "G") != 1)
                throw ValidationError(where + ": conv layer may not declare G");
        } else if (type == "dw") {
            l.kind = LayerKind::depthwise;
            if (detail::read_dim(jl, "K") != 1 || detail::read_dim(jl, "C") != 1)
                throw ValidationError(where + ": dw layer may not declare K or C");
        } else {
            throw ValidationError(where + ": unknown type '" + type + "'");
        }
        l[Dim::K] = detail::read_dim(jl, "K");
        l[Dim::C] = detail::read_dim(jl, "C");
        l[Dim::G] = detail::read_dim(jl, "G");
        l[Dim::OX] = detail::read_dim(jl, "OX");
        l[Dim::OY] = detail::read_dim(jl, "OY");
        l[Dim::FX] = detail::read_dim(jl, "FX");
        l[Dim::FY] = detail::read_dim(jl, "FY");
        net.layers.push_back(l);
    }
    validate_network(net);
    return net;
}

inline nlohmann::json workload_to_json(const Network& net) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : net.layers) {
        nlohmann::json jl;
        jl["id"] = l.id;
        if (l.kind == LayerKind::classical) {
            jl["type"] = "conv";
            jl["K"] = l[Dim::K];
            jl["C"] = l[Dim::C];
        } else {
            jl["type"] = "dw";
            jl["G"] = l[Dim::G];
        }
        jl["OX"] = l[Dim::OX];
        jl["OY"] = l[Dim::OY];
        jl["FX"] = l[Dim::FX];
        jl["FY"] = l[Dim::FY];
        layers.push_back(std::move(jl));
    }
    return {{"name", net.name}, {"layers", std::move(layers)}};
}

inline Network parse_workload(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("workload: ") + e.what());
    }
    return workload_from_json(doc);
}

inline Network load_workload(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open workload file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_workload(ss.str());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

inline void save_workload(const Network& net, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write workload file " + path.string());
    out << workload_to_json(net).dump(2) << '\n';
}

} // namespace coac
