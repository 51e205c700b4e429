#pragma once

// Accelerator architecture parameters and the JSON arch file format.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>

#include "json.hpp"

#include "coac/error.hpp"

namespace coac {

/// Per-access energies in abstract units (per word for memory ports).
struct EnergyParams {
    double mac = 1.0;
    double weight_read = 2.0;
    double input_read = 2.0;
    double output_write = 4.0;
    double reshuffle = 1.0; ///< per word passing through the reshuffling buffer

    friend bool operator==(const EnergyParams&, const EnergyParams&) = default;
};

/// Unit areas in abstract units.
struct AreaParams {
    double register_bit = 1.0;
    double mux = 1.0;   ///< one one-input MUX
    double adder = 1.0; ///< one two-input adder
    double pe = 0.0;
    double memory_bit = 0.0;

    friend bool operator==(const AreaParams&, const AreaParams&) = default;
};

struct ArchConfig {
    std::int64_t nb_pes = 256;
    std::int64_t p_bits = 8; ///< input/weight word width; partial sums use 2p

    // Memory port widths in bits, used by the temporal utilization model.
    std::int64_t pw_w_bits = 4096;
    std::int64_t pw_i_bits = 1024;
    std::int64_t pw_o_bits = 1024;

    // Port widths in words, used by the overhead model.
    std::int64_t pw_l2_weights_words = 512;
    std::int64_t pw_l2_act_words = 128;
    std::int64_t pw_l2_o_words = 128;
    std::int64_t pw_b_words = 128;
    /// Port width after the reshuffling buffer; 0 means equal to pw_b_words.
    std::int64_t pw_b_after_words = 0;

    // Memory capacities in bits; only priced into area_total.
    std::int64_t weight_mem_bits = 0;
    std::int64_t act_mem_bits = 0;

    EnergyParams energy;
    AreaParams area;

    friend bool operator==(const ArchConfig&, const ArchConfig&) = default;
};

inline void validate_arch(const ArchConfig& a) {
    auto positive = [](std::int64_t v, const char* field) {
        if (v <= 0) throw ValidationError(std::string("arch: field '") + field + "' must be positive");
    };
    auto pow2 = [](std::int64_t v, const char* field) {
        if (!detail::is_power_of_two(v))
            throw ValidationError(std::string("arch: field '") + field + "' must be a power of 2");
    };
    pow2(a.nb_pes, "nb_pes");
    pow2(a.p_bits, "p_bits");
    positive(a.pw_w_bits, "pw_w_bits");
    positive(a.pw_i_bits, "pw_i_bits");
    positive(a.pw_o_bits, "pw_o_bits");
    pow2(a.pw_l2_weights_words, "pw_l2_weights_words");
    pow2(a.pw_l2_act_words, "pw_l2_act_words");
    pow2(a.pw_l2_o_words, "pw_l2_o_words");
    pow2(a.pw_b_words, "pw_b_words");
    if (a.pw_b_after_words != 0) pow2(a.pw_b_after_words, "pw_b_after_words");
    if (a.weight_mem_bits < 0) throw ValidationError("arch: field 'weight_mem_bits' must be >= 0");
    if (a.act_mem_bits < 0) throw ValidationError("arch: field 'act_mem_bits' must be >= 0");
    const auto& e = a.energy;
    for (auto [v, f] : {std::pair{e.mac, "energy.mac"}, {e.weight_read, "energy.weight_read"},
                        {e.input_read, "energy.input_read"}, {e.output_write, "energy.output_write"},
                        {e.reshuffle, "energy.reshuffle"}})
        if (!(v >= 0)) throw ValidationError(std::string("arch: field '") + f + "' must be >= 0");
    const auto& ar = a.area;
    for (auto [v, f] : {std::pair{ar.register_bit, "area.register_bit"}, {ar.mux, "area.mux"},
                        {ar.adder, "area.adder"}, {ar.pe, "area.pe"},
                        {ar.memory_bit, "area.memory_bit"}})
        if (!(v >= 0)) throw ValidationError(std::string("arch: field '") + f + "' must be >= 0");
}

/// Evolver-like platform: 16x16 PEs, 256 KB weight buffer behind a 4096 b
/// port and 156 KB activation buffer behind a 1024 b port.
inline ArchConfig evolver256_arch() {
    ArchConfig a;
    a.nb_pes = 256;
    a.p_bits = 8;
    a.pw_w_bits = 4096;
    a.pw_i_bits = 1024;
    a.pw_o_bits = 1024;
    a.pw_l2_weights_words = 4096 / 8;
    a.pw_l2_act_words = 1024 / 8;
    a.pw_l2_o_words = 1024 / 8;
    a.pw_b_words = 1024 / 8;
    a.weight_mem_bits = 256LL * 1024 * 8;
    a.act_mem_bits = 156LL * 1024 * 8;
    return a;
}

namespace detail {

template <class T>
void read_field(const nlohmann::json& j, const char* key, T& out, const std::string& prefix) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer())
            throw ValidationError("arch: field '" + prefix + key + "' must be an integer");
    } else {
        if (!v.is_number())
            throw ValidationError("arch: field '" + prefix + key + "' must be a number");
    }
    out = v.get<T>();
}

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known,
                           const std::string& prefix) {
    for (const auto& [key, _] : j.items())
        if (!known.contains(key)) throw ValidationError("arch: unknown field '" + prefix + key + "'");
}

} // namespace detail

/// Missing fields keep the defaults of ArchConfig.
inline ArchConfig arch_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("arch: document must be a JSON object");
    detail::reject_unknown(j,
                           {"name", "nb_pes", "p_bits", "pw_w_bits", "pw_i_bits", "pw_o_bits",
                            "pw_l2_weights_words", "pw_l2_act_words", "pw_l2_o_words", "pw_b_words",
                            "pw_b_after_words", "weight_mem_bits", "act_mem_bits", "energy", "area"},
                           "");
    ArchConfig a;
    detail::read_field(j, "nb_pes", a.nb_pes, "");
    detail::read_field(j, "p_bits", a.p_bits, "");
    detail::read_field(j, "pw_w_bits", a.pw_w_bits, "");
    detail::read_field(j, "pw_i_bits", a.pw_i_bits, "");
    detail::read_field(j, "pw_o_bits", a.pw_o_bits, "");
    detail::read_field(j, "pw_l2_weights_words", a.pw_l2_weights_words, "");
    detail::read_field(j, "pw_l2_act_words", a.pw_l2_act_words, "");
    detail::read_field(j, "pw_l2_o_words", a.pw_l2_o_words, "");
    detail::read_field(j, "pw_b_words", a.pw_b_words, "");
    detail::read_field(j, "pw_b_after_words", a.pw_b_after_words, "");
    detail::read_field(j, "weight_mem_bits", a.weight_mem_bits, "");
    detail::read_field(j, "act_mem_bits", a.act_mem_bits, "");
    if (j.contains("energy")) {
        const auto& e = j.at("energy");
        if (!e.is_object()) throw ValidationError("arch: field 'energy' must be an object");
        detail::reject_unknown(e, {"mac", "weight_read", "input_read", "output_write", "reshuffle"},
                               "energy.");
        detail::read_field(e, "mac", a.energy.mac, "energy.");
        detail::read_field(e, "weight_read", a.energy.weight_read, "energy.");
        detail::read_field(e, "input_read", a.energy.input_read, "energy.");
        detail::read_field(e, "output_write", a.energy.output_write, "energy.");
        detail::read_field(e, "reshuffle", a.energy.reshuffle, "energy.");
    }
    if (j.contains("area")) {
        const auto& ar = j.at("area");
        if (!ar.is_object()) throw ValidationError("arch: field 'area' must be an object");
        detail::reject_unknown(ar, {"register_bit", "mux", "adder", "pe", "memory_bit"}, "area.");
        detail::read_field(ar, "register_bit", a.area.register_bit, "area.");
        detail::read_field(ar, "mux", a.area.mux, "area.");
        detail::read_field(ar, "adder", a.area.adder, "area.");
        detail::read_field(ar, "pe", a.area.pe, "area.");
        detail::read_field(ar, "memory_bit", a.area.memory_bit, "area.");
    }
    validate_arch(a);
    return a;
}

inline nlohmann::json arch_to_json(const ArchConfig& a) {
    return {
        {"nb_pes", a.nb_pes},
        {"p_bits", a.p_bits},
        {"pw_w_bits", a.pw_w_bits},
        {"pw_i_bits", a.pw_i_bits},
        {"pw_o_bits", a.pw_o_bits},
        {"pw_l2_weights_words", a.pw_l2_weights_words},
        {"pw_l2_act_words", a.pw_l2_act_words},
        {"pw_l2_o_words", a.pw_l2_o_words},
        {"pw_b_words", a.pw_b_words},
        {"pw_b_after_words", a.pw_b_after_words},
        {"weight_mem_bits", a.weight_mem_bits},
        {"act_mem_bits", a.act_mem_bits},
        {"energy",
         {{"mac", a.energy.mac},
          {"weight_read", a.energy.weight_read},
          {"input_read", a.energy.input_read},
          {"output_write", a.energy.output_write},
          {"reshuffle", a.energy.reshuffle}}},
        {"area",
         {{"register_bit", a.area.register_bit},
          {"mux", a.area.mux},
          {"adder", a.area.adder},
          {"pe", a.area.pe},
          {"memory_bit", a.area.memory_bit}}},
    };
}

inline ArchConfig load_arch(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open arch file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(ss.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return arch_from_json(j);
}

} // namespace coac
