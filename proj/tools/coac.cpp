// coac: enumerate SUs, evaluate layer costs, count flexibility overhead and
// explore SU combinations. Data goes to stdout or --out; diagnostics to stderr.
// Exit status: 0 success, 1 reference-study mismatch or I/O failure,
// 2 configuration error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "coac/coac.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ConfigError : coac::Error {
    using coac::Error::Error;
};

struct IoError : coac::Error {
    using coac::Error::Error;
};

struct Common {
    std::string arch_path;
    std::vector<std::string> workload_paths;
    std::string out_dir;
    std::string format = "json";
    unsigned jobs = 0;
};

void add_common(CLI::App* sub, Common& c, bool with_workloads) {
    sub->add_option("--arch", c.arch_path, "Architecture file (JSON)")->check(CLI::ExistingFile);
    if (with_workloads)
        sub->add_option("--workload", c.workload_paths, "Workload file (JSON); repeatable")
            ->check(CLI::ExistingFile);
    sub->add_option("--out", c.out_dir, "Output directory (default: stdout)");
    sub->add_option("--format", c.format, "Output format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    sub->add_option("--jobs", c.jobs, "Worker threads (0: all cores)")->capture_default_str();
}

coac::ArchConfig require_arch(const Common& c) {
    if (c.arch_path.empty()) throw ConfigError("--arch is required");
    return coac::load_arch(c.arch_path);
}

std::vector<coac::Network> require_workloads(const Common& c) {
    if (c.workload_paths.empty()) throw ConfigError("at least one --workload is required");
    std::vector<coac::Network> nets;
    for (const auto& p : c.workload_paths) nets.push_back(coac::load_workload(p));
    return nets;
}

json workloads_json(const std::vector<coac::Network>& nets) {
    json out = json::array();
    for (const auto& n : nets) out.push_back(coac::workload_to_json(n));
    return out;
}

/// Writes `content` to <out>/<name>, or to stdout when no directory is given.
void emit(const Common& c, const std::string& name, const std::string& content) {
    if (c.out_dir.empty()) {
        std::cout << content;
        return;
    }
    std::error_code ec;
    fs::create_directories(c.out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + c.out_dir + ": " + ec.message());
    const auto path = fs::path(c.out_dir) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path.string());
    f << content;
    if (!f) throw IoError("write failed: " + path.string());
    std::cerr << "wrote " << path.string() << '\n';
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

coac::SuConstraints constraints_for(bool unconstrained) {
    return unconstrained ? coac::SuConstraints::none() : coac::SuConstraints{};
}

json constraints_json(bool unconstrained) {
    return {{"forbid_mixed_g", !unconstrained}};
}

// --- enumerate ---------------------------------------------------------------

struct EnumerateArgs {
    Common common;
    bool unconstrained = false;
};

int run_enumerate(const EnumerateArgs& a) {
    const auto arch = require_arch(a.common);
    const auto sus = coac::enumerate_sus(arch.nb_pes, constraints_for(a.unconstrained));
    std::cerr << sus.size() << " SUs for " << arch.nb_pes << " PEs\n";
    if (a.common.format == "csv") {
        std::ostringstream os;
        os << "su;OX;OY;FX;FY;G;C;K;O_sum;W_u;A_u\n";
        for (const auto& su : sus) {
            const auto d = coac::su_derived(su);
            os << coac::display_name(su);
            for (auto f : su.factors) os << ';' << f;
            os << ';' << d.o_sum << ';' << d.w_u << ';' << d.a_u << '\n';
        }
        emit(a.common, "sus.csv", os.str());
        return 0;
    }
    json list = json::array();
    for (const auto& su : sus) list.push_back(coac::su_to_json(su));
    emit(a.common, "sus.json",
         dump({{"config", {{"arch", coac::arch_to_json(arch)}, {"constraints", constraints_json(a.unconstrained)}}},
               {"count", sus.size()},
               {"sus", std::move(list)}}));
    return 0;
}

// --- evaluate ----------------------------------------------------------------

struct EvaluateArgs {
    Common common;
    std::vector<std::string> sus;
    bool unconstrained = false;
    bool any_factors = false;
};

std::vector<coac::SpatialUnrolling> parse_su_list(const std::vector<std::string>& texts,
                                                  const coac::ArchConfig& arch, bool any_factors) {
    std::vector<coac::SpatialUnrolling> out;
    for (const auto& t : texts) {
        auto su = coac::parse_su(t, any_factors ? coac::FactorRule::any_positive
                                                : coac::FactorRule::power_of_two);
        const auto n = su.pe_count();
        if (any_factors ? n > arch.nb_pes : n != arch.nb_pes)
            throw ConfigError("--sus '" + t + "' uses " + std::to_string(n) + " PEs; the arch has " +
                              std::to_string(arch.nb_pes));
        out.push_back(su);
    }
    return out;
}

int run_evaluate(const EvaluateArgs& a) {
    const auto arch = require_arch(a.common);
    const auto nets = require_workloads(a.common);
    auto sus = a.sus.empty() ? coac::enumerate_sus(arch.nb_pes, constraints_for(a.unconstrained))
                             : parse_su_list(a.sus, arch, a.any_factors);
    // Same SU order as a cost table.
    const auto table = coac::build_cost_table(nets, sus, arch);
    std::cerr << "evaluated " << table.sus.size() << " SUs over " << nets.size() << " network(s)\n";

    if (a.common.format == "csv") {
        std::ostringstream os;
        os << "network;layer;su;latency_cycles;energy;s_ut;t_ut;innermost\n";
        for (const auto& net : nets)
            for (const auto& layer : net.layers)
                for (const auto& su : table.sus) {
                    const auto ev = coac::evaluate_layer(layer, su, arch);
                    os << net.name << ';' << layer.id << ';' << coac::display_name(su) << ';'
                       << coac::format_number(ev.cost.latency) << ';' << coac::format_number(ev.cost.energy)
                       << ';' << coac::format_number(ev.s_ut) << ';' << coac::format_number(ev.temporal.t_ut)
                       << ';' << coac::name_of(ev.temporal.innermost) << '\n';
                }
        emit(a.common, "costs.csv", os.str());
        return 0;
    }
    json entries = json::array();
    for (const auto& net : nets)
        for (const auto& layer : net.layers)
            for (const auto& su : table.sus) {
                const auto ev = coac::evaluate_layer(layer, su, arch);
                entries.push_back({{"network", net.name},
                                   {"layer", layer.id},
                                   {"su", coac::to_string(su)},
                                   {"latency_cycles", ev.cost.latency},
                                   {"energy", ev.cost.energy},
                                   {"s_ut", ev.s_ut},
                                   {"t_ut", ev.temporal.t_ut},
                                   {"innermost", coac::name_of(ev.temporal.innermost)}});
            }
    json config = {{"arch", coac::arch_to_json(arch)},
                   {"workloads", workloads_json(nets)},
                   {"constraints", constraints_json(a.unconstrained)},
                   {"sus", a.sus}};
    emit(a.common, "costs.json",
         dump({{"config", std::move(config)}, {"provenance", "internal"}, {"entries", std::move(entries)}}));
    return 0;
}

// --- overhead ----------------------------------------------------------------

struct OverheadArgs {
    Common common;
    std::vector<std::string> sus;
    std::string preset;
    bool golden = false;
};

int run_overhead(const OverheadArgs& a) {
    const bool have_set = !a.sus.empty() || !a.preset.empty();
    if (!have_set && !a.golden)
        throw ConfigError("overhead: give --sus, --preset or --golden-paper");

    json report = json::object();
    std::ostringstream csv;
    int status = 0;

    if (have_set) {
        coac::ArchConfig arch;
        std::vector<coac::SpatialUnrolling> sus;
        if (!a.preset.empty()) {
            arch = a.common.arch_path.empty() ? coac::evolver256_arch() : require_arch(a.common);
            sus = coac::evolver256_sus();
        } else {
            arch = require_arch(a.common);
        }
        if (!a.sus.empty()) sus = parse_su_list(a.sus, arch, false);
        const auto r = coac::total_overhead(sus, arch);
        json names = json::array();
        for (const auto& su : sus) names.push_back(coac::display_name(su));
        report["config"] = {{"arch", coac::arch_to_json(arch)}, {"preset", a.preset}, {"sus", names}};
        report["su_set"] = names;
        report["overhead"] = coac::overhead_to_json(r);
        report["total_muxes"] = r.total_muxes();
        csv << "field;value\n";
        for (const auto& [k, v] : report["overhead"].items()) csv << k << ';' << v.dump() << '\n';
        csv << "total_muxes;" << r.total_muxes() << '\n';
        std::cerr << "overhead of " << sus.size() << " SU(s): " << r.total_muxes() << " MUXes, "
                  << r.n_adders << " adders, area_flex " << coac::format_number(r.area_flex) << '\n';
    }

    if (a.golden) {
        const auto cells = coac::check_study();
        json list = json::array();
        int failed = 0;
        if (have_set) csv << '\n';
        csv << "pair;field;expected;actual;status\n";
        for (const auto& c : cells) {
            const char* st = c.pass() ? "PASS" : "FAIL";
            if (!c.pass()) ++failed;
            list.push_back({{"pair", c.pair}, {"field", c.field}, {"expected", c.expected},
                            {"actual", c.actual}, {"status", st}});
            csv << c.pair << ';' << c.field << ';' << c.expected << ';' << c.actual << ';' << st << '\n';
            std::cerr << st << ' ' << c.pair << ' ' << c.field << " expected " << c.expected
                      << " got " << c.actual << '\n';
        }
        report["golden"] = {{"cells", std::move(list)},
                            {"passed", static_cast<int>(cells.size()) - failed},
                            {"failed", failed}};
        std::cerr << "reference study: " << cells.size() - static_cast<std::size_t>(failed) << "/"
                  << cells.size() << " cells match\n";
        if (failed) status = 1;
    }

    if (a.common.format == "csv")
        emit(a.common, "overhead.csv", csv.str());
    else
        emit(a.common, "overhead.json", dump(report));
    return status;
}

// --- explore -----------------------------------------------------------------

struct ExploreArgs {
    Common common;
    int max_sus = 2;
    bool no_prune = false;
    bool reshuffle_energy = false;
    bool exact_size = false;
    bool unconstrained = false;
    double epsilon = 0.0;
    std::string area = "flex";
    std::uint64_t subset_cap = 20'000'000;
    std::string cost_table;
};

int run_explore(const ExploreArgs& a) {
    const auto arch = require_arch(a.common);
    const auto nets = require_workloads(a.common);
    coac::ExploreOptions opt;
    opt.max_sus = a.max_sus;
    opt.prune = !a.no_prune;
    opt.include_smaller_sets = !a.exact_size;
    opt.reshuffle_energy = a.reshuffle_energy;
    opt.epsilon = a.epsilon;
    opt.area_axis = a.area == "total" ? coac::AreaAxis::total : coac::AreaAxis::flex;
    opt.subset_cap = a.subset_cap;
    opt.jobs = a.common.jobs;
    coac::validate_options(opt);

    std::optional<coac::CostTable> imported;
    if (!a.cost_table.empty()) imported = coac::import_cost_table(a.cost_table, nets);

    const auto t0 = std::chrono::steady_clock::now();
    const auto res = coac::explore(arch, nets, opt, imported ? &*imported : nullptr,
                                   constraints_for(a.unconstrained));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::cerr << "candidates: " << res.candidates_before << " before pruning, " << res.candidates.size()
              << " after\n"
              << "subsets: " << res.subsets_evaluated << " evaluated of " << res.subsets_total << '\n'
              << "front: " << coac::all_points(res.solutions).size() << " points over "
              << res.solutions.size() << " SU set(s)\n";
    if (res.truncated)
        std::cerr << "warning: subset cap " << a.subset_cap << " reached; the search is incomplete\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", secs);
    std::cerr << "wall time: " << buf << " s\n";

    json config = {{"arch", coac::arch_to_json(arch)},
                   {"workloads", workloads_json(nets)},
                   {"options", coac::options_to_json(opt)},
                   {"constraints", constraints_json(a.unconstrained)},
                   {"cost_table", a.cost_table}};
    const auto report = coac::explore_report(res, config);

    std::ostringstream csv;
    coac::write_front_csv(csv, res, res.solutions);

    if (a.common.out_dir.empty()) {
        std::cout << (a.common.format == "csv" ? csv.str() : dump(report));
        return 0;
    }
    emit(a.common, "explore.json", dump(report));
    emit(a.common, "front.csv", csv.str());
    for (const auto& [n, sols] : res.by_size) {
        std::ostringstream dat;
        coac::write_plot_data(dat, sols, n);
        emit(a.common, "front_N" + std::to_string(n) + ".dat", dat.str());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Design-space exploration of combined spatial unrollings on one PE array"};
    app.require_subcommand(1);

    EnumerateArgs en;
    auto* s_en = app.add_subcommand("enumerate", "List every SU of the array");
    add_common(s_en, en.common, false);
    s_en->add_flag("--unconstrained", en.unconstrained, "Also list SUs mixing G with C or K");

    EvaluateArgs ev;
    auto* s_ev = app.add_subcommand("evaluate", "Per-layer latency/energy of SUs (cost-table format)");
    add_common(s_ev, ev.common, true);
    s_ev->add_option("--sus", ev.sus, "SU text, e.g. C=2,K=2,OX=2; repeatable (default: all)");
    s_ev->add_flag("--unconstrained", ev.unconstrained, "Also evaluate SUs mixing G with C or K");
    s_ev->add_flag("--any-factors", ev.any_factors,
                   "Accept non power-of-2 factors with product <= nb_pes");

    OverheadArgs ov;
    auto* s_ov = app.add_subcommand("overhead", "Hardware overhead of supporting a set of SUs");
    add_common(s_ov, ov.common, false);
    s_ov->add_option("--sus", ov.sus, "SU text; repeatable");
    s_ov->add_option("--preset", ov.preset, "Built-in SU set and arch")->check(CLI::IsMember({"evolver256"}));
    s_ov->add_flag("--golden-paper", ov.golden, "Check the built-in 8-PE reference study cell by cell");

    ExploreArgs ex;
    auto* s_ex = app.add_subcommand("explore", "Search SU combinations for the latency/energy/area front");
    add_common(s_ex, ex.common, true);
    s_ex->add_option("--max-sus", ex.max_sus, "Largest SU set size")->capture_default_str();
    s_ex->add_flag("--no-prune", ex.no_prune, "Keep SUs that are never latency- or energy-best");
    s_ex->add_flag("--reshuffle-energy", ex.reshuffle_energy,
                   "Charge reshuffling-buffer energy between layers with mismatched SUs");
    s_ex->add_flag("--exact-size", ex.exact_size, "Only evaluate sets of exactly --max-sus SUs");
    s_ex->add_flag("--unconstrained", ex.unconstrained, "Also consider SUs mixing G with C or K");
    s_ex->add_option("--epsilon", ex.epsilon, "Relative Pareto tolerance")->capture_default_str();
    s_ex->add_option("--area", ex.area, "Area axis of the final front")
        ->check(CLI::IsMember({"flex", "total"}))
        ->capture_default_str();
    s_ex->add_option("--subset-cap", ex.subset_cap, "Maximum number of SU sets evaluated")
        ->capture_default_str();
    s_ex->add_option("--cost-table", ex.cost_table, "Import layer costs instead of the internal model")
        ->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (s_en->parsed()) return run_enumerate(en);
        if (s_ev->parsed()) return run_evaluate(ev);
        if (s_ov->parsed()) return run_overhead(ov);
        if (s_ex->parsed()) return run_explore(ex);
    } catch (const IoError& e) {
        std::cerr << "coac: error: " << e.what() << '\n';
        return 1;
    } catch (const coac::Error& e) {
        std::cerr << "coac: config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "coac: error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
