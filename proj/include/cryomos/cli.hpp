#pragma once

// Command-line surface: extract, fit, model, bench, physics. Exit codes
// are a stable contract: 0 success, 1 I/O-or-parse failure, 2 partial
// extraction, 3 unconverged/over-threshold fit.

#include "circuits.hpp"
#include "extraction.hpp"
#include "fitting.hpp"
#include "io.hpp"
#include "physics.hpp"
#include "reference.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace cryomos::cli {

namespace fs = std::filesystem;

constexpr int exit_ok = 0;
constexpr int exit_io = 1;
constexpr int exit_partial = 2;
constexpr int exit_unconverged = 3;

struct GlobalOpts {
    unsigned long long seed = 1;
    std::string out_dir;
    bool json = false;
};

namespace detail {

inline std::vector<double> parse_grid(const std::string& spec, const std::string& what) {
    // "lo:hi:step" or "v1,v2,..." or a single value.
    std::vector<double> grid;
    if (spec.find(':') != std::string::npos) {
        const auto c1 = spec.find(':');
        const auto c2 = spec.find(':', c1 + 1);
        if (c2 == std::string::npos)
            throw io::ParseError(what + ": grid must be lo:hi:step, got '" + spec + "'");
        const double lo = io::parse_double(spec.substr(0, c1), what);
        const double hi = io::parse_double(spec.substr(c1 + 1, c2 - c1 - 1), what);
        const double step = io::parse_double(spec.substr(c2 + 1), what);
        if (!(step > 0) || hi < lo) throw io::ParseError(what + ": bad grid '" + spec + "'");
        const auto n = std::size_t(std::floor((hi - lo) / step + 0.5)) + 1;
        for (std::size_t i = 0; i < n; ++i) grid.push_back(lo + double(i) * step);
        if (!grid.empty() && grid.back() > hi + 1e-12) grid.pop_back();
    } else {
        std::stringstream ss(spec);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!io::trim(tok).empty()) grid.push_back(io::parse_double(io::trim(tok), what));
    }
    if (grid.empty()) throw io::ParseError(what + ": empty grid '" + spec + "'");
    return grid;
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> items;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ';'))
        if (!io::trim(tok).empty()) items.push_back(io::trim(tok));
    return items;
}

inline void ensure_out_dir(const std::string& dir) {
    if (!dir.empty()) fs::create_directories(dir);
}

inline fs::path out_path(const GlobalOpts& g, const std::string& name) {
    return g.out_dir.empty() ? fs::path(name) : fs::path(g.out_dir) / name;
}

// Model sets addressable either from a parameter file or the built-in
// reference library.
inline ModelParams resolve_params(const std::string& params_path, const std::string& set_name) {
    if (params_path.empty()) {
        const auto lib = shipped_reference_library();
        return lib.at(set_name.empty() ? "CryoNMOS-ref" : set_name);
    }
    const auto sets = io::load_model_sections(params_path);
    if (set_name.empty()) return sets.front().second;
    for (const auto& [name, p] : sets)
        if (name == set_name) return p;
    throw io::ParseError(params_path + ": no model section named [" + set_name + "]");
}

} // namespace detail

// --- extract ---------------------------------------------------------------

inline int run_extract(const std::vector<std::string>& inputs, double ratio,
                       const GlobalOpts& g, std::ostream& out, std::ostream& err) {
    std::vector<fs::path> files;
    for (const auto& input : inputs) {
        fs::path p(input);
        if (fs::is_directory(p)) {
            std::vector<fs::path> dir_files;
            for (const auto& e : fs::directory_iterator(p))
                if (e.is_regular_file() && e.path().extension() == ".csv")
                    dir_files.push_back(e.path());
            std::sort(dir_files.begin(), dir_files.end());
            files.insert(files.end(), dir_files.begin(), dir_files.end());
        } else {
            files.push_back(p);
        }
    }
    if (files.empty()) {
        err << "extract: no input sweeps\n";
        return exit_io;
    }

    detail::ensure_out_dir(g.out_dir);
    bool any_partial = false;
    out << io::report_csv_header() << "\n";
    for (const auto& file : files) {
        IVSweep sweep;
        try {
            sweep = io::parse_sweep_file(file.string());
        } catch (const std::exception& e) {
            err << "extract: " << e.what() << "\n";
            return exit_io;
        }
        const auto report = extraction::extract_single(sweep, ratio);
        any_partial = any_partial || !report.complete();
        out << io::report_csv_row(file.filename().string(), report) << "\n";
        const auto report_path = detail::out_path(g, file.stem().string() + ".report");
        std::ofstream rf(report_path);
        if (!rf) {
            err << "extract: cannot write " << report_path.string() << "\n";
            return exit_io;
        }
        io::emit_report_file(rf, report);
        for (const auto& issue : report.issues)
            err << "extract: " << file.filename().string() << ": " << issue << "\n";
    }
    return any_partial ? exit_partial : exit_ok;
}

// --- model -----------------------------------------------------------------

inline int run_model(const std::string& params_path, const std::string& set_name,
                     const std::string& mode, const std::string& vgs_spec,
                     const std::string& vds_spec, double t_K, const DeviceGeometry& geom,
                     const GlobalOpts& g, std::ostream& out, std::ostream& err) {
    try {
        const ModelParams params = detail::resolve_params(params_path, set_name);
        detail::ensure_out_dir(g.out_dir);
        if (mode == "transfer") {
            const auto vgs = detail::parse_grid(vgs_spec, "--vgs");
            const auto vds_list = detail::parse_grid(vds_spec, "--vds");
            for (double vds : vds_list) {
                const auto sweep = iv_sweep_synthesize(params, geom, vds, t_K, vgs);
                if (g.out_dir.empty() && vds_list.size() == 1) {
                    io::emit_sweep_csv(out, sweep);
                } else {
                    const auto name = "transfer_vds" + io::format_double(vds) + "_T" +
                                      io::format_double(t_K) + ".csv";
                    std::ofstream f(detail::out_path(g, name));
                    io::emit_sweep_csv(f, sweep);
                    out << name << "\n";
                }
            }
        } else if (mode == "output") {
            // Output family: I_DS vs V_DS at fixed V_GS values.
            const auto vds = detail::parse_grid(vds_spec, "--vds");
            const auto vgs_list = detail::parse_grid(vgs_spec, "--vgs");
            std::ostringstream body;
            body << "# T_K=" << io::format_double(t_K) << "\n";
            body << "# W_um=" << io::format_double(geom.w_um) << "\n";
            body << "# L_um=" << io::format_double(geom.l_um) << "\n";
            body << "# cox_F_cm2=" << io::format_double(geom.cox) << "\n";
            body << "# polarity=" << to_string(params.polarity) << "\n";
            body << "vds_V";
            for (double vg : vgs_list) body << ",ids_A_vgs" << io::format_double(vg);
            body << "\n";
            for (double vd : vds) {
                body << io::format_double(vd);
                for (double vg : vgs_list)
                    body << "," << io::format_double(drain_current(params, geom, {vg, vd, t_K}));
                body << "\n";
            }
            if (g.out_dir.empty()) {
                out << body.str();
            } else {
                const auto name = "output_T" + io::format_double(t_K) + ".csv";
                std::ofstream f(detail::out_path(g, name));
                f << body.str();
                out << name << "\n";
            }
        } else {
            err << "model: unknown --mode '" << mode << "' (transfer|output)\n";
            return exit_io;
        }
        return exit_ok;
    } catch (const std::exception& e) {
        err << "model: " << e.what() << "\n";
        return exit_io;
    }
}

// --- fit -------------------------------------------------------------------

inline int run_fit(const std::string& config_path, double threshold, const GlobalOpts& g,
                   std::ostream& out, std::ostream& err) {
    try {
        const auto cfg = io::parse_config_file(config_path);
        const auto& fit_sec = cfg.section("fit");
        const fs::path base = fs::path(config_path).parent_path();

        fitting::FitProblem problem;
        const std::string params_file = fit_sec.get("initial_params");
        problem.initial = detail::resolve_params(
            (base / params_file).string(),
            fit_sec.has("initial_set") ? fit_sec.get("initial_set") : "");
        for (const auto& sweep_file : detail::split_list(fit_sec.get("sweeps")))
            problem.sweeps.push_back(io::parse_sweep_file((base / sweep_file).string()));
        problem.free_names = detail::split_list(fit_sec.get("free"));
        if (const auto* bounds = cfg.find("bounds")) {
            for (const auto& [key, value] : bounds->entries) {
                const auto parts = detail::split_list(value);
                if (parts.size() != 2)
                    throw io::ParseError("bounds for " + key + " must be 'lo;hi'");
                problem.bounds[key] = {io::parse_double(parts[0], key),
                                       io::parse_double(parts[1], key)};
            }
        }
        problem.seed = fit_sec.has("seed") && g.seed == 1
                           ? (unsigned long long)fit_sec.get_double("seed")
                           : g.seed;
        problem.restarts = int(fit_sec.get_double_or("restarts", 3));
        problem.max_iterations = int(fit_sec.get_double_or("max_iterations", 5000));

        const auto result = fitting::calibrate(problem);

        detail::ensure_out_dir(g.out_dir);
        {
            std::ofstream pf(detail::out_path(g, "fit_result.params"));
            pf << "# cryomos fit result\n";
            pf << "version = " << reference_library_version << "\n";
            io::emit_model_section(pf, "fitted", result.params);
        }
        {
            std::ofstream ef(detail::out_path(g, "fit_errors.csv"));
            ef << "T_K,vds_V,mean_rel_error\n";
            for (const auto& e : result.per_sweep)
                ef << io::format_double(e.t_K) << "," << io::format_double(e.vds) << ","
                   << io::format_double(e.mean_rel_error) << "\n";
        }
        out << "mean_rel_error = " << io::format_double(result.mean_rel_error) << "\n";
        out << "iterations = " << result.iterations << "\n";
        out << "converged = " << (result.converged ? "yes" : "no") << "\n";
        const bool ok = result.converged && result.mean_rel_error < threshold;
        if (!ok)
            err << "fit: " << (result.converged ? "error above threshold" : "not converged")
                << " (best written to fit_result.params)\n";
        return ok ? exit_ok : exit_unconverged;
    } catch (const std::exception& e) {
        err << "fit: " << e.what() << "\n";
        return exit_io;
    }
}

// --- bench -----------------------------------------------------------------

struct BenchSettings {
    std::string params_path;
    int ro_stages = 257;
    int dff_stages = 6;
    double c_load = 2.6e-15;
    double w_n = 0.2, w_p = 0.4, l = 0.03, cox = 1.85e-6;
    std::vector<double> vdd_grid{0.6, 0.7, 0.8, 0.9};
    std::vector<double> t_grid{77.0, 298.0};
    double f_clk = 1e9;
    double aes_w_n = 1.2e5, aes_w_p = 1.2e5;
    double aes_rvt_target_W = 2.03e-3;
};

inline BenchSettings bench_settings_from_config(const std::string& config_path) {
    BenchSettings s;
    if (config_path.empty()) return s;
    const auto cfg = io::parse_config_file(config_path);
    const auto& b = cfg.section("bench");
    if (b.has("params"))
        s.params_path = (fs::path(config_path).parent_path() / b.get("params")).string();
    s.ro_stages = int(b.get_double_or("ro_stages", s.ro_stages));
    s.dff_stages = int(b.get_double_or("dff_stages", s.dff_stages));
    s.c_load = b.get_double_or("c_load_F", s.c_load);
    s.w_n = b.get_double_or("w_n_um", s.w_n);
    s.w_p = b.get_double_or("w_p_um", s.w_p);
    s.l = b.get_double_or("l_um", s.l);
    s.cox = b.get_double_or("cox_F_cm2", s.cox);
    if (b.has("vdd_grid_V")) {
        s.vdd_grid.clear();
        for (const auto& v : detail::split_list(b.get("vdd_grid_V")))
            s.vdd_grid.push_back(io::parse_double(v, "vdd_grid_V"));
    }
    if (b.has("t_grid_K")) {
        s.t_grid.clear();
        for (const auto& v : detail::split_list(b.get("t_grid_K")))
            s.t_grid.push_back(io::parse_double(v, "t_grid_K"));
    }
    s.f_clk = b.get_double_or("f_clk_Hz", s.f_clk);
    s.aes_w_n = b.get_double_or("aes_w_n_um", s.aes_w_n);
    s.aes_w_p = b.get_double_or("aes_w_p_um", s.aes_w_p);
    s.aes_rvt_target_W = b.get_double_or("aes_rvt_target_W", s.aes_rvt_target_W);
    return s;
}

struct BenchAnchor {
    std::string name;
    double value;
    bool pass;
};

struct BenchOutput {
    std::vector<circuits::ComparisonRow> rows;
    std::vector<BenchAnchor> anchors;
};

inline BenchOutput run_bench_core(const BenchSettings& s) {
    ReferenceParamLibrary lib = shipped_reference_library();
    if (!s.params_path.empty()) {
        lib.sets.clear();
        for (const auto& [name, p] : io::load_model_sections(s.params_path))
            lib.sets[name] = p;
    }
    for (const char* needed : {"CryoNMOS-ref", "CryoPMOS-ref", "RVT-NMOS-ref", "RVT-PMOS-ref"}) {
        if (!lib.has(needed))
            throw io::ParseError("bench: parameter library is missing set " + std::string(needed));
    }

    const auto make_cell = [&](const std::string& n, const std::string& p) {
        circuits::InverterCell cell;
        cell.nmos = {lib.at(n), {s.w_n, s.l, s.cox}};
        cell.pmos = {lib.at(p), {s.w_p, s.l, s.cox}};
        cell.c_load = s.c_load;
        return cell;
    };
    const auto cryo = make_cell("CryoNMOS-ref", "CryoPMOS-ref");
    const auto rvt = make_cell("RVT-NMOS-ref", "RVT-PMOS-ref");
    std::vector<circuits::TechnologyCells> techs{{"Cryo", cryo}, {"RVT", rvt}};
    if (lib.has("uLVT-NMOS-ref") && lib.has("uLVT-PMOS-ref"))
        techs.push_back({"uLVT", make_cell("uLVT-NMOS-ref", "uLVT-PMOS-ref")});

    // AES power scenario: the switched capacitance is calibrated once at
    // the RVT room-temperature operating point.
    circuits::PowerScenario aes;
    aes.f_clk = s.f_clk;
    aes.vdd = 0.9;
    aes.t_K = t_reference;
    aes.w_nmos_total_um = s.aes_w_n;
    aes.w_pmos_total_um = s.aes_w_p;
    aes.nmos = lib.at("RVT-NMOS-ref");
    aes.pmos = lib.at("RVT-PMOS-ref");
    aes.c_switched = 1e-12;
    aes.c_switched = circuits::calibrate_switched_capacitance(aes, s.aes_rvt_target_W);

    BenchOutput result;
    result.rows = circuits::compare_technologies(techs, s.vdd_grid, s.t_grid, s.ro_stages,
                                                 s.dff_stages, aes);

    const auto rvt_power = circuits::module_power(aes).total_W;
    circuits::PowerScenario aes_cryo = aes;
    aes_cryo.t_K = 77.0;
    aes_cryo.nmos = lib.at("CryoNMOS-ref");
    aes_cryo.pmos = lib.at("CryoPMOS-ref");
    const auto cryo_power = circuits::module_power(aes_cryo).total_W;

    const auto add = [&](const std::string& name, double value, bool pass) {
        result.anchors.push_back({name, value, pass});
    };

    double f_lo = std::numeric_limits<double>::infinity(), f_hi = 0.0;
    bool cryo_all_oscillate = true;
    for (double vdd : {0.6, 0.75, 0.9}) {
        const auto f = circuits::ro_frequency({s.ro_stages, cryo, vdd, 77.0});
        if (!f.oscillates) cryo_all_oscillate = false;
        else {
            f_lo = std::min(f_lo, f.frequency_Hz);
            f_hi = std::max(f_hi, f.frequency_Hz);
        }
    }
    add("cryo_ro_min_MHz_77K", f_lo / 1e6, cryo_all_oscillate && f_lo >= 200e6);
    add("cryo_ro_max_MHz_77K", f_hi / 1e6, cryo_all_oscillate && f_hi <= 600e6);

    const auto rvt_06 = circuits::ro_frequency({s.ro_stages, rvt, 0.6, 77.0});
    add("rvt_stuck_0p6V_77K", rvt_06.oscillates ? 0.0 : 1.0, !rvt_06.oscillates);

    const auto fc = circuits::ro_frequency({s.ro_stages, cryo, 0.9, 77.0});
    const auto fr = circuits::ro_frequency({s.ro_stages, rvt, 0.9, 77.0});
    const double ratio = (fc.oscillates && fr.oscillates) ? fc.frequency_Hz / fr.frequency_Hz : 0.0;
    add("ro_ratio_cryo_rvt_0p9V_77K", ratio, ratio >= 1.20);

    double reduction = 0.0;
    bool reduction_ok = false;
    try {
        reduction = circuits::dff_delay_reduction({s.dff_stages, rvt, 0.9, 77.0},
                                                  {s.dff_stages, cryo, 0.9, 77.0});
        reduction_ok = reduction >= 0.15 && reduction <= 0.30;
    } catch (const std::exception&) {
    }
    add("dff_reduction_0p9V_77K", reduction, reduction_ok);

    add("aes_rvt_power_mW_298K", rvt_power * 1e3, std::abs(rvt_power - 2.03e-3) < 1e-6);
    add("aes_cryo_power_mW_77K", cryo_power * 1e3, std::abs(cryo_power - 1.28e-3) <= 0.15 * 1.28e-3);
    const double power_cut = 1.0 - cryo_power / rvt_power;
    add("aes_power_reduction", power_cut, std::abs(power_cut - 0.37) <= 0.08);

    return result;
}

inline int run_bench(const std::string& config_path, const std::string& params_override,
                     const GlobalOpts& g, std::ostream& out, std::ostream& err) {
    try {
        BenchSettings s = bench_settings_from_config(config_path);
        if (!params_override.empty()) s.params_path = params_override;
        const auto result = run_bench_core(s);

        if (g.json) {
            nlohmann::json j;
            j["version"] = reference_library_version;
            j["table"] = nlohmann::json::array();
            for (const auto& r : result.rows) {
                j["table"].push_back({{"technology", r.technology},
                                      {"V_DD_V", io::parse_double(io::format_double(r.vdd), "vdd")},
                                      {"T_K", io::parse_double(io::format_double(r.t_K), "t")},
                                      {"f_RO_Hz", io::parse_double(io::format_double(r.f_ro_Hz), "f")},
                                      {"dff_delay_s",
                                       io::parse_double(io::format_double(r.dff_delay_s), "d")},
                                      {"power_W", io::parse_double(io::format_double(r.power_W), "p")},
                                      {"status", r.oscillates ? "ok" : "fails-to-oscillate"}});
            }
            j["anchors"] = nlohmann::json::array();
            for (const auto& a : result.anchors)
                j["anchors"].push_back({{"name", a.name},
                                        {"value", io::parse_double(io::format_double(a.value), "v")},
                                        {"pass", a.pass}});
            out << j.dump(2) << "\n";
        } else {
            out << "technology,V_DD_V,T_K,f_RO_Hz,dff_delay_s,power_W,status\n";
            for (const auto& r : result.rows) {
                out << r.technology << "," << io::format_double(r.vdd) << ","
                    << io::format_double(r.t_K) << "," << io::format_double(r.f_ro_Hz) << ","
                    << io::format_double(r.dff_delay_s) << "," << io::format_double(r.power_W)
                    << "," << (r.oscillates ? "ok" : "fails-to-oscillate") << "\n";
            }
            for (const auto& a : result.anchors)
                out << (a.pass ? "PASS " : "FAIL ") << a.name << " = " << io::format_double(a.value)
                    << "\n";
        }
        if (!g.out_dir.empty()) {
            detail::ensure_out_dir(g.out_dir);
            std::ofstream f(detail::out_path(g, "bench.csv"));
            f << "technology,V_DD_V,T_K,f_RO_Hz,dff_delay_s,power_W,status\n";
            for (const auto& r : result.rows) {
                f << r.technology << "," << io::format_double(r.vdd) << ","
                  << io::format_double(r.t_K) << "," << io::format_double(r.f_ro_Hz) << ","
                  << io::format_double(r.dff_delay_s) << "," << io::format_double(r.power_W) << ","
                  << (r.oscillates ? "ok" : "fails-to-oscillate") << "\n";
            }
        }
        return exit_ok;
    } catch (const std::exception& e) {
        err << "bench: " << e.what() << "\n";
        return exit_io;
    }
}

// --- physics ---------------------------------------------------------------

inline int run_physics(const std::string& params_path, const std::string& set_name, double t_lo,
                       double t_hi, int n, const GlobalOpts& g, std::ostream& out,
                       std::ostream& err) {
    try {
        physics::MosStack stack; // defaults when no file given
        if (!params_path.empty()) {
            const auto cfg = io::parse_config_file(params_path);
            const io::ConfigSection* chosen = nullptr;
            for (const auto& sec : cfg.sections) {
                if (sec.has("kind") && sec.get("kind") == "stack" &&
                    (set_name.empty() || sec.name == set_name)) {
                    chosen = &sec;
                    break;
                }
            }
            if (!chosen)
                throw io::ParseError(params_path + ": no stack section" +
                                     (set_name.empty() ? "" : " named [" + set_name + "]"));
            stack = io::stack_from_section(*chosen);
        }
        if (n < 1) throw std::domain_error("physics: grid needs at least one point");
        const auto curve = physics::vth_freezeout_curve(stack, linspace(t_lo, t_hi, std::size_t(n)));
        std::ostringstream body;
        body << "T_K,VTH_V,dVTH_V\n";
        for (const auto& pt : curve)
            body << io::format_double(pt.temperature_K) << "," << io::format_double(pt.vth_V) << ","
                 << io::format_double(pt.dvth_V) << "\n";
        if (g.out_dir.empty()) {
            out << body.str();
        } else {
            detail::ensure_out_dir(g.out_dir);
            std::ofstream f(detail::out_path(g, "freezeout.csv"));
            f << body.str();
            out << "freezeout.csv\n";
        }
        return exit_ok;
    } catch (const std::exception& e) {
        err << "physics: " << e.what() << "\n";
        return exit_io;
    }
}

// --- dispatcher ------------------------------------------------------------

inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"cryomos: cryogenic MOSFET modeling toolkit"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may appear after the subcommand

    GlobalOpts g;
    app.add_option("--seed", g.seed, "RNG seed for seeded operations");
    app.add_option("--out", g.out_dir, "output directory");
    app.add_flag("--json", g.json, "structured JSON output where supported");

    auto* extract = app.add_subcommand("extract", "extract figures of merit from sweep CSVs");
    std::vector<std::string> extract_inputs;
    double ratio = 1e7;
    extract->add_option("inputs", extract_inputs, "sweep CSV files or directories")->required();
    extract->add_option("--ratio", ratio, "on/off ratio target for the overdrive extractor");

    auto* model = app.add_subcommand("model", "synthesize transfer/output curves");
    std::string m_params, m_set, m_mode = "transfer", m_vgs = "0:0.9:0.01", m_vds = "0.05";
    double m_t = 77.0;
    DeviceGeometry m_geom = reference_geometry();
    model->add_option("--params", m_params, "parameter file (default: built-in library)");
    model->add_option("--set", m_set, "model section name");
    model->add_option("--mode", m_mode, "transfer|output");
    model->add_option("--vgs", m_vgs, "V_GS grid lo:hi:step or comma list");
    model->add_option("--vds", m_vds, "V_DS value(s) lo:hi:step or comma list");
    model->add_option("--T", m_t, "temperature in K")->required();
    model->add_option("--W", m_geom.w_um, "channel width, um");
    model->add_option("--L", m_geom.l_um, "channel length, um");
    model->add_option("--cox", m_geom.cox, "gate capacitance, F/cm^2");

    auto* fit = app.add_subcommand("fit", "calibrate model parameters to sweeps");
    std::string f_config;
    double f_threshold = 0.06;
    fit->add_option("--config", f_config, "fit configuration file")->required();
    fit->add_option("--threshold", f_threshold, "mean relative error acceptance threshold");

    auto* bench = app.add_subcommand("bench", "circuit-level technology comparison");
    std::string b_config, b_params;
    bench->add_option("--config", b_config, "bench scenario configuration file");
    bench->add_option("--params", b_params, "parameter library file (overrides config)");

    auto* phys = app.add_subcommand("physics", "emit the freeze-out V_TH curve");
    std::string p_params, p_set;
    double p_tlo = 10.0, p_thi = 298.0;
    int p_n = 30;
    phys->add_option("--params", p_params, "parameter file with a stack section");
    phys->add_option("--set", p_set, "stack section name");
    phys->add_option("--tmin", p_tlo, "grid start, K");
    phys->add_option("--tmax", p_thi, "grid end, K");
    phys->add_option("--n", p_n, "grid points");

    std::reverse(args.begin(), args.end()); // CLI11 parses reversed vectors
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) { // --help
            out << app.help();
            return exit_ok;
        }
        err << "cryomos: " << e.what() << "\n";
        return exit_io;
    }

    if (extract->parsed()) return run_extract(extract_inputs, ratio, g, out, err);
    if (model->parsed())
        return run_model(m_params, m_set, m_mode, m_vgs, m_vds, m_t, m_geom, g, out, err);
    if (fit->parsed()) return run_fit(f_config, f_threshold, g, out, err);
    if (bench->parsed()) return run_bench(b_config, b_params, g, out, err);
    if (phys->parsed()) return run_physics(p_params, p_set, p_tlo, p_thi, p_n, g, out, err);
    err << "cryomos: no subcommand\n";
    return exit_io;
}

} // namespace cryomos::cli
