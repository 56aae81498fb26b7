#pragma once

// File formats: the key = value parameter/config format, the sweep CSV
// schema with '#' metadata preamble, and extraction-report emission.
// Floats are written with 9 significant digits; emit(parse(emit(x))) is
// byte-stable.

#include "extraction.hpp"
#include "model.hpp"
#include "physics.hpp"
#include "sweep.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cryomos::io {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline double parse_double(const std::string& s, const std::string& context) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(context + ": not a number: '" + s + "'");
    }
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// ---------------------------------------------------------------------------
// Generic key = value file with [sections], '#' comments and a top-level
// version key. One parser backs the parameter, fit-config and bench-config
// formats.

struct ConfigSection {
    std::string name;
    int line = 0;
    std::vector<std::pair<std::string, std::string>> entries;

    bool has(const std::string& key) const {
        return std::any_of(entries.begin(), entries.end(),
                           [&](const auto& e) { return e.first == key; });
    }
    const std::string& get(const std::string& key) const {
        for (const auto& e : entries)
            if (e.first == key) return e.second;
        throw ParseError("section [" + name + "]: missing required key '" + key + "'");
    }
    double get_double(const std::string& key) const {
        return parse_double(get(key), "section [" + name + "] key '" + key + "'");
    }
    double get_double_or(const std::string& key, double fallback) const {
        return has(key) ? get_double(key) : fallback;
    }
};

struct ConfigFile {
    std::string version = "1";
    std::vector<ConfigSection> sections;

    const ConfigSection& section(const std::string& name) const {
        for (const auto& s : sections)
            if (s.name == name) return s;
        throw ParseError("missing section [" + name + "]");
    }
    const ConfigSection* find(const std::string& name) const {
        for (const auto& s : sections)
            if (s.name == name) return &s;
        return nullptr;
    }
};

inline ConfigFile parse_config(std::istream& in, const std::string& filename = "<config>") {
    ConfigFile cfg;
    cfg.version.clear();
    std::string line;
    int lineno = 0;
    ConfigSection* current = nullptr;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const std::string where = filename + ":" + std::to_string(lineno);
        if (t.front() == '[') {
            if (t.back() != ']') throw ParseError(where + ": unterminated section header");
            const std::string name = trim(t.substr(1, t.size() - 2));
            if (name.empty()) throw ParseError(where + ": empty section name");
            cfg.sections.push_back({name, lineno, {}});
            current = &cfg.sections.back();
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ParseError(where + ": expected 'key = value'");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) throw ParseError(where + ": empty key");
        if (!current) {
            if (key == "version") {
                cfg.version = value;
                continue;
            }
            throw ParseError(where + ": key '" + key + "' outside any section");
        }
        if (current->has(key)) throw ParseError(where + ": duplicate key '" + key + "'");
        current->entries.emplace_back(key, value);
    }
    if (cfg.version.empty()) throw ParseError(filename + ": missing top-level 'version' key");
    return cfg;
}

inline ConfigFile parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    return parse_config(in, path);
}

// ---------------------------------------------------------------------------
// Typed parameter sections.

inline const std::vector<std::string>& model_keys() {
    static const std::vector<std::string> keys{
        "kind",          "polarity",     "vth0_V",          "c_vth_V_per_K",
        "mu0_cm2_Vs",    "alpha_ph",     "mu_coulomb_cm2_Vs", "n0",
        "ss_floor_mV_dec", "v_sat_cm_s", "lambda_clm_per_V", "ioff_ref_A_um",
        "eta_K_per_dec",
    };
    return keys;
}

inline const std::vector<std::string>& stack_keys() {
    static const std::vector<std::string> keys{
        "kind", "vfb_V", "cox_F_cm2", "ndop_cm3", "e_ion_eV", "dopant_kind", "degeneracy",
    };
    return keys;
}

inline void reject_unknown_keys(const ConfigSection& s, const std::vector<std::string>& allowed) {
    for (const auto& [key, value] : s.entries) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ParseError("section [" + s.name + "]: unknown key '" + key + "'");
    }
}

inline ModelParams model_params_from_section(const ConfigSection& s) {
    reject_unknown_keys(s, model_keys());
    if (s.get("kind") != "model")
        throw ParseError("section [" + s.name + "] is not a model section");
    ModelParams p;
    const std::string pol = s.get("polarity");
    if (pol == "nmos") p.polarity = Polarity::nmos;
    else if (pol == "pmos") p.polarity = Polarity::pmos;
    else throw ParseError("section [" + s.name + "]: polarity must be nmos or pmos");
    p.vth0 = s.get_double("vth0_V");
    p.c_vth = s.get_double("c_vth_V_per_K");
    p.mu0 = s.get_double("mu0_cm2_Vs");
    p.alpha_ph = s.get_double("alpha_ph");
    p.mu_coulomb = s.get_double("mu_coulomb_cm2_Vs");
    p.n0 = s.get_double("n0");
    p.ss_floor = s.get_double("ss_floor_mV_dec");
    p.v_sat = s.get_double("v_sat_cm_s");
    p.lambda_clm = s.get_double("lambda_clm_per_V");
    p.ioff_ref = s.get_double("ioff_ref_A_um");
    p.eta = s.get_double("eta_K_per_dec");
    p.validate();
    return p;
}

inline physics::MosStack stack_from_section(const ConfigSection& s) {
    reject_unknown_keys(s, stack_keys());
    if (s.get("kind") != "stack")
        throw ParseError("section [" + s.name + "] is not a stack section");
    physics::MosStack st;
    st.v_fb = s.get_double("vfb_V");
    st.cox = s.get_double("cox_F_cm2");
    st.doping.n_dop = s.get_double("ndop_cm3");
    st.doping.e_ion_eV = s.get_double("e_ion_eV");
    const std::string kind = s.get("dopant_kind");
    if (kind == "acceptor") st.doping.kind = physics::DopantKind::acceptor;
    else if (kind == "donor") st.doping.kind = physics::DopantKind::donor;
    else throw ParseError("section [" + s.name + "]: dopant_kind must be acceptor or donor");
    st.doping.degeneracy = s.get_double("degeneracy");
    st.validate();
    return st;
}

inline void emit_model_section(std::ostream& out, const std::string& name, const ModelParams& p) {
    out << "[" << name << "]\n";
    out << "kind = model\n";
    out << "polarity = " << to_string(p.polarity) << "\n";
    out << "vth0_V = " << format_double(p.vth0) << "\n";
    out << "c_vth_V_per_K = " << format_double(p.c_vth) << "\n";
    out << "mu0_cm2_Vs = " << format_double(p.mu0) << "\n";
    out << "alpha_ph = " << format_double(p.alpha_ph) << "\n";
    out << "mu_coulomb_cm2_Vs = " << format_double(p.mu_coulomb) << "\n";
    out << "n0 = " << format_double(p.n0) << "\n";
    out << "ss_floor_mV_dec = " << format_double(p.ss_floor) << "\n";
    out << "v_sat_cm_s = " << format_double(p.v_sat) << "\n";
    out << "lambda_clm_per_V = " << format_double(p.lambda_clm) << "\n";
    out << "ioff_ref_A_um = " << format_double(p.ioff_ref) << "\n";
    out << "eta_K_per_dec = " << format_double(p.eta) << "\n";
}

inline void emit_stack_section(std::ostream& out, const std::string& name,
                               const physics::MosStack& st) {
    out << "[" << name << "]\n";
    out << "kind = stack\n";
    out << "vfb_V = " << format_double(st.v_fb) << "\n";
    out << "cox_F_cm2 = " << format_double(st.cox) << "\n";
    out << "ndop_cm3 = " << format_double(st.doping.n_dop) << "\n";
    out << "e_ion_eV = " << format_double(st.doping.e_ion_eV) << "\n";
    out << "dopant_kind = "
        << (st.doping.kind == physics::DopantKind::acceptor ? "acceptor" : "donor") << "\n";
    out << "degeneracy = " << format_double(st.doping.degeneracy) << "\n";
}

// All model sections of a parameter file, in file order.
inline std::vector<std::pair<std::string, ModelParams>> load_model_sections(const std::string& path) {
    const auto cfg = parse_config_file(path);
    std::vector<std::pair<std::string, ModelParams>> sets;
    for (const auto& s : cfg.sections) {
        if (s.has("kind") && s.get("kind") == "model")
            sets.emplace_back(s.name, model_params_from_section(s));
    }
    if (sets.empty()) throw ParseError(path + ": no model sections found");
    return sets;
}

// ---------------------------------------------------------------------------
// Sweep CSV: '#' metadata preamble, then a vgs_V,ids_A table.

inline void emit_sweep_csv(std::ostream& out, const IVSweep& sweep) {
    out << "# vds_V=" << format_double(sweep.vds) << "\n";
    out << "# T_K=" << format_double(sweep.t_K) << "\n";
    out << "# W_um=" << format_double(sweep.geom.w_um) << "\n";
    out << "# L_um=" << format_double(sweep.geom.l_um) << "\n";
    out << "# cox_F_cm2=" << format_double(sweep.geom.cox) << "\n";
    out << "# polarity=" << to_string(sweep.polarity) << "\n";
    out << "vgs_V,ids_A\n";
    for (const auto& pt : sweep.points)
        out << format_double(pt.vgs) << "," << format_double(pt.ids) << "\n";
}

// Parse a sweep CSV. PMOS data is normalized to NMOS-convention
// magnitudes on ingestion: |V_GS| ascending, |I_DS| > 0.
inline IVSweep parse_sweep_csv(std::istream& in, const std::string& filename = "<sweep>") {
    IVSweep sweep;
    std::map<std::string, std::string> meta;
    std::string line;
    int lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        const std::string where = filename + ":" + std::to_string(lineno);
        if (t.empty()) continue;
        if (t[0] == '#') {
            const std::string body = trim(t.substr(1));
            const auto eq = body.find('=');
            if (eq != std::string::npos)
                meta[trim(body.substr(0, eq))] = trim(body.substr(eq + 1));
            continue;
        }
        if (!header_seen) {
            if (t != "vgs_V,ids_A")
                throw ParseError(where + ": expected header 'vgs_V,ids_A', got '" + t + "'");
            header_seen = true;
            continue;
        }
        const auto comma = t.find(',');
        if (comma == std::string::npos) throw ParseError(where + ": expected 'vgs,ids'");
        const double vgs = parse_double(trim(t.substr(0, comma)), where + " vgs_V");
        const double ids = parse_double(trim(t.substr(comma + 1)), where + " ids_A");
        sweep.points.push_back({vgs, ids});
    }
    if (!header_seen) throw ParseError(filename + ":1: empty sweep file (no header)");
    for (const char* key : {"vds_V", "T_K", "W_um", "L_um", "cox_F_cm2", "polarity"}) {
        if (!meta.count(key))
            throw ParseError(filename + ": missing metadata line '# " + std::string(key) + "='");
    }
    sweep.vds = std::abs(parse_double(meta["vds_V"], filename + " vds_V"));
    sweep.t_K = parse_double(meta["T_K"], filename + " T_K");
    sweep.geom.w_um = parse_double(meta["W_um"], filename + " W_um");
    sweep.geom.l_um = parse_double(meta["L_um"], filename + " L_um");
    sweep.geom.cox = parse_double(meta["cox_F_cm2"], filename + " cox_F_cm2");
    const std::string pol = meta["polarity"];
    if (pol == "nmos") sweep.polarity = Polarity::nmos;
    else if (pol == "pmos") sweep.polarity = Polarity::pmos;
    else throw ParseError(filename + ": polarity must be nmos or pmos");
    if (sweep.polarity == Polarity::pmos) {
        for (auto& pt : sweep.points) {
            pt.vgs = std::abs(pt.vgs);
            pt.ids = std::abs(pt.ids);
        }
        std::sort(sweep.points.begin(), sweep.points.end(),
                  [](const SweepPoint& a, const SweepPoint& b) { return a.vgs < b.vgs; });
    }
    try {
        sweep.validate();
    } catch (const std::exception& e) {
        throw ParseError(filename + ": " + e.what());
    }
    return sweep;
}

inline IVSweep parse_sweep_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    return parse_sweep_csv(in, path);
}

// ---------------------------------------------------------------------------
// Extraction report emission.

inline const char* report_csv_header() {
    return "file,T_K,vth_cc_V,vth_y_V,mu_ch_cm2_Vs,y_r2,ss_mV_dec,gm_max_S,gm_max_vgs_V,"
           "ioff_A,vov_at_ratio_V,status";
}

inline std::string opt_cell(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string{};
}

inline std::string report_csv_row(const std::string& file, const extraction::ExtractionReport& r) {
    std::ostringstream out;
    out << file << "," << format_double(r.t_K) << "," << opt_cell(r.vth_cc) << ","
        << opt_cell(r.vth_y) << "," << opt_cell(r.mu_ch) << "," << opt_cell(r.y_r2) << ","
        << opt_cell(r.ss_min) << "," << opt_cell(r.gm_max) << "," << opt_cell(r.gm_max_vgs) << ","
        << opt_cell(r.ioff) << "," << opt_cell(r.vov_at_ratio) << ","
        << (r.complete() ? "ok" : "partial");
    return out.str();
}

inline void emit_report_file(std::ostream& out, const extraction::ExtractionReport& r) {
    out << "# cryomos extraction report\n";
    out << "version = 1\n";
    out << "[report]\n";
    out << "T_K = " << format_double(r.t_K) << "\n";
    const auto put = [&](const char* key, const std::optional<double>& v) {
        if (v) out << key << " = " << format_double(*v) << "\n";
    };
    put("vth_cc_V", r.vth_cc);
    put("vth_y_V", r.vth_y);
    put("mu_ch_cm2_Vs", r.mu_ch);
    put("y_r2", r.y_r2);
    put("ss_mV_dec", r.ss_min);
    put("gm_max_S", r.gm_max);
    put("gm_max_vgs_V", r.gm_max_vgs);
    put("ioff_A", r.ioff);
    put("vov_at_ratio_V", r.vov_at_ratio);
    out << "ratio_target = " << format_double(r.ratio_target) << "\n";
    out << "status = " << (r.complete() ? "ok" : "partial") << "\n";
    for (std::size_t i = 0; i < r.issues.size(); ++i)
        out << "issue_" << i + 1 << " = " << r.issues[i] << "\n";
}

inline extraction::ExtractionReport parse_report(std::istream& in,
                                                 const std::string& filename = "<report>") {
    const auto cfg = parse_config(in, filename);
    const auto& s = cfg.section("report");
    extraction::ExtractionReport r;
    r.t_K = s.get_double("T_K");
    const auto opt = [&](const char* key) -> std::optional<double> {
        if (s.has(key)) return s.get_double(key);
        return std::nullopt;
    };
    r.vth_cc = opt("vth_cc_V");
    r.vth_y = opt("vth_y_V");
    r.mu_ch = opt("mu_ch_cm2_Vs");
    r.y_r2 = opt("y_r2");
    r.ss_min = opt("ss_mV_dec");
    r.gm_max = opt("gm_max_S");
    r.gm_max_vgs = opt("gm_max_vgs_V");
    r.ioff = opt("ioff_A");
    r.vov_at_ratio = opt("vov_at_ratio_V");
    r.ratio_target = s.get_double("ratio_target");
    for (std::size_t i = 1;; ++i) {
        const std::string key = "issue_" + std::to_string(i);
        if (!s.has(key)) break;
        r.issues.push_back(s.get(key));
    }
    return r;
}

} // namespace cryomos::io
