#pragma once
#include <limits>

// Named reference parameter sets for the three transistor flavors of the
// 28-nm process line (cryo-optimized, uLVT, RVT), plus the anchored
// calibration that produced them. The cryo sets are calibrated against
// measurement-derived anchors: constant-current V_TH at 77 K, the SS(T)
// endpoints, saturation drive, transconductance, and on/off ratio. The
// shipped numbers are the outputs of calibrate_reference_sets(); running
// it again from these values reproduces them.

#include "extraction.hpp"
#include "fitting.hpp"
#include "model.hpp"
#include "sweep.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace cryomos {

inline constexpr const char* reference_library_version = "1";

// Geometry of the smallest characterized device, W/L = 0.1 um / 0.03 um.
inline DeviceGeometry reference_geometry() { return {0.1, 0.03, 1.85e-6}; }

struct ReferenceParamLibrary {
    std::map<std::string, ModelParams> sets;

    const ModelParams& at(const std::string& name) const {
        const auto it = sets.find(name);
        if (it == sets.end())
            throw std::out_of_range("reference library has no parameter set named " + name);
        return it->second;
    }
    bool has(const std::string& name) const { return sets.count(name) != 0; }
};

inline const std::vector<std::string>& reference_set_names() {
    static const std::vector<std::string> names{
        "CryoNMOS-ref",  "CryoPMOS-ref", "uLVT-NMOS-ref",
        "uLVT-PMOS-ref", "RVT-NMOS-ref", "RVT-PMOS-ref",
    };
    return names;
}

inline ReferenceParamLibrary shipped_reference_library() {
    ReferenceParamLibrary lib;

    ModelParams cryo_n;
    cryo_n.polarity = Polarity::nmos;
    cryo_n.vth0 = 0.1100;
    cryo_n.c_vth = 2.0e-4;
    cryo_n.mu0 = 50.0;
    cryo_n.alpha_ph = 1.3;
    cryo_n.mu_coulomb = 600.0;
    cryo_n.n0 = 1.672;
    cryo_n.ss_floor = 16.3;
    cryo_n.v_sat = 2.60e7;
    cryo_n.lambda_clm = 0.15;
    cryo_n.ioff_ref = 1e-11;
    cryo_n.eta = 80.0;
    lib.sets["CryoNMOS-ref"] = cryo_n;

    ModelParams cryo_p = cryo_n;
    cryo_p.polarity = Polarity::pmos;
    cryo_p.vth0 = 0.1787;
    cryo_p.c_vth = 5.0e-5;
    cryo_p.mu0 = 13.0;
    cryo_p.mu_coulomb = 300.0;
    cryo_p.v_sat = 2.0e7;
    cryo_p.ioff_ref = 5e-12;
    cryo_p.eta = 85.0;
    lib.sets["CryoPMOS-ref"] = cryo_p;

    ModelParams ulvt_n = cryo_n;
    ulvt_n.vth0 = 0.19;
    ulvt_n.c_vth = 3.0e-4;
    ulvt_n.n0 = 1.78;
    ulvt_n.ss_floor = 18.0;
    ulvt_n.ioff_ref = 2e-9;
    ulvt_n.eta = 100.0;
    lib.sets["uLVT-NMOS-ref"] = ulvt_n;

    ModelParams ulvt_p = cryo_p;
    ulvt_p.vth0 = 0.21;
    ulvt_p.c_vth = 3.0e-4;
    ulvt_p.n0 = 1.78;
    ulvt_p.ss_floor = 18.0;
    ulvt_p.ioff_ref = 1e-9;
    ulvt_p.eta = 100.0;
    lib.sets["uLVT-PMOS-ref"] = ulvt_p;

    ModelParams rvt_n = cryo_n;
    rvt_n.vth0 = 0.265;
    rvt_n.c_vth = 2.0e-4;
    rvt_n.n0 = 1.85;
    rvt_n.ss_floor = 20.0;
    rvt_n.ioff_ref = 5e-9;
    rvt_n.eta = 120.0;
    lib.sets["RVT-NMOS-ref"] = rvt_n;

    ModelParams rvt_p = cryo_p;
    rvt_p.vth0 = 0.265;
    rvt_p.c_vth = 2.0e-4;
    rvt_p.n0 = 1.85;
    rvt_p.ss_floor = 20.0;
    rvt_p.ioff_ref = 2e-9;
    rvt_p.eta = 120.0;
    lib.sets["RVT-PMOS-ref"] = rvt_p;

    return lib;
}

// ---------------------------------------------------------------------------
// Anchored calibration.

enum class AnchorKind { two_sided, at_least, at_most };

struct Anchor {
    std::string name;
    std::function<double(const ModelParams&)> eval;
    double target = 0.0;
    double tol = 0.0; // absolute, two-sided anchors only
    AnchorKind kind = AnchorKind::two_sided;

    bool satisfied(double v) const {
        switch (kind) {
            case AnchorKind::at_least: return v >= target;
            case AnchorKind::at_most: return v <= target;
            default: return std::abs(v - target) <= tol;
        }
    }

    // Hinge penalties that vanish once the anchor is comfortably met:
    // bounds keep a 5% interior margin, two-sided targets are flat inside
    // half their tolerance. A feasible parameter set therefore scores ~0
    // and re-running the calibration leaves it in place.
    double penalty(double v) const {
        switch (kind) {
            case AnchorKind::at_least: {
                const double goal = target * 1.05;
                const double d = v < goal ? (goal - v) / goal : 0.0;
                return d * d;
            }
            case AnchorKind::at_most: {
                const double goal = target / 1.05;
                const double d = v > goal ? (v - goal) / goal : 0.0;
                return d * d;
            }
            default: {
                const double half = 0.5 * std::max(tol, 1e-12);
                const double d = std::max(0.0, std::abs(v - target) - half) / half;
                return d * d;
            }
        }
    }
};

struct AnchorSet {
    std::string set_name;
    std::vector<Anchor> anchors;
    std::vector<std::string> free_names; // calibration degrees of freedom
};

struct AnchorOutcome {
    std::string anchor;
    double value;
    double target;
    bool met;
};

struct CalibrationReport {
    ReferenceParamLibrary library;
    std::map<std::string, std::vector<AnchorOutcome>> outcomes;
    bool feasible = true;
    std::vector<std::string> unmet; // "set/anchor" for every missed anchor
};

namespace detail_anchors {

inline IVSweep anchor_sweep(const ModelParams& p, double vds, double t_K) {
    return iv_sweep_synthesize(p, reference_geometry(), vds, t_K,
                               linspace(-0.35, 0.9, 251));
}

inline double gm_max_77K(const ModelParams& p) {
    const auto geom = reference_geometry();
    double best = 0.0;
    for (double vgs : linspace(0.0, 0.9, 181))
        best = std::max(best, transconductance(p, geom, {vgs, 0.9, 77.0}));
    return best;
}

inline double max_abs_vth(const ModelParams& p) {
    double worst = 0.0;
    for (double t : {10.0, 77.0, 150.0, 298.0})
        worst = std::max(worst, std::abs(vth_of_T(p, t)));
    return worst;
}

} // namespace detail_anchors

// Measurement-anchored target table for the shipped library. Targets sit inside
// the published tolerance bands where several anchors compete (e.g. the
// on/off floor pushes V_TH_cc toward the top of its band).
inline std::vector<AnchorSet> reference_anchor_table() {
    using namespace detail_anchors;
    const auto geom = reference_geometry();

    std::vector<AnchorSet> table;

    AnchorSet cn;
    cn.set_name = "CryoNMOS-ref";
    cn.free_names = {"vth0", "mu0", "v_sat", "n0", "ss_floor"};
    cn.anchors = {
        {"vth_cc_77K_V",
         [](const ModelParams& p) { return extraction::vth_constant_current(anchor_sweep(p, 0.9, 77.0)); },
         0.112, 0.012},
        {"ss_298K_mV_dec",
         [](const ModelParams& p) { return extraction::subthreshold_swing(anchor_sweep(p, 0.9, 298.0)); },
         103.0, 4.0},
        {"ss_10K_mV_dec",
         [](const ModelParams& p) { return extraction::subthreshold_swing(anchor_sweep(p, 0.9, 10.0)); },
         17.5, 1.5},
        {"idsat_0p9V_77K_mA_um",
         [geom](const ModelParams& p) {
             return drain_current(p, geom, {0.9, 0.9, 77.0}) / geom.w_um * 1e3;
         },
         1.6, 0.16},
        {"idsat_0p6V_77K_mA_um",
         [geom](const ModelParams& p) {
             return drain_current(p, geom, {0.6, 0.6, 77.0}) / geom.w_um * 1e3;
         },
         0.70, 0.0, AnchorKind::at_least},
        {"on_off_0p6V_77K",
         [geom](const ModelParams& p) { return on_off_ratio(p, geom, 0.6, 77.0); },
         1.0e7, 0.0, AnchorKind::at_least},
        {"gm_max_77K_mS", [](const ModelParams& p) { return gm_max_77K(p) * 1e3; }, 0.25, 0.0375},
        {"vth_below_0p2_V", [](const ModelParams& p) { return max_abs_vth(p); },
         0.199, 0.0, AnchorKind::at_most},
    };
    table.push_back(cn);

    AnchorSet cp;
    cp.set_name = "CryoPMOS-ref";
    cp.free_names = {"vth0", "mu0"};
    cp.anchors = {
        {"vth_cc_77K_V",
         [](const ModelParams& p) { return extraction::vth_constant_current(anchor_sweep(p, 0.9, 77.0)); },
         0.165, 0.012},
        {"vth_below_0p2_V", [](const ModelParams& p) { return detail_anchors::max_abs_vth(p); },
         0.199, 0.0, AnchorKind::at_most},
    };
    table.push_back(cp);

    // The uLVT and RVT flavors are comparison baselines; their anchors are
    // design targets checked against the shipped values, with no free
    // parameters.
    for (const char* name : {"uLVT-NMOS-ref", "uLVT-PMOS-ref", "RVT-NMOS-ref", "RVT-PMOS-ref"}) {
        AnchorSet s;
        s.set_name = name;
        const bool rvt = std::string(name).find("RVT") == 0;
        s.anchors = {{"vth_77K_V", [](const ModelParams& p) { return vth_of_T(p, 77.0); },
                      rvt ? 0.3092 : 0.27, rvt ? 0.02 : 0.05}};
        table.push_back(s);
    }
    return table;
}

// Solve each named set for parameters meeting every anchor, polishing the
// provided starting library with the bounded simplex search. Deterministic
// for a fixed seed. Anchors still unmet after the search are listed.
inline CalibrationReport calibrate_reference_sets(
    const std::vector<AnchorSet>& table,
    const ReferenceParamLibrary& start = shipped_reference_library(),
    unsigned long long seed = 1) {
    CalibrationReport report;
    report.library = start;

    for (const auto& spec : table) {
        if (!report.library.has(spec.set_name))
            throw std::invalid_argument("calibrate_reference_sets: unknown set " + spec.set_name);
        ModelParams params = report.library.at(spec.set_name);

        // A trial point can be unextractable (e.g. the criterion current
        // never crossed); such points just score as very bad.
        const auto penalty = [&spec](const ModelParams& p) {
            double sum = 0.0;
            for (const auto& a : spec.anchors) {
                try {
                    sum += a.penalty(a.eval(p));
                } catch (const std::exception&) {
                    sum += 1e6;
                }
            }
            return sum;
        };

        if (!spec.free_names.empty()) {
            fitting::detail::Transform tf;
            for (const auto& name : spec.free_names) {
                const auto& f = fitting::field_by_name(name);
                tf.fields.push_back(&f);
                const double x0 = params.*(f.member);
                double lo = f.log_scale ? x0 / 3.0 : x0 - 0.6 * std::abs(x0) - 0.02;
                double hi = f.log_scale ? x0 * 3.0 : x0 + 0.6 * std::abs(x0) + 0.02;
                if (name == "n0") lo = std::max(lo, 1.0);
                if (name == "ss_floor") lo = std::max(lo, 0.0);
                if (name == "vth0") {
                    lo = std::max(lo, 1e-3);
                    hi = std::min(hi, 1.499);
                }
                tf.box.push_back({lo, hi});
            }
            const auto eval = [&](const std::vector<double>& u) {
                return penalty(tf.to_params(params, u));
            };
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> jitter(-0.3, 0.3);
            auto u0 = tf.to_unbounded(params);
            fitting::detail::NmResult best{};
            bool have = false;
            for (int run = 0; run < 3; ++run) {
                auto start_u = u0;
                if (run > 0)
                    for (auto& u : start_u) u += jitter(rng);
                auto r = fitting::detail::nelder_mead(eval, start_u, 0.2, 400);
                if (!have || r.fx < best.fx) {
                    best = std::move(r);
                    have = true;
                }
            }
            params = tf.to_params(params, best.x);
        }

        auto& outcomes = report.outcomes[spec.set_name];
        for (const auto& a : spec.anchors) {
            double v = std::numeric_limits<double>::quiet_NaN();
            bool met = false;
            try {
                v = a.eval(params);
                met = a.satisfied(v);
            } catch (const std::exception&) {
            }
            outcomes.push_back({a.name, v, a.target, met});
            if (!met) {
                report.feasible = false;
                report.unmet.push_back(spec.set_name + "/" + a.name);
            }
        }
        report.library.sets[spec.set_name] = params;
    }
    return report;
}

} // namespace cryomos
