// Developer utility: print every calibration anchor and circuit figure of
// merit for the shipped reference library, before and after the anchored
// polish. Used to re-derive the shipped parameter values.

#include "cryomos/circuits.hpp"
#include "cryomos/extraction.hpp"
#include "cryomos/io.hpp"
#include "cryomos/reference.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

using namespace cryomos;

// Writes the shipped library (plus the default physics stack) as the
// versioned parameter file distributed with the toolkit.
static int write_params(const char* path) {
    std::ofstream out(path);
    if (!out) {
        std::fprintf(stderr, "cannot write %s\n", path);
        return 1;
    }
    out << "# cryomos reference parameter library\n";
    out << "version = " << reference_library_version << "\n\n";
    const auto lib = shipped_reference_library();
    for (const auto& name : reference_set_names()) {
        io::emit_model_section(out, name, lib.at(name));
        out << "\n";
    }
    io::emit_stack_section(out, "default-stack", physics::MosStack{});
    return 0;
}

static circuits::InverterCell make_cell(const ReferenceParamLibrary& lib, const std::string& n,
                                        const std::string& p) {
    circuits::InverterCell cell;
    cell.nmos = {lib.at(n), {0.2, 0.03, reference_geometry().cox}};
    cell.pmos = {lib.at(p), {0.4, 0.03, reference_geometry().cox}};
    cell.c_load = 2.6e-15;
    return cell;
}

static void device_report(const ModelParams& p, const char* name) {
    const auto geom = reference_geometry();
    std::printf("--- %s ---\n", name);
    std::printf("  vth_of_T: 298K=%.4f 150K=%.4f 77K=%.4f 10K=%.4f\n", vth_of_T(p, 298),
                vth_of_T(p, 150), vth_of_T(p, 77), vth_of_T(p, 10));
    std::printf("  ss_of_T:  298K=%.2f 77K=%.2f 10K=%.2f mV/dec\n", ss_of_T(p, 298),
                ss_of_T(p, 77), ss_of_T(p, 10));
    std::printf("  mobility: 298K=%.1f 77K=%.1f 10K=%.1f cm2/Vs\n", mobility(p, 298),
                mobility(p, 77), mobility(p, 10));
    for (double t : {298.0, 77.0, 10.0}) {
        auto sat = iv_sweep_synthesize(p, geom, 0.9, t, linspace(-0.35, 0.9, 251));
        double cc = 0, ss = 0;
        try {
            cc = extraction::vth_constant_current(sat);
        } catch (const std::exception& e) {
            std::printf("  T=%.0f cc FAILED: %s\n", t, e.what());
        }
        try {
            ss = extraction::subthreshold_swing(sat);
        } catch (const std::exception& e) {
            std::printf("  T=%.0f ss FAILED: %s\n", t, e.what());
        }
        auto lin = iv_sweep_synthesize(p, geom, 0.05, t, linspace(-0.35, 0.9, 251));
        double vthy = 0, mu = 0, r2 = 0;
        try {
            auto y = extraction::vth_y_function(lin);
            vthy = y.vth;
            mu = y.mu_ch;
            r2 = y.r2;
        } catch (const std::exception& e) {
            std::printf("  T=%.0f y FAILED: %s\n", t, e.what());
        }
        std::printf("  T=%5.0fK cc=%+.4f ss=%6.2f  vth_y=%+.4f mu_y=%7.1f r2=%.6f\n", t, cc, ss,
                    vthy, mu, r2);
    }
    std::printf("  I(0.9,0.9,77)/W = %.4f mA/um   I(0.6,0.6,77)/W = %.4f mA/um\n",
                drain_current(p, geom, {0.9, 0.9, 77}) / geom.w_um * 1e3,
                drain_current(p, geom, {0.6, 0.6, 77}) / geom.w_um * 1e3);
    std::printf("  on/off(0.6V,77K) = %.4g   on/off(0.6V,298K) = %.4g\n",
                on_off_ratio(p, geom, 0.6, 77.0), on_off_ratio(p, geom, 0.6, 298.0));
    double gmax77 = 0, gmax10 = 0, gmax298 = 0, at77 = 0;
    for (double v : linspace(0.0, 0.9, 181)) {
        const double g77 = transconductance(p, geom, {v, 0.9, 77});
        if (g77 > gmax77) {
            gmax77 = g77;
            at77 = v;
        }
        gmax10 = std::max(gmax10, transconductance(p, geom, {v, 0.9, 10}));
        gmax298 = std::max(gmax298, transconductance(p, geom, {v, 0.9, 298}));
    }
    std::printf("  gm_max(77K) = %.4f mS at V_GS=%.3f; gm(0.6V)=%.4f; 10K/298K ratio = %.3f\n",
                gmax77 * 1e3, at77, transconductance(p, geom, {0.6, 0.9, 77}) * 1e3,
                gmax10 / gmax298);
}

int main(int argc, char** argv) {
    if (argc == 3 && std::strcmp(argv[1], "--write-params") == 0) return write_params(argv[2]);
    auto lib = shipped_reference_library();
    device_report(lib.at("CryoNMOS-ref"), "CryoNMOS-ref");
    device_report(lib.at("CryoPMOS-ref"), "CryoPMOS-ref");

    std::printf("\n=== circuits ===\n");
    auto cryo = make_cell(lib, "CryoNMOS-ref", "CryoPMOS-ref");
    auto rvt = make_cell(lib, "RVT-NMOS-ref", "RVT-PMOS-ref");
    for (double vdd : {0.6, 0.7, 0.8, 0.9}) {
        auto f = circuits::ro_frequency({257, cryo, vdd, 77.0});
        std::printf("  cryo RO %.1fV 77K: %s f=%.1f MHz\n", vdd, f.oscillates ? "osc" : "STUCK",
                    f.frequency_Hz / 1e6);
    }
    for (double t : {298.0, 77.0}) {
        auto f = circuits::ro_frequency({257, rvt, 0.6, t});
        std::printf("  rvt RO 0.6V %.0fK: %s f=%.1f MHz\n", t, f.oscillates ? "osc" : "STUCK",
                    f.frequency_Hz / 1e6);
    }
    auto fc = circuits::ro_frequency({257, cryo, 0.9, 77.0});
    auto fr = circuits::ro_frequency({257, rvt, 0.9, 77.0});
    std::printf("  RO ratio cryo/rvt @0.9V 77K = %.3f\n", fc.frequency_Hz / fr.frequency_Hz);
    const double red = circuits::dff_delay_reduction({6, rvt, 0.9, 77.0}, {6, cryo, 0.9, 77.0});
    std::printf("  DFF reduction @0.9V 77K = %.1f%%\n", red * 100);

    circuits::PowerScenario rvt_sc;
    rvt_sc.vdd = 0.9;
    rvt_sc.t_K = 298.0;
    rvt_sc.f_clk = 1e9;
    rvt_sc.nmos = lib.at("RVT-NMOS-ref");
    rvt_sc.pmos = lib.at("RVT-PMOS-ref");
    rvt_sc.c_switched = circuits::calibrate_switched_capacitance(rvt_sc, 2.03e-3);
    auto pr = circuits::module_power(rvt_sc);
    circuits::PowerScenario cryo_sc = rvt_sc;
    cryo_sc.t_K = 77.0;
    cryo_sc.nmos = lib.at("CryoNMOS-ref");
    cryo_sc.pmos = lib.at("CryoPMOS-ref");
    auto pc = circuits::module_power(cryo_sc);
    std::printf("  AES: C_sw=%.4g F rvt=%.4f mW (dyn %.4f stat %.4f) cryo=%.4f mW red=%.1f%%\n",
                rvt_sc.c_switched, pr.total_W * 1e3, pr.dynamic_W * 1e3, pr.static_W * 1e3,
                pc.total_W * 1e3, (1 - pc.total_W / pr.total_W) * 100);

    std::printf("\n=== calibrate_reference_sets ===\n");
    auto report = calibrate_reference_sets(reference_anchor_table());
    for (const auto& [set, outcomes] : report.outcomes) {
        for (const auto& o : outcomes) {
            std::printf("  %-14s %-22s value=%.6g target=%.6g %s\n", set.c_str(),
                        o.anchor.c_str(), o.value, o.target, o.met ? "MET" : "MISS");
        }
    }
    std::printf("  feasible = %s\n", report.feasible ? "yes" : "NO");
    for (const auto& [name, p] : report.library.sets) {
        std::printf("  %-14s vth0=%.6f c_vth=%.3e mu0=%.3f mu_C=%.1f n0=%.4f floor=%.3f "
                    "vsat=%.4g lam=%.3f ioff=%.3g eta=%.1f\n",
                    name.c_str(), p.vth0, p.c_vth, p.mu0, p.mu_coulomb, p.n0, p.ss_floor, p.v_sat,
                    p.lambda_clm, p.ioff_ref, p.eta);
    }
    return 0;
}
