#pragma once

// Semi-empirical drain-current model with temperature laws for threshold
// voltage, subthreshold swing, mobility, velocity saturation, and leakage.
// One smooth expression covers weak inversion through velocity-saturated
// strong inversion; see drain_current() for the exact form.

#include "constants.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace cryomos {

enum class Polarity { nmos, pmos };

inline const char* to_string(Polarity p) { return p == Polarity::nmos ? "nmos" : "pmos"; }

struct DeviceGeometry {
    double w_um = 0.1;     // channel width, um
    double l_um = 0.03;    // channel length, um
    double cox = 1.85e-6;  // gate capacitance per area, F/cm^2

    void validate() const {
        if (!(w_um > 0 && l_um > 0 && cox > 0))
            throw std::domain_error("DeviceGeometry: W, L, C_ox must be > 0");
    }
};

struct BiasPoint {
    double vgs = 0.0; // V (magnitude for PMOS)
    double vds = 0.0; // V (magnitude for PMOS)
    double t_K = t_reference;
};

struct ModelParams {
    Polarity polarity = Polarity::nmos;
    double vth0 = 0.1;        // V, threshold at 298 K (NMOS-positive magnitude)
    double c_vth = 2.0e-4;    // V/K, V_TH(T) = vth0 + c_vth*(298 - T)
    double mu0 = 100.0;       // cm^2/Vs, phonon-branch mobility at 298 K
    double alpha_ph = 1.3;    // phonon exponent
    double mu_coulomb = 500.0;// cm^2/Vs, Coulomb-limited ceiling (may be +inf)
    double n0 = 1.5;          // room-temperature ideality factor
    double ss_floor = 15.0;   // mV/dec, cryogenic swing floor
    double v_sat = 1.0e7;     // cm/s (may be +inf to disable velocity saturation)
    double lambda_clm = 0.1;  // 1/V, channel-length modulation
    double ioff_ref = 1e-9;   // A/um, zero-bias leakage per width at 298 K
    double eta = 80.0;        // K per decade of leakage reduction

    void validate() const {
        if (!(mu0 > 0 && mu_coulomb > 0 && v_sat > 0 && eta > 0))
            throw std::domain_error("ModelParams: mu0, mu_C, v_sat, eta must be > 0");
        if (!(n0 >= 1.0)) throw std::domain_error("ModelParams: n0 must be >= 1");
        if (!(ss_floor >= 0.0)) throw std::domain_error("ModelParams: SS_floor must be >= 0");
        if (!(vth0 > 0.0 && vth0 < 1.5))
            throw std::domain_error("ModelParams: vth0 outside (0, 1.5) V NMOS convention");
        if (!(lambda_clm >= 0.0)) throw std::domain_error("ModelParams: lambda_clm must be >= 0");
        if (!(ioff_ref > 0.0)) throw std::domain_error("ModelParams: ioff_ref must be > 0");
    }
};

// Matthiessen combination of a (T/298)^-alpha phonon branch with a
// temperature-independent Coulomb ceiling. Rises as the lattice cools and
// flattens onto mu_coulomb below ~77 K.
inline double mobility(const ModelParams& p, double t_K) {
    require_temperature(t_K);
    const double mu_ph = p.mu0 * std::pow(t_K / t_reference, -p.alpha_ph);
    return 1.0 / (1.0 / mu_ph + 1.0 / p.mu_coulomb);
}

// Linear V_TH drift; returns the NMOS-positive magnitude for both
// polarities (sign is presentation, applied by consumers).
inline double vth_of_T(const ModelParams& p, double t_K) {
    require_temperature(t_K);
    return p.vth0 + p.c_vth * (t_reference - t_K);
}

// SS(T) in mV/dec: thermal slope n0*(kT/q)*ln10 combined in quadrature
// with a floor, matching the measured 105 -> 18 mV/dec span.
inline double ss_of_T(const ModelParams& p, double t_K) {
    require_temperature(t_K);
    const double thermal = p.n0 * thermal_voltage(t_K) * std::numbers::ln10 * 1000.0;
    return std::sqrt(thermal * thermal + p.ss_floor * p.ss_floor);
}

// I_off(T) = I_off_ref * 10^((T - 298)/eta), A/um.
inline double leakage_density(const ModelParams& p, double t_K) {
    require_temperature(t_K);
    return p.ioff_ref * std::pow(10.0, (t_K - t_reference) / p.eta);
}

namespace detail {

struct ChannelState {
    double n_ut;   // n_eff * U_T, V
    double v_gt;   // smoothed overdrive, V
    double lec;    // L * E_c, V (may be +inf)
    double mu;     // cm^2/Vs
};

inline ChannelState channel_state(const ModelParams& p, const DeviceGeometry& g,
                                  double vgs, double t_K) {
    ChannelState s{};
    const double ut = thermal_voltage(t_K);
    const double ss_v = ss_of_T(p, t_K) * 1e-3;            // V/dec
    const double n_eff = ss_v / (ut * std::numbers::ln10); // ideality incl. floor
    s.n_ut = n_eff * ut;
    // Smoothed overdrive. The 2x inner/outer scaling makes the squared
    // saturation-limited current decay one decade per SS(T) of V_GS in
    // weak inversion while still approaching V_GS - V_TH above threshold.
    const double x = (vgs - vth_of_T(p, t_K)) / (2.0 * s.n_ut);
    s.v_gt = 2.0 * s.n_ut * softplus(x);
    s.mu = mobility(p, t_K);
    s.lec = std::isfinite(p.v_sat) ? (g.l_um * 1e-4) * (p.v_sat / s.mu)
                                   : std::numeric_limits<double>::infinity();
    return s;
}

// Smooth minimum of V_DS and V_dsat with fixed knee exponent 4.
inline double vdse_of(double vds, double vdsat) {
    if (vds <= 0.0 || vdsat <= 0.0) return 0.0;
    const double m = 4.0;
    return vds * vdsat / std::pow(std::pow(vds, m) + std::pow(vdsat, m), 1.0 / m);
}

} // namespace detail

// Drain current in amperes (magnitude). With U_T = kT/q and
// n_eff = SS(T)/(U_T ln10):
//   V_gt   = 2 n_eff U_T softplus((V_GS - V_TH(T)) / (2 n_eff U_T))
//   E_c    = v_sat / mu(T),  V_dsat = V_gt * L E_c / (V_gt + L E_c)
//   V_dse  = V_DS V_dsat / (V_DS^4 + V_dsat^4)^(1/4)
//   I_DS   = (W/L) mu(T) C_ox V_gt V_dse / (1 + V_dse/(L E_c))
//            * (1 + lambda_clm V_DS)  +  W * I_off(T)
// Subthreshold slope equals SS(T); saturation current is asymptotically
// linear in overdrive once V_gt >> L E_c.
inline double drain_current(const ModelParams& p, const DeviceGeometry& g, const BiasPoint& b) {
    p.validate();
    g.validate();
    require_temperature(b.t_K);
    const auto s = detail::channel_state(p, g, b.vgs, b.t_K);

    double vdsat = s.v_gt;
    double sat_denom = 1.0;
    const double vdse_raw = [&] {
        if (std::isfinite(s.lec)) {
            vdsat = s.v_gt * s.lec / (s.v_gt + s.lec);
            const double vdse = detail::vdse_of(b.vds, vdsat);
            sat_denom = 1.0 + vdse / s.lec;
            return vdse;
        }
        return detail::vdse_of(b.vds, vdsat);
    }();

    const double w_cm = g.w_um * 1e-4;
    const double l_cm = g.l_um * 1e-4;
    const double i_chan = (w_cm / l_cm) * s.mu * g.cox * s.v_gt * vdse_raw / sat_denom *
                          (1.0 + p.lambda_clm * b.vds);
    return i_chan + g.w_um * leakage_density(p, b.t_K);
}

// dI_DS/dV_GS by central difference with a swing-adaptive step.
inline double transconductance(const ModelParams& p, const DeviceGeometry& g, const BiasPoint& b) {
    const auto s = detail::channel_state(p, g, b.vgs, b.t_K);
    const double h = std::max(1e-6, 1e-4 * s.n_ut);
    BiasPoint hi = b, lo = b;
    hi.vgs += h;
    lo.vgs -= h;
    return (drain_current(p, g, hi) - drain_current(p, g, lo)) / (2.0 * h);
}

// I(V_DD, V_DD) / I(0, V_DD); the denominator is floored by the leakage
// term, which is strictly positive.
inline double on_off_ratio(const ModelParams& p, const DeviceGeometry& g,
                           double vdd, double t_K) {
    if (!(vdd > 0)) throw std::domain_error("on_off_ratio: V_DD must be > 0");
    const double i_on = drain_current(p, g, {vdd, vdd, t_K});
    const double i_off = drain_current(p, g, {0.0, vdd, t_K});
    return i_on / i_off;
}

} // namespace cryomos
