#pragma once

// Freeze-out-aware MOS threshold physics: intrinsic carrier density,
// incomplete dopant ionization, surface potential at threshold, and the
// classical V_TH expression evaluated over temperature.
//
// All exponentials are taken in log space; at deep-cryo temperatures the
// intrinsic density underflows double precision by hundreds of decades,
// so ln(n_i) is the primitive quantity and n_i itself is derived.

#include "constants.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace cryomos::physics {

enum class DopantKind { acceptor, donor };

struct ChannelDoping {
    double n_dop = 1e18;                    // cm^-3, total chemical doping
    double e_ion_eV = 0.045;                // dopant ionization energy
    DopantKind kind = DopantKind::acceptor;
    double degeneracy = 4.0;                // g_d, 4 for acceptors / 2 for donors

    void validate() const {
        if (!(n_dop > 0)) throw std::domain_error("doping density must be > 0");
        if (!(e_ion_eV > 0 && e_ion_eV < 0.2))
            throw std::domain_error("ionization energy must lie in (0, 0.2) eV");
        if (degeneracy != 2.0 && degeneracy != 4.0)
            throw std::domain_error("degeneracy factor must be 2 or 4");
    }
};

struct MosStack {
    double v_fb = -0.9;        // V, flat-band voltage (user supplied, no work-function model)
    double cox = 1.2e-6;       // F/cm^2
    ChannelDoping doping{};
    SiliconConstants silicon{};

    void validate() const {
        if (!(cox > 0)) throw std::domain_error("C_ox must be > 0");
        doping.validate();
        silicon.validate();
    }
};

// ln n_i in ln(cm^-3). Finite at all supported temperatures even where
// n_i itself is far below the smallest representable double.
inline double log_intrinsic_density(double temperature_K,
                                    const SiliconConstants& si = silicon_defaults()) {
    require_temperature(temperature_K);
    const double kT_eV = k_boltzmann * temperature_K / q_electron; // eV per k_B*T
    return 0.5 * (std::log(si.nc(temperature_K)) + std::log(si.nv(temperature_K)))
         - si.bandgap_eV(temperature_K) / (2.0 * kT_eV);
}

// n_i = sqrt(Nc*Nv) * exp(-E_g / 2kT), cm^-3. Underflows to 0 below ~20 K;
// use log_intrinsic_density when the magnitude matters there.
inline double intrinsic_density(double temperature_K,
                                const SiliconConstants& si = silicon_defaults()) {
    return std::exp(log_intrinsic_density(temperature_K, si));
}

// Fraction of dopants ionized, solved from charge neutrality with
// Fermi-Dirac occupancy of the dopant level:
//   f = 1 / (1 + g_d * exp((E_ion - E_offset(f,T)) / kT)),
//   E_offset = kT * ln(N_band / (f * N_dop)),
// which rearranges to the residual  r(f) = ln f + ln(1 + a*f) = 0  with
//   a = g_d * (N_dop / N_band) * exp(E_ion / kT).
// Bisection runs on ln f so the fraction converges in relative terms even
// when it is ~1e-13 at 10 K.
inline double ionized_fraction(const ChannelDoping& doping, double temperature_K,
                               const SiliconConstants& si = silicon_defaults()) {
    doping.validate();
    require_temperature(temperature_K);

    const double kT_eV = k_boltzmann * temperature_K / q_electron;
    const double n_band = (doping.kind == DopantKind::acceptor) ? si.nv(temperature_K)
                                                                : si.nc(temperature_K);
    const double log_a = std::log(doping.degeneracy) + std::log(doping.n_dop / n_band)
                       + doping.e_ion_eV / kT_eV;

    const auto residual = [log_a](double log_f) {
        return log_f + softplus(log_a + log_f);
    };

    // r is strictly increasing in ln f; r(0) = softplus(log_a) >= 0 and
    // r(-inf) = -inf, so the root is bracketed in [lo, 0].
    double lo = -750.0;
    double hi = 0.0;
    if (residual(lo) > 0.0) {
        throw std::runtime_error("ionized_fraction: bracket failure, residual(ln f=-750) = " +
                                 std::to_string(residual(lo)));
    }
    constexpr int max_iter = 200;
    constexpr double tol = 1e-12;
    int it = 0;
    for (; it < max_iter && (hi - lo) > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (residual(mid) > 0.0) hi = mid;
        else lo = mid;
    }
    const double log_f = 0.5 * (lo + hi);
    if ((hi - lo) > 10.0 * tol) {
        throw std::runtime_error("ionized_fraction: no convergence after " +
                                 std::to_string(max_iter) + " iterations, residual = " +
                                 std::to_string(residual(log_f)));
    }
    return std::exp(log_f);
}

// Neutrality residual at a trial fraction, exposed for the solver tests.
inline double ionization_residual(const ChannelDoping& doping, double temperature_K,
                                  double fraction,
                                  const SiliconConstants& si = silicon_defaults()) {
    const double kT_eV = k_boltzmann * temperature_K / q_electron;
    const double n_band = (doping.kind == DopantKind::acceptor) ? si.nv(temperature_K)
                                                                : si.nc(temperature_K);
    const double log_a = std::log(doping.degeneracy) + std::log(doping.n_dop / n_band)
                       + doping.e_ion_eV / kT_eV;
    return std::log(fraction) + softplus(log_a + std::log(fraction));
}

// phi_S = (2kT/q) * ln(N_active / n_i) at the threshold condition, volts.
inline double surface_potential(double n_active_cm3, double temperature_K,
                                const SiliconConstants& si = silicon_defaults()) {
    require_temperature(temperature_K);
    if (!(n_active_cm3 > 0)) throw std::domain_error("active doping must be > 0");
    const double log_ratio = std::log(n_active_cm3) - log_intrinsic_density(temperature_K, si);
    if (log_ratio < 0.0) {
        throw std::domain_error("surface_potential: active doping below intrinsic density");
    }
    return 2.0 * thermal_voltage(temperature_K) * log_ratio;
}

// Eq.-style threshold voltage:
//   V_TH = V_FB + phi_S + sqrt(2 q eps_Si N_dep phi_S) / C_ox
// phi_S uses the activated (free-carrier) doping f*N_dop; the depletion
// charge uses the chemical doping N_dop, since dopants inside the surface
// depletion region are field-ionized even when the neutral bulk is frozen
// out. Using the activated level in both places inverts the freeze-out
// trend at cryogenic temperatures.
inline double threshold_voltage_eq1(const MosStack& stack, double temperature_K) {
    stack.validate();
    const double f = ionized_fraction(stack.doping, temperature_K, stack.silicon);
    const double n_active = f * stack.doping.n_dop;
    const double phi_s = surface_potential(n_active, temperature_K, stack.silicon);
    const double q_dep = std::sqrt(2.0 * q_electron * stack.silicon.eps_si *
                                   stack.doping.n_dop * phi_s);
    return stack.v_fb + phi_s + q_dep / stack.cox;
}

struct FreezeoutPoint {
    double temperature_K;
    double vth_V;
    double dvth_V; // V_TH(T) - V_TH(298 K)
};

// Per-point V_TH over a temperature grid, referenced to the 298 K value
// (evaluated at 298 K even when absent from the grid).
inline std::vector<FreezeoutPoint> vth_freezeout_curve(const MosStack& stack,
                                                       const std::vector<double>& t_grid_K) {
    if (t_grid_K.empty()) throw std::domain_error("vth_freezeout_curve: empty temperature grid");
    const double vth_ref = threshold_voltage_eq1(stack, t_reference);
    std::vector<FreezeoutPoint> curve;
    curve.reserve(t_grid_K.size());
    for (double t : t_grid_K) {
        const double vth = threshold_voltage_eq1(stack, t);
        curve.push_back({t, vth, vth - vth_ref});
    }
    return curve;
}

} // namespace cryomos::physics
