#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace cryomos {

// Fundamental constants (CODATA 2018 exact values where defined).
inline constexpr double k_boltzmann = 1.380649e-23;   // J/K
inline constexpr double q_electron  = 1.602176634e-19; // C
inline constexpr double t_reference = 298.0;           // K, room-temperature anchor

// Thermal voltage kT/q in volts.
inline double thermal_voltage(double temperature_K) {
    return k_boltzmann * temperature_K / q_electron;
}

// Valid temperature window for every model in the toolkit. Data below
// 10 K is not available, so 4 K is a hard refusal floor rather than an
// extrapolation limit.
inline constexpr double t_min = 4.0;
inline constexpr double t_max = 400.0;

inline void require_temperature(double temperature_K) {
    if (!(temperature_K >= t_min && temperature_K <= t_max)) {
        throw std::domain_error("temperature " + std::to_string(temperature_K) +
                                " K outside supported range [4, 400] K");
    }
}

// Bulk silicon parameters: Varshni bandgap law
//   E_g(T) = E_g0 - alpha_g * T^2 / (T + beta_g)
// and T^1.5 scaling of the band effective densities of states.
struct SiliconConstants {
    double eps_si  = 1.03545e-12; // F/cm (11.7 * eps0)
    double e_g0    = 1.17;        // eV, bandgap at 0 K
    double alpha_g = 4.73e-4;     // eV/K
    double beta_g  = 636.0;       // K
    double nc_300  = 2.8e19;      // cm^-3, conduction-band DOS at 300 K
    double nv_300  = 1.04e19;     // cm^-3, valence-band DOS at 300 K

    double bandgap_eV(double temperature_K) const {
        return e_g0 - alpha_g * temperature_K * temperature_K / (temperature_K + beta_g);
    }
    double nc(double temperature_K) const {
        return nc_300 * std::pow(temperature_K / 300.0, 1.5);
    }
    double nv(double temperature_K) const {
        return nv_300 * std::pow(temperature_K / 300.0, 1.5);
    }

    void validate() const {
        if (eps_si <= 0 || e_g0 <= 0 || alpha_g <= 0 || beta_g <= 0 ||
            nc_300 <= 0 || nv_300 <= 0) {
            throw std::domain_error("SiliconConstants fields must be strictly positive");
        }
    }
};

inline const SiliconConstants& silicon_defaults() {
    static const SiliconConstants si{};
    return si;
}

// Overflow-safe ln(1 + e^x).
inline double softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

} // namespace cryomos
