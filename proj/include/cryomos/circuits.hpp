#pragma once

// Circuit-level estimators: effective-current inverter delay, ring
// oscillator frequency, DFF propagation delay, and the dynamic + static
// power envelope of a digital module.

#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace cryomos::circuits {

struct TransistorInstance {
    ModelParams params{};
    DeviceGeometry geom{};
};

struct InverterCell {
    TransistorInstance nmos{};
    TransistorInstance pmos{};
    double c_load = 2.6e-15; // F, total output-node load

    void validate() const {
        if (!(c_load > 0)) throw std::domain_error("InverterCell: C_load must be > 0");
        nmos.geom.validate();
        pmos.geom.validate();
    }
};

struct DelayResult {
    bool stuck = false;
    double seconds = 0.0; // valid when !stuck
};

namespace detail {

inline double branch_effective_current(const TransistorInstance& t, double vdd, double t_K) {
    const double i_full = drain_current(t.params, t.geom, {vdd, vdd, t_K});
    const double i_half = drain_current(t.params, t.geom, {vdd, vdd / 2.0, t_K});
    return 0.5 * (i_full + i_half);
}

inline double cell_leakage(const InverterCell& cell, double t_K) {
    return cell.nmos.geom.w_um * leakage_density(cell.nmos.params, t_K) +
           cell.pmos.geom.w_um * leakage_density(cell.pmos.params, t_K);
}

} // namespace detail

// Effective-current delay t_pd = C_load * V_DD / (2 * I_eff), with I_eff
// the pull-down/pull-up average of the mean drain current at
// (V_GS = V_DD, V_DS in {V_DD, V_DD/2}).
//
// The cell is reported stuck (fails to regenerate) when either
//   - the supply cannot put both device types in strong inversion at
//     once, V_DD < V_THn(T) + |V_THp(T)|, or
//   - the effective current collapses into the leakage floor,
//     I_eff <= 10x the cell's total off-state leakage.
// Both triggers are monotone in V_DD.
inline DelayResult inverter_delay(const InverterCell& cell, double vdd, double t_K) {
    cell.validate();
    if (!(vdd > 0)) throw std::domain_error("inverter_delay: V_DD must be > 0");
    require_temperature(t_K);

    const double vth_sum = vth_of_T(cell.nmos.params, t_K) + vth_of_T(cell.pmos.params, t_K);
    const double i_eff = 0.5 * (detail::branch_effective_current(cell.nmos, vdd, t_K) +
                                detail::branch_effective_current(cell.pmos, vdd, t_K));
    if (vdd < vth_sum || i_eff <= 10.0 * detail::cell_leakage(cell, t_K)) {
        return {true, 0.0};
    }
    return {false, cell.c_load * vdd / (2.0 * i_eff)};
}

struct RingOscillatorSpec {
    int stages = 257; // odd, >= 3
    InverterCell cell{};
    double vdd = 0.9;
    double t_K = 77.0;

    void validate() const {
        if (stages < 3 || stages % 2 == 0)
            throw std::domain_error("RingOscillatorSpec: stages must be odd and >= 3");
        cell.validate();
    }
};

struct OscillationResult {
    bool oscillates = false;
    double frequency_Hz = 0.0; // valid when oscillates
};

// f = 1 / (2 * stages * t_pd); a stuck cell propagates as fails-to-oscillate.
inline OscillationResult ro_frequency(const RingOscillatorSpec& spec) {
    spec.validate();
    const auto d = inverter_delay(spec.cell, spec.vdd, spec.t_K);
    if (d.stuck) return {false, 0.0};
    return {true, 1.0 / (2.0 * double(spec.stages) * d.seconds)};
}

struct DffSpec {
    int stage_count = 6; // inverter-equivalent delays, clk-to-q
    InverterCell cell{};
    double vdd = 0.9;
    double t_K = 77.0;

    // A one-stage chain degenerates to a bare inverter delay.
    void validate() const {
        if (stage_count < 1) throw std::domain_error("DffSpec: stage count must be >= 1");
        cell.validate();
    }
};

// Clk-to-q delay as a chain of inverter-equivalent stages. The rise/fall
// averaging lives inside inverter_delay's pull-up/pull-down mean.
inline DelayResult dff_delay(const DffSpec& spec) {
    spec.validate();
    const auto d = inverter_delay(spec.cell, spec.vdd, spec.t_K);
    if (d.stuck) return d;
    return {false, double(spec.stage_count) * d.seconds};
}

// Relative delay reduction of `candidate` versus `baseline`; both must
// conduct. 0.25 means 25% faster.
inline double dff_delay_reduction(const DffSpec& baseline, const DffSpec& candidate) {
    const auto b = dff_delay(baseline);
    const auto c = dff_delay(candidate);
    if (b.stuck || c.stuck)
        throw std::runtime_error("dff_delay_reduction: a cell is stuck at this bias");
    return 1.0 - c.seconds / b.seconds;
}

struct PowerScenario {
    double f_clk = 1e9;        // Hz
    double vdd = 0.9;          // V
    double t_K = 298.0;
    double c_switched = 1.5e-12; // F, activity-weighted switched capacitance per cycle
    double w_nmos_total_um = 1.2e5;
    double w_pmos_total_um = 1.2e5;
    ModelParams nmos{};
    ModelParams pmos{};

    // Zero widths (no static path) and a zero clock are both meaningful
    // degenerate scenarios.
    void validate() const {
        if (!(f_clk >= 0 && vdd > 0 && c_switched > 0 &&
              w_nmos_total_um >= 0 && w_pmos_total_um >= 0))
            throw std::domain_error("PowerScenario: fields must be non-negative");
        require_temperature(t_K);
    }
};

struct PowerBreakdown {
    double dynamic_W = 0.0;
    double static_W = 0.0;
    double total_W = 0.0;
};

// P = C_switched * V_DD^2 * f_clk + V_DD * (leakage of the total device width).
inline PowerBreakdown module_power(const PowerScenario& s) {
    s.validate();
    PowerBreakdown p;
    p.dynamic_W = s.c_switched * s.vdd * s.vdd * s.f_clk;
    p.static_W = s.vdd * (s.w_nmos_total_um * leakage_density(s.nmos, s.t_K) +
                          s.w_pmos_total_um * leakage_density(s.pmos, s.t_K));
    p.total_W = p.dynamic_W + p.static_W;
    return p;
}

// Switched capacitance that makes the scenario hit a target total power:
// the declared free knob of the power comparison.
inline double calibrate_switched_capacitance(PowerScenario scenario, double target_W) {
    scenario.validate();
    if (!(scenario.f_clk > 0)) throw std::domain_error("calibration requires f_clk > 0");
    const double static_W = module_power(scenario).static_W;
    if (target_W <= static_W)
        throw std::runtime_error("calibrate_switched_capacitance: target below static power");
    return (target_W - static_W) / (scenario.vdd * scenario.vdd * scenario.f_clk);
}

struct TechnologyCells {
    std::string name;
    InverterCell cell{};
};

struct ComparisonRow {
    std::string technology;
    double vdd;
    double t_K;
    bool oscillates;
    double f_ro_Hz;      // 0 when stuck
    double dff_delay_s;  // 0 when stuck
    double power_W;
};

// Grid evaluation of RO frequency, DFF delay and module power per
// technology, sorted by (technology, V_DD, T).
inline std::vector<ComparisonRow> compare_technologies(
    const std::vector<TechnologyCells>& techs,
    const std::vector<double>& vdd_grid,
    const std::vector<double>& t_grid,
    int ro_stages, int dff_stages, const PowerScenario& power_template) {
    std::vector<ComparisonRow> rows;
    for (const auto& tech : techs) {
        for (double vdd : vdd_grid) {
            for (double t : t_grid) {
                ComparisonRow row{tech.name, vdd, t, false, 0.0, 0.0, 0.0};
                RingOscillatorSpec ro{ro_stages, tech.cell, vdd, t};
                const auto f = ro_frequency(ro);
                row.oscillates = f.oscillates;
                row.f_ro_Hz = f.frequency_Hz;
                if (f.oscillates) {
                    row.dff_delay_s = dff_delay({dff_stages, tech.cell, vdd, t}).seconds;
                }
                PowerScenario ps = power_template;
                ps.vdd = vdd;
                ps.t_K = t;
                ps.nmos = tech.cell.nmos.params;
                ps.pmos = tech.cell.pmos.params;
                row.power_W = module_power(ps).total_W;
                rows.push_back(row);
            }
        }
    }
    std::sort(rows.begin(), rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
        if (a.technology != b.technology) return a.technology < b.technology;
        if (a.vdd != b.vdd) return a.vdd < b.vdd;
        return a.t_K < b.t_K;
    });
    return rows;
}

} // namespace cryomos::circuits
