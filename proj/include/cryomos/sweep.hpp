#pragma once

// Gate-voltage sweeps at fixed drain bias and temperature: the unit of
// data exchanged between the model, the extractors, and the CSV layer.

#include "model.hpp"

#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace cryomos {

struct SweepPoint {
    double vgs; // V
    double ids; // A, magnitude
};

struct IVSweep {
    double vds = 0.05;          // V, fixed drain bias (magnitude)
    double t_K = t_reference;
    DeviceGeometry geom{};
    Polarity polarity = Polarity::nmos;
    std::vector<SweepPoint> points;
    // Generating parameters when synthetic; empty for measured data.
    std::optional<ModelParams> origin_params;

    void validate() const {
        geom.validate();
        require_temperature(t_K);
        if (points.size() < 8) throw std::domain_error("IVSweep: need at least 8 points");
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (!(points[i].ids > 0)) throw std::domain_error("IVSweep: currents must be > 0");
            if (i > 0 && !(points[i].vgs > points[i - 1].vgs))
                throw std::domain_error("IVSweep: V_GS must be strictly increasing");
        }
    }
};

// Evaluate the compact model over a strictly increasing V_GS grid.
inline IVSweep iv_sweep_synthesize(const ModelParams& p, const DeviceGeometry& g,
                                   double vds, double t_K,
                                   const std::vector<double>& vgs_grid) {
    if (vgs_grid.empty()) throw std::domain_error("iv_sweep_synthesize: empty grid");
    for (std::size_t i = 1; i < vgs_grid.size(); ++i) {
        if (!(vgs_grid[i] > vgs_grid[i - 1]))
            throw std::domain_error("iv_sweep_synthesize: grid must be strictly increasing");
    }
    IVSweep sweep;
    sweep.vds = vds;
    sweep.t_K = t_K;
    sweep.geom = g;
    sweep.polarity = p.polarity;
    sweep.origin_params = p;
    sweep.points.reserve(vgs_grid.size());
    for (double vgs : vgs_grid) {
        sweep.points.push_back({vgs, drain_current(p, g, {vgs, vds, t_K})});
    }
    return sweep;
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n == 0) throw std::domain_error("linspace: need at least one point");
    std::vector<double> v(n);
    if (n == 1) {
        v[0] = lo;
        return v;
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = lo + (hi - lo) * double(i) / double(n - 1);
    return v;
}

} // namespace cryomos
