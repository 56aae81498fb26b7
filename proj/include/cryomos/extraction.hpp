#pragma once

// Figure-of-merit extraction from I-V sweeps: constant-current and
// Y-function threshold voltages, subthreshold swing, transconductance,
// channel mobility, zero-bias leakage, overdrive-for-ratio, and the
// leakage scaling-law fit.

#include "sweep.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cryomos::extraction {

struct ExtractionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Criterion current of the constant-current method: I_DS * (L/W) = 1e-8 A.
inline double criterion_current(const DeviceGeometry& g) {
    return 1e-8 * g.w_um / g.l_um;
}

// V_GS of the first crossing of the criterion current, interpolated in
// (V_GS, log10 I_DS). Subthreshold currents are exponential, so log-space
// interpolation stays accurate on coarse grids.
inline double vth_constant_current(const IVSweep& sweep) {
    sweep.validate();
    const double i_crit = criterion_current(sweep.geom);
    const double log_crit = std::log10(i_crit);
    const auto& pts = sweep.points;
    if (pts.front().ids == i_crit) return pts.front().vgs;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (pts[i].ids == i_crit) return pts[i].vgs;
        const double lo = std::log10(pts[i - 1].ids);
        const double hi = std::log10(pts[i].ids);
        if ((lo < log_crit && hi > log_crit) || (lo > log_crit && hi < log_crit)) {
            const double w = (log_crit - lo) / (hi - lo);
            return pts[i - 1].vgs + w * (pts[i].vgs - pts[i - 1].vgs);
        }
    }
    throw ExtractionError("vth_constant_current: criterion current " +
                          std::to_string(i_crit) + " A not crossed within sweep");
}

struct GmPoint {
    double vgs;
    double gm;
};

// Numeric transconductance: central differences in the interior,
// one-sided at the ends. Exact for linear data on any grid and for
// quadratics on a uniform grid.
inline std::vector<GmPoint> gm_numeric(const IVSweep& sweep) {
    const auto& pts = sweep.points;
    if (pts.size() < 3) throw ExtractionError("gm_numeric: need at least 3 points");
    std::vector<GmPoint> gm(pts.size());
    const auto slope = [&](std::size_t a, std::size_t b) {
        return (pts[b].ids - pts[a].ids) / (pts[b].vgs - pts[a].vgs);
    };
    gm.front() = {pts.front().vgs, slope(0, 1)};
    gm.back() = {pts.back().vgs, slope(pts.size() - 2, pts.size() - 1)};
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
        gm[i] = {pts[i].vgs, slope(i - 1, i + 1)};
    }
    return gm;
}

namespace detail {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y,
                        std::size_t lo, std::size_t hi) { // [lo, hi)
    const double n = double(hi - lo);
    double sx = 0, sy = 0;
    for (std::size_t i = lo; i < hi; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = lo; i < hi; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    LineFit f;
    if (sxx == 0.0) throw ExtractionError("fit_line: zero x variance");
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = (syy == 0.0) ? 1.0 : (sxy * sxy) / (sxx * syy);
    return f;
}

} // namespace detail

struct YFunctionResult {
    double vth = 0.0;     // V
    double mu_ch = 0.0;   // cm^2/Vs
    double r2 = 0.0;
    std::size_t window_begin = 0; // indices into the sweep
    std::size_t window_end = 0;   // one past the last point used
};

namespace detail {

// Current and transconductance estimated by a local least-squares line
// of I(V_GS) over +-half points, shrunk at the edges. half = 0 reduces to
// the raw samples with secant transconductance (gm_numeric).
struct SmoothedChannel {
    std::vector<double> ids;
    std::vector<double> gm;
};

inline SmoothedChannel smoothed_channel(const IVSweep& sweep, std::size_t half) {
    const auto& pts = sweep.points;
    SmoothedChannel out;
    out.ids.resize(pts.size());
    out.gm.resize(pts.size());
    if (half == 0) {
        const auto gm = gm_numeric(sweep);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            out.ids[i] = pts[i].ids;
            out.gm[i] = gm[i].gm;
        }
        return out;
    }
    std::vector<double> v(pts.size()), ids(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        v[i] = pts[i].vgs;
        ids[i] = pts[i].ids;
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const std::size_t lo = i > half ? i - half : 0;
        const std::size_t hi = std::min(pts.size(), i + half + 1);
        const auto f = fit_line(v, ids, lo, hi);
        out.ids[i] = f.intercept + f.slope * v[i];
        out.gm[i] = f.slope;
    }
    return out;
}

} // namespace detail

// Y(V_GS) = I_DS / sqrt(g_m): linear in V_GS for a MOSFET in the linear
// region, intercept at V_TH, slope^2 = mu C_ox (W/L) V_DS. The fit window
// is chosen by maximizing R^2 over contiguous windows of at least 30% of
// the above-threshold points, excluding the top 10% of the V_GS range
// where series resistance and mobility degradation bend Y in measured
// data. Above-threshold gating uses a fraction of max(Y), which keeps the
// extraction invariant under uniform current scaling.
//
// Differentiation amplifies measurement noise, so when the raw pass finds
// no window with R^2 >= 0.98 the transconductance is re-estimated by
// local regression over progressively wider spans (which leaves clean
// data untouched: the first pass already succeeds there).
inline YFunctionResult vth_y_function(const IVSweep& sweep) {
    sweep.validate();
    if (sweep.vds > 0.1)
        throw ExtractionError("vth_y_function: requires a linear-region sweep (V_DS <= 0.1 V)");

    const std::size_t n = sweep.points.size();
    YFunctionResult best{};
    bool found = false;

    for (const std::size_t half : {std::size_t{0}, n / 50 + 2, n / 25 + 4, n / 12 + 6}) {
        const auto chan = detail::smoothed_channel(sweep, half);
        double gm_max = 0.0;
        for (double g : chan.gm) gm_max = std::max(gm_max, g);
        if (gm_max <= 0.0) continue;

        // Y diverges where g_m decays into the leakage-floor round-off,
        // so only points with non-negligible transconductance enter.
        std::vector<double> all_y(n, 0.0);
        double y_max = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (chan.gm[i] > 1e-6 * gm_max && chan.ids[i] > 0.0) {
                all_y[i] = chan.ids[i] / std::sqrt(chan.gm[i]);
                y_max = std::max(y_max, all_y[i]);
            }
        }
        if (y_max <= 0.0) continue;

        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < n; ++i) {
            if (all_y[i] >= 0.05 * y_max) {
                xs.push_back(sweep.points[i].vgs);
                ys.push_back(all_y[i]);
            }
        }
        if (xs.size() < 4) continue;

        // Drop the top 10% of the above-threshold V_GS span.
        const std::size_t usable = std::max<std::size_t>(4, xs.size() - xs.size() / 10);
        const std::size_t min_window = std::max<std::size_t>(4, (usable * 3 + 9) / 10);
        for (std::size_t lo = 0; lo + min_window <= usable; ++lo) {
            for (std::size_t hi = lo + min_window; hi <= usable; ++hi) {
                const auto f = detail::fit_line(xs, ys, lo, hi);
                if (!found || f.r2 > best.r2) {
                    const double w_cm = sweep.geom.w_um * 1e-4;
                    const double l_cm = sweep.geom.l_um * 1e-4;
                    best.vth = -f.intercept / f.slope;
                    best.mu_ch = f.slope * f.slope * l_cm / (sweep.geom.cox * w_cm * sweep.vds);
                    best.r2 = f.r2;
                    best.window_begin = lo;
                    best.window_end = hi;
                    found = true;
                }
            }
        }
        if (found && best.r2 >= 0.98) break;
    }

    if (!found || best.r2 < 0.98)
        throw ExtractionError("vth_y_function: no linear window with R^2 >= 0.98");
    return best;
}

// Minimum V_GS-per-decade slope over sliding one-decade windows of the
// sub-criterion current region, in mV/dec. Each window's slope is the
// least-squares regression of V_GS on log10(I_DS), which tolerates
// measurement noise far better than an endpoint secant and is exact on
// clean exponential data.
inline double subthreshold_swing(const IVSweep& sweep) {
    sweep.validate();
    const double i_crit = criterion_current(sweep.geom);

    std::vector<double> v, logi;
    for (const auto& pt : sweep.points) {
        if (pt.ids < i_crit) {
            v.push_back(pt.vgs);
            logi.push_back(std::log10(pt.ids));
        }
    }
    if (v.size() < 2)
        throw ExtractionError("subthreshold_swing: sweep spans fewer than 2 decades below "
                              "the criterion current");
    const auto [lo_it, hi_it] = std::minmax_element(logi.begin(), logi.end());
    if ((*hi_it - *lo_it) < 2.0)
        throw ExtractionError("subthreshold_swing: sweep spans fewer than 2 decades below "
                              "the criterion current");

    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i) {
        for (std::size_t j = i + 1; j < v.size(); ++j) {
            if (logi[j] - logi[i] >= 1.0) {
                const auto f = detail::fit_line(logi, v, i, j + 1);
                if (f.slope > 0.0) best = std::min(best, f.slope * 1000.0);
                break; // smallest window reaching one decade from i
            }
        }
    }
    if (!std::isfinite(best))
        throw ExtractionError("subthreshold_swing: no one-decade window found");
    return best;
}

// Zero-bias current, interpolated in (V_GS, log10 I) at V_GS = 0.
inline double zero_bias_current(const IVSweep& sweep) {
    const auto& pts = sweep.points;
    if (pts.front().vgs > 0.0)
        throw ExtractionError("zero_bias_current: sweep does not include V_GS <= 0");
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (pts[i].vgs >= 0.0) {
            const double w = (0.0 - pts[i - 1].vgs) / (pts[i].vgs - pts[i - 1].vgs);
            const double logi = std::log10(pts[i - 1].ids) +
                                w * (std::log10(pts[i].ids) - std::log10(pts[i - 1].ids));
            return std::pow(10.0, logi);
        }
    }
    throw ExtractionError("zero_bias_current: V_GS = 0 outside sweep");
}

// Smallest overdrive V_OV = V_GS - V_TH_cc at which I(V_GS)/I(0) reaches
// the requested ratio, interpolated in log current.
inline double overdrive_for_ratio(const IVSweep& sweep, double ratio) {
    if (!(ratio >= 1.0)) throw ExtractionError("overdrive_for_ratio: ratio must be >= 1");
    const double i0 = zero_bias_current(sweep);
    const double vth_cc = vth_constant_current(sweep);
    const double log_target = std::log10(i0) + std::log10(ratio);
    const auto& pts = sweep.points;
    if (std::log10(pts.front().ids) >= log_target) return pts.front().vgs - vth_cc;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double lo = std::log10(pts[i - 1].ids);
        const double hi = std::log10(pts[i].ids);
        if (hi >= log_target && lo < log_target) {
            const double w = (log_target - lo) / (hi - lo);
            return pts[i - 1].vgs + w * (pts[i].vgs - pts[i - 1].vgs) - vth_cc;
        }
    }
    throw ExtractionError("overdrive_for_ratio: ratio " + std::to_string(ratio) +
                          " not reached within sweep");
}

struct LeakagePoint {
    double t_K;
    double ioff; // A
};

struct LeakageFit {
    double ioff_ref; // A at 298 K
    double eta;      // K per decade
    double r2;
};

// Least-squares line on (T, log10 I_off): slope = 1/eta, value at 298 K
// gives I_off_ref. Two points interpolate exactly.
inline LeakageFit fit_leakage_eta(const std::vector<LeakagePoint>& series) {
    if (series.size() < 2)
        throw ExtractionError("fit_leakage_eta: need at least 2 temperatures");
    std::vector<double> t, logi;
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (!(series[i].ioff > 0)) throw ExtractionError("fit_leakage_eta: currents must be > 0");
        if (i > 0 && !(series[i].t_K > series[i - 1].t_K))
            throw ExtractionError("fit_leakage_eta: temperatures must be strictly increasing");
        t.push_back(series[i].t_K - t_reference);
        logi.push_back(std::log10(series[i].ioff));
    }
    const auto f = detail::fit_line(t, logi, 0, t.size());
    if (f.slope <= 0.0)
        throw ExtractionError("fit_leakage_eta: non-positive slope, law does not apply");
    return {std::pow(10.0, f.intercept), 1.0 / f.slope, f.r2};
}

struct ExtractionReport {
    double t_K = 0.0;
    std::optional<double> vth_cc;       // V, from the saturation sweep
    std::optional<double> vth_y;        // V, from the linear sweep
    std::optional<double> mu_ch;        // cm^2/Vs
    std::optional<double> y_r2;
    std::optional<double> ss_min;       // mV/dec
    std::optional<double> gm_max;       // S
    std::optional<double> gm_max_vgs;   // V
    std::optional<double> ioff;         // A at V_GS = 0
    std::optional<double> vov_at_ratio; // V, for ratio_target
    double ratio_target = 1e7;
    std::vector<std::string> issues;    // one entry per failed extractor

    bool complete() const { return issues.empty(); }
};

// Run the extractors applicable to one sweep on its own. Y-function
// fields are attempted only for linear-region sweeps (V_DS <= 0.1 V);
// zero-bias quantities only when the sweep reaches V_GS <= 0. A report
// is partial only when an applicable extractor fails.
inline ExtractionReport extract_single(const IVSweep& sweep, double ratio_target = 1e7) {
    sweep.validate();
    ExtractionReport r;
    r.t_K = sweep.t_K;
    r.ratio_target = ratio_target;
    const auto attempt = [&](const char* what, auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            r.issues.push_back(std::string(what) + ": " + e.what());
        }
    };
    attempt("vth_cc", [&] { r.vth_cc = vth_constant_current(sweep); });
    if (sweep.vds <= 0.1) {
        attempt("vth_y", [&] {
            const auto y = vth_y_function(sweep);
            r.vth_y = y.vth;
            r.mu_ch = y.mu_ch;
            r.y_r2 = y.r2;
        });
    }
    attempt("ss", [&] { r.ss_min = subthreshold_swing(sweep); });
    attempt("gm", [&] {
        const auto gm = gm_numeric(sweep);
        const auto it = std::max_element(gm.begin(), gm.end(),
                                         [](const GmPoint& a, const GmPoint& b) {
                                             return a.gm < b.gm;
                                         });
        r.gm_max = it->gm;
        r.gm_max_vgs = it->vgs;
    });
    if (sweep.points.front().vgs <= 0.0) {
        attempt("ioff", [&] { r.ioff = zero_bias_current(sweep); });
        attempt("vov_at_ratio",
                [&] { r.vov_at_ratio = overdrive_for_ratio(sweep, ratio_target); });
    }
    return r;
}

// Run every extractor on a linear/saturation sweep pair for one device.
// V_TH_cc, SS, g_m and I_off come from the saturation sweep; the
// Y-function threshold and mobility come from the linear sweep. Failures
// are recorded per field, leaving a partial report.
inline ExtractionReport extract_all(const IVSweep& sweep_linear, const IVSweep& sweep_sat,
                                    double ratio_target = 1e7) {
    sweep_linear.validate();
    sweep_sat.validate();
    if (sweep_linear.t_K != sweep_sat.t_K)
        throw ExtractionError("extract_all: sweeps taken at different temperatures");
    if (sweep_linear.geom.w_um != sweep_sat.geom.w_um ||
        sweep_linear.geom.l_um != sweep_sat.geom.l_um)
        throw ExtractionError("extract_all: sweeps have mismatched geometry");

    ExtractionReport r;
    r.t_K = sweep_sat.t_K;
    r.ratio_target = ratio_target;
    const auto attempt = [&](const char* what, auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            r.issues.push_back(std::string(what) + ": " + e.what());
        }
    };
    attempt("vth_cc", [&] { r.vth_cc = vth_constant_current(sweep_sat); });
    attempt("vth_y", [&] {
        const auto y = vth_y_function(sweep_linear);
        r.vth_y = y.vth;
        r.mu_ch = y.mu_ch;
        r.y_r2 = y.r2;
    });
    attempt("ss", [&] { r.ss_min = subthreshold_swing(sweep_sat); });
    attempt("gm", [&] {
        const auto gm = gm_numeric(sweep_sat);
        const auto it = std::max_element(gm.begin(), gm.end(),
                                         [](const GmPoint& a, const GmPoint& b) {
                                             return a.gm < b.gm;
                                         });
        r.gm_max = it->gm;
        r.gm_max_vgs = it->vgs;
    });
    attempt("ioff", [&] { r.ioff = zero_bias_current(sweep_sat); });
    attempt("vov_at_ratio", [&] { r.vov_at_ratio = overdrive_for_ratio(sweep_sat, ratio_target); });
    return r;
}

} // namespace cryomos::extraction
