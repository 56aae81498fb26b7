#pragma once

// Calibration of ModelParams against I-V sweep corpora: relative-error
// objective, bounded derivative-free minimization (Nelder-Mead with
// seeded restarts), and the fit-problem/result plumbing.

#include "extraction.hpp"
#include "sweep.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace cryomos::fitting {

// Fittable scalar fields of ModelParams. Positive spanning-decades
// parameters are searched on a log axis.
struct ParamField {
    const char* name;
    double ModelParams::*member;
    bool log_scale;
};

inline const std::array<ParamField, 11>& param_fields() {
    static const std::array<ParamField, 11> fields{{
        {"vth0", &ModelParams::vth0, false},
        {"c_vth", &ModelParams::c_vth, false},
        {"mu0", &ModelParams::mu0, true},
        {"alpha_ph", &ModelParams::alpha_ph, false},
        {"mu_coulomb", &ModelParams::mu_coulomb, true},
        {"n0", &ModelParams::n0, false},
        {"ss_floor", &ModelParams::ss_floor, false},
        {"v_sat", &ModelParams::v_sat, true},
        {"lambda_clm", &ModelParams::lambda_clm, false},
        {"ioff_ref", &ModelParams::ioff_ref, true},
        {"eta", &ModelParams::eta, true},
    }};
    return fields;
}

inline const ParamField& field_by_name(const std::string& name) {
    for (const auto& f : param_fields())
        if (name == f.name) return f;
    throw std::invalid_argument("unknown ModelParams field: " + name);
}

struct Bound {
    double lo;
    double hi;
};

struct FitProblem {
    std::vector<IVSweep> sweeps;
    ModelParams initial{};
    std::vector<std::string> free_names;      // empty mask = no-op fit
    std::map<std::string, Bound> bounds;      // finite, containing the initial guess
    unsigned long long seed = 1;
    int restarts = 3;
    int max_iterations = 5000;

    void validate() const {
        if (sweeps.empty()) throw std::invalid_argument("FitProblem: no sweeps");
        for (const auto& s : sweeps) s.validate();
        for (const auto& name : free_names) {
            const auto& f = field_by_name(name);
            const auto it = bounds.find(name);
            if (it == bounds.end())
                throw std::invalid_argument("FitProblem: missing bounds for " + name);
            const double x0 = initial.*(f.member);
            if (!(std::isfinite(it->second.lo) && std::isfinite(it->second.hi) &&
                  it->second.lo < it->second.hi && x0 >= it->second.lo && x0 <= it->second.hi))
                throw std::invalid_argument("FitProblem: bounds for " + name +
                                            " must be finite and contain the initial guess");
        }
    }
};

struct SweepError {
    double t_K;
    double vds;
    double mean_rel_error;
};

// Mean over all points of |I_model - I_data| / max(|I_data|, 1e-12).
inline double objective(const ModelParams& p, const std::vector<IVSweep>& sweeps,
                        std::vector<SweepError>* breakdown = nullptr) {
    constexpr double i_floor = 1e-12;
    if (breakdown) breakdown->clear();
    double total = 0.0;
    std::size_t n = 0;
    for (const auto& s : sweeps) {
        double sweep_sum = 0.0;
        for (const auto& pt : s.points) {
            const double im = drain_current(p, s.geom, {pt.vgs, s.vds, s.t_K});
            sweep_sum += std::abs(im - pt.ids) / std::max(std::abs(pt.ids), i_floor);
        }
        total += sweep_sum;
        n += s.points.size();
        if (breakdown) breakdown->push_back({s.t_K, s.vds, sweep_sum / double(s.points.size())});
    }
    return total / double(n);
}

struct FitResult {
    ModelParams params{};
    double mean_rel_error = 0.0;
    std::vector<SweepError> per_sweep;
    int iterations = 0;
    bool converged = false;
    std::vector<double> best_trace; // best objective value after each iteration
};

namespace detail {

inline double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }
inline double logit(double t) {
    t = std::clamp(t, 1e-12, 1.0 - 1e-12);
    return std::log(t / (1.0 - t));
}

// Bijection between the optimizer's unbounded coordinates and bounded
// parameter values (logistic on a linear or log axis).
struct Transform {
    std::vector<const ParamField*> fields;
    std::vector<Bound> box;

    std::vector<double> to_unbounded(const ModelParams& p) const {
        std::vector<double> u(fields.size());
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const double x = p.*(fields[i]->member);
            if (fields[i]->log_scale) {
                u[i] = logit((std::log(x) - std::log(box[i].lo)) /
                             (std::log(box[i].hi) - std::log(box[i].lo)));
            } else {
                u[i] = logit((x - box[i].lo) / (box[i].hi - box[i].lo));
            }
        }
        return u;
    }

    ModelParams to_params(const ModelParams& base, const std::vector<double>& u) const {
        ModelParams p = base;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const double t = logistic(u[i]);
            if (fields[i]->log_scale) {
                p.*(fields[i]->member) =
                    std::exp(std::log(box[i].lo) + t * (std::log(box[i].hi) - std::log(box[i].lo)));
            } else {
                p.*(fields[i]->member) = box[i].lo + t * (box[i].hi - box[i].lo);
            }
        }
        return p;
    }
};

struct NmResult {
    std::vector<double> x;
    double fx = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> trace;
};

// Standard Nelder-Mead on R^n. Converged when the relative improvement of
// the best vertex over the trailing 20 iterations drops below 1e-6.
inline NmResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                            const std::vector<double>& x0, double step, int max_iter) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> simplex(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += step;
    std::vector<double> fx(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fx[i] = f(simplex[i]);

    NmResult result;
    constexpr double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
    constexpr int window = 20;
    constexpr double rel_tol = 1e-6;

    for (int iter = 0; iter < max_iter; ++iter) {
        std::vector<std::size_t> order(n + 1);
        for (std::size_t i = 0; i <= n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
        const std::size_t best = order[0], worst = order[n], second_worst = order[n - 1];

        result.trace.push_back(fx[best]);
        result.iterations = iter + 1;
        if (iter >= window) {
            const double prev = result.trace[iter - window];
            if (prev - fx[best] < rel_tol * std::max(std::abs(prev), 1e-300)) {
                result.converged = true;
                result.x = simplex[best];
                result.fx = fx[best];
                return result;
            }
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t d = 0; d < n; ++d) centroid[d] += simplex[i][d];
        }
        for (auto& c : centroid) c /= double(n);

        const auto blend = [&](double coef) {
            std::vector<double> x(n);
            for (std::size_t d = 0; d < n; ++d)
                x[d] = centroid[d] + coef * (simplex[worst][d] - centroid[d]);
            return x;
        };

        const auto reflected = blend(-alpha);
        const double f_ref = f(reflected);
        if (f_ref < fx[best]) {
            const auto expanded = blend(-gamma);
            const double f_exp = f(expanded);
            if (f_exp < f_ref) {
                simplex[worst] = expanded;
                fx[worst] = f_exp;
            } else {
                simplex[worst] = reflected;
                fx[worst] = f_ref;
            }
        } else if (f_ref < fx[second_worst]) {
            simplex[worst] = reflected;
            fx[worst] = f_ref;
        } else {
            const auto contracted = blend(f_ref < fx[worst] ? -rho : rho);
            const double f_con = f(contracted);
            if (f_con < std::min(f_ref, fx[worst])) {
                simplex[worst] = contracted;
                fx[worst] = f_con;
            } else {
                for (std::size_t i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    for (std::size_t d = 0; d < n; ++d)
                        simplex[i][d] = simplex[best][d] + sigma * (simplex[i][d] - simplex[best][d]);
                    fx[i] = f(simplex[i]);
                }
            }
        }
    }

    const auto it = std::min_element(fx.begin(), fx.end());
    result.x = simplex[std::size_t(it - fx.begin())];
    result.fx = *it;
    return result;
}

} // namespace detail

// Bounded derivative-free local fit. Restarts run from seeded
// perturbations of the initial point; the best run wins. Deterministic
// for a fixed problem and seed.
inline FitResult calibrate(const FitProblem& problem) {
    problem.validate();

    FitResult result;
    if (problem.free_names.empty()) {
        result.params = problem.initial;
        result.mean_rel_error = objective(problem.initial, problem.sweeps, &result.per_sweep);
        result.converged = true;
        result.best_trace.push_back(result.mean_rel_error);
        return result;
    }

    detail::Transform tf;
    for (const auto& name : problem.free_names) {
        tf.fields.push_back(&field_by_name(name));
        tf.box.push_back(problem.bounds.at(name));
    }

    const auto eval = [&](const std::vector<double>& u) {
        return objective(tf.to_params(problem.initial, u), problem.sweeps);
    };

    std::mt19937_64 rng(problem.seed);
    std::uniform_real_distribution<double> jitter(-0.4, 0.4);
    const std::vector<double> u0 = tf.to_unbounded(problem.initial);

    detail::NmResult best{};
    bool have_best = false;
    double global_best = std::numeric_limits<double>::infinity();
    std::vector<double> trace;
    int total_iter = 0;
    const int runs = std::max(1, problem.restarts);
    for (int run = 0; run < runs; ++run) {
        std::vector<double> start = u0;
        if (run > 0)
            for (auto& u : start) u += jitter(rng);
        auto r = detail::nelder_mead(eval, start, 0.25,
                                     std::max(1, problem.max_iterations / runs));
        total_iter += r.iterations;
        for (double v : r.trace) {
            global_best = std::min(global_best, v);
            trace.push_back(global_best);
        }
        if (!have_best || r.fx < best.fx) {
            best = std::move(r);
            have_best = true;
        }
    }

    result.params = tf.to_params(problem.initial, best.x);
    result.mean_rel_error = objective(result.params, problem.sweeps, &result.per_sweep);
    result.iterations = total_iter;
    result.converged = best.converged;
    result.best_trace = std::move(trace);
    return result;
}

} // namespace cryomos::fitting
