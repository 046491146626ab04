#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "homp/errors.hpp"
#include "homp/history.hpp"
#include "homp/inference.hpp"
#include "homp/model.hpp"
#include "homp/optimize.hpp"
#include "homp/rng.hpp"

namespace homp {

// Raw observations (t_i, y_i), possibly irregular, strictly increasing in
// time.
struct Dataset {
    std::vector<double> times;
    std::vector<double> values;

    Dataset() = default;
    Dataset(std::vector<double> times_, std::vector<double> values_)
        : times(std::move(times_)), values(std::move(values_)) {
        if (times.size() != values.size()) throw config_error("Dataset: times/values length mismatch");
        if (times.size() < 2) throw config_error("Dataset: need at least 2 observations");
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (!std::isfinite(times[i]) || !std::isfinite(values[i]))
                throw config_error("Dataset: non-finite observation");
            if (i > 0 && !(times[i] > times[i - 1]))
                throw config_error("Dataset: times must be strictly increasing");
        }
    }

    std::size_t size() const { return times.size(); }
};

struct RegularSeries {
    TimeGrid grid;
    std::vector<double> values;  // grid.n_steps + 1 entries
};

enum class OptimizerKind { nelder_mead, grid_search };

struct FitOptions {
    double dt = 0.01;
    OptimizerKind optimizer = OptimizerKind::nelder_mead;
    std::int64_t max_evals = 500;
    int n_restarts = 1;
    std::map<std::string, double> initial;                     // overrides per parameter
    std::map<std::string, std::pair<double, double>> bounds;   // overrides per parameter
    std::map<std::string, std::vector<double>> grid;           // lattice for grid_search
    std::uint64_t seed = 0;
};

struct FitResult {
    ParamVector theta_hat;
    double loglik = -std::numeric_limits<double>::infinity();
    std::int64_t n_evals = 0;
    bool converged = false;
    std::vector<double> restart_logliks;
    std::vector<double> best_trace;  // best-so-far log-likelihood per evaluation
};

// Linear interpolation of the observations onto the uniform grid anchored at
// the first observation; nodes coinciding with observation times reproduce
// the observed values exactly.
inline RegularSeries interpolate_dataset(const Dataset& data, double dt) {
    if (!(dt > 0.0)) throw config_error("interpolate_dataset: dt must be > 0");
    const double span = data.times.back() - data.times.front();
    const auto n = static_cast<std::int64_t>(std::floor(span / dt + kGridSlack));
    if (n < 1) throw config_error("interpolate_dataset: dataset spans less than one grid step");

    RegularSeries out;
    out.grid = TimeGrid(data.times.front(), dt, n);
    out.values.resize(static_cast<std::size_t>(n) + 1);
    std::size_t i = 0;  // observation cursor: times[i] <= x < times[i+1]
    for (std::int64_t j = 0; j <= n; ++j) {
        const double x = out.grid.time(j);
        while (i + 2 < data.times.size() && data.times[i + 1] <= x) ++i;
        const double t0 = data.times[i], t1 = data.times[i + 1];
        if (x <= t0) {
            out.values[static_cast<std::size_t>(j)] = data.values[i];
        } else if (x >= t1) {
            out.values[static_cast<std::size_t>(j)] = data.values[i + 1];
        } else {
            const double frac = (x - t0) / (t1 - t0);
            out.values[static_cast<std::size_t>(j)] = data.values[i] + frac * (data.values[i + 1] - data.values[i]);
        }
    }
    return out;
}

struct BlockPartition {
    std::vector<HistorySegment> blocks;  // consecutive tau windows sharing boundary samples
    bool has_short_tail = false;         // last block covers less than tau
};

// Partition a regular series into consecutive tau-blocks [0,tau], [tau,2tau],
// ...; a shorter final remainder is kept and flagged.
inline BlockPartition partition_blocks(const RegularSeries& series, double tau) {
    const auto m = detail::steps_in(tau, series.grid.dt, "partition_blocks: tau");
    const std::int64_t total = series.grid.n_steps;
    if (total < 2 * m) throw config_error("partition_blocks: series must cover at least 2*tau");

    BlockPartition out;
    const std::int64_t full = total / m;
    for (std::int64_t b = 0; b < full; ++b) {
        const auto begin = static_cast<std::size_t>(b * m);
        std::vector<double> samples(series.values.begin() + begin, series.values.begin() + begin + m + 1);
        out.blocks.emplace_back(series.grid.time((b + 1) * m), tau, std::move(samples));
    }
    const std::int64_t rest = total - full * m;
    if (rest > 0) {
        const auto begin = static_cast<std::size_t>(full * m);
        std::vector<double> samples(series.values.begin() + begin, series.values.end());
        out.blocks.emplace_back(series.grid.t_last(), static_cast<double>(rest) * series.grid.dt,
                                std::move(samples));
        out.has_short_tail = true;
    }
    return out;
}

// Euler pseudo-log-likelihood of the interpolated data under the model: the
// first tau of data seeds the window, every later grid step contributes its
// Gaussian transition kernel. Equals the sum of adjacent-block
// transition_logdensity terms by construction.
inline double log_likelihood(const ModelSpec& model, const Dataset& data, const FitOptions& opts) {
    const RegularSeries series = interpolate_dataset(data, opts.dt);
    const auto m = detail::steps_in(model.tau, series.grid.dt, "log_likelihood: tau");
    if (series.grid.n_steps < 2 * m)
        throw config_error("log_likelihood: series must cover at least 2*tau");

    HistorySegment window(series.grid.time(m), model.tau,
                          std::vector<double>(series.values.begin(), series.values.begin() + m + 1));
    return detail::bridge_logdensity(model, window,
                                     std::span<const double>(series.values).subspan(static_cast<std::size_t>(m) + 1));
}

// A parametric model family: fit_mle rebinds values into the prototype via
// with_params. Bounds and initial values come from the prototype's ParamVector
// unless overridden in FitOptions.
inline FitResult fit_mle(const ModelSpec& prototype, const Dataset& data, const FitOptions& opts) {
    if (prototype.params.empty()) throw config_error("fit_mle: model has no parameters to fit");
    if (opts.max_evals < 1) throw config_error("fit_mle: max_evals must be >= 1");
    if (opts.n_restarts < 1) throw config_error("fit_mle: n_restarts must be >= 1");
    if (prototype.uses_sigma2_history())
        throw config_error("fit_mle: models with a latent realized sigma^2 history are not fittable");

    const std::size_t n = prototype.params.size();
    std::vector<double> x0(n), lo(n), hi(n);
    std::vector<std::vector<double>> lattice(n);
    for (std::size_t i = 0; i < n; ++i) {
        const ParamSpec& p = prototype.params[i];
        x0[i] = p.value;
        lo[i] = p.lower;
        hi[i] = p.upper;
        if (auto it = opts.initial.find(p.name); it != opts.initial.end()) x0[i] = it->second;
        if (auto it = opts.bounds.find(p.name); it != opts.bounds.end()) {
            lo[i] = it->second.first;
            hi[i] = it->second.second;
        }
        if (!(x0[i] >= lo[i] && x0[i] <= hi[i]))
            throw config_error("fit_mle: initial value for '" + p.name + "' outside bounds");
        if (auto it = opts.grid.find(p.name); it != opts.grid.end()) lattice[i] = it->second;
    }

    // interpolate once; the objective only re-walks the kernel sum
    const RegularSeries series = interpolate_dataset(data, opts.dt);
    const auto m = detail::steps_in(prototype.tau, series.grid.dt, "fit_mle: tau");
    if (series.grid.n_steps < 2 * m) throw config_error("fit_mle: series must cover at least 2*tau");

    std::int64_t evals_used = 0;
    auto objective = [&](const std::vector<double>& theta) -> double {
        ++evals_used;
        try {
            const ModelSpec candidate = prototype.with_params(theta);
            HistorySegment window(series.grid.time(m), prototype.tau,
                                  std::vector<double>(series.values.begin(), series.values.begin() + m + 1));
            return detail::bridge_logdensity(
                candidate, window,
                std::span<const double>(series.values).subspan(static_cast<std::size_t>(m) + 1));
        } catch (const numeric_error&) {
            return -std::numeric_limits<double>::infinity();
        }
    };

    FitResult fit;
    if (opts.optimizer == OptimizerKind::grid_search) {
        for (std::size_t i = 0; i < n; ++i)
            if (lattice[i].empty())
                throw config_error("fit_mle: grid search needs a lattice for parameter '" +
                                   prototype.params[i].name + "'");
        OptimResult best = grid_search_maximize(objective, lattice, opts.max_evals);
        fit.restart_logliks.push_back(best.f);
        fit.theta_hat = prototype.with_params(best.x).params;
        for (std::size_t i = 0; i < n; ++i) {
            fit.theta_hat[i].lower = lo[i];
            fit.theta_hat[i].upper = hi[i];
        }
        fit.loglik = best.f;
        fit.n_evals = best.n_evals;
        fit.converged = best.converged;
        fit.best_trace = std::move(best.best_trace);
        return fit;
    }

    const std::int64_t evals_per_restart =
        std::max<std::int64_t>(1, opts.max_evals / static_cast<std::int64_t>(opts.n_restarts));
    const std::uint64_t jitter_key = rng::make_key(opts.seed, /*stream=*/0xF17);

    OptimResult best;
    bool have_best = false;
    for (int r = 0; r < opts.n_restarts; ++r) {
        std::vector<double> start = x0;
        if (r > 0) {  // deterministic jitter around the supplied start
            for (std::size_t i = 0; i < n; ++i) {
                const double u = rng::uniform(jitter_key, static_cast<std::uint64_t>(r), i, -1.0, 1.0);
                const double scale = 0.5 * std::max(1.0, std::abs(x0[i]));
                start[i] = std::clamp(x0[i] + scale * u, lo[i], hi[i]);
            }
        }
        try {
            OptimResult res = nelder_mead_maximize(objective, std::move(start), lo, hi, evals_per_restart);
            fit.restart_logliks.push_back(res.f);
            fit.n_evals += res.n_evals;
            for (double v : res.best_trace) {  // keep the trace monotone across restarts
                const double prev = fit.best_trace.empty() ? -std::numeric_limits<double>::infinity()
                                                           : fit.best_trace.back();
                fit.best_trace.push_back(std::max(prev, v));
            }
            if (!have_best || res.f > best.f || (res.f == best.f && !best.converged && res.converged)) {
                best = std::move(res);
                have_best = true;
            }
        } catch (const numeric_error&) {
            fit.restart_logliks.push_back(-std::numeric_limits<double>::infinity());
        }
    }
    if (!have_best) throw numeric_error("fit_mle: no finite log-likelihood found");

    fit.theta_hat = prototype.with_params(best.x).params;
    for (std::size_t i = 0; i < n; ++i) {  // echo the effective bounds
        fit.theta_hat[i].lower = lo[i];
        fit.theta_hat[i].upper = hi[i];
    }
    fit.loglik = best.f;
    fit.converged = best.converged;
    return fit;
}

}  // namespace homp
