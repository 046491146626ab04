#pragma once

#include <cmath>
#include <cstdint>
#include <mutex>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include "homp/errors.hpp"
#include "homp/history.hpp"
#include "homp/model.hpp"
#include "homp/rng.hpp"

namespace homp {

struct SimConfig {
    double dt = 0.01;
    double horizon = 1.0;
    std::int64_t n_paths = 1;
    std::uint64_t seed = 0;
};

// One trajectory: the supplied initial history plus the simulated values on
// the uniform grid. values[0] is the initial state (right endpoint of the
// initial history); realized_sigma2[k] is the squared diffusion applied on
// step k (kept only for models reading the realized sigma^2 history).
struct Path {
    HistorySegment initial_history;
    TimeGrid grid;
    std::vector<double> values;
    std::optional<std::vector<double>> realized_sigma2;
};

namespace detail {

inline std::int64_t steps_in(double span, double dt, const char* what) {
    const auto n = static_cast<std::int64_t>(std::llround(span / dt));
    if (n < 1 || std::abs(static_cast<double>(n) * dt - span) > kGridSlack * (std::abs(span) + dt))
        throw config_error(std::string(what) + ": span must be a positive whole number of dt steps");
    return n;
}

inline void check_sim_inputs(const ModelSpec& model, const HistorySegment& init, const SimConfig& cfg) {
    if (!(cfg.dt > 0.0)) throw config_error("simulate: dt must be > 0");
    if (cfg.horizon < cfg.dt) throw config_error("simulate: horizon must be >= dt");
    if (cfg.n_paths < 1) throw config_error("simulate: n_paths must be >= 1");
    check_tau(model, init);
    steps_in(model.tau, cfg.dt, "simulate: tau");  // dt must divide tau
    if (std::abs(init.dt() - cfg.dt) > kGridSlack * cfg.dt)
        throw config_error("simulate: initial history grid spacing must equal dt");
}

// Core Euler-Maruyama loop. Noise is keyed by (seed, stream) and indexed by
// (path_index, step_offset + k): stitching two runs with matching offsets and
// keys reproduces a single longer run bit-for-bit.
inline Path euler_maruyama(const ModelSpec& model, const HistorySegment& init, const SimConfig& cfg,
                           std::int64_t path_index, std::uint64_t stream, std::int64_t step_offset,
                           const std::optional<HistorySegment>& init_sigma2) {
    const std::int64_t n_steps = steps_in(cfg.horizon, cfg.dt, "simulate: horizon");
    const bool needs_sigma2 = model.uses_sigma2_history();
    if (needs_sigma2) {
        if (!init_sigma2)
            throw config_error("simulate: model reads the realized sigma^2 history; supply an initial one");
        check_tau(model, *init_sigma2);
        if (init_sigma2->samples.size() != init.samples.size())
            throw config_error("simulate: initial sigma^2 history must share the state grid");
    }

    Path path;
    path.initial_history = init;
    path.grid = TimeGrid(init.t_end, cfg.dt, n_steps);
    path.values.reserve(static_cast<std::size_t>(n_steps) + 1);
    path.values.push_back(init.current());

    HistorySegment window = init;
    std::optional<HistorySegment> sigma2_window = needs_sigma2 ? init_sigma2 : std::nullopt;
    std::vector<double> realized;
    if (needs_sigma2) realized.reserve(static_cast<std::size_t>(n_steps));

    const std::uint64_t key = rng::make_key(cfg.seed, stream);
    const double sqrt_dt = std::sqrt(cfg.dt);
    const HistorySegment* aux = sigma2_window ? &*sigma2_window : nullptr;

    double y = init.current();
    for (std::int64_t k = 0; k < n_steps; ++k) {
        const double a = drift(model, window, aux);
        const double s = diffusion(model, window, aux);
        const double z = rng::normal(key, static_cast<std::uint64_t>(path_index),
                                     static_cast<std::uint64_t>(step_offset + k));
        y += a * cfg.dt + s * sqrt_dt * z;
        if (!std::isfinite(y)) throw numeric_error("simulate: state became non-finite");
        roll_inplace(window, y);
        if (needs_sigma2) {
            realized.push_back(s * s);
            roll_inplace(*sigma2_window, s * s);
        }
        path.values.push_back(y);
    }
    if (needs_sigma2) path.realized_sigma2 = std::move(realized);
    return path;
}

}  // namespace detail

namespace detail {

// Strided worker loop over path indices; exceptions surface after join.
template <typename F>
void parallel_paths(std::size_t n, unsigned n_workers, F&& per_path) {
    if (n_workers == 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        n_workers = hw ? hw : 1;
    }
    n_workers = static_cast<unsigned>(std::min<std::size_t>(n_workers, n));

    if (n_workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) per_path(i);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(n_workers);
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (unsigned w = 0; w < n_workers; ++w) {
        workers.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += n_workers) per_path(i);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : workers) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

inline Path simulate_path(const ModelSpec& model, const HistorySegment& init, const SimConfig& cfg,
                          std::int64_t path_index = 0,
                          const std::optional<HistorySegment>& init_sigma2 = std::nullopt,
                          std::uint64_t stream = 0) {
    detail::check_sim_inputs(model, init, cfg);
    return detail::euler_maruyama(model, init, cfg, path_index, stream, 0, init_sigma2);
}

// n_paths independent paths. Output is a pure function of (model, init, cfg),
// so the worker count never changes a bit of it.
inline std::vector<Path> simulate_ensemble(const ModelSpec& model, const HistorySegment& init,
                                           const SimConfig& cfg,
                                           const std::optional<HistorySegment>& init_sigma2 = std::nullopt,
                                           std::uint64_t stream = 0, unsigned n_workers = 0) {
    detail::check_sim_inputs(model, init, cfg);
    const auto n = static_cast<std::size_t>(cfg.n_paths);
    std::vector<Path> out(n);
    detail::parallel_paths(n, n_workers, [&](std::size_t i) {
        out[i] = detail::euler_maruyama(model, init, cfg, static_cast<std::int64_t>(i), stream, 0, init_sigma2);
    });
    return out;
}

// Trailing tau window of a path at grid index k (k >= 0 counts simulated
// steps; the initial history supplies everything earlier).
inline HistorySegment window_at(const Path& path, std::int64_t k) {
    const auto m = static_cast<std::int64_t>(path.initial_history.cells());
    if (k < 0 || k > path.grid.n_steps) throw config_error("window_at: step index out of range");
    std::vector<double> window(static_cast<std::size_t>(m) + 1);
    for (std::int64_t j = 0; j <= m; ++j) {
        const std::int64_t idx = k - m + j;  // index into the virtual concatenated series
        window[static_cast<std::size_t>(j)] =
            idx >= 0 ? path.values[static_cast<std::size_t>(idx)]
                     : path.initial_history.samples[static_cast<std::size_t>(m + idx)];
    }
    return HistorySegment(path.grid.time(k), path.initial_history.tau, std::move(window));
}

}  // namespace homp
