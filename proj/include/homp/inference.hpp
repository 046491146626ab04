#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "homp/errors.hpp"
#include "homp/history.hpp"
#include "homp/model.hpp"
#include "homp/rng.hpp"
#include "homp/simulate.hpp"
#include "homp/stats.hpp"

namespace homp {

// Monte-Carlo estimate of D^(n)(H) = E[(y(t+dt) - y(t))^n] / (n! dt); n = 1
// recovers the drift, n = 2 half the squared diffusion.
struct JumpMomentEstimate {
    int order = 1;
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t n_samples = 0;
    double delta_t = 0.0;
};

struct CKReport {
    double ks_statistic = 0.0;
    std::int64_t n_samples = 0;
    double t = 0.0;
    double T = 0.0;
};

inline JumpMomentEstimate estimate_jump_moment(const ModelSpec& model, const HistorySegment& H, int order,
                                               double delta_t, std::int64_t n_samples, std::uint64_t seed,
                                               const HistorySegment* sigma2_history = nullptr) {
    if (order != 1 && order != 2) throw config_error("estimate_jump_moment: order must be 1 or 2");
    if (!(delta_t > 0.0)) throw config_error("estimate_jump_moment: delta_t must be > 0");
    if (delta_t > H.dt() * (1.0 + kGridSlack))
        throw config_error("estimate_jump_moment: delta_t must not exceed the history grid spacing");
    if (n_samples < 2) throw config_error("estimate_jump_moment: need at least 2 samples");

    const double a = drift(model, H, sigma2_history);
    const double s = diffusion(model, H, sigma2_history);
    const double sqrt_dt = std::sqrt(delta_t);
    const double factorial = (order == 1) ? 1.0 : 2.0;
    const std::uint64_t key = rng::make_key(seed, /*stream=*/0);

    std::vector<double> stats(static_cast<std::size_t>(n_samples));
    for (std::int64_t i = 0; i < n_samples; ++i) {
        const double dy = a * delta_t + s * sqrt_dt * rng::normal(key, static_cast<std::uint64_t>(i), 0);
        const double powered = (order == 1) ? dy : dy * dy;
        stats[static_cast<std::size_t>(i)] = powered / (factorial * delta_t);
    }
    const auto [mean, se] = mean_std_error(stats);
    return JumpMomentEstimate{order, mean, se, n_samples, delta_t};
}

// log N(y_next; y + drift(H) dt, diffusion(H)^2 dt) for one grid step of the
// Euler pseudo-likelihood; dt is the grid spacing of H.
inline double step_transition_logdensity(const ModelSpec& model, const HistorySegment& H, double y_next,
                                         const HistorySegment* sigma2_history = nullptr) {
    const double dt = H.dt();
    const double s = diffusion(model, H, sigma2_history);
    if (s <= 0.0) throw numeric_error("transition density: zero diffusion, density degenerate");
    const double mean = H.current() + drift(model, H, sigma2_history) * dt;
    const double var = s * s * dt;
    const double r = y_next - mean;
    return -0.5 * std::log(2.0 * 3.141592653589793238462643383280 * var) - r * r / (2.0 * var);
}

namespace detail {

// Sum of per-step log kernels walking the window through successor values.
// The window is mutated in place.
inline double bridge_logdensity(const ModelSpec& model, HistorySegment& window, std::span<const double> successors) {
    double acc = 0.0;
    for (const double y_next : successors) {
        acc += step_transition_logdensity(model, window, y_next);
        roll_inplace(window, y_next);
    }
    return acc;
}

}  // namespace detail

// Log transition density between adjacent tau-blocks: block_to covers
// [block_from.t_end, block_from.t_end + tau] on the same grid and shares the
// boundary sample. Sum of the m per-step Gaussian kernels bridging them.
inline double transition_logdensity(const ModelSpec& model, const HistorySegment& block_from,
                                    const HistorySegment& block_to) {
    detail::check_tau(model, block_from);
    detail::check_tau(model, block_to);
    if (block_from.samples.size() != block_to.samples.size() ||
        std::abs(block_from.dt() - block_to.dt()) > kGridSlack * block_from.dt())
        throw config_error("transition_logdensity: blocks are not on the same grid");
    if (std::abs(block_to.t_end - (block_from.t_end + block_from.tau)) > kGridSlack * block_from.tau)
        throw config_error("transition_logdensity: blocks are not adjacent");
    if (std::abs(block_to.samples.front() - block_from.samples.back()) >
        kGridSlack * (1.0 + std::abs(block_from.samples.back())))
        throw config_error("transition_logdensity: blocks do not share the boundary sample");

    HistorySegment window = block_from;
    return detail::bridge_logdensity(model, window, std::span<const double>(block_to.samples).subspan(1));
}

// Chapman-Kolmogorov consistency at the level of terminal-value
// distributions. Arm A simulates y(T) from F0 directly; arm B runs the same
// paths to t, extracts the window, reseeds, and continues to T. Returns the
// two-sample KS statistic between the arms' terminal values.
//
// continuation_seed defaults to an independent derived seed; passing the
// original seed reproduces arm A exactly (KS = 0), which pins down the
// stitching identity.
inline CKReport ck_consistency_check(const ModelSpec& model, const HistorySegment& F0, double t, double T,
                                     std::int64_t n_samples, std::uint64_t seed,
                                     std::optional<std::uint64_t> continuation_seed = std::nullopt,
                                     const std::optional<HistorySegment>& init_sigma2 = std::nullopt) {
    if (!(t > 0.0) || !(T > t)) throw config_error("ck_consistency_check: need 0 < t < T");
    if (n_samples < 2) throw config_error("ck_consistency_check: need at least 2 samples per arm");
    const double dt = F0.dt();
    const auto steps_to_t = detail::steps_in(t, dt, "ck_consistency_check: t");
    detail::steps_in(T - t, dt, "ck_consistency_check: T - t");
    const std::uint64_t cont_seed = continuation_seed ? *continuation_seed : rng::splitmix64(seed ^ 0xCC0FFEE0C0FFEEULL);

    SimConfig to_t{dt, t, n_samples, seed};
    SimConfig rest_a{dt, T - t, n_samples, seed};
    SimConfig rest_b{dt, T - t, n_samples, cont_seed};
    detail::check_sim_inputs(model, F0, to_t);

    // The leg to t is shared: arm A continues it under the original seed
    // (steps keep their global index, so the increments are those of the
    // direct 0..T run), arm B from the same window under the continuation
    // seed. Handing the original seed back as continuation_seed makes the
    // arms identical bit-for-bit.
    std::vector<double> terminal_a(static_cast<std::size_t>(n_samples));
    std::vector<double> terminal_b(static_cast<std::size_t>(n_samples));
    detail::parallel_paths(static_cast<std::size_t>(n_samples), 0, [&](std::size_t i) {
        const auto idx = static_cast<std::int64_t>(i);
        const Path leg1 = detail::euler_maruyama(model, F0, to_t, idx, 0, 0, init_sigma2);
        const HistorySegment mid = window_at(leg1, steps_to_t);
        std::optional<HistorySegment> mid_sigma2;
        if (model.uses_sigma2_history()) {
            // rebuild the realized sigma^2 window at t the same way
            HistorySegment aux = *init_sigma2;
            for (double s2 : *leg1.realized_sigma2) roll_inplace(aux, s2);
            mid_sigma2 = std::move(aux);
        }
        const Path leg_a = detail::euler_maruyama(model, mid, rest_a, idx, 0, steps_to_t, mid_sigma2);
        const Path leg_b = detail::euler_maruyama(model, mid, rest_b, idx, 0, steps_to_t, mid_sigma2);
        terminal_a[i] = leg_a.values.back();
        terminal_b[i] = leg_b.values.back();
    });

    return CKReport{ks_statistic(std::move(terminal_a), std::move(terminal_b)), n_samples, t, T};
}

}  // namespace homp
