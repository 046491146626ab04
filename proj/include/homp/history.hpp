#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "homp/errors.hpp"
#include "homp/weights.hpp"

namespace homp {

// Relative slack used when deciding whether a time lies on the window or on a
// grid node; absorbs float noise from t_end - tau style arithmetic.
inline constexpr double kGridSlack = 1e-9;

// Trailing-window state function H_t: uniform grid samples over [t_end - tau,
// t_end]. samples.front() is the value at t_end - tau, samples.back() the
// value at t_end (the current state). Immutable by convention; operations
// below return new segments.
struct HistorySegment {
    double t_end = 0.0;
    double tau = 1.0;
    std::vector<double> samples{0.0, 0.0};

    HistorySegment() = default;
    HistorySegment(double t_end_, double tau_, std::vector<double> samples_)
        : t_end(t_end_), tau(tau_), samples(std::move(samples_)) {
        if (!(tau > 0.0)) throw config_error("HistorySegment: tau must be > 0");
        if (samples.size() < 2) throw config_error("HistorySegment: need at least 2 samples");
    }

    std::size_t cells() const { return samples.size() - 1; }
    double dt() const { return tau / static_cast<double>(cells()); }
    double t_start() const { return t_end - tau; }
    double node_time(std::size_t i) const { return t_start() + static_cast<double>(i) * dt(); }
    double current() const { return samples.back(); }
};

inline HistorySegment constant_history(double value, double tau, std::size_t m, double t_end = 0.0) {
    if (m < 1) throw config_error("constant_history: m must be >= 1");
    return HistorySegment(t_end, tau, std::vector<double>(m + 1, value));
}

inline bool same_grid(const HistorySegment& a, const HistorySegment& b) {
    return a.samples.size() == b.samples.size() &&
           std::abs(a.tau - b.tau) <= kGridSlack * a.tau &&
           std::abs(a.t_end - b.t_end) <= kGridSlack * std::max(a.tau, std::abs(a.t_end));
}

// Uniform time grid t0 + i*dt, i = 0..n_steps.
struct TimeGrid {
    double t0 = 0.0;
    double dt = 1.0;
    std::int64_t n_steps = 1;

    TimeGrid() = default;
    TimeGrid(double t0_, double dt_, std::int64_t n_steps_) : t0(t0_), dt(dt_), n_steps(n_steps_) {
        if (!(dt > 0.0)) throw config_error("TimeGrid: dt must be > 0");
        if (n_steps < 1) throw config_error("TimeGrid: n_steps must be >= 1");
    }

    double time(std::int64_t i) const { return t0 + static_cast<double>(i) * dt; }
    double t_last() const { return time(n_steps); }
};

// Linear interpolation on the window, exact at grid nodes. x within
// kGridSlack of a node (in grid units) snaps to that node's sample.
inline double evaluate(const HistorySegment& H, double x) {
    if (x == H.t_end) return H.samples.back();
    const double start = H.t_start();
    if (x == start) return H.samples.front();
    const double slack = kGridSlack * H.tau;
    if (x < start - slack || x > H.t_end + slack)
        throw config_error("evaluate: x outside history window");
    const double s = (x - start) / H.dt();
    const double m = static_cast<double>(H.cells());
    const double sr = std::round(s);
    if (std::abs(s - sr) <= kGridSlack && sr >= 0.0 && sr <= m)
        return H.samples[static_cast<std::size_t>(sr)];
    if (s <= 0.0) return H.samples.front();
    if (s >= m) return H.samples.back();
    const auto i = static_cast<std::size_t>(s);
    const double frac = s - static_cast<double>(i);
    return H.samples[i] + frac * (H.samples[i + 1] - H.samples[i]);
}

namespace detail {

// Trapezoidal quadrature of f(x)*H(x) over [a, b] on the segment grid.
// Partial end cells use interpolated endpoint values, so the rule stays exact
// for the piecewise-linear interpolant when f is constant.
template <typename F>
double trapezoid_over(const HistorySegment& H, F&& f, double a, double b) {
    const double slack = kGridSlack * H.tau;
    if (a > b + slack) throw config_error("integral: a must be <= b");
    const double start = H.t_start();
    if (a < start - slack || b > H.t_end + slack)
        throw config_error("integral: bounds outside history window");
    a = std::max(a, start);
    b = std::min(b, H.t_end);
    if (b <= a) return 0.0;

    const double dt = H.dt();
    const double sa = (a - start) / dt;
    const double sb = (b - start) / dt;
    const auto m = static_cast<std::int64_t>(H.cells());
    auto ia = static_cast<std::int64_t>(std::ceil(sa - kGridSlack));
    auto ib = static_cast<std::int64_t>(std::floor(sb + kGridSlack));
    ia = std::clamp<std::int64_t>(ia, 0, m);
    ib = std::clamp<std::int64_t>(ib, 0, m);

    auto fH = [&](double x, double hx) { return f(x) * hx; };

    if (ia > ib) {  // both bounds inside one cell
        return (b - a) * 0.5 * (fH(a, evaluate(H, a)) + fH(b, evaluate(H, b)));
    }

    double acc = 0.0;
    double prev = fH(H.node_time(static_cast<std::size_t>(ia)), H.samples[static_cast<std::size_t>(ia)]);
    for (std::int64_t i = ia; i < ib; ++i) {
        const double next =
            fH(H.node_time(static_cast<std::size_t>(i + 1)), H.samples[static_cast<std::size_t>(i + 1)]);
        acc += 0.5 * (prev + next) * dt;
        prev = next;
    }

    const double ta = H.node_time(static_cast<std::size_t>(ia));
    if (ta - a > kGridSlack * dt) {
        acc += (ta - a) * 0.5 *
               (fH(a, evaluate(H, a)) + fH(ta, H.samples[static_cast<std::size_t>(ia)]));
    }
    const double tb = H.node_time(static_cast<std::size_t>(ib));
    if (b - tb > kGridSlack * dt) {
        acc += (b - tb) * 0.5 *
               (fH(tb, H.samples[static_cast<std::size_t>(ib)]) + fH(b, evaluate(H, b)));
    }
    return acc;
}

}  // namespace detail

// int_a^b H(x) dx, trapezoidal on the grid; exact for the piecewise-linear
// interpolant.
inline double moving_integral(const HistorySegment& H, double a, double b) {
    return detail::trapezoid_over(H, [](double) { return 1.0; }, a, b);
}

inline double moving_integral(const HistorySegment& H) {
    return moving_integral(H, H.t_start(), H.t_end);
}

// int_a^b w(x) H(x) dx with w evaluated at the window offset x - (t - tau).
inline double weighted_integral(const HistorySegment& H, const WeightFunction& w, double a, double b) {
    const double start = H.t_start();
    const double tau = H.tau;
    return detail::trapezoid_over(H, [&](double x) { return w.eval(x - start, tau); }, a, b);
}

inline double weighted_integral(const HistorySegment& H, const WeightFunction& w) {
    return weighted_integral(H, w, H.t_start(), H.t_end);
}

// Generic weighted form for arbitrary integrands f(x) (absolute time).
template <typename F>
double weighted_integral(const HistorySegment& H, F&& f, double a, double b) {
    return detail::trapezoid_over(H, std::forward<F>(f), a, b);
}

// Advance the window one grid step: drop the oldest sample, append new_value.
inline void roll_inplace(HistorySegment& H, double new_value) {
    const double dt = H.dt();
    std::copy(H.samples.begin() + 1, H.samples.end(), H.samples.begin());
    H.samples.back() = new_value;
    H.t_end += dt;
}

inline HistorySegment roll(HistorySegment H, double new_value) {
    roll_inplace(H, new_value);
    return H;
}

// Resample observed (times, values) onto the m+1 node grid of the trailing
// window [t_end - tau, t_end], t_end = times.back(), by linear interpolation.
// Grid nodes coinciding with an input time reproduce that value exactly.
inline HistorySegment from_samples(const std::vector<double>& times, const std::vector<double>& values,
                                   double tau, std::size_t m) {
    if (times.size() != values.size())
        throw config_error("from_samples: times/values length mismatch");
    if (times.size() < 2) throw config_error("from_samples: need at least 2 observations");
    if (!(tau > 0.0)) throw config_error("from_samples: tau must be > 0");
    if (m < 1) throw config_error("from_samples: m must be >= 1");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw config_error("from_samples: times must be strictly increasing");

    const double t_end = times.back();
    const double start = t_end - tau;
    const double slack = kGridSlack * tau;
    if (times.front() > start + slack)
        throw config_error("from_samples: observations do not cover the tau window");

    const double dt = tau / static_cast<double>(m);
    std::vector<double> grid(m + 1);
    for (std::size_t j = 0; j <= m; ++j) {
        const double x = (j == m) ? t_end : start + static_cast<double>(j) * dt;
        if (x <= times.front()) {
            grid[j] = values.front();
            continue;
        }
        // largest i with times[i] <= x
        const auto it = std::upper_bound(times.begin(), times.end(), x);
        const auto i = static_cast<std::size_t>(it - times.begin()) - 1;
        if (i + 1 >= times.size()) {
            grid[j] = values.back();
            continue;
        }
        if (x == times[i]) {
            grid[j] = values[i];
            continue;
        }
        const double frac = (x - times[i]) / (times[i + 1] - times[i]);
        grid[j] = values[i] + frac * (values[i + 1] - values[i]);
    }
    return HistorySegment(t_end, tau, std::move(grid));
}

// Numeric Gateaux derivative of a pointwise transformation V along direction
// h: node-wise quotient (V(H + eps*h) - V(H)) / eps. Approximates V'(F)*h; for
// V(F) = F^a the eps -> 0 limit is a*F^(a-1)*h independent of h.
template <typename F>
HistorySegment gateaux_derivative(F&& V, const HistorySegment& H, const HistorySegment& h, double eps) {
    if (!(eps > 0.0)) throw config_error("gateaux_derivative: eps must be > 0");
    if (!same_grid(H, h)) throw config_error("gateaux_derivative: direction h not on the grid of H");
    std::vector<double> out(H.samples.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double base = H.samples[i];
        out[i] = (V(base + eps * h.samples[i]) - V(base)) / eps;
    }
    return HistorySegment(H.t_end, H.tau, std::move(out));
}

}  // namespace homp
