#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "homp/errors.hpp"

namespace homp {

struct OptimResult {
    std::vector<double> x;
    double f = -std::numeric_limits<double>::infinity();
    std::int64_t n_evals = 0;
    bool converged = false;
    std::vector<double> best_trace;  // best-so-far objective after each evaluation
};

namespace detail {

inline void clip_to_bounds(std::vector<double>& x, const std::vector<double>& lo, const std::vector<double>& hi) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
}

}  // namespace detail

// Nelder-Mead simplex maximization with box bounds enforced by coordinate
// clipping. Coefficients: reflection 1, expansion 2, contraction 0.5,
// shrink 0.5. Non-finite objective values are treated as -inf.
inline OptimResult nelder_mead_maximize(const std::function<double(const std::vector<double>&)>& objective,
                                        std::vector<double> x0, const std::vector<double>& lo,
                                        const std::vector<double>& hi, std::int64_t max_evals,
                                        double f_tol = 1e-9, double x_tol = 1e-9) {
    const std::size_t n = x0.size();
    if (n == 0) throw config_error("nelder_mead: empty parameter vector");
    if (lo.size() != n || hi.size() != n) throw config_error("nelder_mead: bounds size mismatch");
    for (std::size_t i = 0; i < n; ++i)
        if (!(lo[i] <= hi[i])) throw config_error("nelder_mead: lower bound above upper bound");
    if (max_evals < 1) throw config_error("nelder_mead: max_evals must be >= 1");

    OptimResult result;
    result.best_trace.reserve(static_cast<std::size_t>(max_evals));

    auto eval = [&](std::vector<double> x) -> std::pair<std::vector<double>, double> {
        detail::clip_to_bounds(x, lo, hi);
        double f = -std::numeric_limits<double>::infinity();
        if (result.n_evals < max_evals) {
            ++result.n_evals;
            const double raw = objective(x);
            f = std::isfinite(raw) ? raw : -std::numeric_limits<double>::infinity();
            const double prev = result.best_trace.empty() ? -std::numeric_limits<double>::infinity()
                                                          : result.best_trace.back();
            result.best_trace.push_back(std::max(prev, f));
            if (f > result.f || result.x.empty()) {
                result.f = f;
                result.x = x;
            }
        }
        return {std::move(x), f};
    };

    detail::clip_to_bounds(x0, lo, hi);

    // initial simplex: x0 plus per-coordinate nudges
    std::vector<std::vector<double>> X;
    std::vector<double> F;
    {
        auto [x, f] = eval(x0);
        X.push_back(std::move(x));
        F.push_back(f);
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> v = X[0];
        double step = 0.05 * std::max(1.0, std::abs(v[i]));
        if (v[i] + step > hi[i]) step = -step;  // nudge inward at the upper bound
        v[i] += step;
        auto [x, f] = eval(std::move(v));
        X.push_back(std::move(x));
        F.push_back(f);
    }

    auto order = [&] {
        std::vector<std::size_t> idx(X.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return F[a] > F[b]; });
        std::vector<std::vector<double>> X2(X.size());
        std::vector<double> F2(F.size());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            X2[i] = X[idx[i]];
            F2[i] = F[idx[i]];
        }
        X.swap(X2);
        F.swap(F2);
    };

    constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;
    const std::size_t worst = n;

    while (result.n_evals < max_evals) {
        order();

        // convergence: objective spread and simplex extent both small
        const double f_spread = std::abs(F[0] - F[worst]);
        double x_extent = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            x_extent = std::max(x_extent, std::abs(X[0][i] - X[worst][i]) / std::max(1.0, std::abs(X[0][i])));
        if (std::isfinite(F[0]) && f_spread <= f_tol * (1.0 + std::abs(F[0])) && x_extent <= x_tol) {
            result.converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t j = 0; j < worst; ++j)
            for (std::size_t i = 0; i < n; ++i) centroid[i] += X[j][i];
        for (std::size_t i = 0; i < n; ++i) centroid[i] /= static_cast<double>(worst);

        auto along = [&](double coef) {
            std::vector<double> v(n);
            for (std::size_t i = 0; i < n; ++i) v[i] = centroid[i] + coef * (centroid[i] - X[worst][i]);
            return v;
        };

        auto [xr, fr] = eval(along(kReflect));
        if (fr > F[0]) {
            auto [xe, fe] = eval(along(kExpand));
            if (fe > fr) {
                X[worst] = std::move(xe);
                F[worst] = fe;
            } else {
                X[worst] = std::move(xr);
                F[worst] = fr;
            }
        } else if (fr > F[worst - 1]) {
            X[worst] = std::move(xr);
            F[worst] = fr;
        } else {
            const bool outside = fr > F[worst];
            auto [xc, fc] = eval(outside ? along(kReflect * kContract) : along(-kContract));
            if (fc > (outside ? fr : F[worst])) {
                X[worst] = std::move(xc);
                F[worst] = fc;
            } else {
                for (std::size_t j = 1; j <= worst; ++j) {
                    std::vector<double> v(n);
                    for (std::size_t i = 0; i < n; ++i) v[i] = X[0][i] + kShrink * (X[j][i] - X[0][i]);
                    auto [xs, fs] = eval(std::move(v));
                    X[j] = std::move(xs);
                    F[j] = fs;
                }
            }
        }
    }

    if (!std::isfinite(result.f)) throw numeric_error("nelder_mead: no finite objective value found");
    return result;  // result.x/f track the best evaluation ever made
}

// Exhaustive evaluation of a user-supplied lattice (Cartesian product of
// per-parameter value lists).
inline OptimResult grid_search_maximize(const std::function<double(const std::vector<double>&)>& objective,
                                        const std::vector<std::vector<double>>& lattice, std::int64_t max_evals) {
    if (lattice.empty()) throw config_error("grid_search: empty lattice");
    for (const auto& axis : lattice)
        if (axis.empty()) throw config_error("grid_search: lattice axis with no values");

    OptimResult result;
    std::vector<std::size_t> idx(lattice.size(), 0);
    std::vector<double> x(lattice.size());
    bool done = false;
    while (!done && result.n_evals < max_evals) {
        for (std::size_t i = 0; i < lattice.size(); ++i) x[i] = lattice[i][idx[i]];
        ++result.n_evals;
        const double raw = objective(x);
        const double f = std::isfinite(raw) ? raw : -std::numeric_limits<double>::infinity();
        const double prev = result.best_trace.empty() ? -std::numeric_limits<double>::infinity()
                                                      : result.best_trace.back();
        result.best_trace.push_back(std::max(prev, f));
        if (f > result.f || result.x.empty()) {
            result.f = f;
            result.x = x;
        }
        // odometer increment
        std::size_t i = 0;
        for (; i < idx.size(); ++i) {
            if (++idx[i] < lattice[i].size()) break;
            idx[i] = 0;
        }
        done = (i == idx.size());
    }
    result.converged = done;  // visited the whole lattice
    if (!std::isfinite(result.f)) throw numeric_error("grid_search: no finite objective value found");
    return result;
}

}  // namespace homp
