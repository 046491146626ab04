#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "homp/errors.hpp"
#include "homp/functional.hpp"
#include "homp/history.hpp"
#include "homp/weights.hpp"

namespace homp {

// A HOMP of order tau: dy = drift(H_t) dt + diffusion(H_t) dW, with named
// parameters resolved when the expressions are evaluated.
struct ModelSpec {
    double tau = 1.0;
    FunctionalExpr drift;
    FunctionalExpr diffusion;
    ParamVector params;

    ModelSpec() = default;
    ModelSpec(double tau_, FunctionalExpr drift_, FunctionalExpr diffusion_, ParamVector params_ = {})
        : tau(tau_), drift(std::move(drift_)), diffusion(std::move(diffusion_)), params(std::move(params_)) {
        if (!(tau > 0.0)) throw config_error("ModelSpec: tau must be > 0");
        for (const auto& expr : {drift, diffusion})
            for (const auto& name : expr.param_names())
                if (!find_param(params, name))
                    throw config_error("ModelSpec: expression references unknown parameter '" + name + "'");
    }

    bool uses_sigma2_history() const { return drift.references_sigma2() || diffusion.references_sigma2(); }

    ModelSpec with_params(const std::vector<double>& values) const {
        if (values.size() != params.size())
            throw config_error("with_params: value count does not match parameter count");
        ModelSpec m = *this;
        for (std::size_t i = 0; i < values.size(); ++i) m.params[i].value = values[i];
        return m;
    }

    double param(const std::string& name) const {
        const ParamSpec* p = find_param(params, name);
        if (!p) throw config_error("ModelSpec: no parameter named '" + name + "'");
        return p->value;
    }
};

// dy = alpha * int_{t-tau}^t H dx dt + beta * int_{t-tau}^t H dx dW.
// The moving-average analogue of geometric Brownian motion.
inline ModelSpec make_ho_gbm(double alpha, double beta, double tau) {
    if (!(tau > 0.0)) throw config_error("make_ho_gbm: tau must be > 0");
    ParamVector params{{"alpha", alpha}, {"beta", beta, 0.0}};
    return ModelSpec(tau, FunctionalExpr::param("alpha") * FunctionalExpr::moving_integral(),
                     FunctionalExpr::param("beta") * FunctionalExpr::moving_integral(), std::move(params));
}

// dy = -theta * int_{t-tau}^t H dx dt + sigma dW. Mean reversion against the
// trailing moving average rather than the spot value.
inline ModelSpec make_ho_ou(double theta, double sigma, double tau) {
    if (!(tau > 0.0)) throw config_error("make_ho_ou: tau must be > 0");
    if (sigma < 0.0) throw config_error("make_ho_ou: sigma must be >= 0");
    ParamVector params{{"theta", theta}, {"sigma", sigma, 0.0}};
    return ModelSpec(tau, -(FunctionalExpr::param("theta") * FunctionalExpr::moving_integral()),
                     FunctionalExpr::param("sigma"), std::move(params));
}

// Exponentially weighted moving-average volatility:
//   diffusion = ( int_{t-tau}^t lambda^(x-(t-tau)) sigma^2(x) dx )^(1/2)
// where sigma^2(x) is the model's own realized squared diffusion, kept by the
// simulator as an auxiliary rolling history. As printed, lambda < 1 weights
// older values higher; reverse_weights switches to lambda^(t-x).
//
// lambda is structural (baked into the weight like tau), not a named
// parameter: with_params cannot rebind it.
inline ModelSpec make_ewma_vol(double lambda, double tau, FunctionalExpr drift = FunctionalExpr::constant(0.0),
                               bool reverse_weights = false, ParamVector extra_params = {}) {
    if (!(tau > 0.0)) throw config_error("make_ewma_vol: tau must be > 0");
    if (!(lambda > 0.0) || lambda == 1.0) throw config_error("make_ewma_vol: lambda must be > 0 and != 1");
    auto diffusion = FunctionalExpr::sqrt(FunctionalExpr::weighted_moving_integral(
        WeightFunction::exponential(lambda, reverse_weights), HistorySource::realized_sigma2));
    return ModelSpec(tau, std::move(drift), std::move(diffusion), std::move(extra_params));
}

// Recursive evaluation of an expression against a state history.
inline double eval_functional(const FunctionalExpr& expr, const HistorySegment& H, const ParamVector& params,
                              const HistorySegment* sigma2_history = nullptr) {
    EvalContext ctx{&H, sigma2_history, &params};
    return expr.eval(ctx);
}

namespace detail {

inline void check_tau(const ModelSpec& model, const HistorySegment& H) {
    if (std::abs(H.tau - model.tau) > kGridSlack * model.tau)
        throw config_error("model: history window tau does not match model tau");
}

}  // namespace detail

inline double drift(const ModelSpec& model, const HistorySegment& H,
                    const HistorySegment* sigma2_history = nullptr) {
    detail::check_tau(model, H);
    const double v = eval_functional(model.drift, H, model.params, sigma2_history);
    if (!std::isfinite(v)) throw numeric_error("drift: non-finite value");
    return v;
}

// Diffusion values in [-1e-12, 0) are clamped to 0; below that is an error.
inline double diffusion(const ModelSpec& model, const HistorySegment& H,
                        const HistorySegment* sigma2_history = nullptr) {
    detail::check_tau(model, H);
    double v = eval_functional(model.diffusion, H, model.params, sigma2_history);
    if (!std::isfinite(v)) throw numeric_error("diffusion: non-finite value");
    if (v < 0.0) {
        if (v < -1e-12) throw numeric_error("diffusion: negative value beyond tolerance");
        v = 0.0;
    }
    return v;
}

}  // namespace homp
