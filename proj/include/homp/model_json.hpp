#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "homp/errors.hpp"
#include "homp/functional.hpp"
#include "homp/model.hpp"
#include "homp/weights.hpp"

// JSON model documents: the CLI's on-disk description of a ModelSpec. Named
// families mirror the library constructors; "custom" carries an explicit
// expression tree per coefficient.
//
//   {"family":"ho_ou","tau":1.0,"params":{"theta":0.5,"sigma":0.2}}
//   {"family":"custom","tau":1.0,
//    "params":{"theta":{"value":0.5,"lower":0.0,"upper":10.0}},
//    "drift":{"op":"neg","arg":{"op":"mul","args":[
//         {"op":"param","name":"theta"},{"op":"moving_integral"}]}},
//    "diffusion":{"op":"const","value":0.2}}

namespace homp {
namespace json_io {

using nlohmann::json;

inline json weight_to_json(const WeightFunction& w) {
    switch (w.form()) {
        case WeightFunction::Form::constant:
            return {{"form", "constant"}, {"c", w.coeffs()[0]}};
        case WeightFunction::Form::exponential:
            return {{"form", "exponential"}, {"lambda", w.lambda()}, {"reverse", w.reversed()}};
        case WeightFunction::Form::polynomial:
            return {{"form", "polynomial"}, {"coeffs", w.coeffs()}};
    }
    throw config_error("weight_to_json: corrupt weight form");
}

inline WeightFunction weight_from_json(const json& j) {
    const std::string form = j.at("form").get<std::string>();
    if (form == "constant") return WeightFunction::constant(j.at("c").get<double>());
    if (form == "exponential")
        return WeightFunction::exponential(j.at("lambda").get<double>(), j.value("reverse", false));
    if (form == "polynomial") return WeightFunction::polynomial(j.at("coeffs").get<std::vector<double>>());
    throw config_error("model document: unknown weight form '" + form + "'");
}

inline json expr_to_json(const FunctionalExpr& e) {
    const ExprView v = ExprAccess::view(e);
    using K = ExprView::Kind;
    switch (v.kind) {
        case K::constant:
            return {{"op", "const"}, {"value", v.value}};
        case K::param:
            return {{"op", "param"}, {"name", v.name}};
        case K::current_value:
            return {{"op", "current_value"}};
        case K::moving_integral:
            return {{"op", "moving_integral"}};
        case K::weighted_integral: {
            json weight;
            if (v.weight_params.empty()) {
                weight = weight_to_json(v.weight);
            } else if (v.weight.form() == WeightFunction::Form::exponential) {
                weight = {{"form", "exponential"}, {"lambda_param", v.weight_params[0]}, {"reverse", v.weight_reverse}};
            } else {
                weight = {{"form", "polynomial"}, {"coeff_params", v.weight_params}};
            }
            return {{"op", "weighted_moving_integral"},
                    {"weight", std::move(weight)},
                    {"source", v.source == HistorySource::realized_sigma2 ? "sigma2" : "state"}};
        }
        case K::add:
            return {{"op", "add"}, {"args", json::array({expr_to_json(*v.lhs), expr_to_json(*v.rhs)})}};
        case K::mul:
            return {{"op", "mul"}, {"args", json::array({expr_to_json(*v.lhs), expr_to_json(*v.rhs)})}};
        case K::neg:
            return {{"op", "neg"}, {"arg", expr_to_json(*v.lhs)}};
        case K::pow:
            return {{"op", "pow"}, {"arg", expr_to_json(*v.lhs)}, {"exponent", v.value}};
        case K::sqrt_:
            return {{"op", "sqrt"}, {"arg", expr_to_json(*v.lhs)}};
    }
    throw config_error("expr_to_json: corrupt expression node");
}

inline FunctionalExpr expr_from_json(const json& j) {
    if (!j.is_object() || !j.contains("op"))
        throw config_error("model document: expression node must be an object with an 'op' field");
    const std::string op = j.at("op").get<std::string>();
    if (op == "const") return FunctionalExpr::constant(j.at("value").get<double>());
    if (op == "param") return FunctionalExpr::param(j.at("name").get<std::string>());
    if (op == "current_value") return FunctionalExpr::current_value();
    if (op == "moving_integral") return FunctionalExpr::moving_integral();
    if (op == "weighted_moving_integral") {
        const std::string source_name = j.value("source", "state");
        if (source_name != "state" && source_name != "sigma2")
            throw config_error("model document: weighted integral source must be 'state' or 'sigma2'");
        const auto source = source_name == "sigma2" ? HistorySource::realized_sigma2 : HistorySource::state;
        const json& w = j.at("weight");
        if (w.contains("lambda_param"))
            return FunctionalExpr::weighted_moving_integral(
                FunctionalExpr::ExponentialWeightParam{w.at("lambda_param").get<std::string>(),
                                                       w.value("reverse", false)},
                source);
        if (w.contains("coeff_params"))
            return FunctionalExpr::weighted_moving_integral(
                FunctionalExpr::PolynomialWeightParams{w.at("coeff_params").get<std::vector<std::string>>()},
                source);
        return FunctionalExpr::weighted_moving_integral(weight_from_json(w), source);
    }
    if (op == "add" || op == "mul") {
        const json& args = j.at("args");
        if (!args.is_array() || args.size() < 2)
            throw config_error("model document: '" + op + "' needs an args array of at least 2");
        FunctionalExpr acc = expr_from_json(args[0]);
        for (std::size_t i = 1; i < args.size(); ++i)
            acc = (op == "add") ? std::move(acc) + expr_from_json(args[i])
                                : std::move(acc) * expr_from_json(args[i]);
        return acc;
    }
    if (op == "neg") return -expr_from_json(j.at("arg"));
    if (op == "pow") return FunctionalExpr::pow(expr_from_json(j.at("arg")), j.at("exponent").get<double>());
    if (op == "sqrt") return FunctionalExpr::sqrt(expr_from_json(j.at("arg")));
    throw config_error("model document: unknown expression op '" + op + "'");
}

inline json params_to_json(const ParamVector& params) {
    json out = json::object();
    for (const auto& p : params) {
        json entry = {{"value", p.value}};
        if (std::isfinite(p.lower)) entry["lower"] = p.lower;
        if (std::isfinite(p.upper)) entry["upper"] = p.upper;
        out[p.name] = std::move(entry);
    }
    return out;
}

inline ParamVector params_from_json(const json& j) {
    ParamVector out;
    if (j.is_null()) return out;
    if (!j.is_object()) throw config_error("model document: 'params' must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        ParamSpec p;
        p.name = it.key();
        if (it.value().is_number()) {
            p.value = it.value().get<double>();
        } else if (it.value().is_object()) {
            p.value = it.value().at("value").get<double>();
            if (it.value().contains("lower")) p.lower = it.value().at("lower").get<double>();
            if (it.value().contains("upper")) p.upper = it.value().at("upper").get<double>();
        } else {
            throw config_error("model document: parameter '" + p.name + "' must be a number or object");
        }
        out.push_back(std::move(p));
    }
    return out;
}

inline json model_to_json(const ModelSpec& model) {
    // emitted in explicit-tree form; family constructors parse back to the
    // same trees, so round-trips stay faithful
    return {{"family", "custom"},
            {"tau", model.tau},
            {"params", params_to_json(model.params)},
            {"drift", expr_to_json(model.drift)},
            {"diffusion", expr_to_json(model.diffusion)}};
}

inline ModelSpec model_from_json(const json& j) {
    if (!j.is_object()) throw config_error("model document: must be a JSON object");
    const std::string family = j.at("family").get<std::string>();
    const double tau = j.at("tau").get<double>();
    ParamVector params = params_from_json(j.value("params", json::object()));

    auto param_value = [&](const std::string& name, std::optional<double> fallback = std::nullopt) {
        if (const ParamSpec* p = find_param(params, name)) return p->value;
        if (fallback) return *fallback;
        throw config_error("model document: family '" + family + "' needs parameter '" + name + "'");
    };

    if (family == "ho_gbm") {
        ModelSpec m = make_ho_gbm(param_value("alpha"), param_value("beta"), tau);
        for (auto& p : m.params)
            if (const ParamSpec* u = find_param(params, p.name)) {
                p.lower = u->lower;
                p.upper = u->upper;
            }
        return m;
    }
    if (family == "ho_ou") {
        ModelSpec m = make_ho_ou(param_value("theta"), param_value("sigma"), tau);
        for (auto& p : m.params)
            if (const ParamSpec* u = find_param(params, p.name)) {
                p.lower = u->lower;
                p.upper = u->upper;
            }
        return m;
    }
    if (family == "ewma_vol") {
        FunctionalExpr drift = j.contains("drift") ? expr_from_json(j.at("drift")) : FunctionalExpr::constant(0.0);
        ParamVector extra;
        for (const auto& p : params)
            if (p.name != "lambda") extra.push_back(p);
        ModelSpec m = make_ewma_vol(param_value("lambda"), tau, std::move(drift), j.value("reverse_weights", false),
                                    std::move(extra));
        for (auto& p : m.params)
            if (const ParamSpec* u = find_param(params, p.name)) {
                p.lower = u->lower;
                p.upper = u->upper;
            }
        return m;
    }
    if (family == "custom") {
        if (!j.contains("drift") || !j.contains("diffusion"))
            throw config_error("model document: custom family needs 'drift' and 'diffusion' expressions");
        return ModelSpec(tau, expr_from_json(j.at("drift")), expr_from_json(j.at("diffusion")), std::move(params));
    }
    throw config_error("model document: unknown family '" + family + "'");
}

}  // namespace json_io
}  // namespace homp
