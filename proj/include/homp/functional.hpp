#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "homp/errors.hpp"
#include "homp/history.hpp"
#include "homp/weights.hpp"

namespace homp {

// Named parameter with box bounds, the entries of the model parameter vector.
struct ParamSpec {
    std::string name;
    double value = 0.0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
};

using ParamVector = std::vector<ParamSpec>;

inline const ParamSpec* find_param(const ParamVector& params, const std::string& name) {
    for (const auto& p : params)
        if (p.name == name) return &p;
    return nullptr;
}

// Which rolling segment a history leaf reads: the state itself, or the
// auxiliary realized squared-diffusion history used by EWMA-style models.
enum class HistorySource { state, realized_sigma2 };

// Everything an expression needs at evaluation time. `sigma2` may be null
// for models that never reference the realized volatility history.
struct EvalContext {
    const HistorySegment* state = nullptr;
    const HistorySegment* sigma2 = nullptr;
    const ParamVector* params = nullptr;
};

// Expression tree over history functionals. Leaves: Const, Param,
// CurrentValue (H_t(t)), MovingIntegral (int_{t-tau}^t H dx),
// WeightedMovingIntegral(w) (int_{t-tau}^t w(x) H(x) dx). Nodes: Add, Mul,
// Neg, Pow (constant exponent), Sqrt. Immutable, structurally shared.
class FunctionalExpr {
    enum class Kind { constant, param, current_value, moving_integral, weighted_integral, add, mul, neg, pow, sqrt_ };

    struct Node;
    using NodePtr = std::shared_ptr<const Node>;

    struct Node {
        Kind kind = Kind::constant;
        double value = 0.0;  // Const payload or Pow exponent
        std::string name;    // Param payload
        WeightFunction weight = WeightFunction::constant(1.0);
        // Non-empty: the weight's scalars resolve from these named parameters
        // at evaluation time (exponential: [lambda], polynomial: coeffs).
        std::vector<std::string> weight_params;
        bool weight_reverse = false;
        HistorySource source = HistorySource::state;
        NodePtr lhs, rhs;
    };

    static constexpr int kMaxDepth = 16;
    // Sqrt / diffusion arguments this far below zero are treated as float
    // noise and clamped; anything lower is an error.
    static constexpr double kNegativeTol = 1e-12;

  public:
    FunctionalExpr() : FunctionalExpr(constant(0.0)) {}

    static FunctionalExpr constant(double c) {
        Node n;
        n.kind = Kind::constant;
        n.value = c;
        return make(std::move(n));
    }

    static FunctionalExpr param(std::string name) {
        Node n;
        n.kind = Kind::param;
        n.name = std::move(name);
        return make(std::move(n));
    }

    static FunctionalExpr current_value() {
        Node n;
        n.kind = Kind::current_value;
        return make(std::move(n));
    }

    static FunctionalExpr moving_integral() {
        Node n;
        n.kind = Kind::moving_integral;
        return make(std::move(n));
    }

    static FunctionalExpr weighted_moving_integral(WeightFunction w,
                                                   HistorySource source = HistorySource::state) {
        Node n;
        n.kind = Kind::weighted_integral;
        n.weight = std::move(w);
        n.source = source;
        return make(std::move(n));
    }

    // Parametric weight bases for fitting smooth parameter functions: the
    // weight scalars are named model parameters resolved per evaluation.
    struct ExponentialWeightParam {
        std::string lambda;
        bool reverse = false;
    };
    struct PolynomialWeightParams {
        std::vector<std::string> coeffs;  // c0..cd over normalized window position
    };

    static FunctionalExpr weighted_moving_integral(ExponentialWeightParam w,
                                                   HistorySource source = HistorySource::state) {
        if (w.lambda.empty()) throw config_error("weighted_moving_integral: empty lambda parameter name");
        Node n;
        n.kind = Kind::weighted_integral;
        n.weight_params = {std::move(w.lambda)};
        n.weight_reverse = w.reverse;
        n.weight = WeightFunction::exponential(0.5, w.reverse);  // placeholder form carrier
        n.source = source;
        return make(std::move(n));
    }

    static FunctionalExpr weighted_moving_integral(PolynomialWeightParams w,
                                                   HistorySource source = HistorySource::state) {
        if (w.coeffs.empty() || w.coeffs.size() > 11)
            throw config_error("weighted_moving_integral: polynomial needs 1..11 coefficient names");
        Node n;
        n.kind = Kind::weighted_integral;
        n.weight_params = std::move(w.coeffs);
        n.weight = WeightFunction::polynomial({0.0});  // placeholder form carrier
        n.source = source;
        return make(std::move(n));
    }

    // (1/tau) * MovingIntegral, the normalized form that recovers the
    // classical Markov coefficients as tau -> 0.
    static FunctionalExpr moving_mean(double tau) {
        if (!(tau > 0.0)) throw config_error("moving_mean: tau must be > 0");
        return constant(1.0 / tau) * moving_integral();
    }

    static FunctionalExpr pow(FunctionalExpr base, double exponent) {
        Node n;
        n.kind = Kind::pow;
        n.value = exponent;
        n.lhs = base.root_;
        return make(std::move(n));
    }

    static FunctionalExpr sqrt(FunctionalExpr arg) {
        Node n;
        n.kind = Kind::sqrt_;
        n.lhs = arg.root_;
        return make(std::move(n));
    }

    friend FunctionalExpr operator+(FunctionalExpr a, FunctionalExpr b) {
        Node n;
        n.kind = Kind::add;
        n.lhs = a.root_;
        n.rhs = b.root_;
        return make(std::move(n));
    }

    friend FunctionalExpr operator*(FunctionalExpr a, FunctionalExpr b) {
        Node n;
        n.kind = Kind::mul;
        n.lhs = a.root_;
        n.rhs = b.root_;
        return make(std::move(n));
    }

    friend FunctionalExpr operator-(FunctionalExpr a) {
        Node n;
        n.kind = Kind::neg;
        n.lhs = a.root_;
        return make(std::move(n));
    }

    friend FunctionalExpr operator-(FunctionalExpr a, FunctionalExpr b) { return std::move(a) + (-std::move(b)); }

    double eval(const EvalContext& ctx) const { return eval_node(*root_, ctx); }

    int depth() const { return node_depth(*root_); }

    bool references_sigma2() const { return node_references(*root_, HistorySource::realized_sigma2); }

    // Every Param name reachable from this expression, in first-seen order.
    std::vector<std::string> param_names() const {
        std::vector<std::string> out;
        collect_params(*root_, out);
        return out;
    }

  private:
    explicit FunctionalExpr(NodePtr root) : root_(std::move(root)) {}

    static FunctionalExpr make(Node&& n) {
        FunctionalExpr e{std::make_shared<const Node>(std::move(n))};
        if (e.depth() > kMaxDepth) throw config_error("FunctionalExpr: tree depth exceeds 16");
        return e;
    }

    static int node_depth(const Node& n) {
        int d = 0;
        if (n.lhs) d = node_depth(*n.lhs);
        if (n.rhs) d = std::max(d, node_depth(*n.rhs));
        return d + 1;
    }

    static bool node_references(const Node& n, HistorySource src) {
        if ((n.kind == Kind::weighted_integral && n.source == src) ||
            ((n.kind == Kind::current_value || n.kind == Kind::moving_integral) && src == HistorySource::state))
            return true;
        if (n.lhs && node_references(*n.lhs, src)) return true;
        if (n.rhs && node_references(*n.rhs, src)) return true;
        return false;
    }

    static void collect_params(const Node& n, std::vector<std::string>& out) {
        auto push_unique = [&out](const std::string& s) {
            for (const auto& seen : out)
                if (seen == s) return;
            out.push_back(s);
        };
        if (n.kind == Kind::param) {
            push_unique(n.name);
            return;
        }
        for (const auto& s : n.weight_params) push_unique(s);
        if (n.lhs) collect_params(*n.lhs, out);
        if (n.rhs) collect_params(*n.rhs, out);
    }

    static const HistorySegment& segment_for(const Node& n, const EvalContext& ctx) {
        if (n.source == HistorySource::realized_sigma2) {
            if (!ctx.sigma2)
                throw config_error("eval: expression reads the realized sigma^2 history but none was provided");
            return *ctx.sigma2;
        }
        if (!ctx.state) throw config_error("eval: no state history provided");
        return *ctx.state;
    }

    static double eval_node(const Node& n, const EvalContext& ctx) {
        switch (n.kind) {
            case Kind::constant:
                return n.value;
            case Kind::param: {
                const ParamSpec* p = ctx.params ? find_param(*ctx.params, n.name) : nullptr;
                if (!p) throw config_error("eval: unresolved parameter '" + n.name + "'");
                return p->value;
            }
            case Kind::current_value: {
                if (!ctx.state) throw config_error("eval: no state history provided");
                return ctx.state->current();
            }
            case Kind::moving_integral: {
                if (!ctx.state) throw config_error("eval: no state history provided");
                return ::homp::moving_integral(*ctx.state);
            }
            case Kind::weighted_integral: {
                const HistorySegment& H = segment_for(n, ctx);
                if (n.weight_params.empty()) return ::homp::weighted_integral(H, n.weight);
                auto resolve = [&](const std::string& nm) {
                    const ParamSpec* p = ctx.params ? find_param(*ctx.params, nm) : nullptr;
                    if (!p) throw config_error("eval: unresolved parameter '" + nm + "'");
                    return p->value;
                };
                if (n.weight.form() == WeightFunction::Form::exponential) {
                    const double lambda = resolve(n.weight_params[0]);
                    if (!(lambda > 0.0) || lambda == 1.0)
                        throw numeric_error("eval: parametric exponential weight needs lambda > 0 and != 1");
                    return ::homp::weighted_integral(H, WeightFunction::exponential(lambda, n.weight_reverse));
                }
                std::vector<double> coeffs(n.weight_params.size());
                for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] = resolve(n.weight_params[i]);
                return ::homp::weighted_integral(H, WeightFunction::polynomial(std::move(coeffs)));
            }
            case Kind::add:
                return eval_node(*n.lhs, ctx) + eval_node(*n.rhs, ctx);
            case Kind::mul:
                return eval_node(*n.lhs, ctx) * eval_node(*n.rhs, ctx);
            case Kind::neg:
                return -eval_node(*n.lhs, ctx);
            case Kind::pow:
                return std::pow(eval_node(*n.lhs, ctx), n.value);
            case Kind::sqrt_: {
                double a = eval_node(*n.lhs, ctx);
                if (a < 0.0) {
                    if (a < -kNegativeTol) throw numeric_error("eval: Sqrt of negative argument");
                    a = 0.0;
                }
                return std::sqrt(a);
            }
        }
        throw numeric_error("eval: corrupt expression node");
    }

    NodePtr root_;

    friend struct ExprAccess;
};

// Read-only structural view used by the JSON (de)serializer.
struct ExprView {
    enum class Kind { constant, param, current_value, moving_integral, weighted_integral, add, mul, neg, pow, sqrt_ };

    Kind kind;
    double value = 0.0;
    std::string name;
    WeightFunction weight = WeightFunction::constant(1.0);
    std::vector<std::string> weight_params;
    bool weight_reverse = false;
    HistorySource source = HistorySource::state;
    std::optional<FunctionalExpr> lhs, rhs;
};

struct ExprAccess {
    static ExprView view(const FunctionalExpr& e) {
        const auto& n = *e.root_;
        ExprView v{static_cast<ExprView::Kind>(static_cast<int>(n.kind)),
                   n.value,
                   n.name,
                   n.weight,
                   n.weight_params,
                   n.weight_reverse,
                   n.source,
                   {},
                   {}};
        if (n.lhs) v.lhs = FunctionalExpr(n.lhs);
        if (n.rhs) v.rhs = FunctionalExpr(n.rhs);
        return v;
    }
};

}  // namespace homp
