#include <catch2/catch.hpp>

#include <cmath>
#include <vector>

#include "homp/history.hpp"
#include "homp/model.hpp"
#include "homp/rng.hpp"

using namespace homp;

namespace {

HistorySegment ramp_history(std::size_t m) {  // H(x) = x on [0, 1]
    HistorySegment proto(1.0, 1.0, std::vector<double>(m + 1, 0.0));
    std::vector<double> vs(m + 1);
    for (std::size_t i = 0; i <= m; ++i) vs[i] = proto.node_time(i);
    return HistorySegment(1.0, 1.0, vs);
}

}  // namespace

TEST_CASE("make_ho_gbm: moving-integral drift and diffusion") {
    SECTION("constant history") {
        const auto model = make_ho_gbm(0.1, 0.3, 0.5);
        const auto H = constant_history(2.0, 0.5, 10, 0.0);
        REQUIRE(drift(model, H) == Approx(0.1 * 2.0 * 0.5).epsilon(1e-14));
    }
    SECTION("beta = 0 kills the noise") {
        const auto model = make_ho_gbm(0.1, 0.0, 1.0);
        const auto H = constant_history(5.0, 1.0, 4, 0.0);
        REQUIRE(diffusion(model, H) == 0.0);
    }
    SECTION("ramp history") {
        const auto model = make_ho_gbm(1.0, 1.0, 1.0);
        const auto H = ramp_history(64);
        REQUIRE(drift(model, H) == Approx(0.5).epsilon(1e-13));
        REQUIRE(diffusion(model, H) == Approx(0.5).epsilon(1e-13));
    }
    SECTION("absorbing at zero") {
        const auto model = make_ho_gbm(0.1, 0.3, 1.0);
        const auto H = constant_history(0.0, 1.0, 8, 0.0);
        REQUIRE(drift(model, H) == 0.0);
        REQUIRE(diffusion(model, H) == 0.0);
    }
    SECTION("rejects non-positive tau") { REQUIRE_THROWS_AS(make_ho_gbm(0.1, 0.3, 0.0), config_error); }
}

TEST_CASE("make_ho_ou: mean reversion against the moving average") {
    SECTION("constant history") {
        const auto model = make_ho_ou(2.0, 0.2, 1.0);
        const auto H = constant_history(3.0, 1.0, 12, 0.0);
        REQUIRE(drift(model, H) == Approx(-6.0).epsilon(1e-14));
        REQUIRE(diffusion(model, H) == 0.2);
    }
    SECTION("theta = 0 gives zero drift for any history") {
        const auto model = make_ho_ou(0.0, 0.1, 1.0);
        const std::uint64_t key = rng::make_key(5, 0);
        for (int rep = 0; rep < 10; ++rep) {
            std::vector<double> vs(9);
            for (std::size_t i = 0; i < vs.size(); ++i) vs[i] = rng::uniform(key, rep, i, -4.0, 4.0);
            REQUIRE(drift(model, HistorySegment(1.0, 1.0, vs)) == 0.0);
        }
    }
    SECTION("rejects negative sigma") { REQUIRE_THROWS_AS(make_ho_ou(1.0, -0.1, 1.0), config_error); }
}

TEST_CASE("make_ewma_vol: sqrt of the weighted realized sigma^2 integral") {
    SECTION("constant sigma^2 history") {
        const auto model = make_ewma_vol(0.5, 1.0);
        const auto H = constant_history(1.0, 1.0, 1000, 0.0);     // state (unused by diffusion)
        const auto sig2 = constant_history(1.0, 1.0, 1000, 0.0);  // sigma^2 = c^2 = 1
        const double expected = std::sqrt((0.5 - 1.0) / std::log(0.5));
        REQUIRE(diffusion(model, H, &sig2) == Approx(expected).margin(1e-4));
    }
    SECTION("scales linearly in |c|") {
        const auto model = make_ewma_vol(0.5, 1.0);
        const auto H = constant_history(0.0, 1.0, 200, 0.0);
        const auto sig2_1 = constant_history(1.0, 1.0, 200, 0.0);
        const auto sig2_4 = constant_history(4.0, 1.0, 200, 0.0);  // c = 2
        REQUIRE(diffusion(model, H, &sig2_4) == Approx(2.0 * diffusion(model, H, &sig2_1)).epsilon(1e-12));
    }
    SECTION("zero sigma^2 history gives zero diffusion") {
        const auto model = make_ewma_vol(0.5, 1.0);
        const auto H = constant_history(1.0, 1.0, 50, 0.0);
        const auto sig2 = constant_history(0.0, 1.0, 50, 0.0);
        REQUIRE(diffusion(model, H, &sig2) == 0.0);
    }
    SECTION("lambda = 1 is rejected") {
        REQUIRE_THROWS_AS(make_ewma_vol(1.0, 1.0), config_error);
        REQUIRE_THROWS_AS(make_ewma_vol(0.0, 1.0), config_error);
    }
    SECTION("needs the auxiliary history at evaluation time") {
        const auto model = make_ewma_vol(0.5, 1.0);
        const auto H = constant_history(1.0, 1.0, 50, 0.0);
        REQUIRE(model.uses_sigma2_history());
        REQUIRE_THROWS_AS(diffusion(model, H), config_error);
    }
}

TEST_CASE("eval_functional") {
    const auto H = [] {
        auto h = constant_history(1.0, 1.0, 10, 0.0);
        h.samples.back() = 4.2;
        return h;
    }();

    SECTION("constants and leaves") {
        REQUIRE(eval_functional(FunctionalExpr::constant(7.0), H, {}) == 7.0);
        REQUIRE(eval_functional(FunctionalExpr::current_value(), H, {}) == 4.2);
    }
    SECTION("composite: 2 * integral + current") {
        const auto Hc = constant_history(1.0, 1.0, 10, 0.0);
        const auto expr = FunctionalExpr::constant(2.0) * FunctionalExpr::moving_integral() +
                          FunctionalExpr::current_value();
        REQUIRE(eval_functional(expr, Hc, {}) == Approx(3.0).epsilon(1e-14));
    }
    SECTION("pow and sqrt") {
        const auto sq = FunctionalExpr::pow(FunctionalExpr::current_value(), 2.0);
        REQUIRE(eval_functional(sq, H, {}) == Approx(4.2 * 4.2).epsilon(1e-15));
        const auto rt = FunctionalExpr::sqrt(FunctionalExpr::constant(9.0));
        REQUIRE(eval_functional(rt, H, {}) == 3.0);
    }
    SECTION("parameters resolve from the vector") {
        const auto expr = FunctionalExpr::param("a") * FunctionalExpr::constant(2.0);
        ParamVector params{{"a", 1.5}};
        REQUIRE(eval_functional(expr, H, params) == 3.0);
        REQUIRE_THROWS_AS(eval_functional(expr, H, {}), config_error);  // unresolved name
    }
    SECTION("sqrt of a negative argument") {
        const auto bad = FunctionalExpr::sqrt(FunctionalExpr::constant(-0.5));
        REQUIRE_THROWS_AS(eval_functional(bad, H, {}), numeric_error);
        const auto noise = FunctionalExpr::sqrt(FunctionalExpr::constant(-1e-14));  // within clamp
        REQUIRE(eval_functional(noise, H, {}) == 0.0);
    }
    SECTION("moving_mean normalizes by tau") {
        const auto Hc = constant_history(2.0, 0.5, 10, 0.0);
        REQUIRE(eval_functional(FunctionalExpr::moving_mean(0.5), Hc, {}) == Approx(2.0).epsilon(1e-14));
    }
    SECTION("repeated evaluation is bitwise identical") {
        const auto expr = FunctionalExpr::sqrt(
            FunctionalExpr::pow(FunctionalExpr::moving_integral(), 2.0) + FunctionalExpr::constant(0.3));
        const double a = eval_functional(expr, H, {});
        const double b = eval_functional(expr, H, {});
        REQUIRE(a == b);
    }
    SECTION("tree depth is capped at 16") {
        auto build = [](int depth) {
            FunctionalExpr e = FunctionalExpr::constant(1.0);
            for (int i = 0; i < depth; ++i) e = FunctionalExpr::sqrt(std::move(e));
            return e;
        };
        REQUIRE_NOTHROW(build(15));
        REQUIRE_THROWS_AS(build(16), config_error);
    }
}

TEST_CASE("parametric weight bases resolve from the parameter vector") {
    const auto H = [] {
        HistorySegment h = constant_history(0.0, 1.0, 40, 0.0);
        for (std::size_t i = 0; i < h.samples.size(); ++i) h.samples[i] = 0.3 + 0.05 * static_cast<double>(i);
        return h;
    }();

    SECTION("exponential lambda as a named parameter") {
        const auto expr = FunctionalExpr::weighted_moving_integral(FunctionalExpr::ExponentialWeightParam{"lam"});
        ParamVector params{{"lam", 0.5}};
        const auto fixed = FunctionalExpr::weighted_moving_integral(WeightFunction::exponential(0.5));
        REQUIRE(eval_functional(expr, H, params) == eval_functional(fixed, H, {}));

        params[0].value = 0.8;  // rebinding moves the weight
        const auto fixed8 = FunctionalExpr::weighted_moving_integral(WeightFunction::exponential(0.8));
        REQUIRE(eval_functional(expr, H, params) == eval_functional(fixed8, H, {}));
    }
    SECTION("polynomial coefficients as named parameters") {
        const auto expr = FunctionalExpr::weighted_moving_integral(
            FunctionalExpr::PolynomialWeightParams{{"c0", "c1"}});
        ParamVector params{{"c0", 0.8}, {"c1", -0.6}};
        const auto fixed = FunctionalExpr::weighted_moving_integral(WeightFunction::polynomial({0.8, -0.6}));
        REQUIRE(eval_functional(expr, H, params) == eval_functional(fixed, H, {}));
    }
    SECTION("invalid lambda at evaluation is a numeric error") {
        const auto expr = FunctionalExpr::weighted_moving_integral(FunctionalExpr::ExponentialWeightParam{"lam"});
        ParamVector bad{{"lam", 1.0}};
        REQUIRE_THROWS_AS(eval_functional(expr, H, bad), numeric_error);
        bad[0].value = -0.5;
        REQUIRE_THROWS_AS(eval_functional(expr, H, bad), numeric_error);
    }
    SECTION("weight parameter names participate in model validation") {
        const auto expr = FunctionalExpr::weighted_moving_integral(FunctionalExpr::ExponentialWeightParam{"lam"});
        REQUIRE_THROWS_AS(ModelSpec(1.0, expr, FunctionalExpr::constant(1.0)), config_error);
        REQUIRE_NOTHROW(ModelSpec(1.0, expr, FunctionalExpr::constant(1.0), ParamVector{{"lam", 0.5}}));
        REQUIRE(expr.param_names() == std::vector<std::string>{"lam"});
    }
}

TEST_CASE("drift / diffusion contracts") {
    SECTION("higher-order OU spot values") {
        const auto ou = make_ho_ou(0.5, 0.2, 1.0);
        const auto H1 = constant_history(1.0, 1.0, 20, 0.0);
        REQUIRE(drift(ou, H1) == Approx(-0.5).epsilon(1e-14));
        REQUIRE(diffusion(ou, H1) == 0.2);
    }
    SECTION("tau mismatch is rejected") {
        const auto ou = make_ho_ou(0.5, 0.2, 1.0);
        const auto H = constant_history(1.0, 2.0, 20, 0.0);
        REQUIRE_THROWS_AS(drift(ou, H), config_error);
        REQUIRE_THROWS_AS(diffusion(ou, H), config_error);
    }
    SECTION("negative diffusion beyond tolerance is an error, tiny negatives clamp") {
        const ModelSpec bad(1.0, FunctionalExpr::constant(0.0), FunctionalExpr::constant(-0.1));
        const auto H = constant_history(1.0, 1.0, 4, 0.0);
        REQUIRE_THROWS_AS(diffusion(bad, H), numeric_error);
        const ModelSpec tiny(1.0, FunctionalExpr::constant(0.0), FunctionalExpr::constant(-5e-13));
        REQUIRE(diffusion(tiny, H) == 0.0);
    }
    SECTION("model constructor validates parameter references") {
        REQUIRE_THROWS_AS(ModelSpec(1.0, FunctionalExpr::param("ghost"), FunctionalExpr::constant(1.0)),
                          config_error);
    }
    SECTION("with_params rebinds values in order") {
        const auto ou = make_ho_ou(0.5, 0.2, 1.0);
        const auto re = ou.with_params({2.0, 0.7});
        REQUIRE(re.param("theta") == 2.0);
        REQUIRE(re.param("sigma") == 0.7);
        REQUIRE(ou.param("theta") == 0.5);  // prototype untouched
    }
}

TEST_CASE("model invariants") {
    const std::uint64_t key = rng::make_key(31, 4);

    SECTION("drift is homogeneous in H for the moving-integral families") {
        const auto gbm = make_ho_gbm(0.7, 0.3, 1.0);
        const auto ou = make_ho_ou(1.3, 0.2, 1.0);
        for (int rep = 0; rep < 15; ++rep) {
            const double c = rng::uniform(key, rep, 0, 0.1, 3.0);
            std::vector<double> vs(13), scaled(13);
            for (std::size_t i = 0; i < vs.size(); ++i) {
                vs[i] = rng::uniform(key, rep, 10 + i, 0.1, 5.0);
                scaled[i] = c * vs[i];
            }
            const HistorySegment H(1.0, 1.0, vs), cH(1.0, 1.0, scaled);
            REQUIRE(drift(gbm, cH) == Approx(c * drift(gbm, H)).epsilon(1e-12));
            REQUIRE(drift(ou, cH) == Approx(c * drift(ou, H)).epsilon(1e-12));
        }
    }

    SECTION("accepted diffusions are never negative") {
        const auto gbm = make_ho_gbm(0.7, 0.3, 1.0);
        for (int rep = 0; rep < 25; ++rep) {
            std::vector<double> vs(9);
            for (std::size_t i = 0; i < vs.size(); ++i) vs[i] = rng::uniform(key, 100 + rep, i, -5.0, 5.0);
            const HistorySegment H(1.0, 1.0, vs);
            bool rejected = false;
            double value = 0.0;
            try {
                value = diffusion(gbm, H);
            } catch (const numeric_error&) {
                rejected = true;  // negative moving integral: rejection is the contract
            }
            REQUIRE((rejected || value >= 0.0));
        }
    }

    SECTION("constant history drift is exact") {
        const auto gbm = make_ho_gbm(0.7, 0.3, 2.0);
        const auto ou = make_ho_ou(1.3, 0.2, 2.0);
        const auto H = constant_history(1.7, 2.0, 16, 0.0);
        REQUIRE(drift(gbm, H) == Approx(0.7 * 1.7 * 2.0).epsilon(1e-14));
        REQUIRE(drift(ou, H) == Approx(-1.3 * 1.7 * 2.0).epsilon(1e-14));
    }
}
