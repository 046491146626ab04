#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "homp/errors.hpp"

namespace homp {

// Weight function w_t(x) over a trailing window [t - tau, t], evaluated at the
// window offset u = x - (t - tau), u in [0, tau].
//
// Forms:
//   constant(c)          w = c
//   exponential(lambda)  w = lambda^u, i.e. the printed EWMA weight
//                        lambda^(x - (t - tau)); for lambda < 1 this weights
//                        *older* values higher. reverse = true substitutes
//                        lambda^(tau - u) for conventional recency weighting.
//   polynomial(coeffs)   w = sum_k coeffs[k] * (u / tau)^k, degree <= 10
class WeightFunction {
  public:
    enum class Form { constant, exponential, polynomial };

    static WeightFunction constant(double c) {
        WeightFunction w;
        w.form_ = Form::constant;
        w.coeffs_ = {c};
        return w;
    }

    static WeightFunction exponential(double lambda, bool reverse = false) {
        if (!(lambda > 0.0) || lambda == 1.0)
            throw config_error("WeightFunction: exponential requires lambda > 0 and lambda != 1");
        WeightFunction w;
        w.form_ = Form::exponential;
        w.coeffs_ = {lambda};
        w.reverse_ = reverse;
        return w;
    }

    static WeightFunction polynomial(std::vector<double> coeffs) {
        if (coeffs.empty() || coeffs.size() > 11)
            throw config_error("WeightFunction: polynomial needs 1..11 coefficients (degree <= 10)");
        WeightFunction w;
        w.form_ = Form::polynomial;
        w.coeffs_ = std::move(coeffs);
        return w;
    }

    Form form() const { return form_; }
    bool reversed() const { return reverse_; }
    const std::vector<double>& coeffs() const { return coeffs_; }
    double lambda() const { return coeffs_[0]; }

    // u: offset from the window start, tau: window length.
    double eval(double u, double tau) const {
        switch (form_) {
            case Form::constant:
                return coeffs_[0];
            case Form::exponential:
                return std::pow(coeffs_[0], reverse_ ? tau - u : u);
            case Form::polynomial: {
                const double z = u / tau;
                double acc = 0.0;
                for (std::size_t k = coeffs_.size(); k-- > 0;) acc = acc * z + coeffs_[k];
                return acc;
            }
        }
        return 0.0;  // unreachable
    }

  private:
    WeightFunction() = default;
    Form form_ = Form::constant;
    std::vector<double> coeffs_{1.0};
    bool reverse_ = false;
};

}  // namespace homp
