#pragma once

#include <cmath>
#include <vector>

#include "cocycle/polar.hpp"

namespace cocycle {

// f(x) = a0 + sum_m (cos_m cos 2 pi m x + sin_m sin 2 pi m x), m = 1, 2, ...
struct TrigPoly {
    double a0 = 0;
    std::vector<double> cos_coef;
    std::vector<double> sin_coef;

    static TrigPoly constant(double v) { return TrigPoly{v, {}, {}}; }

    bool is_constant() const;
    std::size_t degree() const { return std::max(cos_coef.size(), sin_coef.size()); }
    double value(double x) const { return eval<double>(x, 0); }
    double d1(double x) const { return eval<double>(x, 1); }
    double d2(double x) const { return eval<double>(x, 2); }
    double max_abs_d1() const;  // crude upper bound from coefficients

    template <class T>
    T eval(const T& x, int derivative) const {
        using std::cos;
        using std::sin;
        const T two_pi = 2 * pi_v<T>();
        T out = derivative == 0 ? T(a0) : T(0);
        for (std::size_t i = 0; i < degree(); ++i) {
            const T w = two_pi * T(i + 1);
            const T ca = i < cos_coef.size() ? T(cos_coef[i]) : T(0);
            const T sa = i < sin_coef.size() ? T(sin_coef[i]) : T(0);
            const T c = cos(w * x), s = sin(w * x);
            switch (derivative) {
                case 0: out += ca * c + sa * s; break;
                case 1: out += w * (-ca * s + sa * c); break;
                default: out += -w * w * (ca * c + sa * s); break;
            }
        }
        return out;
    }
};

// extrema of f on the circle, sorted by x
struct Extremum {
    double x = 0;
    double value = 0;
    bool is_max = false;
};

std::vector<Extremum> critical_points(const TrigPoly& f);
double minimum_value(const TrigPoly& f);
double maximum_value(const TrigPoly& f);

struct PhaseEntry {
    TrigPoly phi_hat;
    TrigPoly lambda_hat;
};

struct PhaseFamily {
    std::vector<PhaseEntry> entries;

    explicit PhaseFamily(std::vector<PhaseEntry> e = {});
    double lambda0() const { return lambda0_; }
    std::size_t size() const { return entries.size(); }
    bool all_phases_constant() const;
    // throws DegenerateInput if some phi_hat has a degenerate critical point
    void require_nondegenerate() const;

private:
    double lambda0_ = 0;
};

// least-squares trigonometric interpolation of equispaced samples on [0,1)
TrigPoly fit_trig_poly(const std::vector<double>& samples, std::size_t max_degree);

}  // namespace cocycle
