#include "cocycle/torus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

namespace cocycle {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;
constexpr double kSearchWindow = 6.0;

struct Root {
    double s = 0;
    bool up = false;  // F changes from negative to positive
};

double reduced(double v) { return v - std::floor(v); }

}  // namespace

double TorusPotential::value(double t1, double t2) const {
    double out = 0;
    for (const TorusTerm& t : terms) {
        const double a = kTwoPi * reduced(t.m1 * t1 + t.m2 * t2);
        out += t.c * std::cos(a) + t.s * std::sin(a);
    }
    return out;
}

double TorusPotential::along(double x, double s) const {
    const double w = omega.as_double();
    double out = 0;
    for (const TorusTerm& t : terms) {
        const double a = kTwoPi * reduced(t.m1 * x + (t.m1 * w + t.m2) * s);
        out += t.c * std::cos(a) + t.s * std::sin(a);
    }
    return out;
}

double TorusPotential::along_d1(double x, double s) const {
    const double w = omega.as_double();
    double out = 0;
    for (const TorusTerm& t : terms) {
        const double f = t.m1 * w + t.m2;
        const double a = kTwoPi * reduced(t.m1 * x + f * s);
        out += kTwoPi * f * (-t.c * std::sin(a) + t.s * std::cos(a));
    }
    return out;
}

double TorusPotential::scale() const {
    double out = 0;
    for (const TorusTerm& t : terms) out += std::abs(t.c) + std::abs(t.s);
    return out;
}

double TorusPotential::frequency() const {
    double out = 0;
    for (const TorusTerm& t : terms)
        if (t.c != 0 || t.s != 0) out = std::max(out, std::abs(t.m1 * omega.as_double() + t.m2));
    return out;
}

SegmentDecomposition decompose_segment(const TorusPotential& potential, double x, double root_tolerance) {
    SegmentDecomposition out;
    out.x = x;
    const double scale = potential.scale();
    if (!(scale > 0)) throw DegenerateInput("potential vanishes identically");
    const double freq = std::max(potential.frequency(), 1.0);
    const double h = 1.0 / (64.0 * freq);
    const double offset = 0.318309886183790672 * h;  // keeps grid points off rational roots
    const double tangency = 1e-9 * scale;
    auto g = [&](double s) { return potential.along(x, s); };
    auto dg = [&](double s) { return potential.along_d1(x, s); };
    auto tol = [&](double a, double b) { return std::abs(a - b) <= root_tolerance; };

    std::vector<Root> roots;
    const auto cells = static_cast<std::size_t>(std::ceil(kSearchWindow / h));
    double s0 = offset - h, g0 = g(s0), d0 = dg(s0);
    for (std::size_t i = 0; i <= cells; ++i) {
        const double s1 = offset + static_cast<double>(i) * h;
        const double g1 = g(s1), d1 = dg(s1);
        if ((g0 < 0) != (g1 < 0)) {
            boost::uintmax_t iters = 200;
            const auto r = boost::math::tools::toms748_solve(g, s0, s1, g0, g1, tol, iters);
            if (iters >= 200) throw ConvergenceError("decompose_segment: root tolerance unachievable");
            const double s = (r.first + r.second) / 2;
            if (std::abs(dg(s)) < tangency * kTwoPi * freq)
                throw DegenerateInput("decompose_segment: tangential root at s = " + std::to_string(s));
            roots.push_back({s, g1 > 0});
        } else if ((d0 < 0) != (d1 < 0)) {
            boost::uintmax_t iters = 200;
            const auto r = boost::math::tools::toms748_solve(dg, s0, s1, d0, d1,
                                                             boost::math::tools::eps_tolerance<double>(50), iters);
            const double s = (r.first + r.second) / 2;
            if (std::abs(g(s)) < tangency)
                throw DegenerateInput("decompose_segment: tangential root at s = " + std::to_string(s));
        }
        s0 = s1;
        g0 = g1;
        d0 = d1;
    }

    if (roots.empty()) {
        out.degenerate = true;
        out.definite_sign = g(0.5) > 0 ? 1 : -1;
        out.components.push_back({0.0, 1.0, out.definite_sign});
        out.K = out.definite_sign > 0 ? 1 : 0;
        return out;
    }
    auto first_up = [&](double from) -> std::ptrdiff_t {
        for (std::size_t i = 0; i < roots.size(); ++i)
            if (roots[i].up && roots[i].s >= from) return static_cast<std::ptrdiff_t>(i);
        return -1;
    };
    const std::ptrdiff_t a = first_up(0.0);
    const std::ptrdiff_t b = first_up(1.0);
    if (a < 0 || b < 0)
        throw DegenerateInput("decompose_segment: sign pattern does not recur within the search window");
    for (std::ptrdiff_t i = a; i < b; ++i) {
        const double lo = roots[static_cast<std::size_t>(i)].s;
        const double hi = roots[static_cast<std::size_t>(i + 1)].s;
        out.components.push_back({lo, hi, g((lo + hi) / 2) > 0 ? 1 : -1});
    }
    for (std::size_t i = 0; i < out.components.size(); ++i)
        if (out.components[i].sign != (i % 2 == 0 ? 1 : -1))
            throw DegenerateInput("decompose_segment: component signs do not alternate");
    out.K = out.components.size() / 2;
    return out;
}

std::vector<LineSample> line_integrals(const SegmentDecomposition& decomp, const TorusPotential& potential,
                                       double tolerance) {
    using boost::math::quadrature::gauss_kronrod;
    const double w = potential.omega.as_double();
    const double arc = std::sqrt(1 + w * w);
    auto root_abs = [&](double s) { return std::sqrt(std::abs(potential.along(decomp.x, s))); };

    // u^2 substitution at both (simple-root) ends
    auto integrate = [&](const Component& c, double& err) {
        if (decomp.degenerate) {
            double e = 0;
            const double v = gauss_kronrod<double, 31>::integrate(root_abs, c.s0, c.s1, 15, tolerance, &e);
            err = e;
            return v;
        }
        const double mid = (c.s0 + c.s1) / 2;
        const double ul = std::sqrt(mid - c.s0), ur = std::sqrt(c.s1 - mid);
        double e1 = 0, e2 = 0;
        const double left = gauss_kronrod<double, 31>::integrate(
            [&](double u) { return 2 * u * root_abs(c.s0 + u * u); }, 0.0, ul, 15, tolerance, &e1);
        const double right = gauss_kronrod<double, 31>::integrate(
            [&](double u) { return 2 * u * root_abs(c.s1 - u * u); }, 0.0, ur, 15, tolerance, &e2);
        err = e1 + e2;
        const double v = left + right;
        if (!(err <= std::max(1e3 * tolerance, 1e-10) * std::max(1.0, std::abs(v))))
            throw ConvergenceError("line_integrals: quadrature tolerance not met");
        return v;
    };

    std::vector<LineSample> out;
    if (decomp.degenerate) {
        if (decomp.definite_sign > 0) {
            LineSample ls;
            double e = 0;
            ls.lambda_hat = arc * integrate(decomp.components.front(), e);
            ls.lambda_error = arc * e;
            ls.has_phi = false;
            out.push_back(ls);
        }
        return out;
    }
    for (std::size_t k = 0; k < decomp.K; ++k) {
        LineSample ls;
        double e = 0;
        ls.lambda_hat = arc * integrate(decomp.components[2 * k], e);
        ls.lambda_error = arc * e;
        ls.phi_hat = arc * integrate(decomp.components[2 * k + 1], e);
        ls.phi_error = arc * e;
        out.push_back(ls);
    }
    return out;
}

}  // namespace cocycle
