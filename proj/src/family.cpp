#include "cocycle/family.hpp"

#include <algorithm>
#include <numbers>

#include <boost/math/tools/roots.hpp>

namespace cocycle {

namespace {

double circle_distance_raw(double a, double b) {
    const double d = std::fmod(std::abs(a - b), 1.0);
    return std::min(d, 1 - d);
}

}  // namespace

bool TrigPoly::is_constant() const {
    for (double c : cos_coef)
        if (c != 0) return false;
    for (double s : sin_coef)
        if (s != 0) return false;
    return true;
}

double TrigPoly::max_abs_d1() const {
    double out = 0;
    for (std::size_t i = 0; i < degree(); ++i) {
        const double ca = i < cos_coef.size() ? cos_coef[i] : 0;
        const double sa = i < sin_coef.size() ? sin_coef[i] : 0;
        out += 2 * std::numbers::pi * static_cast<double>(i + 1) * std::hypot(ca, sa);
    }
    return out;
}

std::vector<Extremum> critical_points(const TrigPoly& f) {
    std::vector<Extremum> out;
    if (f.is_constant()) return out;
    const std::size_t grid = 256 * (f.degree() + 1);
    const double h = 1.0 / static_cast<double>(grid);
    double x0 = 0, g0 = f.d1(0);
    for (std::size_t i = 1; i <= grid; ++i) {
        const double x1 = static_cast<double>(i) * h;
        const double g1 = f.d1(x1);
        if (g0 == 0 || (g0 < 0) != (g1 < 0)) {
            double xc = x0;
            if (g0 != 0) {
                boost::uintmax_t iters = 200;
                auto r = boost::math::tools::toms748_solve([&](double x) { return f.d1(x); }, x0, x1, g0,
                                                           g1, boost::math::tools::eps_tolerance<double>(52),
                                                           iters);
                xc = (r.first + r.second) / 2;
            }
            xc -= std::floor(xc);
            if (out.empty() || circle_distance_raw(xc, out.back().x) > 1e-12)
                out.push_back({xc, f.value(xc), f.d2(xc) < 0});
        }
        x0 = x1;
        g0 = g1;
    }
    std::sort(out.begin(), out.end(), [](const Extremum& a, const Extremum& b) { return a.x < b.x; });
    if (out.size() > 1 && circle_distance_raw(out.front().x, out.back().x) < 1e-12) out.pop_back();
    return out;
}

double minimum_value(const TrigPoly& f) {
    double m = f.value(0);
    for (const Extremum& e : critical_points(f)) m = std::min(m, e.value);
    return f.is_constant() ? f.a0 : m;
}

double maximum_value(const TrigPoly& f) {
    double m = f.value(0);
    for (const Extremum& e : critical_points(f)) m = std::max(m, e.value);
    return f.is_constant() ? f.a0 : m;
}

PhaseFamily::PhaseFamily(std::vector<PhaseEntry> e) : entries(std::move(e)) {
    if (entries.empty()) return;
    lambda0_ = minimum_value(entries.front().lambda_hat);
    for (const PhaseEntry& p : entries) lambda0_ = std::min(lambda0_, minimum_value(p.lambda_hat));
    if (!(lambda0_ > 0)) throw DomainError("phase family: lambda_hat must be strictly positive");
}

bool PhaseFamily::all_phases_constant() const {
    return std::all_of(entries.begin(), entries.end(),
                       [](const PhaseEntry& p) { return p.phi_hat.is_constant(); });
}

void PhaseFamily::require_nondegenerate() const {
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const TrigPoly& f = entries[k].phi_hat;
        const double scale = std::max(f.max_abs_d1(), 1e-300);
        for (const Extremum& e : critical_points(f))
            if (std::abs(f.d2(e.x)) < 1e-6 * scale * 2 * std::numbers::pi)
                throw DegenerateInput("phi_hat_" + std::to_string(k + 1) +
                                      " has a degenerate critical point at x = " + std::to_string(e.x));
    }
}

TrigPoly fit_trig_poly(const std::vector<double>& samples, std::size_t max_degree) {
    const std::size_t g = samples.size();
    if (g == 0) throw DomainError("fit_trig_poly: no samples");
    TrigPoly out;
    for (double v : samples) out.a0 += v;
    out.a0 /= static_cast<double>(g);
    const std::size_t deg = std::min(max_degree, (g - 1) / 2);
    for (std::size_t m = 1; m <= deg; ++m) {
        double c = 0, s = 0;
        for (std::size_t i = 0; i < g; ++i) {
            const double a = 2 * std::numbers::pi * static_cast<double>(m * i) / static_cast<double>(g);
            c += samples[i] * std::cos(a);
            s += samples[i] * std::sin(a);
        }
        out.cos_coef.push_back(2 * c / static_cast<double>(g));
        out.sin_coef.push_back(2 * s / static_cast<double>(g));
    }
    return out;
}

}  // namespace cocycle
