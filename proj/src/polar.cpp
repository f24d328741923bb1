#include "cocycle/polar.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cocycle {

namespace {

struct Certified {
    double T = 0;    // bound on |tan| of the entering angle
    double den = 1;  // 1 - eta^4 - T^2 eta^2
    double f = 1;    // per-step singular-value factor
};

// The entering angle of step n is phi_{n-1} + e_n with
// e_{n+1} = theta'_n + chi'_n, so |e| is bounded by a fixed point.
Certified certify(double delta, double lambda0) {
    const double eta = std::exp(-2 * lambda0);
    const double t = std::sqrt(std::max(0.0, 1 - delta * delta)) / delta;
    Certified out;
    if (t == 0) return out;  // all phi_k = 0 mod pi: pure diagonal chain
    double e = 0;
    for (int it = 0;; ++it) {
        const double a = std::atan(t) + e;
        if (a >= std::numbers::pi / 2 || it > 500)
            throw HypothesisError("product_lower_bound: angle drift fixed point does not exist");
        out.T = std::tan(a);
        out.den = 1 - eta * eta * eta * eta - out.T * out.T * eta * eta;
        if (out.den <= 0)
            throw HypothesisError("product_lower_bound: angle drift fixed point does not exist");
        const double next = out.T * (2 * eta + eta / out.den);
        if (std::abs(next - e) <= 1e-15 * (1 + e)) {
            e = next;
            break;
        }
        e = next;
    }
    const double cmin = delta * std::cos(e) - std::sqrt(1 - delta * delta) * std::sin(e);
    const double disc = cmin * cmin * (1 + eta * eta) * (1 + eta * eta) - 4 * eta * eta;
    if (cmin <= 0 || disc < 0)
        throw HypothesisError("product_lower_bound: cosine floor lost along the chain");
    out.f = (cmin * (1 + eta * eta) + std::sqrt(disc)) / 2;
    return out;
}

}  // namespace

LowerBound product_lower_bound(double delta, double lambda0, std::size_t steps) {
    if (!(delta > 0 && delta <= 1)) throw DomainError("product_lower_bound: delta outside (0,1]");
    if (!(lambda0 > 0)) throw DomainError("product_lower_bound: lambda0 must be positive");
    if (delta * std::exp(lambda0) <= 2)
        throw HypothesisError("product_lower_bound: delta e^lambda0 <= 2");

    const Certified cert = certify(delta, lambda0);
    LowerBound lb;
    lb.lambda0 = lambda0;
    lb.delta = delta;
    lb.steps = steps;
    lb.mu_floor = lambda0 + std::log(cert.f);
    if (lb.mu_floor <= 0) throw HypothesisError("product_lower_bound: non-positive growth floor");
    lb.C_A = cert.f / delta;
    lb.bound = static_cast<double>(steps) * lb.mu_floor;
    const double eta = std::exp(-2 * lambda0);
    lb.chi_decay = std::exp(-2 * lb.mu_floor);
    lb.chi_bound = cert.T * eta / cert.den;
    lb.chi_total = lb.chi_bound / (1 - lb.chi_decay);
    lb.theta_bound = 2 * cert.T * eta + lb.chi_total;

    const double tail = 2 * std::exp(-4 * lambda0) / (delta * delta);
    lb.literal_C_A = std::exp(-tail);
    lb.literal_mu_floor = lambda0 + std::log(delta) - tail;
    lb.literal_theta_bound = 2 * eta / delta;
    return lb;
}

LowerBound product_lower_bound(const FactorSequence& seq) {
    if (seq.factors.empty()) throw DomainError("product_lower_bound: empty sequence");
    double lambda0 = seq.factors.front().lambda;
    for (const Factor& f : seq.factors) {
        if (!std::isfinite(f.phi) || !std::isfinite(f.lambda))
            throw DomainError("product_lower_bound: non-finite factor");
        if (std::abs(std::cos(f.phi)) < seq.delta * (1 - 1e-12))
            throw HypothesisError("product_lower_bound: |cos phi_k| below delta");
        lambda0 = std::min(lambda0, f.lambda);
    }
    return product_lower_bound(seq.delta, lambda0, seq.factors.size());
}

double LowerBound::literal_chi_step(std::size_t n) const {
    const double nn = static_cast<double>(n);
    const double tail = 2 * std::exp(-4 * lambda0) / (delta * delta);
    return std::exp((-2 * nn + 3) * std::log(delta) - 2 * (nn - 1) * lambda0 -
                    2 * (nn - 2) * std::log1p(-tail));
}

double LowerBound::certified_chi_step(std::size_t n) const {
    return chi_bound * std::exp(-2 * (static_cast<double>(n) - 2) * mu_floor);
}

}  // namespace cocycle
