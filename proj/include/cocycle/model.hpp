#pragma once

#include <cstdint>

#include "cocycle/family.hpp"
#include "cocycle/polar.hpp"
#include "cocycle/rotation.hpp"

namespace cocycle {

// orbit points must be resolved well below the finest layer radius in use
inline constexpr double kOrbitScale = 1e-9;

struct CocycleSpec {
    RotationNumber omega;
    double epsilon = 0.1;
    PhaseFamily phases;
    double eps0 = 1.0;

    // throws DomainError on a rational omega or epsilon outside (0, eps0)
    void validate() const;
    double phi(std::size_t k, double x) const { return phases.entries[k].phi_hat.value(x) / epsilon; }
    double lambda(std::size_t k, double x) const { return phases.entries[k].lambda_hat.value(x) / epsilon; }
};

FactorSequence eval_factors(const CocycleSpec& spec, double x);

// A(x) = R(phi_K) Z(lambda_K) ... R(phi_1) Z(lambda_1): factor 1 acts first
template <class T>
PolarForm<T> apply_fiber(const CocycleSpec& spec, double x, PolarForm<T> state) {
    for (std::size_t k = 0; k < spec.phases.size(); ++k) {
        const auto& e = spec.phases.entries[k];
        const T eps(spec.epsilon);
        state = polar_append<T>(state, e.phi_hat.eval<T>(T(x), 0) / eps,
                                e.lambda_hat.eval<T>(T(x), 0) / eps);
    }
    return state;
}

template <class T>
PolarForm<T> fiber_map(const CocycleSpec& spec, double x) {
    return apply_fiber<T>(spec, x, PolarForm<T>{});
}

// M(x, n) for n >= 0
template <class T>
PolarForm<T> forward_product(const CocycleSpec& spec, double x, std::int64_t n) {
    spec.omega.guard(n, kOrbitScale);
    PolarForm<T> state;
    for (std::int64_t m = 0; m < n; ++m) state = apply_fiber<T>(spec, spec.omega.orbit_point(x, m), state);
    return state;
}

// M(x, n) for any n; M(x, -n) = M(sigma^{-n} x, n)^{-1}
template <class T>
PolarForm<T> cocycle_matrix(const CocycleSpec& spec, double x, std::int64_t n) {
    if (n >= 0) return forward_product<T>(spec, x, n);
    return polar_inverse<T>(forward_product<T>(spec, spec.omega.orbit_point(x, n), -n));
}

}  // namespace cocycle
