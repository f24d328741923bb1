#pragma once

// Products of rotations R(phi) and stretches Z(lambda) kept in the log-domain
// factorization R(theta+chi) Z(mu) R(-chi), mu >= 0.
//
//   R(phi) = [[cos, sin], [-sin, cos]],  Z(l) = diag(e^l, e^-l)

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/constants/constants.hpp>

#include "cocycle/errors.hpp"

namespace cocycle {

template <class T>
struct Matrix2 {
    T a{1}, b{0}, c{0}, d{1};  // row-major [[a, b], [c, d]]
};

template <class T>
struct PolarForm {
    T theta{0};
    T chi{0};
    T mu{0};
};

struct Factor {
    double phi = 0;
    double lambda = 0;
};

struct FactorSequence {
    std::vector<Factor> factors;
    double delta = 1;  // lower bound on |cos phi_k|
};

template <class T>
T pi_v() {
    return boost::math::constants::pi<T>();
}

template <class T>
T wrap_angle(const T& a) {
    using std::floor;
    const T two_pi = 2 * pi_v<T>();
    T r = a - two_pi * floor((a + pi_v<T>()) / two_pi);  // [-pi, pi)
    if (r <= -pi_v<T>()) r += two_pi;
    return r;
}

// chi reduced into (-pi/2, pi/2]; chi and chi + pi give the same matrix
template <class T>
T chi_mod_pi(const T& chi) {
    using std::floor;
    const T p = pi_v<T>();
    T r = chi - p * floor(chi / p + T(0.5));
    if (r <= -p / 2) r += p;
    return r;
}

// largest mu that may be densified without overflow
template <class T>
T densify_limit() {
    using std::log;
    return T(0.4) * log(std::numeric_limits<T>::max());
}

namespace detail {

template <class T>
bool finite(const T& v) {
    using std::isfinite;
    return isfinite(v);
}

}  // namespace detail

// Z(mu2) R(phi) Z(mu1) in polar form.  Exponentials enter only as e^{-2 mu},
// so arbitrarily large exponents cannot overflow.
template <class T>
PolarForm<T> zrz_polar(const T& mu2, const T& phi, const T& mu1) {
    using std::atan2;
    using std::cos;
    using std::exp;
    using std::log;
    using std::sin;
    using std::sqrt;
    if (!detail::finite(mu1) || !detail::finite(mu2) || !detail::finite(phi))
        throw DomainError("zrz_polar: non-finite input");
    if (mu1 < 0 || mu2 < 0) throw DomainError("zrz_polar: negative stretch");

    const T c = cos(phi);
    const T s = sin(phi);
    PolarForm<T> out;
    if (c == 0) {
        // Z(a) R(phi) = R(phi) Z(-a) when cos phi = 0
        const T m = mu1 - mu2;
        if (m >= 0) {
            out.theta = wrap_angle(phi);
            out.mu = m;
        } else {
            out.chi = -pi_v<T>() / 2;
            out.theta = wrap_angle(phi + pi_v<T>());
            out.mu = -m;
        }
        return out;
    }

    const T u1 = exp(-2 * mu1);
    const T u2 = exp(-2 * mu2);
    const T cu = c * (1 + u1 * u2);
    const T su = s * (u1 + u2);
    const T D = sqrt(cu * cu + su * su);
    const T p12 = c * s * u1 * (1 - u2 * u2) / D;
    const T dl = (c * c * (1 - u1 * u1 * u2 * u2) + s * s * (u2 - u1) * (u2 + u1)) / D;
    const T G = sqrt(dl * dl + 4 * p12 * p12);

    out.theta = atan2(su, cu);
    out.chi = atan2(-2 * p12, dl) / 2;
    out.mu = mu1 + mu2 + log((D + G) / 2);
    if (out.mu < 0) out.mu = 0;
    return out;
}

// second * first
template <class T>
PolarForm<T> polar_compose(const PolarForm<T>& second, const PolarForm<T>& first) {
    const PolarForm<T> in = zrz_polar<T>(second.mu, first.theta + first.chi - second.chi, first.mu);
    PolarForm<T> out;
    out.mu = in.mu;
    out.chi = first.chi + in.chi;
    out.theta = wrap_angle(second.theta + second.chi + in.theta - first.chi);
    return out;
}

// R(phi) Z(lambda) * state
template <class T>
PolarForm<T> polar_append(const PolarForm<T>& state, const T& phi, const T& lambda) {
    if (lambda < 0) throw DomainError("polar_append: negative stretch");
    const PolarForm<T> in = zrz_polar<T>(lambda, state.theta + state.chi, state.mu);
    PolarForm<T> out;
    out.mu = in.mu;
    out.chi = state.chi + in.chi;
    out.theta = wrap_angle(phi + in.theta - state.chi);
    return out;
}

// Z(-mu) = R(pi/2) Z(mu) R(-pi/2) moves the inverse back to mu >= 0
template <class T>
PolarForm<T> polar_inverse(const PolarForm<T>& p) {
    if (!detail::finite(p.theta) || !detail::finite(p.chi) || !detail::finite(p.mu))
        throw DomainError("polar_inverse: non-finite input");
    PolarForm<T> out;
    out.theta = wrap_angle(-p.theta);
    if (p.mu == 0) return out;
    out.chi = p.theta + p.chi + pi_v<T>() / 2;
    out.mu = p.mu;
    return out;
}

template <class T>
Matrix2<T> rotation(const T& phi) {
    using std::cos;
    using std::sin;
    return {cos(phi), sin(phi), -sin(phi), cos(phi)};
}

template <class T>
Matrix2<T> operator*(const Matrix2<T>& x, const Matrix2<T>& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c,
            x.c * y.b + x.d * y.d};
}

template <class T>
Matrix2<T> to_matrix(const PolarForm<T>& p) {
    using std::exp;
    if (p.mu > densify_limit<T>())
        throw DomainError("to_matrix: mu above the densification limit");
    const Matrix2<T> z{exp(p.mu), T(0), T(0), exp(-p.mu)};
    return rotation<T>(p.theta + p.chi) * z * rotation<T>(-p.chi);
}

// General dense route, scaled by the largest entry first.
template <class T>
PolarForm<T> from_matrix(const Matrix2<T>& m) {
    using std::abs;
    using std::atan2;
    using std::log;
    using std::max;
    using std::sqrt;
    const T scale = max(max(abs(m.a), abs(m.b)), max(abs(m.c), abs(m.d)));
    if (!(scale > 0) || !detail::finite(scale)) throw DomainError("from_matrix: degenerate matrix");
    const Matrix2<T> n{m.a / scale, m.b / scale, m.c / scale, m.d / scale};
    PolarForm<T> out;
    out.theta = atan2(n.b - n.c, n.a + n.d);
    const Matrix2<T> sym = rotation<T>(-out.theta) * n;
    const T tr = sqrt((n.a + n.d) * (n.a + n.d) + (n.b - n.c) * (n.b - n.c));
    const T off = sqrt((n.a - n.d) * (n.a - n.d) + (n.b + n.c) * (n.b + n.c));
    out.mu = log(scale) + log((tr + off) / 2);
    if (out.mu < 0) out.mu = 0;
    out.chi = atan2(-(sym.b + sym.c), sym.a - sym.d) / 2;
    return out;
}

// Certified and literal-formula versions of the product growth estimate for
// chains with |cos phi_k| >= delta, lambda_k >= lambda0.
struct LowerBound {
    double lambda0 = 0;
    double delta = 0;
    std::size_t steps = 0;
    // certified
    double bound = 0;         // lower bound on log ||A^k||
    double C_A = 0;           // ||A^k|| >= (C_A delta e^lambda0)^k
    double mu_floor = 0;      // per-step increment floor
    double chi_bound = 0;     // |chi_k - chi_{k-1}| at k = 2, decays like e^{-2 mu_floor} per step
    double chi_total = 0;     // |chi_k| for every k
    double theta_bound = 0;   // |theta_k - phi_k| mod pi
    double chi_decay = 0;     // ratio between consecutive chi step bounds
    // literal expressions
    double literal_C_A = 0;
    double literal_mu_floor = 0;
    double literal_theta_bound = 0;
    double literal_chi_step(std::size_t n) const;  // n >= 2
    double certified_chi_step(std::size_t n) const;
};

LowerBound product_lower_bound(const FactorSequence& seq);
LowerBound product_lower_bound(double delta, double lambda0, std::size_t steps);

}  // namespace cocycle
