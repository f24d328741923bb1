#include <doctest.h>

#include <random>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "cocycle/polar.hpp"

using namespace cocycle;
using big = boost::multiprecision::cpp_bin_float_50;

namespace {

Matrix2<big> dense_factor(double phi, double lambda) {
    const big e = exp(big(lambda));
    return rotation<big>(big(phi)) * Matrix2<big>{e, 0, 0, 1 / e};
}

double rel_entry_error(const Matrix2<double>& m, const Matrix2<big>& ref) {
    const double scale = std::max({abs(ref.a), abs(ref.b), abs(ref.c), abs(ref.d)}).convert_to<double>();
    const double e = std::max({std::abs(m.a - ref.a.convert_to<double>()), std::abs(m.b - ref.b.convert_to<double>()),
                               std::abs(m.c - ref.c.convert_to<double>()), std::abs(m.d - ref.d.convert_to<double>())});
    return e / scale;
}

}  // namespace

TEST_CASE("zrz_polar against a dense SVD") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> mu(0, 6), ang(-3.2, 3.2);
    for (int t = 0; t < 200; ++t) {
        const double a = mu(rng), b = mu(rng), phi = ang(rng);
        const PolarForm<double> p = zrz_polar<double>(a, phi, b);
        Eigen::Matrix2d m;
        const Matrix2<double> z2{std::exp(a), 0, 0, std::exp(-a)}, z1{std::exp(b), 0, 0, std::exp(-b)};
        const Matrix2<double> d = z2 * rotation(phi) * z1;
        m << d.a, d.b, d.c, d.d;
        Eigen::JacobiSVD<Eigen::Matrix2d> svd(m);
        CHECK(p.mu == doctest::Approx(std::log(svd.singularValues()(0))).epsilon(1e-12));
        const Matrix2<double> back = to_matrix(p);
        const double s = std::max({std::abs(d.a), std::abs(d.b), std::abs(d.c), std::abs(d.d)});
        CHECK(std::abs(back.a - d.a) / s < 1e-12);
        CHECK(std::abs(back.b - d.b) / s < 1e-12);
        CHECK(std::abs(back.c - d.c) / s < 1e-12);
        CHECK(std::abs(back.d - d.d) / s < 1e-12);
    }
}

TEST_CASE("polar_append chains match a 50-digit dense product") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ang(-3.2, 3.2), lam(0, 2);
    for (int t = 0; t < 100; ++t) {
        PolarForm<double> p;
        Matrix2<big> ref;
        for (int k = 0; k < 10; ++k) {
            const double phi = ang(rng), l = lam(rng);
            p = polar_append(p, phi, l);
            ref = dense_factor(phi, l) * ref;
        }
        CHECK(rel_entry_error(to_matrix(p), ref) < 1e-10);
    }
}

TEST_CASE("compose, inverse and the matrix round trip") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ang(-3, 3), mu(0, 4);
    for (int t = 0; t < 100; ++t) {
        const PolarForm<double> a{ang(rng), ang(rng), mu(rng)}, b{ang(rng), ang(rng), mu(rng)};
        const Matrix2<double> ab = to_matrix(b) * to_matrix(a);
        const PolarForm<double> c = polar_compose(b, a);
        const Matrix2<double> cm = to_matrix(c);
        const double s = std::exp(c.mu);
        CHECK(std::abs(cm.a - ab.a) / s < 1e-12);
        CHECK(std::abs(cm.d - ab.d) / s < 1e-12);

        const Matrix2<double> id = to_matrix(polar_compose(polar_inverse(a), a));
        CHECK(id.a == doctest::Approx(1).epsilon(1e-9));
        CHECK(std::abs(id.b) < 1e-9 * std::exp(2 * a.mu));

        const PolarForm<double> r = from_matrix(to_matrix(a));
        CHECK(r.mu == doctest::Approx(a.mu).epsilon(1e-10));
        const Matrix2<double> rm = to_matrix(r), am = to_matrix(a);
        CHECK(std::abs(rm.c - am.c) / std::exp(a.mu) < 1e-12);
    }
}

TEST_CASE("large stretches stay finite") {
    const PolarForm<double> p = zrz_polar<double>(1e6, 0.3, 1e6);
    CHECK(p.mu == doctest::Approx(2e6 + std::log(std::cos(0.3))).epsilon(1e-14));
    CHECK_THROWS_AS(to_matrix(p), DomainError);
    CHECK_THROWS_AS(zrz_polar<double>(-1.0, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(polar_append(PolarForm<double>{}, 0.1, -1.0), DomainError);
    // R(pi/2) Z(l) R(pi/2) Z(l) = -I
    PolarForm<double> q;
    q = polar_append(q, pi_v<double>() / 2, 5.0);
    q = polar_append(q, pi_v<double>() / 2, 5.0);
    CHECK(q.mu < 1e-10);
}

TEST_CASE("certified growth bound holds on random sequences") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    int violations = 0;
    for (int t = 0; t < 200; ++t) {
        const double delta = 0.05 + 0.5 * u(rng);
        const double lambda0 = std::log(10 / delta) + 3 * u(rng);
        FactorSequence seq;
        seq.delta = delta;
        for (int k = 0; k < 12; ++k) {
            const double c = delta + (1 - delta) * u(rng);
            const double phi = (u(rng) < 0.5 ? 1 : -1) * std::acos(c) + (u(rng) < 0.5 ? 0 : pi_v<double>());
            seq.factors.push_back({phi, lambda0 + u(rng)});
        }
        const LowerBound lb = product_lower_bound(seq);
        PolarForm<double> p;
        for (std::size_t k = 0; k < seq.factors.size(); ++k) {
            p = polar_append(p, seq.factors[k].phi, seq.factors[k].lambda);
            const double n = static_cast<double>(k + 1);
            if (p.mu < n * std::log(lb.C_A * delta * std::exp(lb.lambda0))) ++violations;
            if (std::abs(chi_mod_pi(p.chi)) > lb.chi_total) ++violations;
        }
    }
    CHECK(violations == 0);
}
