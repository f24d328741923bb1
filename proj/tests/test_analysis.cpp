#include <doctest.h>

#include <Eigen/Dense>

#include "cocycle/analysis.hpp"

using namespace cocycle;

namespace {

CocycleSpec constant_spec(double phi, double lambda, double eps) {
    CocycleSpec s;
    s.omega = omega_from_quotients(std::vector<std::int64_t>(60, 1), 256);
    s.phases = PhaseFamily({{TrigPoly::constant(phi), TrigPoly::constant(lambda)}});
    s.epsilon = eps;
    return s;
}

}  // namespace

TEST_CASE("constant cocycle exponent equals the log spectral radius") {
    const double eps = 0.1;
    const CocycleSpec s = constant_spec(1.0, 1.0, eps);
    Eigen::Matrix2d A;
    const double c = std::cos(1 / eps), sn = std::sin(1 / eps), e = std::exp(1 / eps);
    A << c * e, sn / e, -sn * e, c / e;
    const double rho = A.eigenvalues().cwiseAbs().maxCoeff();
    for (Backend b : {Backend::Double, Backend::Extended, Backend::Quad}) {
        const LyapunovEstimate est = finite_lyapunov(s, 0.3, {100, 1000, 4000}, b);
        CHECK(est.value == doctest::Approx(std::log(rho)).epsilon(1e-3));
        REQUIRE(est.schedule.size() == 3);
        CHECK(est.schedule.back().first == 4000);
    }
    const IntegratedEstimate I = integrated_lyapunov(s, 8, 1000);
    CHECK(I.stddev < 1e-12);
}

TEST_CASE("backends agree on a non-constant fixture") {
    CocycleSpec s = constant_spec(1.0, 1.0, 0.15);
    s.phases = PhaseFamily({{TrigPoly{1, {}, {0.3}}, TrigPoly::constant(1)}});
    for (double x : {0.1, 0.42, 0.77}) {
        const double d = log_norm(s, x, 500, Backend::Double);
        const double l = log_norm(s, x, 500, Backend::Extended);
        const double q = log_norm(s, x, 500, Backend::Quad);
        CHECK(l == doctest::Approx(q).epsilon(1e-12));
        CHECK(d == doctest::Approx(q).epsilon(1e-9));
    }
    CHECK(parse_backend("quad") == Backend::Quad);
    CHECK_THROWS_AS(parse_backend("float"), ConfigError);
}

TEST_CASE("rotation by pi/2 collapses the growth") {
    const CocycleSpec s = constant_spec(std::acos(-1.0) / 2, 5.0, 1.0);
    for (int n = 2; n <= 100; n += 2) CHECK(log_norm(s, 0.2, n, Backend::Extended) / n <= 1e-10);
    const EDVerdict v = uh_test(s, 8, {10, 20, 40});
    CHECK_FALSE(v.uh);
}

TEST_CASE("hyperbolic constant cocycle is uniformly hyperbolic") {
    const CocycleSpec s = constant_spec(1.0, 1.0, 0.1);
    const EDVerdict v = uh_test(s, 16, {21, 34, 55});
    CHECK(v.uh);
    CHECK_FALSE(v.inconclusive);
    CHECK(v.direction_field.size() == 16);
    CHECK(v.discontinuity_score < 1e-6);
}

TEST_CASE("property H and the lower bound") {
    const RotationNumber w = omega_from_quotients(std::vector<std::int64_t>(40, 1), 128);
    CHECK(property_H(w, 0.3, {}).passes);
    Layer L;
    L.delta = 0.01;
    L.tau = 5;
    L.centers = {0.3};
    const HReport h = property_H(w, 0.3, {L});
    CHECK_FALSE(h.passes);
    CHECK(h.step == 0);
    CHECK(lyapunov_lower_bound(1, 0.2, 0.9, 1.5, 0.1) == doctest::Approx(0.8 / 0.1 + std::log(0.9) - 1.5));
}

TEST_CASE("sampled scan is seed deterministic") {
    SpacingPolicy sp;
    sp.leading = {3};
    CocycleSpec s;
    s.omega = build_condition_A_omega({4, 2, 0.5, 0.5}, sp, 6, 256);
    s.phases = PhaseFamily({{TrigPoly{1, {}, {0.3}}, TrigPoly::constant(1)}});
    const ConditionAReport cond =
        check_condition_A(s.omega, {4, 2, 0.5, 0.5}, brjuno_sum(s.omega, s.omega.conv.q.size() - 2).C_B);
    Theorem4Options o;
    o.samples = 100;
    const std::vector<double> grid{0.125, 0.13, 0.16};
    const Theorem4Report a = theorem4_scan(s, cond, grid, o), b = theorem4_scan(s, cond, grid, o);
    REQUIRE(a.rows.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(a.rows[i].Lambda0 == b.rows[i].Lambda0);
        CHECK(a.rows[i].in_Xh == b.rows[i].in_Xh);
    }
    CHECK(a.bound_violations == 0);
}
