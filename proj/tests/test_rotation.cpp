#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "cocycle/rotation.hpp"

using namespace cocycle;
using big = boost::multiprecision::cpp_bin_float_50;

TEST_CASE("golden mean convergents are Fibonacci") {
    const RotationNumber g = omega_from_quotients(std::vector<std::int64_t>(60, 1), 256);
    std::int64_t a = 1, b = 2;
    for (std::size_t n = 1; n < g.conv.q.size(); ++n) {
        CHECK(g.conv.q[n] == a);
        const std::int64_t c = a + b;
        a = b;
        b = c;
    }
    CHECK(g.as_double() == doctest::Approx((std::sqrt(5.0) - 1) / 2).epsilon(1e-15));
}

TEST_CASE("cf_expand recovers periodic quotients") {
    PrecisionScope scope(256);
    const mpreal s = sqrt(mpreal(2)) - 1;
    const RotationNumber w = cf_expand(s, 40, 256);
    REQUIRE(w.quotients.size() == 40);
    for (auto q : w.quotients) CHECK(q == 2);
    const RotationNumber d = cf_expand(parse_decimal("0.25", 128), 10, 128);
    CHECK(d.rational);
    CHECK(d.quotients == std::vector<std::int64_t>{4});
}

TEST_CASE("distance to the nearest return is sandwiched") {
    const RotationNumber g = omega_from_quotients(std::vector<std::int64_t>(40, 1), 256);
    for (std::size_t n = 1; n + 1 < g.conv.q.size() && g.conv.q[n + 1] < 1000000; ++n) {
        const double d = orbit_distance(g, g.conv.q[n]);
        CHECK(d > 1.0 / (2.0 * static_cast<double>(g.conv.q[n + 1])));
        CHECK(d < 1.0 / static_cast<double>(g.conv.q[n + 1]));
    }
}

TEST_CASE("Brjuno partial sums against an independent summation") {
    const RotationNumber g = omega_from_quotients(std::vector<std::int64_t>(40, 1), 128);
    const BrjunoReport b = brjuno_sum(g, 30);
    big s = 0;
    big fa = 1, fb = 2;  // q_1, q_2
    for (std::size_t n = 1; n <= 30; ++n) {
        s += log(2 * fb) / fa;
        const big c = fa + fb;
        fa = fb;
        fb = c;
        CHECK(std::abs(b.partial_sums[n - 1] - s.convert_to<double>()) < 1e-12);
    }
}

TEST_CASE("frac_mul is double-double accurate") {
    const RotationNumber g = omega_from_quotients(std::vector<std::int64_t>(60, 1), 256);
    PrecisionScope scope(256);
    for (std::int64_t m : {1LL, 17LL, 123456789LL, 987654321012LL}) {
        mpreal v = g.value * m;
        v -= floor(v);
        CHECK(std::abs(g.frac_mul(m) - v.convert_to<double>()) < 1e-15);
    }
    const RotationNumber coarse = omega_from_quotients({1, 1, 1, 1}, 64);
    CHECK_THROWS_AS(coarse.guard(1000000, 1e-9), PrecisionError);
}

TEST_CASE("condition A: golden fails, builder passes") {
    const RotationNumber g = omega_from_quotients(std::vector<std::int64_t>(40, 1), 128);
    const double CB = brjuno_sum(g, 30).C_B;
    for (double gamma : {0.1, 0.5, 1.0}) {
        const ConditionAReport r = check_condition_A(g, {4, 2, 0.5, gamma}, CB);
        CHECK_FALSE(r.pass);
        CHECK_FALSE(r.tail_holds);
    }
    SpacingPolicy sp;
    sp.leading = {3};
    const ConditionAConstants c{4, 2, 0.5, 0.5};
    const RotationNumber w = build_condition_A_omega(c, sp, 6, 256);
    const ConditionAReport r = check_condition_A(w, c, brjuno_sum(w, w.conv.q.size() - 2).C_B);
    CHECK(r.pass);
    CHECK(r.chain.size() >= 3);
}

TEST_CASE("quotient text parsing") {
    CHECK(quotients_from_text("1, 2,3") == std::vector<std::int64_t>{1, 2, 3});
    CHECK_THROWS_AS(quotients_from_text("1,x"), ConfigError);
    CHECK_THROWS_AS(quotients_from_text("1,0"), ConfigError);
    CHECK(circle_distance(0.95, 0.05) == doctest::Approx(0.1));
}
