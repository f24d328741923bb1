#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "cocycle/critical_set.hpp"

using namespace cocycle;

namespace {

PhaseFamily sin_family(double a, double b) {
    return PhaseFamily({{TrigPoly{a, {}, {b}}, TrigPoly::constant(1)}});
}

// closed-form roots of a + b sin 2 pi x = (pi/2)(1 + 2j) eps
std::vector<double> arcsin_roots(double a, double b, double eps) {
    std::vector<double> out;
    const double pi = std::acos(-1.0);
    for (int j = 0; j < 1000; ++j) {
        const double t = (pi / 2) * (1 + 2 * j) * eps;
        if (t > a + b) break;
        const double s = (t - a) / b;
        if (s <= -1 || s >= 1) continue;
        const double x0 = std::asin(s) / (2 * pi);
        for (double x : {x0, 0.5 - x0}) out.push_back(x - std::floor(x));
    }
    std::sort(out.begin(), out.end());
    return out;
}

RotationNumber builder_omega() {
    SpacingPolicy sp;
    sp.leading = {3};
    return build_condition_A_omega({4, 2, 0.5, 0.5}, sp, 6, 256);
}

}  // namespace

TEST_CASE("level-0 set matches arcsin roots") {
    for (auto [a, b] : {std::pair{1.0, 0.3}, std::pair{2.0, 1.5}, std::pair{0.5, 0.45}}) {
        const PhaseFamily f = sin_family(a, b);
        for (double eps : {0.05, 0.09, 0.13}) {
            const CriticalSetApprox c = initial_critical_set(f, eps);
            std::vector<double> xs;
            for (const auto& p : c.points) xs.push_back(p.x);
            std::sort(xs.begin(), xs.end());
            const std::vector<double> ref = arcsin_roots(a, b, eps);
            REQUIRE(xs.size() == ref.size());
            for (std::size_t i = 0; i < xs.size(); ++i) CHECK(std::abs(xs[i] - ref[i]) < 1e-12);
            CHECK(critical_count(f, eps) == ref.size());
        }
    }
}

TEST_CASE("count lower bound and window consistency") {
    const PhaseFamily f({{TrigPoly{1, {0.2}, {0.3, 0.1}}, TrigPoly::constant(1)}});
    const double pi = std::acos(-1.0);
    for (int i = 0; i < 50; ++i) {
        const double eps = 0.02 + 0.2 * i / 49.0;
        CHECK(critical_count(f, eps) >= static_cast<std::size_t>(std::floor(oscillation(f.entries[0].phi_hat) / (pi * eps))));
    }
    for (const EpsilonWindow& w : epsilon_windows(f, 0.05, 0.2, 200)) {
        for (double t : {1e-6, 0.5, 1 - 1e-6}) CHECK(critical_count(f, w.lo + t * (w.hi - w.lo)) == w.p);
    }
}

TEST_CASE("labelled points track across eps") {
    const PhaseFamily f = sin_family(1, 0.3);
    const CriticalSetApprox c = initial_critical_set(f, 0.13);
    for (const auto& p : c.points) CHECK(locate(f, p, 0.13) == doctest::Approx(p.x).epsilon(1e-12));
    CHECK_THROWS_AS(locate(f, c.points.front(), 1.0), DegenerateInput);
}

TEST_CASE("collision times against brute force") {
    const RotationNumber w = omega_from_quotients(std::vector<std::int64_t>(50, 1), 256);
    const long double om = w.value.convert_to<long double>();
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 10; ++t) {
        std::vector<double> c(3);
        for (double& x : c) x = u(rng);
        const double delta = 0.002;
        const CollisionLog log = collision_times(c, delta, w, 2000);
        for (std::size_t j = 0; j < c.size(); ++j)
            for (std::size_t j2 = 0; j2 < c.size(); ++j2) {
                std::int64_t first = 0;
                for (std::int64_t k = 1; k <= 2000 && first == 0; ++k) {
                    long double y = c[j] + k * om;
                    y -= std::floor(y);
                    long double d = std::fabs(y - static_cast<long double>(c[j2]));
                    d = std::min(d, 1 - d);
                    if (d < 2 * delta) first = k;
                }
                std::int64_t got = 0;
                for (const auto& e : log.events)
                    if (e.j == j && e.j2 == j2) got = e.time;
                CHECK(got == first);
            }
    }
}

TEST_CASE("radius is sandwiched and the primary time is the chain denominator") {
    const RotationNumber w = builder_omega();
    const ConditionAReport cond = check_condition_A(w, {4, 2, 0.5, 0.5}, brjuno_sum(w, w.conv.q.size() - 2).C_B);
    REQUIRE(cond.pass);
    const Layer L = choose_kappa(w, cond, 0.15, 1.0, 0);
    const std::int64_t q = w.conv.q[static_cast<std::size_t>(L.cf_index)];
    CHECK(L.tau == q);
    CHECK(1.0 / static_cast<double>(w.conv.q[static_cast<std::size_t>(L.cf_index) + 1]) < L.delta);
    CHECK(L.delta == doctest::Approx(std::exp(-L.kappa / 0.15)).epsilon(1e-12));
    const CollisionLog log = collision_times({0.3}, L.delta, w, 10 * q);
    CHECK(log.primary_time(1) == q);
    CHECK_THROWS_AS(choose_kappa(w, cond, 0.15, 1.0, 50), DepthExhausted);
}

TEST_CASE("pipeline on the sine fixture") {
    const RotationNumber w = builder_omega();
    const ConditionAReport cond = check_condition_A(w, {4, 2, 0.5, 0.5}, brjuno_sum(w, w.conv.q.size() - 2).C_B);
    CocycleSpec s;
    s.omega = w;
    s.phases = sin_family(1, 0.3);
    std::size_t survivors = 0;
    for (int i = 0; i < 41; ++i) {
        s.epsilon = 0.12 + 0.1 * i / 40.0;
        const PipelineResult r = run_pipeline(s, cond, PipelineOptions{1});
        CHECK(r.p == critical_count(s.phases, s.epsilon));
        if (!r.survives()) {
            CHECK(r.excluded_by.rfind("E'", 0) == 0);
            continue;
        }
        ++survivors;
        REQUIRE(r.levels.size() == 2);
        for (const LevelReport& l : r.levels) {
            CHECK(l.first_secondary == 0);
            CHECK(l.log.primary_time(l.set.N()) == l.layer.tau);
        }
        for (const PointLevelReport& p : r.levels[0].points) {
            CHECK(p.refine.ok());
            CHECK(p.refine.drift < r.levels[0].layer.delta);
        }
    }
    CHECK(survivors > 0);
}

TEST_CASE("resonance exclusion for a constant phase") {
    const PhaseFamily f({{TrigPoly::constant(1), TrigPoly::constant(1)}});
    const double pi = std::acos(-1.0);
    for (const Resonance& r : resonances(f, 0.05, 0.2)) {
        CHECK(r.center == doctest::Approx(1 / (pi * (r.j + 0.5))).epsilon(1e-14));
        CHECK(std::abs(std::cos(1 / r.center)) < 1e-12);
    }
    const EpsilonExclusion e = constant_phase_exclusion(f, 0.05, 0.2);
    CHECK(e.total() <= e.bound_sum * (1 + 1e-12));
    for (const auto& iv : e.intervals) CHECK(iv.label == kLabelResonance);
}
