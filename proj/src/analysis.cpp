#include "cocycle/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <boost/multiprecision/float128.hpp>

#include "cocycle/parallel.hpp"

namespace cocycle {

namespace {

using Quad = boost::multiprecision::float128;

struct Checkpoint {
    std::int64_t n = 0;
    double mu = 0;
    double chi = 0;
};

template <class T>
std::vector<Checkpoint> run_checkpoints(const CocycleSpec& spec, double x, const std::vector<std::int64_t>& sched) {
    std::vector<Checkpoint> out;
    if (sched.empty()) return out;
    spec.omega.guard(sched.back(), kOrbitScale);
    PolarForm<T> state;
    std::int64_t m = 0;
    for (std::int64_t target : sched) {
        for (; m < target; ++m) state = apply_fiber<T>(spec, spec.omega.orbit_point(x, m), state);
        out.push_back({target, static_cast<double>(state.mu), static_cast<double>(chi_mod_pi(state.chi))});
    }
    return out;
}

std::vector<Checkpoint> checkpoints(const CocycleSpec& spec, double x, std::vector<std::int64_t> sched,
                                    Backend b) {
    std::sort(sched.begin(), sched.end());
    sched.erase(std::unique(sched.begin(), sched.end()), sched.end());
    if (!sched.empty() && sched.front() < 0) throw DomainError("schedule steps must be non-negative");
    switch (b) {
        case Backend::Extended: return run_checkpoints<long double>(spec, x, sched);
        case Backend::Quad: return run_checkpoints<Quad>(spec, x, sched);
        default: return run_checkpoints<double>(spec, x, sched);
    }
}

double median(std::vector<double> v) {
    if (v.empty()) return 0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    return (hi + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid))) / 2;
}

double angle_gap_mod_pi(double a, double b) {
    const double p = std::numbers::pi;
    double d = std::fmod(std::abs(a - b), p);
    return std::min(d, p - d);
}

}  // namespace

Backend parse_backend(const std::string& name) {
    if (name == "double") return Backend::Double;
    if (name == "extended") return Backend::Extended;
    if (name == "quad") return Backend::Quad;
    throw ConfigError("unknown backend '" + name + "' (double, extended, quad)");
}

std::string backend_name(Backend b) {
    switch (b) {
        case Backend::Extended: return "extended";
        case Backend::Quad: return "quad";
        default: return "double";
    }
}

double log_norm(const CocycleSpec& spec, double x, std::int64_t n, Backend backend) {
    return checkpoints(spec, x, {n}, backend).front().mu;
}

LyapunovEstimate finite_lyapunov(const CocycleSpec& spec, double x, std::vector<std::int64_t> schedule,
                                 Backend backend) {
    for (std::int64_t n : schedule)
        if (n < 1) throw DomainError("finite_lyapunov: schedule steps must be positive");
    LyapunovEstimate out;
    out.x = x;
    for (const Checkpoint& c : checkpoints(spec, x, std::move(schedule), backend))
        out.schedule.emplace_back(c.n, c.mu / static_cast<double>(c.n));
    if (!out.schedule.empty()) {
        out.n = out.schedule.back().first;
        out.value = out.schedule.back().second;
    }
    return out;
}

IntegratedEstimate mean_of(std::vector<double> values) {
    IntegratedEstimate out;
    out.values = std::move(values);
    const auto n = static_cast<double>(out.values.size());
    if (out.values.empty()) return out;
    out.mean = std::accumulate(out.values.begin(), out.values.end(), 0.0) / n;
    double ss = 0;
    for (double v : out.values) ss += (v - out.mean) * (v - out.mean);
    out.stddev = out.values.size() > 1 ? std::sqrt(ss / (n - 1)) : 0;
    out.std_error = out.stddev / std::sqrt(n);
    return out;
}

IntegratedEstimate integrated_lyapunov(const CocycleSpec& spec, std::size_t grid_size, std::int64_t n,
                                       Backend backend) {
    if (n < 1) throw DomainError("integrated_lyapunov: n must be positive");
    std::vector<double> v(grid_size);
    parallel_for(grid_size, [&](std::size_t i) {
        const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(grid_size);
        v[i] = log_norm(spec, x, n, backend) / static_cast<double>(n);
    });
    return mean_of(std::move(v));
}

EDVerdict uh_test(const CocycleSpec& spec, std::size_t grid_size, const std::vector<std::int64_t>& schedule,
                  UHThresholds th, Backend backend) {
    EDVerdict out;
    if (grid_size == 0 || schedule.empty()) throw DomainError("uh_test: empty grid or schedule");
    out.growth_threshold = th.growth > 0 ? th.growth : 0.5 * spec.phases.lambda0() / spec.epsilon;
    std::vector<std::vector<Checkpoint>> runs(grid_size);
    parallel_for(grid_size, [&](std::size_t i) {
        const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(grid_size);
        runs[i] = checkpoints(spec, x, schedule, backend);
    });
    out.Lambda_min = std::numeric_limits<double>::infinity();
    out.log_C_witness = std::numeric_limits<double>::infinity();
    std::vector<char> bad(grid_size, 0);
    for (std::size_t i = 0; i < grid_size; ++i) {
        for (const Checkpoint& c : runs[i]) {
            if (c.n == 0) continue;
            const double rate = c.mu / static_cast<double>(c.n);
            out.Lambda_min = std::min(out.Lambda_min, rate);
            out.log_C_witness = std::min(out.log_C_witness, c.mu - out.growth_threshold * static_cast<double>(c.n));
            if (rate < out.growth_threshold) bad[i] = 1;
        }
        double a = std::numbers::pi / 2 - runs[i].back().chi;
        a -= std::numbers::pi * std::floor(a / std::numbers::pi);
        out.direction_field.push_back(a);
    }
    for (std::size_t i = 0; i < grid_size && grid_size > 1; ++i) {
        const std::size_t j = (i + 1) % grid_size;
        const double gap = angle_gap_mod_pi(out.direction_field[i], out.direction_field[j]);
        out.discontinuity_score = std::max(out.discontinuity_score, gap);
        if (gap > th.jump) bad[i] = bad[j] = 1;
    }
    for (std::size_t i = 0; i < grid_size; ++i)
        if (bad[i]) out.witnesses.push_back((static_cast<double>(i) + 0.5) / static_cast<double>(grid_size));
    out.uh = out.Lambda_min >= out.growth_threshold && out.discontinuity_score < th.jump;
    out.inconclusive = std::abs(out.Lambda_min - out.growth_threshold) < th.margin * out.growth_threshold ||
                       std::abs(out.discontinuity_score - th.jump) < th.margin * th.jump;
    return out;
}

HReport property_H(const RotationNumber& omega, double x, const std::vector<Layer>& layers) {
    HReport out;
    out.x = x;
    if (layers.empty()) return out;
    out.horizon = layers.back().tau;
    omega.guard(out.horizon, layers.back().delta);
    std::int64_t start = 0;
    for (std::size_t n = 0; n < layers.size(); ++n) {
        const Layer& l = layers[n];
        for (std::int64_t m = start; m < l.tau; ++m) {
            const double y = omega.orbit_point(x, m);
            for (double c : l.centers)
                if (circle_distance(y, c) < l.delta) {
                    out.passes = false;
                    out.level = n;
                    out.step = m;
                    return out;
                }
        }
        start = l.tau;
    }
    return out;
}

double lyapunov_lower_bound(double lambda0, double kappa0, double C_A, double C_B, double epsilon) {
    if (!(lambda0 > 0 && epsilon > 0 && C_A > 0 && C_B >= 0 && kappa0 >= 0 && kappa0 < 1))
        throw DomainError("lyapunov_lower_bound: need lambda0, eps, C_A > 0, C_B >= 0, 0 <= kappa0 < 1");
    return (1 - kappa0) * lambda0 / epsilon + std::log(C_A) - C_B;
}

Theorem3Report theorem3_scan(const CocycleSpec& base, const std::vector<double>& eps_grid,
                             const Theorem3Options& opt) {
    Theorem3Report rep;
    if (eps_grid.empty()) return rep;
    if (!base.phases.all_phases_constant()) throw DomainError("theorem3_scan: phases must be constant");
    const auto [lo_it, hi_it] = std::minmax_element(eps_grid.begin(), eps_grid.end());
    const double lo = *lo_it, hi = *hi_it;
    rep.exclusion = constant_phase_exclusion(base.phases, lo * (1 - 1e-12), hi * (1 + 1e-12));
    rep.rows.resize(eps_grid.size());
    parallel_for(eps_grid.size(), [&](std::size_t i) {
        Theorem3Row& row = rep.rows[i];
        CocycleSpec s = base;
        s.epsilon = eps_grid[i];
        row.epsilon = s.epsilon;
        row.excluded = rep.exclusion.excluded(s.epsilon);
        double per_step = 0;
        for (const PhaseEntry& e : s.phases.entries)
            per_step += minimum_value(e.lambda_hat) / s.epsilon + std::log(std::abs(std::cos(e.phi_hat.a0 / s.epsilon)));
        row.threshold = opt.slack * per_step;
        const EDVerdict v = uh_test(s, opt.grid_size, {opt.n}, opt.thresholds, opt.backend);
        row.uh = v.uh;
        row.inconclusive = v.inconclusive;
        row.Lambda_min = v.Lambda_min;
        row.meets_threshold = v.Lambda_min >= row.threshold;
        row.Lambda0 = integrated_lyapunov(s, opt.grid_size, opt.n, opt.backend).mean;
    });
    for (const Theorem3Row& r : rep.rows) {
        if (r.excluded) continue;
        ++rep.surviving;
        if (!(r.uh && r.meets_threshold)) rep.all_surviving_uh = false;
    }
    return rep;
}

Theorem4Report theorem4_scan(const CocycleSpec& base, const ConditionAReport& cond,
                             const std::vector<double>& eps_grid, const Theorem4Options& opt) {
    Theorem4Report rep;
    rep.rows.resize(eps_grid.size());
    const double lambda0 = base.phases.lambda0();
    parallel_for(eps_grid.size(), [&](std::size_t i) {
        Theorem4Row& row = rep.rows[i];
        CocycleSpec s = base;
        s.epsilon = eps_grid[i];
        row.epsilon = s.epsilon;
        row.C_B = cond.C_B;
        const PipelineResult r = run_pipeline(s, cond, opt.pipeline);
        row.p = r.p;
        row.kappa0 = r.kappa0;
        row.excluded_by = r.excluded_by;
        row.detail = r.detail;
        if (!r.survives()) return;
        if (r.p == 0) {
            row.detail = "no critical points";
            return;
        }
        for (const LevelReport& l : r.levels)
            for (const PointLevelReport& pr : l.points) {
                row.max_drift = std::max(row.max_drift, pr.refine.drift);
                if (pr.drift_scale > 0)
                    row.max_drift_ratio = std::max(row.max_drift_ratio, pr.refine.drift / pr.drift_scale);
            }
        const std::vector<Layer> layers = r.layers();
        const std::int64_t tau0 = layers.front().tau;
        row.n = layers.back().tau;
        double occupied = 0;
        for (const Layer& l : layers) occupied += static_cast<double>(l.tau) * l.delta;
        row.Xh_floor = 1 - 2 * static_cast<double>(r.p) * occupied;

        std::mt19937_64 rng(opt.seed + i);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::vector<double> rate_n, rate0;
        row.samples = opt.samples;
        for (std::size_t k = 0; k < opt.samples; ++k) {
            const double x = unif(rng);
            if (!property_H(s.omega, x, layers).passes) continue;
            const std::vector<Checkpoint> c = checkpoints(s, x, {tau0, row.n}, opt.backend);
            rate0.push_back(c.front().mu / static_cast<double>(tau0));
            rate_n.push_back(c.back().mu / static_cast<double>(row.n));
        }
        row.in_Xh = rate_n.size();
        const IntegratedEstimate est = mean_of(rate_n);
        row.Lambda0 = est.mean;
        row.Lambda0_spread = est.stddev;
        row.median_tau0 = median(rate0);
        try {
            row.C_A = product_lower_bound(layers.front().delta, lambda0 / s.epsilon,
                                          static_cast<std::size_t>(row.n)).C_A;
            row.bound = lyapunov_lower_bound(lambda0, r.kappa0, row.C_A, cond.C_B, s.epsilon);
            row.bound_ok = row.in_Xh > 0 && row.Lambda0 >= row.bound;
        } catch (const Error& e) {
            row.detail = e.what();
            row.bound_ok = false;
        }
        if (row.Lambda0 > 0) row.C_Lambda_fit = s.epsilon * std::log(row.Lambda0) / lambda0;
        row.witness_ok = !r.final_set.points.empty();
        for (const CriticalPoint& c : r.final_set.points) {
            WitnessRow w;
            w.x = c.x;
            w.rate = log_norm(s, c.x, tau0, opt.backend) / static_cast<double>(tau0);
            w.ratio = row.median_tau0 > 0 ? w.rate / row.median_tau0 : std::numeric_limits<double>::infinity();
            if (!(w.ratio < opt.witness_ratio)) row.witness_ok = false;
            row.witnesses.push_back(w);
        }
    });
    for (const Theorem4Row& r : rep.rows) {
        if (!r.survives() || r.p == 0) continue;
        ++rep.surviving;
        if (!r.bound_ok) ++rep.bound_violations;
        if (!r.witness_ok) ++rep.witness_failures;
    }
    return rep;
}

}  // namespace cocycle
