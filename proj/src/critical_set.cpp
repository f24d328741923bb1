#include "cocycle/critical_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/tools/roots.hpp>

namespace cocycle {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2;

struct Piece {
    double xa = 0, xb = 0;  // xb may exceed 1
    double va = 0, vb = 0;
};

std::vector<Piece> monotone_pieces(const TrigPoly& f) {
    std::vector<Piece> out;
    const std::vector<Extremum> ext = critical_points(f);
    for (std::size_t i = 0; i < ext.size(); ++i) {
        Piece p;
        p.xa = ext[i].x;
        p.xb = i + 1 < ext.size() ? ext[i + 1].x : ext[0].x + 1;
        p.va = ext[i].value;
        p.vb = i + 1 < ext.size() ? ext[i + 1].value : ext[0].value;
        out.push_back(p);
    }
    return out;
}

double level_value(std::int64_t branch, double eps) { return kHalfPi * static_cast<double>(1 + 2 * branch) * eps; }

double solve_on_piece(const TrigPoly& f, const Piece& p, double target) {
    auto g = [&](double x) { return f.value(x) - target; };
    const double ga = p.va - target, gb = p.vb - target;
    boost::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(g, p.xa, p.xb, ga, gb,
                                                     boost::math::tools::eps_tolerance<double>(53), iters);
    double x = (r.first + r.second) / 2;
    // keep the endpoint with the smaller residual
    if (std::abs(g(r.first)) < std::abs(g(x))) x = r.first;
    if (std::abs(g(r.second)) < std::abs(g(x))) x = r.second;
    return x - std::floor(x);
}

// branches with level strictly inside the piece's range
void branch_range(const Piece& p, double eps, std::int64_t& lo, std::int64_t& hi) {
    const double a = std::min(p.va, p.vb), b = std::max(p.va, p.vb);
    lo = static_cast<std::int64_t>(std::ceil((a / (kHalfPi * eps) - 1) / 2));
    hi = static_cast<std::int64_t>(std::floor((b / (kHalfPi * eps) - 1) / 2));
    while (level_value(lo, eps) <= a) ++lo;
    while (level_value(hi, eps) >= b) --hi;
}

long double unwrap_pi_ld(long double v, long double ref) {
    const long double p = pi_v<long double>();
    return v - p * std::round((v - ref) / p);
}

}  // namespace

std::vector<double> CriticalSetApprox::centers() const {
    std::vector<double> out;
    out.reserve(points.size());
    for (const CriticalPoint& c : points) out.push_back(c.x);
    return out;
}

double oscillation(const TrigPoly& f) { return maximum_value(f) - minimum_value(f); }

CriticalSetApprox initial_critical_set(const PhaseFamily& phases, double epsilon) {
    if (!(epsilon > 0)) throw DomainError("initial_critical_set: epsilon must be positive");
    CriticalSetApprox out;
    out.epsilon = epsilon;
    for (std::size_t k = 0; k < phases.size(); ++k) {
        const TrigPoly& f = phases.entries[k].phi_hat;
        const std::vector<Piece> pieces = monotone_pieces(f);
        for (std::size_t pi = 0; pi < pieces.size(); ++pi) {
            std::int64_t lo = 0, hi = -1;
            branch_range(pieces[pi], epsilon, lo, hi);
            for (std::int64_t i = lo; i <= hi; ++i)
                out.points.push_back({solve_on_piece(f, pieces[pi], level_value(i, epsilon)), k, pi, i});
        }
    }
    std::sort(out.points.begin(), out.points.end(),
              [](const CriticalPoint& a, const CriticalPoint& b) { return a.x < b.x; });
    return out;
}

std::size_t critical_count(const PhaseFamily& phases, double epsilon) {
    std::size_t n = 0;
    for (std::size_t k = 0; k < phases.size(); ++k)
        for (const Piece& p : monotone_pieces(phases.entries[k].phi_hat)) {
            std::int64_t lo = 0, hi = -1;
            branch_range(p, epsilon, lo, hi);
            if (hi >= lo) n += static_cast<std::size_t>(hi - lo + 1);
        }
    return n;
}

double locate(const PhaseFamily& phases, const CriticalPoint& label, double epsilon) {
    const TrigPoly& f = phases.entries.at(label.k).phi_hat;
    const std::vector<Piece> pieces = monotone_pieces(f);
    if (label.piece >= pieces.size()) throw DegenerateInput("locate: no such monotone piece");
    const Piece& p = pieces[label.piece];
    const double target = level_value(label.branch, epsilon);
    if (!(target > std::min(p.va, p.vb) && target < std::max(p.va, p.vb)))
        throw DegenerateInput("locate: critical point does not exist at eps = " + std::to_string(epsilon));
    return solve_on_piece(f, p, target);
}

std::vector<EpsilonWindow> epsilon_windows(const PhaseFamily& phases, double eps_lo, double eps_hi,
                                           std::size_t grid) {
    if (!(eps_lo > 0 && eps_hi > eps_lo)) throw DomainError("epsilon_windows: need 0 < lo < hi");
    // N changes only where an extremum value sits on a level
    std::vector<double> cuts;
    for (std::size_t k = 0; k < phases.size(); ++k)
        for (const Extremum& e : critical_points(phases.entries[k].phi_hat)) {
            const double v = std::abs(e.value);
            if (v == 0) continue;
            for (std::int64_t i = 0;; ++i) {
                const double eps = v / (kHalfPi * static_cast<double>(1 + 2 * i));
                if (eps <= eps_lo) break;
                if (eps < eps_hi) cuts.push_back(eps);
            }
        }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<EpsilonWindow> out;
    double start = eps_lo;
    auto count_in = [&](double a, double b) { return critical_count(phases, a + (b - a) / 2); };
    for (double c : cuts) {
        if (c <= start) continue;
        const std::size_t left = count_in(start, c);
        const double right_end = c * (1 + 1e-9);
        if (left == critical_count(phases, std::min(right_end, eps_hi))) continue;  // maxima and minima cancel
        out.push_back({start, c, left});
        start = c;
    }
    out.push_back({start, eps_hi, count_in(start, eps_hi)});

    // the grid must agree with the windows
    for (std::size_t i = 1; i < grid; ++i) {
        const double eps = eps_lo + (eps_hi - eps_lo) * static_cast<double>(i) / static_cast<double>(grid);
        for (const EpsilonWindow& w : out)
            if (eps > w.lo && eps < w.hi && critical_count(phases, eps) != w.p)
                throw ConvergenceError("epsilon_windows: count changes inside a window near eps = " +
                                       std::to_string(eps));
    }
    return out;
}

Separation separation_derivative(const PhaseFamily& phases, double epsilon, const CriticalPoint& a,
                                 const CriticalPoint& b, double C_rho, double step) {
    Separation out;
    if (a.same_label(b)) {
        out.below_floor = C_rho > 0;
        return out;
    }
    const double h = step > 0 ? step : 1e-6 * epsilon;
    auto rho = [&](double e) {
        const double d = locate(phases, b, e) - locate(phases, a, e);
        return d - std::floor(d);
    };
    const double r0 = rho(epsilon), rp = rho(epsilon + h), rm = rho(epsilon - h);
    auto wrapped = [](double d) { return d - std::round(d); };
    out.rho = r0;
    out.drho = (wrapped(rp - r0) - wrapped(rm - r0)) / (2 * h);
    out.below_floor = std::abs(out.drho) < C_rho;
    return out;
}

Layer choose_kappa(const RotationNumber& omega, const ConditionAReport& cond, double epsilon, double lambda0,
                   std::size_t level, double kappa_max) {
    const ConditionAConstants& c = cond.constants;
    auto kappa_of = [&](std::int64_t q) {
        return epsilon / lambda0 * std::log(c.C_omega * std::pow(static_cast<double>(q), 1 + c.gamma));
    };
    std::size_t J0 = cond.chain.size();
    for (std::size_t j = 0; j < cond.chain.size(); ++j) {
        const std::int64_t q = cond.chain_q(omega, j);
        if (c.C_omega * std::pow(static_cast<double>(q), c.gamma) > 4) {
            if (!(kappa_of(q) < kappa_max))
                throw HypothesisError("choose_kappa: kappa_0 = " + std::to_string(kappa_of(q)) +
                                      " is not below " + std::to_string(kappa_max));
            J0 = j;
            break;
        }
    }
    if (J0 + level >= cond.chain.size())
        throw DepthExhausted("choose_kappa: recurrent chain exhausted at level " + std::to_string(level));
    Layer out;
    out.level = level;
    out.chain_pos = J0 + level;
    out.cf_index = cond.subsequence.at(static_cast<std::size_t>(cond.chain.at(out.chain_pos)));
    out.tau = cond.chain_q(omega, out.chain_pos);
    out.kappa = kappa_of(out.tau);
    out.delta = 1.0 / (c.C_omega * std::pow(static_cast<double>(out.tau), 1 + c.gamma));
    const auto next = static_cast<std::size_t>(out.cf_index + 1);
    if (next >= omega.conv.q.size()) throw DepthExhausted("choose_kappa: expansion too short");
    if (!(1.0 / static_cast<double>(omega.conv.q[next]) < out.delta))
        throw HypothesisError("choose_kappa: radius not sandwiched at level " + std::to_string(level));
    return out;
}

std::int64_t CollisionLog::first_secondary() const {
    std::int64_t t = 0;
    for (const CollisionEvent& e : events)
        if (!e.primary && (t == 0 || e.time < t)) t = e.time;
    return t;
}

std::int64_t CollisionLog::primary_time(std::size_t n_points) const {
    std::int64_t t = 0;
    std::size_t seen = 0;
    for (const CollisionEvent& e : events) {
        if (!e.primary) continue;
        if (t != 0 && e.time != t) return 0;
        t = e.time;
        ++seen;
    }
    return seen == n_points ? t : 0;
}

CollisionLog collision_times(const std::vector<double>& centers, double delta, const RotationNumber& omega,
                             std::int64_t horizon, std::size_t order) {
    CollisionLog log;
    log.horizon = horizon;
    if (horizon < 1 || centers.empty()) return log;
    omega.guard(horizon, delta);
    const std::size_t n = centers.size();
    std::vector<char> found(n * n, 0);
    std::size_t left = n * n;
    for (std::int64_t k = 1; k <= horizon && left > 0; ++k) {
        const double shift = omega.frac_mul(k);
        for (std::size_t j = 0; j < n; ++j) {
            double y = centers[j] + shift;
            y -= std::floor(y);
            for (std::size_t j2 = 0; j2 < n; ++j2) {
                if (found[j * n + j2] || !(circle_distance(y, centers[j2]) < 2 * delta)) continue;
                found[j * n + j2] = 1;
                --left;
                log.events.push_back({j, j2, order, k, j == j2});
            }
        }
    }
    return log;
}

ChiSample chi_at(const CocycleSpec& spec, std::size_t k, long double x, std::int64_t steps) {
    using LD = long double;
    const LD eps = spec.epsilon;
    PolarForm<LD> upper;
    for (std::size_t kk = k + 1; kk < spec.phases.size(); ++kk) {
        const PhaseEntry& e = spec.phases.entries[kk];
        upper = polar_append<LD>(upper, e.phi_hat.eval<LD>(x, 0) / eps, e.lambda_hat.eval<LD>(x, 0) / eps);
    }
    PolarForm<LD> tail;
    if (steps > 0) tail = forward_product<LD>(spec, spec.omega.orbit_point(static_cast<double>(x), 1), steps);
    const PolarForm<LD> p = polar_compose<LD>(tail, upper);
    return {chi_mod_pi(p.chi), p.mu};
}

ChiProfile chi_profile(const CocycleSpec& spec, const CriticalPoint& point, double delta, std::int64_t steps,
                       std::size_t samples) {
    ChiProfile out;
    out.steps = steps;
    out.h = delta / 100;
    const ChiSample centre = chi_at(spec, point.k, point.x, steps);
    out.chi_c = centre.chi;
    const long double cp = unwrap_pi_ld(chi_at(spec, point.k, point.x + out.h, steps).chi, centre.chi);
    const long double cm = unwrap_pi_ld(chi_at(spec, point.k, point.x - out.h, steps).chi, centre.chi);
    const long double h = out.h;
    out.d1 = (cp - cm) / (2 * h);
    out.d2 = (cp - 2 * centre.chi + cm) / (h * h);
    out.mu_floor = centre.mu;
    samples = std::max<std::size_t>(samples, 2);
    for (std::size_t i = 0; i < samples; ++i) {
        const double x = point.x - delta + 2 * delta * static_cast<double>(i) / static_cast<double>(samples - 1);
        const ChiSample s = chi_at(spec, point.k, x, steps);
        out.x.push_back(x);
        out.chi.push_back(unwrap_pi_ld(s.chi, centre.chi));
        out.mu.push_back(s.mu);
        out.mu_floor = std::min(out.mu_floor, s.mu);
    }
    for (std::int64_t m = 1; m <= steps; ++m)
        out.min_cos = std::min(out.min_cos, eval_factors(spec, spec.omega.orbit_point(point.x, m)).delta);
    return out;
}

RefineReport refine_critical_point(const CocycleSpec& spec, const CriticalPoint& point, const ChiFunction& chi,
                                   double delta, double tolerance, double C_Delta) {
    using LD = long double;
    const TrigPoly& f = spec.phases.entries.at(point.k).phi_hat;
    const LD eps = spec.epsilon;
    const LD L = pi_v<LD>() / 2 * static_cast<LD>(1 + 2 * point.branch);
    const LD c = point.x;
    const LD h = static_cast<LD>(delta) / 100;
    const LD chi_c = chi(c);
    auto chi_near = [&](LD x) { return unwrap_pi_ld(chi(x), chi_c); };
    auto u = [&](LD x) { return f.eval<LD>(x, 0) / eps - chi_near(x) - L; };
    auto du = [&](LD x) { return f.eval<LD>(x, 1) / eps - (chi_near(x + h) - chi_near(x - h)) / (2 * h); };

    RefineReport r;
    r.x_old = point.x;
    const LD cp = chi_near(c + h), cm = chi_near(c - h);
    const LD w1 = f.eval<LD>(c, 1) / eps - (cp - cm) / (2 * h);
    const LD w2 = f.eval<LD>(c, 2) / eps - (cp - 2 * chi_c + cm) / (h * h);
    r.C = std::tan(u(c));
    r.B = w1 / 2;
    r.A = (w2 - r.C * w1 * w1) / 2;
    const LD D = delta;
    r.quad_small = std::abs(r.A * r.C / (r.B * r.B)) < C_Delta;
    r.quad_curvature = r.A == 0 || std::abs(r.B / r.A) > D / (1 - C_Delta);
    r.quad_offset = std::abs(r.C / (2 * r.B)) < D * (1 + C_Delta);
    if (r.B == 0) throw ConvergenceError("refine_critical_point: flat argument at the centre");

    // quadratic-model initializer, then Newton; a step below tolerance is not taken
    LD x = c;
    LD step = r.C / (2 * r.B);
    const LD tol = tolerance;
    int it = 0;
    while (std::abs(step) >= tol) {
        if (++it > 30) throw ConvergenceError("refine_critical_point: Newton did not converge");
        x -= step;
        if (!(std::abs(x - c) < D)) throw ConvergenceError("refine_critical_point: iterate left the layer interval");
        const LD d = du(x);
        if (d == 0) throw ConvergenceError("refine_critical_point: zero derivative");
        step = u(x) / d;
    }
    r.newton_iterations = it;
    r.x_new = static_cast<double>(x - std::floor(x));
    r.drift = static_cast<double>(std::abs(x - c));

    const LD t = std::max<LD>(tol, 64 * std::numeric_limits<double>::epsilon());
    r.sign_change = u(x - t) * u(x + t) < 0;
    // one sign change and a monotone argument over the whole interval
    constexpr int kProbe = 64;
    int changes = 0, rises = 0, falls = 0;
    LD prev = u(c - D);
    for (int i = 1; i <= kProbe; ++i) {
        const LD cur = u(c - D + 2 * D * i / kProbe);
        if ((prev < 0) != (cur < 0)) ++changes;
        if (cur > prev) ++rises;
        if (cur < prev) ++falls;
        prev = cur;
    }
    r.unique = changes == 1 && (rises == 0 || falls == 0);
    return r;
}

std::string label_secondary(std::size_t level) { return "E'_" + std::to_string(level); }

std::vector<Layer> PipelineResult::layers() const {
    std::vector<Layer> out;
    for (const LevelReport& l : levels) out.push_back(l.layer);
    return out;
}

PipelineResult run_pipeline(const CocycleSpec& spec, const ConditionAReport& cond, const PipelineOptions& opt) {
    spec.validate();
    PipelineResult res;
    res.epsilon = spec.epsilon;
    res.C_B = cond.C_B;
    const double eps = spec.epsilon;
    const double lambda0 = spec.phases.lambda0();
    const double gamma = cond.constants.gamma;
    CriticalSetApprox set = initial_critical_set(spec.phases, eps);
    res.p = set.N();
    if (set.points.empty()) {
        res.final_set = set;
        res.converged = true;
        return res;
    }
    std::vector<std::int64_t> taus;
    for (std::size_t n = 0; n <= opt.max_level; ++n) {
        LevelReport lr;
        lr.layer = choose_kappa(spec.omega, cond, eps, lambda0, n, opt.kappa_max);
        lr.layer.centers = set.centers();
        lr.set = set;
        lr.set.level = n;
        if (n == 0) res.kappa0 = lr.layer.kappa;
        const double kappa0 = res.kappa0;
        taus.push_back(lr.layer.tau);
        lr.log = collision_times(lr.layer.centers, lr.layer.delta, spec.omega, lr.layer.tau, n);
        lr.first_secondary = lr.log.first_secondary();
        if (lr.first_secondary != 0 && lr.first_secondary < lr.layer.tau) {
            res.excluded_by = label_secondary(n);
            res.detail = "secondary collision at time " + std::to_string(lr.first_secondary);
            res.levels.push_back(std::move(lr));
            res.final_set = set;
            return res;
        }
        if (lr.log.primary_time(set.N()) != lr.layer.tau)
            throw HypothesisError("run_pipeline: primary collision time differs from q at level " +
                                  std::to_string(n));
        if (n == 0) {
            const double floor = std::exp(-lambda0 * kappa0 * gamma / ((1 + gamma) * eps));
            for (const CriticalPoint& c : set.points) {
                const double slope = std::abs(spec.phases.entries[c.k].phi_hat.d1(c.x)) / eps;
                if (!(slope >= floor)) lr.slope_ok = false;
            }
            if (!lr.slope_ok) {
                res.excluded_by = kLabelSlope;
                res.detail = "slope below " + std::to_string(floor);
                res.levels.push_back(std::move(lr));
                res.final_set = set;
                return res;
            }
        }
        if (n == opt.max_level) {
            res.levels.push_back(std::move(lr));
            break;
        }

        const Layer next = choose_kappa(spec.omega, cond, eps, lambda0, n + 1, opt.kappa_max);
        const std::int64_t steps = lr.layer.tau - 1;
        const double delta = lr.layer.delta;
        const double L0 = lambda0 / eps;
        const double chi_scale = eps * std::exp(-(2 - kappa0) * L0);
        const double d1_scale = std::exp(-2 * (1 - kappa0) * L0);
        const double d2_scale = std::exp(-(2 - 3 * kappa0) * L0) / eps;
        double drift_scale = 0;
        if (n == 0) {
            drift_scale = eps * std::exp(-(2 - (1 + 2 * gamma) / (1 + gamma) * kappa0) * L0);
        } else {
            const double span = static_cast<double>(taus[n - 1] - (n >= 2 ? taus[n - 2] : 0) - 1);
            drift_scale = eps * std::exp(-2 * span * ((1 - kappa0) * L0 - cond.C_B) +
                                         L0 * kappa0 * gamma / (1 + gamma));
        }

        CriticalSetApprox refined = set;
        refined.level = n + 1;
        double max_drift = 0;
        for (std::size_t j = 0; j < set.points.size(); ++j) {
            const CriticalPoint& c = set.points[j];
            PointLevelReport pr;
            pr.point = c;
            pr.slope = std::abs(spec.phases.entries[c.k].phi_hat.d1(c.x)) / eps;
            pr.slope_floor = std::exp(-lambda0 * kappa0 * gamma / ((1 + gamma) * eps));
            pr.chi = chi_profile(spec, c, delta, steps, opt.chi_samples);
            pr.chi_ratio = static_cast<double>(std::abs(pr.chi.chi_c)) / chi_scale;
            pr.d1_ratio = static_cast<double>(std::abs(pr.chi.d1)) / d1_scale;
            pr.d2_ratio = static_cast<double>(std::abs(pr.chi.d2)) / d2_scale;
            pr.drift_scale = drift_scale;
            const std::size_t k = c.k;
            const ChiFunction chi = [&spec, k, steps](long double x) { return chi_at(spec, k, x, steps).chi; };
            try {
                pr.refine = refine_critical_point(spec, c, chi, delta, 1e-3 * next.delta, opt.C_Delta);
            } catch (const ConvergenceError& e) {
                res.excluded_by = kLabelRefine;
                res.detail = std::string(e.what()) + " at level " + std::to_string(n) + ", point " + std::to_string(j);
                lr.points.push_back(std::move(pr));
                res.levels.push_back(std::move(lr));
                res.final_set = set;
                return res;
            }
            if (!pr.refine.ok()) {
                res.excluded_by = kLabelRefine;
                res.detail = "root certificate failed at level " + std::to_string(n) + ", point " + std::to_string(j);
                lr.points.push_back(std::move(pr));
                res.levels.push_back(std::move(lr));
                res.final_set = set;
                return res;
            }
            refined.points[j].x = pr.refine.x_new;
            max_drift = std::max(max_drift, pr.refine.drift);
            lr.points.push_back(std::move(pr));
        }
        res.levels.push_back(std::move(lr));
        set = refined;
        if (opt.tol > 0 && max_drift < opt.tol) {
            res.converged = true;
            break;
        }
    }
    if (!res.converged) res.converged = res.levels.size() == opt.max_level + 1;
    res.final_set = set;
    return res;
}

double EpsilonExclusion::total() const {
    double t = 0;
    for (const auto& [label, m] : measure) t += m;
    return t;
}

bool EpsilonExclusion::excluded(double eps) const {
    return std::any_of(intervals.begin(), intervals.end(),
                       [eps](const ExcludedInterval& i) { return eps > i.lo && eps < i.hi; });
}

std::vector<ExcludedInterval> EpsilonExclusion::with_label(const std::string& label) const {
    std::vector<ExcludedInterval> out;
    for (const ExcludedInterval& i : intervals)
        if (i.label == label) out.push_back(i);
    return out;
}

EpsilonExclusion exclusion_scan(const CocycleSpec& base, const ConditionAReport& cond, const EpsilonWindow& window,
                                const ScanOptions& opt) {
    EpsilonExclusion out;
    out.window_lo = window.lo;
    out.window_hi = window.hi;
    out.p = window.p;
    const std::size_t G = std::max<std::size_t>(opt.grid, 2);
    auto classify = [&](double eps) {
        CocycleSpec s = base;
        s.epsilon = eps;
        const PipelineResult r = run_pipeline(s, cond, opt.pipeline);
        if (r.p != window.p)
            throw ConvergenceError("exclusion_scan: critical count " + std::to_string(r.p) +
                                   " inside a window of count " + std::to_string(window.p));
        return r.excluded_by;
    };
    const double width = window.hi - window.lo;
    std::vector<double> eps(G);
    std::vector<std::string> labels(G);
    for (std::size_t i = 0; i < G; ++i) {
        eps[i] = window.lo + width * (static_cast<double>(i) + 0.5) / static_cast<double>(G);
        labels[i] = classify(eps[i]);
    }
    // segment boundaries
    std::vector<double> cut{window.lo};
    for (std::size_t i = 0; i + 1 < G; ++i) {
        if (labels[i] == labels[i + 1]) continue;
        double a = eps[i], b = eps[i + 1];
        while (b - a > opt.rel_tol * window.hi) {
            const double m = (a + b) / 2;
            if (classify(m) == labels[i])
                a = m;
            else
                b = m;
        }
        cut.push_back((a + b) / 2);
    }
    cut.push_back(window.hi);
    std::size_t seg = 0;
    for (std::size_t i = 0; i < G; ++i) {
        if (i > 0 && labels[i] != labels[i - 1]) ++seg;
        if (labels[i].empty()) continue;
        if (i > 0 && labels[i] == labels[i - 1]) continue;
        out.intervals.push_back({cut[seg], cut[seg + 1], labels[i]});
    }
    for (const ExcludedInterval& iv : out.intervals) out.measure[iv.label] += iv.hi - iv.lo;

    // separation drift of the level-0 points
    const std::size_t p = window.p;
    if (p >= 2) {
        out.C_rho = std::numeric_limits<double>::infinity();
        std::vector<double> lo_rho, hi_rho, last;
        bool first = true;
        for (std::size_t i = 0; i < G; ++i) {
            const CriticalSetApprox s = initial_critical_set(base.phases, eps[i]);
            if (first) {
                lo_rho.assign(p * p, 0);
                hi_rho.assign(p * p, 0);
                last.assign(p * p, 0);
            }
            for (std::size_t a = 0; a < p; ++a)
                for (std::size_t b = a + 1; b < p; ++b) {
                    const Separation sep = separation_derivative(base.phases, eps[i], s.points[a], s.points[b]);
                    out.C_rho = std::min(out.C_rho, std::abs(sep.drho));
                    double& l = last[a * p + b];
                    const double r = first ? sep.rho : l + (sep.rho - l - std::round(sep.rho - l));
                    l = r;
                    if (first) lo_rho[a * p + b] = hi_rho[a * p + b] = r;
                    lo_rho[a * p + b] = std::min(lo_rho[a * p + b], r);
                    hi_rho[a * p + b] = std::max(hi_rho[a * p + b], r);
                }
            first = false;
        }
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = a + 1; b < p; ++b)
                out.rho_span = std::max(out.rho_span, hi_rho[a * p + b] - lo_rho[a * p + b]);
    }
    const double lambda0 = base.phases.lambda0();
    const double gamma = cond.constants.gamma;
    const double pairs = static_cast<double>(p) * (static_cast<double>(p) - 1) / 2;
    for (std::size_t n = 0; n <= opt.pipeline.max_level; ++n) {
        LevelBounds b;
        b.level = n;
        try {
            const Layer l = choose_kappa(base.omega, cond, window.hi, lambda0, n, opt.pipeline.kappa_max);
            b.delta = l.delta;
            b.tau = l.tau;
            b.asymptotic = std::exp(-lambda0 * l.kappa * gamma / ((1 + gamma) * window.hi));
        } catch (const Error&) {
            continue;
        }
        const double tau = static_cast<double>(b.tau);
        b.literal = out.C_rho * out.rho_span * pairs * tau * b.delta;
        b.rigorous = p < 2 ? 0
                           : 2 * pairs * (tau - 1) * (std::floor(out.rho_span) + 1) * 4 * b.delta / out.C_rho;
        out.bounds.push_back(b);
    }
    return out;
}

std::vector<ExcludedInterval> exclusion_secondary(const EpsilonExclusion& scan, std::size_t level) {
    return scan.with_label(label_secondary(level));
}

std::vector<Resonance> resonances(const PhaseFamily& phases, double eps_lo, double eps_hi) {
    if (!phases.all_phases_constant()) throw DomainError("resonances: phase family is not constant");
    if (!(eps_lo > 0 && eps_hi > eps_lo)) throw DomainError("resonances: need 0 < lo < hi");
    const double lambda0 = phases.lambda0();
    std::vector<Resonance> out;
    for (std::size_t k = 0; k < phases.size(); ++k) {
        const double v = std::abs(phases.entries[k].phi_hat.a0);
        if (v == 0) continue;
        for (std::int64_t j = 0;; ++j) {
            const double c = v / (std::numbers::pi * (static_cast<double>(j) + 0.5));
            const double r = c / v * std::exp(-lambda0 / (2 * c));
            if (c + r <= eps_lo) break;
            if (c - r < eps_hi) out.push_back({k, j, c, r});
        }
    }
    std::sort(out.begin(), out.end(), [](const Resonance& a, const Resonance& b) { return a.center < b.center; });
    return out;
}

EpsilonExclusion constant_phase_exclusion(const PhaseFamily& phases, double eps_lo, double eps_hi) {
    EpsilonExclusion out;
    out.window_lo = eps_lo;
    out.window_hi = eps_hi;
    for (const Resonance& r : resonances(phases, eps_lo, eps_hi)) {
        out.bound_sum += 2 * r.radius;
        const double lo = std::max(eps_lo, r.center - r.radius), hi = std::min(eps_hi, r.center + r.radius);
        if (!out.intervals.empty() && lo <= out.intervals.back().hi)
            out.intervals.back().hi = std::max(out.intervals.back().hi, hi);
        else
            out.intervals.push_back({lo, hi, kLabelResonance});
    }
    out.measure[kLabelResonance] = 0;
    for (const ExcludedInterval& iv : out.intervals) out.measure[kLabelResonance] += iv.hi - iv.lo;
    return out;
}

double resonance_cos_floor(const PhaseFamily& phases, double epsilon) {
    double m = 1;
    for (const PhaseEntry& e : phases.entries) m = std::min(m, std::abs(std::cos(e.phi_hat.a0 / epsilon)));
    return m;
}

}  // namespace cocycle
