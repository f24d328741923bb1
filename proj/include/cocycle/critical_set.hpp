#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cocycle/model.hpp"

namespace cocycle {

// A point where phi_hat_k(x) = (pi/2)(1 + 2 branch) eps.  (k, piece, branch)
// identify the point across nearby eps; piece p is the monotone stretch of
// phi_hat_k between its p-th and (p+1)-th extremum.
struct CriticalPoint {
    double x = 0;
    std::size_t k = 0;
    std::size_t piece = 0;
    std::int64_t branch = 0;

    bool same_label(const CriticalPoint& o) const { return k == o.k && piece == o.piece && branch == o.branch; }
};

struct CriticalSetApprox {
    std::size_t level = 0;
    double epsilon = 0;
    std::vector<CriticalPoint> points;  // sorted by x at level 0

    std::size_t N() const { return points.size(); }
    std::vector<double> centers() const;
};

// max - min over the circle
double oscillation(const TrigPoly& f);

CriticalSetApprox initial_critical_set(const PhaseFamily& phases, double epsilon);
std::size_t critical_count(const PhaseFamily& phases, double epsilon);

// position of a labelled point at another eps; DegenerateInput if it does not exist there
double locate(const PhaseFamily& phases, const CriticalPoint& label, double epsilon);

// N(eps) = p on the open interval (lo, hi); at an endpoint a level touches an extremum
struct EpsilonWindow {
    double lo = 0;
    double hi = 0;
    std::size_t p = 0;
};

std::vector<EpsilonWindow> epsilon_windows(const PhaseFamily& phases, double eps_lo, double eps_hi,
                                           std::size_t grid);

// rho = frac(x_b - x_a) and its eps-derivative by centred differences
struct Separation {
    double rho = 0;
    double drho = 0;
    bool below_floor = false;  // |drho| < C_rho
};

Separation separation_derivative(const PhaseFamily& phases, double epsilon, const CriticalPoint& a,
                                 const CriticalPoint& b, double C_rho = 0, double step = 0);

struct Layer {
    std::size_t level = 0;
    double kappa = 0;
    double delta = 0;             // exp(-lambda0 kappa / eps) = 1 / (C_omega q^(1+gamma))
    std::int64_t tau = 0;         // q_{n_J}, the primary collision time
    std::size_t chain_pos = 0;    // J
    std::int64_t cf_index = 0;    // n_J
    std::vector<double> centers;
};

// Level-n radius from the recurrent chain.  J_0 is the first chain element
// with C_omega q^gamma > 4 (so every return before q stays 2 delta away) and
// kappa_0 < kappa_max; J_n = J_0 + n.
Layer choose_kappa(const RotationNumber& omega, const ConditionAReport& cond, double epsilon, double lambda0,
                   std::size_t level, double kappa_max = 1.0);

struct CollisionEvent {
    std::size_t j = 0;
    std::size_t j2 = 0;
    std::size_t order = 0;
    std::int64_t time = 0;
    bool primary = false;
};

struct CollisionLog {
    std::vector<CollisionEvent> events;  // only pairs that meet within the horizon
    std::int64_t horizon = 0;

    // smallest secondary time, or 0 if none within the horizon
    std::int64_t first_secondary() const;
    // common primary time; 0 if some interval does not return or times differ
    std::int64_t primary_time(std::size_t n_points) const;
};

// minimal 1 <= k <= horizon with dist(c_j + k omega, c_j2) < 2 delta
CollisionLog collision_times(const std::vector<double>& centers, double delta, const RotationNumber& omega,
                             std::int64_t horizon, std::size_t order = 0);

// chi and mu of M(sigma x, steps) followed by the factors above k at x, so that
// M(x, steps + 1) = R(theta + chi) Z(mu) R(phi_k(x) - chi) Z(lambda_k(x)) (lower factors)
struct ChiSample {
    long double chi = 0;
    long double mu = 0;
};

ChiSample chi_at(const CocycleSpec& spec, std::size_t k, long double x, std::int64_t steps);

struct ChiProfile {
    std::vector<double> x;
    std::vector<long double> chi;
    std::vector<long double> mu;
    long double chi_c = 0;   // at the centre
    long double d1 = 0;
    long double d2 = 0;
    long double mu_floor = 0;
    std::int64_t steps = 0;
    double h = 0;
    double min_cos = 1;      // smallest |cos phi| met along the sampled orbits
};

ChiProfile chi_profile(const CocycleSpec& spec, const CriticalPoint& point, double delta, std::int64_t steps,
                       std::size_t samples = 9);

struct RefineReport {
    double x_old = 0;
    double x_new = 0;
    double drift = 0;
    long double A = 0, B = 0, C = 0;
    bool quad_small = false;     // |A C / B^2| < C_Delta
    bool quad_curvature = false; // |B / A| > delta / (1 - C_Delta)
    bool quad_offset = false;    // |C / 2B| < delta (1 + C_Delta)
    int newton_iterations = 0;
    bool sign_change = false;
    bool unique = false;
    bool ok() const { return sign_change && unique; }
};

using ChiFunction = std::function<long double(long double)>;

// root of phi_k(x) - chi(x) = (pi/2)(1 + 2 branch) in (x - delta, x + delta)
RefineReport refine_critical_point(const CocycleSpec& spec, const CriticalPoint& point, const ChiFunction& chi,
                                   double delta, double tolerance, double C_Delta = 0.25);

struct PipelineOptions {
    std::size_t max_level = 2;
    double tol = 0;                 // stop once every drift is below this
    double kappa_max = 1.0;
    double C_Delta = 0.25;
    std::size_t chi_samples = 9;
};

struct PointLevelReport {
    CriticalPoint point;
    double slope = 0;              // |phi_k'(c)|
    double slope_floor = 0;
    ChiProfile chi;
    RefineReport refine;
    // magnitude ratios against the expected scales
    double chi_ratio = 0, d1_ratio = 0, d2_ratio = 0;
    double drift_scale = 0;
};

struct LevelReport {
    Layer layer;
    CriticalSetApprox set;
    CollisionLog log;
    std::int64_t first_secondary = 0;
    bool slope_ok = true;
    std::vector<PointLevelReport> points;  // filled when the level was refined
};

struct PipelineResult {
    double epsilon = 0;
    std::size_t p = 0;
    std::vector<LevelReport> levels;
    CriticalSetApprox final_set;
    bool converged = false;
    std::string excluded_by;       // empty for a surviving eps
    std::string detail;
    double kappa0 = 0;
    double C_B = 0;

    bool survives() const { return excluded_by.empty(); }
    std::vector<Layer> layers() const;
};

std::string label_secondary(std::size_t level);  // "E'_n"
inline const char* kLabelSlope = "E''_0";
inline const char* kLabelResonance = "E_e";
inline const char* kLabelRefine = "refine";

PipelineResult run_pipeline(const CocycleSpec& spec, const ConditionAReport& cond,
                            const PipelineOptions& options = {});

struct ExcludedInterval {
    double lo = 0;
    double hi = 0;
    std::string label;
};

struct LevelBounds {
    std::size_t level = 0;
    double delta = 0;
    std::int64_t tau = 0;
    double asymptotic = 0;   // exp(-lambda0 kappa_n gamma / ((1+gamma) eps_hi))
    double literal = 0;      // C_rho * drho_span * pairs * tau * delta
    double rigorous = 0;     // event count times the widest single event
};

struct EpsilonExclusion {
    double window_lo = 0;
    double window_hi = 0;
    std::size_t p = 0;
    std::vector<ExcludedInterval> intervals;
    std::map<std::string, double> measure;
    double C_rho = 0;          // smallest |d rho / d eps| seen on the scan grid
    double rho_span = 0;       // largest variation of a pair separation over the window
    std::vector<LevelBounds> bounds;
    double bound_sum = 0;      // resonance mode: 2 sum delta_{k,j}

    double total() const;
    bool excluded(double eps) const;
    std::vector<ExcludedInterval> with_label(const std::string& label) const;
};

struct ScanOptions {
    std::size_t grid = 200;
    double rel_tol = 1e-10;
    PipelineOptions pipeline;
};

// labels every eps of the window by the first failing stage and bisects the
// label changes
EpsilonExclusion exclusion_scan(const CocycleSpec& base, const ConditionAReport& cond,
                                const EpsilonWindow& window, const ScanOptions& options = {});

// the E'_n part of a scan
std::vector<ExcludedInterval> exclusion_secondary(const EpsilonExclusion& scan, std::size_t level);

// resonance centres eps_{k,j} = |phi_k| / (pi (j + 1/2)) with radius
// eps_{k,j} |phi_k|^-1 exp(-lambda0 / (2 eps_{k,j}))
struct Resonance {
    std::size_t k = 0;
    std::int64_t j = 0;
    double center = 0;
    double radius = 0;
};

std::vector<Resonance> resonances(const PhaseFamily& phases, double eps_lo, double eps_hi);
EpsilonExclusion constant_phase_exclusion(const PhaseFamily& phases, double eps_lo, double eps_hi);
// min_k |cos(phi_k / eps)| for a constant family
double resonance_cos_floor(const PhaseFamily& phases, double epsilon);

}  // namespace cocycle
