#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cocycle/critical_set.hpp"

namespace cocycle {

enum class Backend { Double, Extended, Quad };

Backend parse_backend(const std::string& name);  // "double" | "extended" | "quad"
std::string backend_name(Backend b);

// mu of M(x, n), n >= 0
double log_norm(const CocycleSpec& spec, double x, std::int64_t n, Backend backend = Backend::Double);

struct LyapunovEstimate {
    double x = 0;
    std::int64_t n = 0;
    double value = 0;  // mu(M(x, n)) / n at the last checkpoint
    std::vector<std::pair<std::int64_t, double>> schedule;
};

LyapunovEstimate finite_lyapunov(const CocycleSpec& spec, double x, std::vector<std::int64_t> schedule,
                                 Backend backend = Backend::Double);

struct IntegratedEstimate {
    double mean = 0;
    double stddev = 0;
    double std_error = 0;
    std::vector<double> values;
};

// midpoint grid (i + 1/2) / grid_size
IntegratedEstimate integrated_lyapunov(const CocycleSpec& spec, std::size_t grid_size, std::int64_t n,
                                       Backend backend = Backend::Double);
IntegratedEstimate mean_of(std::vector<double> values);

struct UHThresholds {
    double growth = 0;   // 0 means half of lambda0 / eps
    double jump = 0.25;  // largest tolerated change of the contracted direction between grid neighbours
    double margin = 0.1; // relative band marked inconclusive
};

struct EDVerdict {
    bool uh = false;
    bool inconclusive = false;
    double Lambda_min = 0;
    double growth_threshold = 0;
    double log_C_witness = 0;        // min over grid and schedule of mu - growth * n
    std::vector<double> direction_field;  // angle mod pi of the contracted direction at the last checkpoint
    double discontinuity_score = 0;
    std::vector<double> witnesses;
};

EDVerdict uh_test(const CocycleSpec& spec, std::size_t grid_size, const std::vector<std::int64_t>& schedule,
                  UHThresholds thresholds = {}, Backend backend = Backend::Double);

struct HReport {
    double x = 0;
    bool passes = true;
    std::size_t level = 0;   // first violation
    std::int64_t step = 0;
    std::int64_t horizon = 0;
};

// orbit avoids LC_0 for 0 <= m < tau_0 and LC_n for tau_{n-1} <= m < tau_n
HReport property_H(const RotationNumber& omega, double x, const std::vector<Layer>& layers);

double lyapunov_lower_bound(double lambda0, double kappa0, double C_A, double C_B, double epsilon);

struct Theorem3Row {
    double epsilon = 0;
    bool excluded = false;
    bool uh = false;
    bool inconclusive = false;
    double Lambda_min = 0;
    double threshold = 0;   // 0.9 * sum_k (lambda_k + log|cos phi_k|) per step
    bool meets_threshold = false;
    double Lambda0 = 0;
};

struct Theorem3Options {
    std::int64_t n = 34;
    std::size_t grid_size = 16;
    double slack = 0.9;
    UHThresholds thresholds;
    Backend backend = Backend::Double;
};

struct Theorem3Report {
    std::vector<Theorem3Row> rows;
    EpsilonExclusion exclusion;
    bool all_surviving_uh = true;
    std::size_t surviving = 0;
};

Theorem3Report theorem3_scan(const CocycleSpec& base, const std::vector<double>& eps_grid,
                             const Theorem3Options& options = {});

struct WitnessRow {
    double x = 0;
    double rate = 0;    // mu(M(x, tau_0)) / tau_0
    double ratio = 0;   // rate / X_h median
};

struct Theorem4Row {
    double epsilon = 0;
    std::size_t p = 0;
    std::string excluded_by;
    std::string detail;
    double kappa0 = 0;
    double C_A = 0;
    double C_B = 0;
    std::int64_t n = 0;             // steps of the integrated estimate
    std::size_t samples = 0;
    std::size_t in_Xh = 0;
    double Xh_floor = 0;            // 1 - 2 p sum tau_n delta_n
    double Lambda0 = 0;             // mean over X_h of mu(M(x, n)) / n
    double Lambda0_spread = 0;
    double bound = 0;
    bool bound_ok = false;
    double median_tau0 = 0;         // X_h median of mu(M(x, tau_0)) / tau_0
    std::vector<WitnessRow> witnesses;
    bool witness_ok = false;        // every planted point below the ratio
    double C_Lambda_fit = 0;        // eps log(Lambda0) / lambda0
    double max_drift = 0;
    double max_drift_ratio = 0;

    bool survives() const { return excluded_by.empty(); }
};

struct Theorem4Options {
    std::size_t samples = 1000;
    std::uint64_t seed = 1;
    double witness_ratio = 0.5;
    Backend backend = Backend::Extended;
    PipelineOptions pipeline{1};
};

struct Theorem4Report {
    std::vector<Theorem4Row> rows;
    std::size_t surviving = 0;
    std::size_t bound_violations = 0;
    std::size_t witness_failures = 0;
};

Theorem4Report theorem4_scan(const CocycleSpec& base, const ConditionAReport& cond,
                             const std::vector<double>& eps_grid, const Theorem4Options& options = {});

}  // namespace cocycle
