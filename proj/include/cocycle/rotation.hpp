#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/mpfr.hpp>

#include "cocycle/errors.hpp"

namespace cocycle {

using mpreal = boost::multiprecision::mpfr_float;

struct DepthExhausted : Error {
    using Error::Error;
};

// p_n / q_n with p_0 = 0, q_0 = 1, q_1 = a_1
struct Convergents {
    std::vector<std::int64_t> p;
    std::vector<std::int64_t> q;
    std::size_t size() const { return q.size(); }
};

struct RotationNumber {
    std::vector<std::int64_t> quotients;  // a_1, a_2, ...
    Convergents conv;
    mpreal value;
    int precision_bits = 128;
    bool rational = false;         // expansion terminated
    bool from_quotients = false;   // value is the last convergent of a quotient prefix
    double hi = 0, lo = 0;         // value ~ hi + lo

    double as_double() const { return hi; }
    // absolute uncertainty of value as a stand-in for the irrational number
    double resolution() const;
    // frac(m * omega) in [0, 1), double-double accurate
    double frac_mul(std::int64_t m) const;
    // frac(x + m * omega)
    double orbit_point(double x, std::int64_t m) const;
    // throws PrecisionError unless |m| * resolution < 1e-3 * scale
    void guard(std::int64_t m, double scale) const;
};

// scoped default precision for newly created mpreal values
class PrecisionScope {
public:
    explicit PrecisionScope(int bits);
    ~PrecisionScope();
    PrecisionScope(const PrecisionScope&) = delete;
    PrecisionScope& operator=(const PrecisionScope&) = delete;

private:
    unsigned saved_;
};

unsigned digits10_for_bits(int bits);

mpreal parse_decimal(const std::string& text, int precision_bits);

RotationNumber cf_expand(const mpreal& omega, std::size_t depth, int precision_bits);
RotationNumber omega_from_quotients(const std::vector<std::int64_t>& quotients, int precision_bits);

struct BrjunoReport {
    std::vector<double> partial_sums;  // n = 1 .. depth
    double C_B = 0;
    std::size_t depth = 0;
    double tail_bound = 0;
};

// sum_{n=1}^{depth} log(2 q_{n+1}) / q_n; the tail bound assumes later ratios
// q_{n+1}/q_n stay below the largest observed one
BrjunoReport brjuno_sum(const RotationNumber& omega, std::size_t depth);

struct ConditionAConstants {
    double C_omega = 1;
    double C_eps = 1;
    double C_delta = 0.5;
    double gamma = 0.5;
};

struct ConditionAViolation {
    std::int64_t index = 0;
    std::string which;  // "recurrence", "spacing-lower", "spacing-upper"
};

struct ConditionAReport {
    std::vector<std::int64_t> subsequence;  // n_j with q_{n+1} > C_omega q_n^{1+gamma}
    ConditionAConstants constants;
    double C_B = 0;
    std::vector<std::int64_t> chain;        // positions J_k into subsequence
    bool tail_holds = false;
    bool spacing_holds = false;
    bool pass = false;
    std::vector<ConditionAViolation> violations;

    std::int64_t chain_q(const RotationNumber& omega, std::size_t k) const;
};

ConditionAReport check_condition_A(const RotationNumber& omega, const ConditionAConstants& c,
                                   double C_B);

struct SpacingPolicy {
    std::size_t stride = 1;                 // every stride-th index is forced
    std::int64_t filler = 1;                // quotient at the other indices
    std::vector<std::int64_t> leading;      // fixed initial quotients
};

// Throws HypothesisError when the checker rejects the result.
RotationNumber build_condition_A_omega(const ConditionAConstants& c, const SpacingPolicy& spacing,
                                       std::size_t depth, int precision_bits = 128);

double orbit_distance(const RotationNumber& omega, std::int64_t m);

struct ReturnTime {
    std::int64_t q = 0;
    std::size_t n = 0;
};

ReturnTime first_return_finer_than(const RotationNumber& omega, double delta);

double circle_distance(double a, double b);

std::string quotients_to_text(const std::vector<std::int64_t>& quotients);
std::vector<std::int64_t> quotients_from_text(const std::string& text);

}  // namespace cocycle
