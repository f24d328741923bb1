#include "cocycle/rotation.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <functional>
#include <sstream>

#include <boost/multiprecision/gmp.hpp>

namespace cocycle {

namespace {

using mpz = boost::multiprecision::mpz_int;

std::int64_t checked_next(std::int64_t a, std::int64_t x1, std::int64_t x0) {
    const __int128 v = static_cast<__int128>(a) * x1 + x0;
    if (v > INT64_MAX) throw PrecisionError("convergent exceeds the 64-bit range");
    return static_cast<std::int64_t>(v);
}

Convergents build_convergents(const std::vector<std::int64_t>& a) {
    Convergents c;
    c.p = {0};
    c.q = {1};
    std::int64_t pm = 1, qm = 0;  // index -1
    for (std::int64_t ak : a) {
        const std::int64_t pn = checked_next(ak, c.p.back(), pm);
        const std::int64_t qn = checked_next(ak, c.q.back(), qm);
        pm = c.p.back();
        qm = c.q.back();
        c.p.push_back(pn);
        c.q.push_back(qn);
    }
    return c;
}

void split(RotationNumber& r) {
    r.hi = static_cast<double>(r.value);
    r.lo = static_cast<double>(mpreal(r.value - r.hi));
}

}  // namespace

unsigned digits10_for_bits(int bits) {
    return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120)) + 1;
}

PrecisionScope::PrecisionScope(int bits) : saved_(mpreal::default_precision()) {
    mpreal::default_precision(digits10_for_bits(bits));
}

PrecisionScope::~PrecisionScope() { mpreal::default_precision(saved_); }

mpreal parse_decimal(const std::string& text, int precision_bits) {
    PrecisionScope scope(precision_bits);
    try {
        return mpreal(text);
    } catch (const std::exception&) {
        throw ConfigError("not a decimal number: '" + text + "'");
    }
}

double RotationNumber::resolution() const {
    double res = std::ldexp(1.0, -precision_bits);
    if (from_quotients && !rational && conv.size() >= 2) {
        const double qn = static_cast<double>(conv.q.back());
        const double qm = static_cast<double>(conv.q[conv.size() - 2]);
        res = std::max(res, 1.0 / (qn * (qn + qm)));
    }
    return res;
}

double RotationNumber::frac_mul(std::int64_t m) const {
    const double md = static_cast<double>(m);
    const double p = md * hi;
    const double err = std::fma(md, hi, -p);
    double r = p - std::floor(p);
    r += err + md * lo;
    r -= std::floor(r);
    return r >= 1.0 ? 0.0 : r;
}

double RotationNumber::orbit_point(double x, std::int64_t m) const {
    double r = x + frac_mul(m);
    r -= std::floor(r);
    return r >= 1.0 ? 0.0 : r;
}

void RotationNumber::guard(std::int64_t m, double scale) const {
    const double am = std::abs(static_cast<double>(m));
    if (!(am * resolution() < 1e-3 * scale))
        throw PrecisionError("precision exhausted: |m| = " + std::to_string(m) +
                             " against answer scale " + std::to_string(scale));
}

RotationNumber cf_expand(const mpreal& omega, std::size_t depth, int precision_bits) {
    if (depth < 1) throw DomainError("cf_expand: depth must be at least 1");
    RotationNumber r;
    r.precision_bits = precision_bits;
    {
        PrecisionScope scope(precision_bits);
        r.value = mpreal(omega);
    }
    if (!(r.value > 0 && r.value < 1)) throw DomainError("cf_expand: omega outside (0,1)");

    // the stored value is a dyadic rational; Euclid on it is exact
    mpz num;
    const long e = mpfr_get_z_2exp(num.backend().data(), r.value.backend().data());
    mpz den = mpz(1) << static_cast<unsigned>(-e);
    while (r.quotients.size() < depth) {
        if (num == 0) {
            r.rational = true;
            break;
        }
        const mpz a = den / num;
        const mpz rem = den - a * num;
        if (a > INT64_MAX) throw PrecisionError("cf_expand: partial quotient exceeds 64-bit range");
        r.quotients.push_back(a.convert_to<std::int64_t>());
        den = num;
        num = rem;
    }
    if (num == 0) r.rational = true;
    r.conv = build_convergents(r.quotients);
    if (!r.rational) {
        const double q = static_cast<double>(r.conv.q.back());
        if (!(2 * std::log2(q) < precision_bits))
            throw PrecisionError("cf_expand: q_depth^2 exceeds 2^precision_bits");
    }
    split(r);
    return r;
}

RotationNumber omega_from_quotients(const std::vector<std::int64_t>& quotients, int precision_bits) {
    if (quotients.empty()) throw DomainError("omega_from_quotients: empty quotient list");
    for (std::int64_t a : quotients)
        if (a < 1) throw DomainError("omega_from_quotients: quotients must be positive");
    RotationNumber r;
    r.precision_bits = precision_bits;
    r.quotients = quotients;
    r.from_quotients = true;
    r.conv = build_convergents(quotients);
    {
        PrecisionScope scope(precision_bits);
        r.value = mpreal(r.conv.p.back()) / mpreal(r.conv.q.back());
    }
    split(r);
    return r;
}

BrjunoReport brjuno_sum(const RotationNumber& omega, std::size_t depth) {
    const auto& q = omega.conv.q;
    if (depth < 1 || depth + 1 >= q.size())
        throw DepthExhausted("brjuno_sum: depth beyond the available convergents");
    BrjunoReport rep;
    rep.depth = depth;
    long double sum = 0;
    for (std::size_t n = 1; n <= depth; ++n) {
        sum += std::log(2.0L * static_cast<long double>(q[n + 1])) / static_cast<long double>(q[n]);
        rep.partial_sums.push_back(static_cast<double>(sum));
    }
    rep.C_B = rep.partial_sums.back();

    double ratio = 1;
    for (std::size_t n = 1; n + 1 < q.size(); ++n)
        ratio = std::max(ratio, static_cast<double>(q[n + 1]) / static_cast<double>(q[n]));
    const double c = std::log(2 * ratio);
    // known terms first, then the Fibonacci-type lower bound on later q_n
    long double tail = 0;
    std::size_t n = depth + 1;
    for (; n + 1 < q.size(); ++n)
        tail += std::log(2.0L * static_cast<long double>(q[n + 1])) / static_cast<long double>(q[n]);
    double a = static_cast<double>(q[q.size() - 2]);
    double b = static_cast<double>(q.back());
    if (n < q.size()) tail += (c + std::log(b)) / b;
    for (int it = 0; it < 4000; ++it) {
        const double next = a + b;
        a = b;
        b = next;
        const double term = (c + std::log(b)) / b;
        tail += term;
        if (!std::isfinite(b) || term < 1e-18 * (1 + static_cast<double>(tail))) break;
    }
    rep.tail_bound = static_cast<double>(tail);
    return rep;
}

std::int64_t ConditionAReport::chain_q(const RotationNumber& omega, std::size_t k) const {
    return omega.conv.q.at(static_cast<std::size_t>(subsequence.at(static_cast<std::size_t>(chain.at(k)))));
}

ConditionAReport check_condition_A(const RotationNumber& omega, const ConditionAConstants& c,
                                   double C_B) {
    if (!(c.C_omega > 0 && c.C_eps > 0 && c.C_delta > 0 && c.gamma > 0) || !(c.C_delta < 1))
        throw DomainError("check_condition_A: constants must be positive with C_delta < 1");
    ConditionAReport rep;
    rep.constants = c;
    rep.C_B = C_B;
    const auto& q = omega.conv.q;
    if (q.size() < 2) return rep;
    const std::size_t last = q.size() - 2;  // largest n with q_{n+1} known
    auto lq = [&](std::size_t n) { return std::log(static_cast<double>(q[n])); };

    for (std::size_t n = 0; n <= last; ++n)
        if (lq(n + 1) > std::log(c.C_omega) + (1 + c.gamma) * lq(n))
            rep.subsequence.push_back(static_cast<std::int64_t>(n));
    if (rep.subsequence.empty()) return rep;

    // recurrence at finite depth: an element in the second half of the range
    const auto tail_start = static_cast<std::int64_t>((last + 1) / 2);
    rep.tail_holds = rep.subsequence.back() >= tail_start;
    if (!rep.tail_holds) rep.violations.push_back({static_cast<std::int64_t>(last), "recurrence"});

    const std::size_t m = rep.subsequence.size();
    auto qv = [&](std::size_t j) { return static_cast<double>(q[static_cast<std::size_t>(rep.subsequence[j])]); };
    auto upper = [&](double qq) {
        return qq * c.C_eps - C_B * (qq * (1 - c.C_delta) - 1) / (1 + c.gamma) -
               std::log(c.C_omega) / (1 + c.gamma);
    };
    auto lower = [&](double qq) { return std::log(qq) + std::log(1 / c.C_delta) / (1 + c.gamma); };
    const double log_known = lq(q.size() - 1);

    // next[j]: successor on a chain that runs to the available depth, -1 = open end, -2 = broken
    std::vector<std::int64_t> next(m, -2);
    std::vector<std::string> why(m);
    for (std::size_t j = m; j-- > 0;) {
        const double qj = qv(j);
        const double up = upper(qj);
        const double lo = lower(qj);
        bool low_fail = false, up_fail = false;
        for (std::size_t k = j + 1; k < m; ++k) {
            const double l = std::log(qv(k));
            if (!(l > lo)) {
                low_fail = true;
                continue;
            }
            if (!(l < up)) {
                up_fail = true;
                break;
            }
            if (next[k] != -2) {
                next[j] = static_cast<std::int64_t>(k);
                break;
            }
        }
        if (next[j] == -2 && up > log_known) next[j] = -1;
        if (next[j] == -2) why[j] = up_fail || !low_fail ? "spacing-upper" : "spacing-lower";
    }
    std::size_t start = 0;
    while (start < m && next[start] == -2) {
        rep.violations.push_back({rep.subsequence[start], why[start]});
        ++start;
    }
    if (start < m) {
        for (auto j = static_cast<std::int64_t>(start); j >= 0; j = next[static_cast<std::size_t>(j)])
            rep.chain.push_back(j);
        rep.spacing_holds = true;
    }
    rep.pass = rep.tail_holds && rep.spacing_holds;
    return rep;
}

RotationNumber build_condition_A_omega(const ConditionAConstants& c, const SpacingPolicy& spacing,
                                       std::size_t depth, int precision_bits) {
    if (!(c.gamma > 0)) throw DomainError("build_condition_A_omega: gamma must be positive");
    if (spacing.stride < 1 || spacing.filler < 1)
        throw DomainError("build_condition_A_omega: invalid spacing policy");
    if (spacing.leading.size() >= depth)
        throw DomainError("build_condition_A_omega: depth must exceed the leading quotients");
    std::vector<std::int64_t> a = spacing.leading;
    std::int64_t qm = 0, qn = 1;  // q_{-1}, q_0
    for (std::int64_t ak : a) {
        const std::int64_t next = checked_next(ak, qn, qm);
        qm = qn;
        qn = next;
    }
    for (std::size_t n = a.size(); n < depth; ++n) {
        std::int64_t ak = spacing.filler;
        if ((n - spacing.leading.size()) % spacing.stride == 0) {
            const long double target =
                static_cast<long double>(c.C_omega) * std::pow(static_cast<long double>(qn), 1 + c.gamma);
            const long double need = std::floor((target - qm) / qn) + 1;
            if (need > static_cast<long double>(INT64_MAX))
                throw PrecisionError("build_condition_A_omega: quotient exceeds 64-bit range");
            ak = std::max<std::int64_t>(1, static_cast<std::int64_t>(need));
            // guard against rounding in the power
            while (std::log(static_cast<double>(ak) * qn + qm) <=
                   std::log(c.C_omega) + (1 + c.gamma) * std::log(static_cast<double>(qn)))
                ++ak;
        }
        const std::int64_t next = checked_next(ak, qn, qm);
        qm = qn;
        qn = next;
        a.push_back(ak);
    }
    RotationNumber r = omega_from_quotients(a, precision_bits);
    const double C_B = a.size() >= 2 ? brjuno_sum(r, a.size() - 1).C_B : 0.0;
    const ConditionAReport rep = check_condition_A(r, c, C_B);
    if (!rep.pass) {
        std::string msg = "build_condition_A_omega: spacing policy infeasible";
        for (const auto& v : rep.violations) msg += " [" + v.which + " at n=" + std::to_string(v.index) + "]";
        throw HypothesisError(msg);
    }
    return r;
}

double circle_distance(double a, double b) {
    double d = std::fmod(std::abs(a - b), 1.0);
    return std::min(d, 1 - d);
}

double orbit_distance(const RotationNumber& omega, std::int64_t m) {
    if (m < 1) throw DomainError("orbit_distance: m must be at least 1");
    PrecisionScope scope(omega.precision_bits);
    mpreal v = omega.value * m;
    v -= floor(v);
    mpreal d = v;
    if (1 - v < d) d = 1 - v;
    const double out = static_cast<double>(d);
    omega.guard(m, out);
    return out;
}

ReturnTime first_return_finer_than(const RotationNumber& omega, double delta) {
    if (!(delta > 0)) throw DomainError("first_return_finer_than: delta must be positive");
    const auto& q = omega.conv.q;
    for (std::size_t n = 1; n + 1 < q.size(); ++n)
        if (1.0 / static_cast<double>(q[n + 1]) < delta) return {q[n], n};
    throw DepthExhausted("first_return_finer_than: convergent list too short");
}

std::string quotients_to_text(const std::vector<std::int64_t>& quotients) {
    std::ostringstream out;
    for (std::size_t i = 0; i < quotients.size(); ++i) out << (i ? "," : "") << quotients[i];
    return out.str();
}

std::vector<std::int64_t> quotients_from_text(const std::string& text) {
    std::vector<std::int64_t> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::size_t used = 0;
        long long v = 0;
        try {
            v = std::stoll(item, &used);
        } catch (const std::exception&) {
            throw ConfigError("bad partial quotient '" + item + "'");
        }
        while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
        if (used != item.size() || v < 1) throw ConfigError("bad partial quotient '" + item + "'");
        out.push_back(v);
    }
    return out;
}

}  // namespace cocycle
