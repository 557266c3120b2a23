#pragma once

// Closed-form dephasing coefficients of the average remote state and the
// entanglement generation rates of the two protocols, at the first nesting
// level and for arbitrary nesting chains.
//
// Protocols:
//   OBP -- bounded buffer time: memories are refreshed after n attempt
//          cycles whether or not both segments succeeded.
//   CP  -- unbounded waiting: memories hold until both segments succeed.
//
// Timing convention for the level-1 average state: a pair that succeeded at
// steps (k1,k2) and was accessed after n cycles carries the coefficient
// beta^e with e = 2|k1-k2| + 2(n - max(k1,k2)) + 3.  The closed forms below
// are the geometric-series evaluations of the corresponding double sums.
// Because every rate at deep nesting levels underflows double precision, all
// chain computations are carried in parallel through a log10 route.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "qrep/core.hpp"

namespace qrep {

enum class Protocol { obp, cp };

/// Exponent convention for the buffered stage coefficient at nesting levels
/// >= 2: `k1_only` counts remaining buffer cycles from the first segment's
/// success step alone; `symmetric` counts both steps the same way as the
/// level-1 coefficient does.
enum class StageExponent { k1_only, symmetric };

inline StageExponent parse_stage_exponent(const std::string& s) {
    if (s == "k1") return StageExponent::k1_only;
    if (s == "symmetric") return StageExponent::symmetric;
    throw std::invalid_argument("unknown stage exponent convention: '" + s +
                                "' (expected 'k1' or 'symmetric')");
}

inline const char* to_string(StageExponent c) {
    return c == StageExponent::k1_only ? "k1" : "symmetric";
}

namespace detail {

inline double clamp01(double x) {
    if (x < 0.0) return 0.0;
    if (x > 1.0) return 1.0;
    return x;
}

inline void check_probability(double x, const char* name) {
    if (!(x > 0.0 && x <= 1.0))
        throw std::domain_error(std::string(name) + " must be in (0,1]");
}

/// Direct evaluation of the level-1 OBP double sum, regrouped by
/// m = max(k1,k2) so it runs in O(n).  Used where the closed form has a
/// removable singularity; in that regime beta^2/q is close to either 1 or
/// beta, so the partial geometric sums stay bounded.  The p^2 weight and the
/// (1-q^n)^2 normalization are folded into the ratio (p/(1-q^n))^2, which
/// stays representable down to the smallest positive p.
inline double gamma_opt_direct(double p, double beta, std::uint64_t n) {
    if (p >= 1.0) return std::pow(beta, 2.0 * double(n) + 1.0);
    const double lq = std::log1p(-p);
    const double lb = std::log(beta);
    const double y = beta * beta / (1.0 - p);
    const double r = p / -std::expm1(double(n) * lq);  // p / (1 - q^n)
    double total = 0.0;
    double s = 0.0;  // sum_{i=1}^{m-1} y^i
    for (std::uint64_t m = 1; m <= n; ++m) {
        const double t =
            std::exp((2.0 * double(m) - 2.0) * lq + (2.0 * double(n - m) + 3.0) * lb);
        total += t * (1.0 + 2.0 * s);
        s = y * (s + 1.0);
    }
    return clamp01(r * r * total);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Level-1 coefficients
// ---------------------------------------------------------------------------

/// Average-state coefficient gamma^O(p, beta, n) of the bounded-buffer
/// protocol at the first nesting level.
///
/// The closed form has q = beta^2 and q = beta as removable roots of its
/// numerator; inside a strip of width 1e-6 around them the direct sum is
/// evaluated instead, since floating point does not cancel the factors
/// exactly.
inline double gamma_opt(double p, double beta, std::uint64_t n) {
    detail::check_probability(p, "gamma_opt: p");
    detail::check_probability(beta, "gamma_opt: beta");
    if (n < 1) throw std::domain_error("gamma_opt: n must be >= 1");
    const double q = 1.0 - p;
    const double b2 = beta * beta;
    if (std::abs(b2 - q) < 1e-6 || std::abs(b2 - q * q) < 1e-6)
        return detail::gamma_opt_direct(p, beta, n);
    // Cancellation-free arrangement of the closed form.  With
    // A = 1 - q^n, A1 = 1 - q^(n-1), u = A/p, u1 = A1/p, the numerator
    // polynomial divided by p is
    //   f/p = q^(2n)(b^2 + q) + b^(2n) [ (b^2-1)(u + q u1) + (1+q)(2A-1) ]
    // and gamma = b^3 (f/p) / (u^2 (b^2-q)(b^2-q^2)).  Every factor stays
    // representable for arbitrarily small p.
    const double lq = std::log1p(-p);
    const double a = -std::expm1(double(n) * lq);
    const double a1 = (n >= 2) ? -std::expm1(double(n - 1) * lq) : 0.0;
    const double u = a / p;
    const double u1 = a1 / p;
    const double qn = std::pow(q, double(n));
    const double b2n = std::pow(b2, double(n));
    const double fp = qn * qn * (b2 + q) +
                      b2n * ((b2 - 1.0) * (u + q * u1) + (1.0 + q) * (2.0 * a - 1.0));
    const double g = b2 * beta * fp / (u * u * (b2 - q) * (b2 - q * q));
    return detail::clamp01(g);
}

/// Average-state coefficient gamma^C(p, beta) of the unbounded-waiting
/// protocol at the first nesting level:
/// beta^3 p^2 (1 + beta^2 q) / ((1-q^2)(1 - beta^2 q)).
/// One factor of p cancels against 1-q^2 = p(2-p), which keeps the value
/// exact for arbitrarily small p.
inline double gamma_can(double p, double beta) {
    detail::check_probability(p, "gamma_can: p");
    detail::check_probability(beta, "gamma_can: beta");
    const double q = 1.0 - p;
    const double b2q = beta * beta * q;
    const double g =
        beta * beta * beta * p * (1.0 + b2q) / ((2.0 - p) * (1.0 - b2q));
    return detail::clamp01(g);
}

// ---------------------------------------------------------------------------
// Stage coefficients for nesting levels >= 2
// ---------------------------------------------------------------------------

namespace detail {

/// Streaming log-sum-exp accumulator in base 10: total() is
/// log10(sum 10^x) over every added x, without materializing the terms.
class Log10Sum {
public:
    void add(double x) {
        if (x == -std::numeric_limits<double>::infinity()) return;
        if (x > peak_) {
            scaled_ = scaled_ * std::pow(10.0, peak_ - x) + 1.0;
            peak_ = x;
        } else {
            scaled_ += std::pow(10.0, x - peak_);
        }
    }
    double total() const {
        if (scaled_ == 0.0) return -std::numeric_limits<double>::infinity();
        return peak_ + std::log10(scaled_);
    }

private:
    double peak_ = -std::numeric_limits<double>::infinity();
    double scaled_ = 0.0;
};

/// log10 of the stage coefficient, evaluated by log-sum-exp so it stays
/// finite long after the plain value has underflowed.
inline double log10_gamma_opt_level(double p_in, double l10_beta,
                                    std::uint64_t n_in, std::uint64_t n_out,
                                    StageExponent conv) {
    const double q = 1.0 - p_in;
    const double l10q = (q > 0.0) ? std::log10(q) : -std::numeric_limits<double>::infinity();
    const double nin = double(n_in);

    // accumulate log10 of the summands weight * beta^e and of the bare
    // weights (the normalization)
    Log10Sum terms;
    Log10Sum wlogs;
    if (conv == StageExponent::k1_only) {
        for (std::uint64_t k1 = 1; k1 <= n_out; ++k1) {
            const double lw = (k1 == 1) ? 0.0 : double(k1 - 1) * l10q;
            const double e = nin * (2.0 * double(n_out - k1) + 2.0) + 1.0;
            wlogs.add(lw);
            terms.add(lw + e * l10_beta);
            if (q == 0.0) break;  // only k1 = 1 has weight
        }
    } else {
        for (std::uint64_t k1 = 1; k1 <= n_out; ++k1) {
            for (std::uint64_t k2 = 1; k2 <= n_out; ++k2) {
                const std::uint64_t dk = (k1 > k2) ? k1 - k2 : k2 - k1;
                const std::uint64_t m = (k1 > k2) ? k1 : k2;
                const double lw = (k1 + k2 == 2) ? 0.0 : double(k1 + k2 - 2) * l10q;
                const double e =
                    nin * (2.0 * double(dk) + 2.0 * double(n_out - m) + 2.0) + 1.0;
                wlogs.add(lw);
                terms.add(lw + e * l10_beta);
                if (q == 0.0) break;
            }
            if (q == 0.0) break;
        }
    }
    return terms.total() - wlogs.total();
}

}  // namespace detail

/// Stage coefficient gamma^{O,(i)} of a buffered system at nesting level i:
/// the probability-weighted average of beta_i^e over success steps
/// (k1,k2) in [1,n_out]^2 with weights p_in^2 q_in^{k1+k2-2}.
///
/// For `k1_only` the exponent is n_in(2(n_out-k1)+2)+1 and the k2 sum
/// cancels against the normalization.  For `symmetric` the exponent is
/// n_in(2|k1-k2| + 2(n_out-max) + 2)+1, which for n_in = 1 reduces to the
/// level-1 coefficient.
inline double gamma_opt_level(double p_in, double beta_level,
                              std::uint64_t n_in, std::uint64_t n_out,
                              StageExponent conv) {
    detail::check_probability(p_in, "gamma_opt_level: p_in");
    detail::check_probability(beta_level, "gamma_opt_level: beta_level");
    if (n_in < 1 || n_out < 1)
        throw std::domain_error("gamma_opt_level: n_in and n_out must be >= 1");
    if (conv == StageExponent::symmetric) {
        // identity: gamma_sym = beta^(1-n_in) * gamma_opt(p_in, beta^n_in, n_out)
        const double bn = std::pow(beta_level, double(n_in));
        if (bn > 1e-290) {
            return detail::clamp01(std::pow(beta_level, 1.0 - double(n_in)) *
                                   gamma_opt(p_in, bn, n_out));
        }
        return std::pow(10.0, detail::log10_gamma_opt_level(
                                  p_in, std::log10(beta_level), n_in, n_out, conv));
    }
    const double q = 1.0 - p_in;
    double num = 0.0;
    double norm = 0.0;
    double w = p_in;  // p_in q^{k1-1}
    for (std::uint64_t k1 = 1; k1 <= n_out; ++k1) {
        const double e = double(n_in) * (2.0 * double(n_out - k1) + 2.0) + 1.0;
        num += w * std::pow(beta_level, e);
        norm += w;
        w *= q;
    }
    return detail::clamp01(num / norm);
}

namespace detail {

/// Product of the per-level expected waiting steps <k>_0 ... <k>_{j}, with
/// <k>_0 = 1, <k>_1 from p and <k>_l from p_s for l >= 2.
inline double waiting_product(int j, const LinkParams& par) {
    double w = 1.0;
    for (int l = 1; l <= j; ++l)
        w *= expected_waiting_steps(l == 1 ? par.p : par.p_s);
    return w;
}

inline double log10_gamma_can_level(int j, const LinkParams& par) {
    const double pj = (j == 1) ? par.p : par.p_s;
    const double qj = 1.0 - pj;
    const double l10b = std::log10(par.beta);
    const double l10B = 2.0 * waiting_product(j - 1, par) * l10b;
    const double B = (l10B < -320.0) ? 0.0 : std::pow(10.0, l10B);
    const double ln10 = std::numbers::ln10;
    return 3.0 * std::exp2(double(j - 1)) * l10b + std::log10(pj) +
           std::log1p(B * qj) / ln10 - std::log10(2.0 - pj) -
           std::log1p(-B * qj) / ln10;
}

}  // namespace detail

/// Stage coefficient gamma^{C,(j)} of the unbounded-waiting protocol at
/// nesting level j.  The double sum over success steps evaluates to
/// beta_j^3 p_j^2 (1 + B q_j) / ((1-q_j^2)(1 - B q_j)) with
/// B = beta^(2 prod_{l<j} <k>_l); B underflowing to zero leaves the finite
/// limit beta_j^3 p_j / (2 - p_j).
inline double gamma_can_level(int j, const LinkParams& par) {
    if (j < 1) throw std::domain_error("gamma_can_level: level must be >= 1");
    const double pj = (j == 1) ? par.p : par.p_s;
    const double qj = 1.0 - pj;
    const double l10B = 2.0 * detail::waiting_product(j - 1, par) * std::log10(par.beta);
    const double B = (l10B < -320.0) ? 0.0 : std::pow(10.0, l10B);
    const double b3 = std::pow(par.beta, 3.0 * std::exp2(double(j - 1)));
    const double g = b3 * pj * (1.0 + B * qj) / ((2.0 - pj) * (1.0 - B * qj));
    return detail::clamp01(g);
}

// ---------------------------------------------------------------------------
// Schedules and chain reports
// ---------------------------------------------------------------------------

/// Per-level buffer schedule.  n_in[0] = 1 and successive levels obey the
/// synchronization condition n_in[i+1] = n_out[i] * n_in[i] / 2 exactly.
struct LevelSchedule {
    std::vector<std::uint64_t> n_in;
    std::vector<std::uint64_t> n_out;

    std::size_t levels() const { return n_out.size(); }

    static LevelSchedule from_n_out(const std::vector<std::uint64_t>& outs) {
        if (outs.empty())
            throw std::invalid_argument("LevelSchedule: need at least one level");
        LevelSchedule s;
        s.n_out = outs;
        s.n_in.resize(outs.size());
        s.n_in[0] = 1;
        for (std::size_t i = 0; i + 1 < outs.size(); ++i) {
            if (outs[i] < 1)
                throw std::invalid_argument("LevelSchedule: n_out entries must be >= 1");
            if (s.n_in[i] > std::numeric_limits<std::uint64_t>::max() / outs[i])
                throw std::invalid_argument("LevelSchedule: input cycle count overflows");
            const std::uint64_t prod = outs[i] * s.n_in[i];
            if (prod % 2 != 0)
                throw std::invalid_argument(
                    "LevelSchedule: n_out[" + std::to_string(i + 1) +
                    "] * n_in is odd; levels cannot be synchronized");
            if (prod / 2 < 1)
                throw std::invalid_argument("LevelSchedule: synchronization yields n_in < 1");
            s.n_in[i + 1] = prod / 2;
        }
        s.validate();
        return s;
    }

    void validate() const {
        if (n_in.empty() || n_in.size() != n_out.size())
            throw std::invalid_argument("LevelSchedule: n_in/n_out length mismatch");
        if (n_in[0] != 1)
            throw std::invalid_argument("LevelSchedule: n_in[0] must be 1");
        for (std::size_t i = 0; i < n_in.size(); ++i)
            if (n_in[i] < 1 || n_out[i] < 1)
                throw std::invalid_argument("LevelSchedule: entries must be >= 1");
        for (std::size_t i = 0; i + 1 < n_in.size(); ++i)
            if (n_in[i + 1] * 2 != n_out[i] * n_in[i])
                throw std::invalid_argument(
                    "LevelSchedule: synchronization condition violated at level " +
                    std::to_string(i + 1));
    }
};

/// Everything known about one nesting level of an evaluated chain.
/// `gamma_level` carries no initial-fidelity factor; `cumulative_gamma` is
/// prod_j [gamma^{(j)}]^{2^{i-j}} with f folded into level 1.  The value
/// route (`rate`, `cumulative_gamma`) underflows to zero at deep levels;
/// the log10 fields stay finite.
struct ChainLevel {
    int level = 1;
    std::uint64_t n_in = 1;
    std::uint64_t n_out = 1;
    double p_in = 0.0;
    double p_out = 0.0;
    double gamma_level = 0.0;
    double cumulative_gamma = 0.0;
    double log10_cumulative_gamma = 0.0;
    double fidelity = 0.0;
    double de = 0.0;
    double rate = 0.0;
    double log10_rate = 0.0;
    double output_period = 0.0;
};

struct ChainReport {
    std::vector<ChainLevel> levels;
};

namespace detail {

struct LevelEval {
    double gamma = 0.0;        // stage coefficient, no f
    double l10_gamma = 0.0;
    double p_out = 0.0;
    double l10_p_out = 0.0;
    double period = 0.0;
    double cum_gamma = 0.0;    // updated cumulative coefficient (value route)
    double l10_cum_gamma = 0.0;
    double de = 0.0;
    double l10_de = 0.0;
    double rate = 0.0;
    double l10_rate = 0.0;
};

/// One buffered level, shared by the chain evaluator and the optimizer so
/// that both always see bit-identical arithmetic.  Input probabilities at
/// deep nesting levels fall below everything double precision can hold, so
/// the level keeps (p_in, log10 p_in) side by side: values may underflow,
/// the log route never does.
inline LevelEval eval_obp_level(const LinkParams& par, int level, double p_in,
                                double l10_p_in, std::uint64_t n_in,
                                std::uint64_t n_out, double cum_prev,
                                double l10_cum_prev, StageExponent conv) {
    const LevelIndex li(level);
    const double beta_i = li.beta(par.beta);
    const double l10_beta_i = li.log10_beta(par.beta);
    // below DBL_MIN the coefficient's p-dependence is far beyond double
    // resolution; clamping keeps the weight sums well defined
    const double p_gamma = std::max(p_in, std::numeric_limits<double>::min());

    LevelEval ev;
    if (level == 1) {
        ev.gamma = gamma_opt(p_gamma, beta_i, n_out);
        ev.l10_gamma = (ev.gamma > 0.0)
                           ? std::log10(ev.gamma)
                           : log10_gamma_opt_level(p_gamma, l10_beta_i, 1, n_out,
                                                   StageExponent::symmetric);
    } else {
        // beta^(2^(i-1)) underflows to exact zero around level 11 already for
        // moderate beta; only the log route can represent such levels
        ev.gamma = (beta_i > 0.0)
                       ? gamma_opt_level(p_gamma, beta_i, n_in, n_out, conv)
                       : 0.0;
        ev.l10_gamma = log10_gamma_opt_level(p_gamma, l10_beta_i, n_in, n_out, conv);
    }

    ev.cum_gamma = cum_prev * cum_prev * ev.gamma;
    ev.l10_cum_gamma = 2.0 * l10_cum_prev + ev.l10_gamma;
    if (level == 1) {
        ev.cum_gamma *= par.f;
        ev.l10_cum_gamma += std::log10(par.f);
    }

    // 1 - (1-p)^n via expm1 so it survives n*p down to the underflow limit
    const double charged = -std::expm1(double(n_out) * std::log1p(-p_gamma));
    ev.p_out = par.p_s * charged * charged;
    ev.l10_p_out = std::log10(par.p_s) +
                   ((l10_p_in > -250.0)
                        ? 2.0 * std::log10(charged)
                        : 2.0 * (std::log10(double(n_out)) + l10_p_in));
    ev.period = 2.0 * li.tau_c(par.tau_c) * double(n_in) * double(n_out);
    ev.de = de_from_gamma(ev.cum_gamma);
    ev.l10_de = log10_de_from_log10_gamma(ev.l10_cum_gamma);
    ev.rate = ev.p_out / ev.period * ev.de;
    ev.l10_rate = ev.l10_p_out - std::log10(ev.period) + ev.l10_de;
    return ev;
}

/// One unbounded-waiting level; `wait_prod` is prod_{j<=level} <k>_j and
/// `l10_wait_prod` its log10 (the product itself overflows for deep chains).
inline LevelEval eval_cp_level(const LinkParams& par, int level,
                               double wait_prod, double l10_wait_prod,
                               double cum_prev, double l10_cum_prev) {
    LevelEval ev;
    ev.gamma = gamma_can_level(level, par);
    ev.l10_gamma = log10_gamma_can_level(level, par);
    ev.cum_gamma = cum_prev * cum_prev * ev.gamma;
    ev.l10_cum_gamma = 2.0 * l10_cum_prev + ev.l10_gamma;
    if (level == 1) {
        ev.cum_gamma *= par.f;
        ev.l10_cum_gamma += std::log10(par.f);
    }
    ev.p_out = par.p_s;
    ev.period = wait_prod * 2.0 * par.tau_c;
    ev.de = de_from_gamma(ev.cum_gamma);
    ev.l10_de = log10_de_from_log10_gamma(ev.l10_cum_gamma);
    ev.rate = par.p_s / ev.period * ev.de;
    ev.l10_rate = std::log10(par.p_s) - l10_wait_prod -
                  std::log10(2.0 * par.tau_c) + ev.l10_de;
    return ev;
}

inline ChainLevel to_chain_level(const LevelEval& ev, int level, std::uint64_t n_in,
                                 std::uint64_t n_out, double p_in) {
    ChainLevel row;
    row.level = level;
    row.n_in = n_in;
    row.n_out = n_out;
    row.p_in = p_in;
    row.p_out = ev.p_out;
    row.gamma_level = ev.gamma;
    row.cumulative_gamma = ev.cum_gamma;
    row.log10_cumulative_gamma = ev.l10_cum_gamma;
    row.fidelity = 0.5 * (1.0 + ev.cum_gamma);
    row.de = ev.de;
    row.rate = ev.rate;
    row.log10_rate = ev.l10_rate;
    row.output_period = ev.period;
    return row;
}

}  // namespace detail

/// Evaluate the buffered protocol over an explicit synchronized schedule.
/// Level 1 always uses the level-1 closed form; levels >= 2 use the stage
/// coefficient under the requested exponent convention.
inline ChainReport chain_obp(const LinkParams& par, const LevelSchedule& schedule,
                             StageExponent conv = StageExponent::k1_only) {
    schedule.validate();
    ChainReport report;
    report.levels.reserve(schedule.levels());
    double p_in = par.p;
    double l10_p_in = std::log10(par.p);
    double cum = 1.0;
    double l10_cum = 0.0;
    for (std::size_t idx = 0; idx < schedule.levels(); ++idx) {
        const int level = int(idx) + 1;
        const auto ev = detail::eval_obp_level(par, level, p_in, l10_p_in,
                                               schedule.n_in[idx], schedule.n_out[idx],
                                               cum, l10_cum, conv);
        report.levels.push_back(detail::to_chain_level(ev, level, schedule.n_in[idx],
                                                       schedule.n_out[idx], p_in));
        cum = ev.cum_gamma;
        l10_cum = ev.l10_cum_gamma;
        p_in = par.p_t * ev.p_out;
        l10_p_in = std::log10(par.p_t) + ev.l10_p_out;
    }
    return report;
}

/// Evaluate the unbounded-waiting protocol for levels 1..n_levels.
inline ChainReport chain_cp(const LinkParams& par, int n_levels) {
    if (n_levels < 1) throw std::domain_error("chain_cp: need at least one level");
    ChainReport report;
    report.levels.reserve(std::size_t(n_levels));
    double wait_prod = 1.0;
    double l10_wait_prod = 0.0;
    double cum = 1.0;
    double l10_cum = 0.0;
    for (int level = 1; level <= n_levels; ++level) {
        const double k_level = expected_waiting_steps(level == 1 ? par.p : par.p_s);
        wait_prod *= k_level;
        l10_wait_prod += std::log10(k_level);
        const auto ev = detail::eval_cp_level(par, level, wait_prod, l10_wait_prod,
                                              cum, l10_cum);
        auto row = detail::to_chain_level(ev, level, 1, 1, level == 1 ? par.p : par.p_s);
        report.levels.push_back(row);
        cum = ev.cum_gamma;
        l10_cum = ev.l10_cum_gamma;
    }
    return report;
}

/// Rate of distillable entanglement of the buffered protocol at the first
/// nesting level, ebits per second.
inline double rate_obp_level1(const LinkParams& par, std::uint64_t n) {
    if (n < 1) throw std::domain_error("rate_obp_level1: n must be >= 1");
    return detail::eval_obp_level(par, 1, par.p, std::log10(par.p), 1, n, 1.0, 0.0,
                                  StageExponent::k1_only).rate;
}

/// Rate of distillable entanglement of the unbounded-waiting protocol at the
/// first nesting level, ebits per second.
inline double rate_cp_level1(const LinkParams& par) {
    const double k1 = expected_waiting_steps(par.p);
    return detail::eval_cp_level(par, 1, k1, std::log10(k1), 1.0, 0.0).rate;
}

/// Number of quantum memories needed by a repeater with n_m nesting levels.
inline std::uint64_t memory_count(Protocol protocol, int n_m) {
    if (n_m < 1) throw std::domain_error("memory_count: n_m must be >= 1");
    if (n_m > 60) throw std::domain_error("memory_count: n_m too large");
    const std::uint64_t cp = std::uint64_t(1) << (n_m + 2);
    return protocol == Protocol::cp ? cp : 2 * (cp - 2);
}

}  // namespace qrep
