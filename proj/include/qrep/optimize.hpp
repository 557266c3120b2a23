#pragma once

// Integer search for the rate-maximizing buffer time, and the sequential
// level-by-level schedule optimization under the synchronization constraint.
//
// The search over n is an exhaustive scan of 1..bound with an early stop
// after the rate has decreased for 20 consecutive n.  The rate is
// empirically unimodal in n; the margin only shortens the scan, it is never
// relied on for correctness of the scanned prefix.  The bound follows the
// asymptotic optimum n ~ 1/(p ln(1/beta)) with a 10x safety factor.
// Candidates are ranked by the log-domain rate so the scan keeps working
// where plain rates underflow; ties break toward smaller n.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qrep/rates.hpp"

namespace qrep {

/// A schedule that cannot satisfy the synchronization condition.
struct InfeasibleScheduleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OptResult {
    std::uint64_t n_opt = 1;
    double rate_at_opt = 0.0;      // ebits per second
    std::uint64_t search_bound = 0;
    bool threshold_hit = false;    // F > 1/2 bound truncated the search
};

namespace detail {

inline std::uint64_t buffer_search_bound(double p, double beta) {
    constexpr std::uint64_t cap = 1000000;
    if (beta >= 1.0) return cap;
    const double raw = 10.0 / (p * std::log(1.0 / beta));
    if (!std::isfinite(raw) || raw >= double(cap)) return cap;
    const auto bound = std::uint64_t(std::ceil(raw));
    return std::max<std::uint64_t>(64, bound);
}

struct ScanPoint {
    double l10_rate = -std::numeric_limits<double>::infinity();
    double l10_gamma = -std::numeric_limits<double>::infinity();
};

struct ScanOutcome {
    std::uint64_t n_best = 1;
    double l10_rate_best = -std::numeric_limits<double>::infinity();
    bool threshold_hit = false;
};

template <typename Objective>
ScanOutcome scan_buffer(Objective&& objective, std::uint64_t bound) {
    ScanOutcome out;
    bool have_best = false;
    double prev = std::numeric_limits<double>::infinity();
    int decreases = 0;
    int dead = 0;  // consecutive candidates with no representable rate
    for (std::uint64_t n = 1; n <= bound; ++n) {
        const ScanPoint pt = objective(n);
        if (pt.l10_gamma == -std::numeric_limits<double>::infinity()) {
            // distillability threshold: F <= 1/2, zero rate from here on
            out.threshold_hit = true;
            break;
        }
        if (!have_best || pt.l10_rate > out.l10_rate_best) {
            out.n_best = n;
            out.l10_rate_best = pt.l10_rate;
            have_best = true;
        }
        dead = std::isfinite(pt.l10_rate) ? 0 : dead + 1;
        decreases = (pt.l10_rate < prev) ? decreases + 1 : 0;
        prev = pt.l10_rate;
        if (decreases >= 20 || dead >= 20) break;
    }
    return out;
}

}  // namespace detail

/// Buffer time maximizing the level-1 rate for the given operating point.
inline OptResult optimal_n_level1(const LinkParams& par) {
    const std::uint64_t bound = detail::buffer_search_bound(par.p, par.beta);
    const double l10_p = std::log10(par.p);
    auto objective = [&par, l10_p](std::uint64_t n) {
        const auto ev = detail::eval_obp_level(par, 1, par.p, l10_p, 1, n, 1.0, 0.0,
                                               StageExponent::k1_only);
        return detail::ScanPoint{ev.l10_rate, ev.l10_cum_gamma};
    };
    const auto scan = detail::scan_buffer(objective, bound);
    OptResult res;
    res.n_opt = scan.n_best;
    res.rate_at_opt = rate_obp_level1(par, scan.n_best);
    res.search_bound = bound;
    res.threshold_hit = scan.threshold_hit;
    return res;
}

/// Record of one level's buffer-time decision during the hierarchical pass.
struct LevelDecision {
    int level = 1;
    std::uint64_t argmax_n = 1;    // unconstrained per-level optimum
    std::uint64_t chosen_n = 1;    // after the synchronization adjustment
    bool adjusted = false;
    std::uint64_t rejected_n = 0;  // the losing neighbor if adjusted
    double l10_rate_chosen = 0.0;
    double l10_rate_rejected = 0.0;
};

struct HierarchicalResult {
    LevelSchedule schedule;
    ChainReport report;
    std::vector<LevelDecision> decisions;
};

/// Sequential buffer-time optimization over n_m nesting levels, greedy from
/// level 1 upward.  Where the per-level optimum would make the next level's
/// input cycle non-integer, the better of the two neighboring even-product
/// values is used instead; the final level needs no such adjustment.
inline HierarchicalResult hierarchical_optimize(const LinkParams& par, int n_m,
                                                StageExponent conv = StageExponent::k1_only) {
    if (n_m < 1) throw std::domain_error("hierarchical_optimize: n_m must be >= 1");
    HierarchicalResult result;
    double p_in = par.p;
    double l10_p_in = std::log10(par.p);
    std::uint64_t n_in = 1;
    double cum = 1.0;
    double l10_cum = 0.0;
    for (int level = 1; level <= n_m; ++level) {
        const LevelIndex li(level);
        const double beta_i = li.beta(par.beta);
        auto objective = [&](std::uint64_t n_out) {
            const auto ev = detail::eval_obp_level(par, level, p_in, l10_p_in, n_in,
                                                   n_out, cum, l10_cum, conv);
            return detail::ScanPoint{ev.l10_rate, ev.l10_cum_gamma};
        };
        const std::uint64_t bound =
            detail::buffer_search_bound(std::max(p_in, std::numeric_limits<double>::min()),
                                        beta_i);
        const auto scan = detail::scan_buffer(objective, bound);

        LevelDecision decision;
        decision.level = level;
        decision.argmax_n = scan.n_best;
        decision.chosen_n = scan.n_best;
        decision.l10_rate_chosen = scan.l10_rate_best;

        const bool needs_sync = level < n_m;
        if (needs_sync && (scan.n_best * n_in) % 2 != 0) {
            std::optional<std::uint64_t> lo;
            if (scan.n_best > 1) lo = scan.n_best - 1;
            const std::uint64_t hi = scan.n_best + 1;
            const double rate_hi = objective(hi).l10_rate;
            if (lo) {
                const double rate_lo = objective(*lo).l10_rate;
                // ties break toward the smaller buffer
                if (rate_lo >= rate_hi) {
                    decision.chosen_n = *lo;
                    decision.l10_rate_chosen = rate_lo;
                    decision.rejected_n = hi;
                    decision.l10_rate_rejected = rate_hi;
                } else {
                    decision.chosen_n = hi;
                    decision.l10_rate_chosen = rate_hi;
                    decision.rejected_n = *lo;
                    decision.l10_rate_rejected = rate_lo;
                }
            } else {
                decision.chosen_n = hi;
                decision.l10_rate_chosen = rate_hi;
            }
            decision.adjusted = true;
        }
        if (needs_sync && decision.chosen_n * n_in < 2)
            throw InfeasibleScheduleError(
                "hierarchical_optimize: cannot synchronize level " +
                std::to_string(level));
        if (needs_sync &&
            n_in > std::numeric_limits<std::uint64_t>::max() / decision.chosen_n)
            throw InfeasibleScheduleError(
                "hierarchical_optimize: input cycle count overflows at level " +
                std::to_string(level));

        const auto ev = detail::eval_obp_level(par, level, p_in, l10_p_in, n_in,
                                               decision.chosen_n, cum, l10_cum, conv);
        result.schedule.n_in.push_back(n_in);
        result.schedule.n_out.push_back(decision.chosen_n);
        result.decisions.push_back(decision);

        cum = ev.cum_gamma;
        l10_cum = ev.l10_cum_gamma;
        if (needs_sync) {
            n_in = decision.chosen_n * n_in / 2;
            p_in = par.p_t * ev.p_out;
            l10_p_in = std::log10(par.p_t) + ev.l10_p_out;
        }
    }
    result.schedule.validate();
    result.report = chain_obp(par, result.schedule, conv);
    return result;
}

}  // namespace qrep
