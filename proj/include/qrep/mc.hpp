#pragma once

// Stochastic simulation of both protocols, tracking the scalar coefficient
// per trajectory.  This is the independent check on every closed form in
// rates.hpp: trajectories draw the success steps (k1, k2) and accumulate the
// exact beta-power bookkeeping of the dephase/swap algebra, so the only
// difference from the analytic route is sampling noise.

#include <cstdint>
#include <stdexcept>

#include "qrep/core.hpp"
#include "qrep/rates.hpp"
#include "qrep/rng.hpp"

namespace qrep {

struct McConfig {
    std::uint64_t trials = 100000;
    std::uint64_t seed = 1;
    double cp_cutoff = 1e-12;  // tail mass bound for the unbounded-waiting draw

    void validate() const {
        if (trials < 1) throw std::domain_error("McConfig: trials must be >= 1");
        if (!(cp_cutoff > 0.0 && cp_cutoff <= 1e-6))
            throw std::domain_error("McConfig: cp_cutoff must be in (0, 1e-6]");
    }
};

/// Parameters of a single buffered stage at nesting level >= 2.
struct StageParams {
    double p_in = 1.0;
    double beta_level = 1.0;
    std::uint64_t n_in = 1;
    std::uint64_t n_out = 1;
    StageExponent convention = StageExponent::k1_only;

    void validate() const {
        detail::check_probability(p_in, "StageParams: p_in");
        detail::check_probability(beta_level, "StageParams: beta_level");
        if (n_in < 1 || n_out < 1)
            throw std::domain_error("StageParams: n_in and n_out must be >= 1");
    }
};

struct McEstimate {
    double mean_gamma = 0.0;
    double stderr_gamma = 0.0;
    double mean_exponent = 0.0;   // mean beta-power of the trajectories
    double stderr_exponent = 0.0;
    double success_prob = 0.0;
    double stderr_success = 0.0;
    double mean_wait = 0.0;       // unbounded-waiting runs only
    double stderr_wait = 0.0;
    std::uint64_t trials_used = 0;
    std::uint64_t cap_redraws = 0;
};

namespace detail {

struct Accumulator {
    PairwiseSum sum;
    PairwiseSum sum_sq;

    void add(double x) {
        sum.add(x);
        sum_sq.add(x * x);
    }
    double mean() const {
        return sum.count() ? sum.total() / double(sum.count()) : 0.0;
    }
    double stderr_mean() const {
        const auto n = sum.count();
        if (n < 2) return 0.0;
        const double s = sum.total();
        double var = (sum_sq.total() - s * s / double(n)) / double(n - 1);
        if (var < 0.0) var = 0.0;
        return std::sqrt(var / double(n));
    }
};

inline double binomial_stderr(double phat, std::uint64_t n) {
    return n ? std::sqrt(phat * (1.0 - phat) / double(n)) : 0.0;
}

}  // namespace detail

/// Level-1 bounded-buffer trial: both segments must succeed within n
/// attempts; a successful trajectory carries gamma = f beta^e with
/// e = 2|k1-k2| + 2(n - max) + 3.  The heralded swap only rescales rates,
/// so gamma is reported conditioned on heralding and the success fraction
/// estimates (1-(1-p)^n)^2.
inline McEstimate simulate_level1_obp(const LinkParams& par, std::uint64_t n,
                                      const McConfig& cfg) {
    if (n < 1) throw std::domain_error("simulate_level1_obp: n must be >= 1");
    cfg.validate();
    detail::Accumulator gamma_acc;
    detail::Accumulator expo_acc;
    std::uint64_t successes = 0;
    for (std::uint64_t t = 0; t < cfg.trials; ++t) {
        SubstreamRng rng(cfg.seed, t);
        const std::uint64_t k1 = draw_geometric(rng, par.p);
        const std::uint64_t k2 = draw_geometric(rng, par.p);
        if (k1 > n || k2 > n) continue;
        ++successes;
        const std::uint64_t dk = (k1 > k2) ? k1 - k2 : k2 - k1;
        const std::uint64_t m = (k1 > k2) ? k1 : k2;
        const double e = 2.0 * double(dk) + 2.0 * double(n - m) + 3.0;
        gamma_acc.add(par.f * std::pow(par.beta, e));
        expo_acc.add(e);
    }
    McEstimate est;
    est.mean_gamma = gamma_acc.mean();
    est.stderr_gamma = gamma_acc.stderr_mean();
    est.mean_exponent = expo_acc.mean();
    est.stderr_exponent = expo_acc.stderr_mean();
    est.success_prob = double(successes) / double(cfg.trials);
    est.stderr_success = detail::binomial_stderr(est.success_prob, cfg.trials);
    est.trials_used = cfg.trials;
    return est;
}

/// Level-1 unbounded-waiting trial: gamma = f beta^(2|k1-k2|+3).  Draws are
/// capped at k_cap = ceil(ln(cp_cutoff)/ln(1-p)); a trial exceeding the cap
/// is redrawn and counted, which biases the estimate by at most ~2*cp_cutoff
/// of the tail weight.  The mean of max(k1,k2) cross-checks the expected
/// waiting steps.
inline McEstimate simulate_level1_cp(const LinkParams& par, const McConfig& cfg) {
    cfg.validate();
    std::uint64_t k_cap = 1;
    if (par.p < 1.0) {
        k_cap = static_cast<std::uint64_t>(
            std::ceil(std::log(cfg.cp_cutoff) / std::log1p(-par.p)));
        if (k_cap < 1) k_cap = 1;
    }
    detail::Accumulator gamma_acc;
    detail::Accumulator expo_acc;
    detail::Accumulator wait_acc;
    std::uint64_t redraws = 0;
    for (std::uint64_t t = 0; t < cfg.trials; ++t) {
        SubstreamRng rng(cfg.seed, t);
        std::uint64_t k1 = 0;
        std::uint64_t k2 = 0;
        for (;;) {
            k1 = draw_geometric(rng, par.p);
            k2 = draw_geometric(rng, par.p);
            if (k1 <= k_cap && k2 <= k_cap) break;
            ++redraws;
        }
        const std::uint64_t dk = (k1 > k2) ? k1 - k2 : k2 - k1;
        const double e = 2.0 * double(dk) + 3.0;
        gamma_acc.add(par.f * std::pow(par.beta, e));
        expo_acc.add(e);
        wait_acc.add(double(k1 > k2 ? k1 : k2));
    }
    McEstimate est;
    est.mean_gamma = gamma_acc.mean();
    est.stderr_gamma = gamma_acc.stderr_mean();
    est.mean_exponent = expo_acc.mean();
    est.stderr_exponent = expo_acc.stderr_mean();
    est.success_prob = 1.0;
    est.stderr_success = 0.0;
    est.mean_wait = wait_acc.mean();
    est.stderr_wait = wait_acc.stderr_mean();
    est.trials_used = cfg.trials;
    est.cap_redraws = redraws;
    return est;
}

/// Single buffered stage at a nesting level >= 2, under either exponent
/// convention.  Validates gamma_opt_level.
inline McEstimate simulate_stage(const StageParams& stage, const McConfig& cfg) {
    stage.validate();
    cfg.validate();
    detail::Accumulator gamma_acc;
    detail::Accumulator expo_acc;
    std::uint64_t successes = 0;
    const double nin = double(stage.n_in);
    for (std::uint64_t t = 0; t < cfg.trials; ++t) {
        SubstreamRng rng(cfg.seed, t);
        const std::uint64_t k1 = draw_geometric(rng, stage.p_in);
        const std::uint64_t k2 = draw_geometric(rng, stage.p_in);
        if (k1 > stage.n_out || k2 > stage.n_out) continue;
        ++successes;
        double e = 0.0;
        if (stage.convention == StageExponent::k1_only) {
            e = nin * (2.0 * double(stage.n_out - k1) + 2.0) + 1.0;
        } else {
            const std::uint64_t dk = (k1 > k2) ? k1 - k2 : k2 - k1;
            const std::uint64_t m = (k1 > k2) ? k1 : k2;
            e = nin * (2.0 * double(dk) + 2.0 * double(stage.n_out - m) + 2.0) + 1.0;
        }
        gamma_acc.add(std::pow(stage.beta_level, e));
        expo_acc.add(e);
    }
    McEstimate est;
    est.mean_gamma = gamma_acc.mean();
    est.stderr_gamma = gamma_acc.stderr_mean();
    est.mean_exponent = expo_acc.mean();
    est.stderr_exponent = expo_acc.stderr_mean();
    est.success_prob = double(successes) / double(cfg.trials);
    est.stderr_success = detail::binomial_stderr(est.success_prob, cfg.trials);
    est.trials_used = cfg.trials;
    return est;
}

}  // namespace qrep
