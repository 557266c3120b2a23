#pragma once

// Elementary algebra of dephased Bell mixtures stored in a pair of finite
// lifetime quantum memories.  Every state handled by this library is a
// mixture of the two Bell states |psi-> and |psi+> and is therefore fully
// described by a single coefficient gamma in [0,1]; density matrices are
// never materialized.  Fidelity with respect to |psi-> is (1+gamma)/2.

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qrep {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// A dephased Bell mixture (1+gamma)/2 |psi-><psi-| + (1-gamma)/2 |psi+><psi+|.
struct BellMixture {
    double gamma = 1.0;

    double fidelity() const { return 0.5 * (1.0 + gamma); }
};

/// Physical operating point of a repeater link.
///
/// beta = exp(-2 tau_C / tau_M) is the dephasing factor a memory pair picks up
/// during one one-way classical communication time.  It may also be supplied
/// directly (beta = 1 is the ideal-memory limit, unreachable through finite
/// tau_C/tau_M).
struct LinkParams {
    double p = 1.0;       // entanglement generation probability per attempt, (0,1]
    double p_s = 1.0;     // swap success probability, (0,1]
    double p_t = 1.0;     // inter-level transfer probability, (0,1]
    double tau_c = 1.0;   // one-way classical communication time, seconds, > 0
    double beta = 1.0;    // memory quality per 2*tau_c of storage, (0,1]
    double f = 1.0;       // initial segment fidelity, (0.5,1]

    static LinkParams from_times(double p, double p_s, double p_t,
                                 double tau_c, double tau_m, double f = 1.0) {
        if (!(tau_m > 0.0))
            throw std::domain_error("LinkParams: tau_m must be > 0");
        if (!(tau_c > 0.0))
            throw std::domain_error("LinkParams: tau_c must be > 0");
        return checked(p, p_s, p_t, tau_c, std::exp(-2.0 * tau_c / tau_m), f);
    }

    static LinkParams from_beta(double p, double p_s, double p_t,
                                double beta, double tau_c = 1.0, double f = 1.0) {
        if (!(tau_c > 0.0))
            throw std::domain_error("LinkParams: tau_c must be > 0");
        return checked(p, p_s, p_t, tau_c, beta, f);
    }

    /// Memory lifetime implied by (beta, tau_c); +inf for beta = 1.
    double tau_m() const {
        if (beta >= 1.0) return std::numeric_limits<double>::infinity();
        return -2.0 * tau_c / std::log(beta);
    }

private:
    static LinkParams checked(double p, double p_s, double p_t,
                              double tau_c, double beta, double f) {
        auto in_unit = [](double x) { return x > 0.0 && x <= 1.0; };
        if (!in_unit(p))   throw std::domain_error("LinkParams: p must be in (0,1]");
        if (!in_unit(p_s)) throw std::domain_error("LinkParams: p_s must be in (0,1]");
        if (!in_unit(p_t)) throw std::domain_error("LinkParams: p_t must be in (0,1]");
        if (!in_unit(beta)) throw std::domain_error("LinkParams: beta must be in (0,1]");
        if (!(f > 0.5 && f <= 1.0))
            throw std::domain_error("LinkParams: f must be in (0.5,1]");
        return LinkParams{p, p_s, p_t, tau_c, beta, f};
    }
};

/// Nesting level i >= 1.  Communication time doubles per level, the memory
/// quality parameter is squared per level.
struct LevelIndex {
    int i = 1;

    explicit LevelIndex(int level) : i(level) {
        if (i < 1) throw std::domain_error("LevelIndex: level must be >= 1");
    }

    double scale() const { return std::exp2(double(i - 1)); }           // 2^(i-1)
    double tau_c(double tau_c_base) const { return scale() * tau_c_base; }
    double beta(double beta_base) const {
        return std::pow(beta_base, scale());                            // beta^(2^(i-1))
    }
    double log10_beta(double beta_base) const {
        return scale() * std::log10(beta_base);
    }
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Binary entropy in bits, H(x) = -x log2 x - (1-x) log2(1-x), with the
/// 0 log 0 := 0 convention at the endpoints.
inline double binary_entropy(double x) {
    if (!(x >= 0.0 && x <= 1.0))
        throw std::domain_error("binary_entropy: argument must be in [0,1]");
    if (x == 0.0 || x == 1.0) return 0.0;
    // log1p keeps the (1-x) term accurate when x is within a few ulp of 0.
    return -x * std::log2(x) - (1.0 - x) * std::log1p(-x) * std::numbers::log2e;
}

/// Distillable entanglement (hashing bound) of a Bell mixture given its
/// coefficient gamma, E = H[1/2 + sqrt(F(1-F))] with F = (1+gamma)/2.
/// Evaluated through eps = 1/2 - sqrt(F(1-F)) = gamma^2 / (2(1+sqrt(1-gamma^2)))
/// which stays accurate down to gamma ~ 1e-154.
inline double de_from_gamma(double gamma) {
    if (gamma <= 0.0) return 0.0;
    if (gamma >= 1.0) return 1.0;
    const double s = std::sqrt((1.0 - gamma) * (1.0 + gamma));
    const double eps = gamma * gamma / (2.0 * (1.0 + s));
    if (eps <= 0.0) return 0.0;   // gamma^2 underflowed
    return binary_entropy(eps);
}

/// Distillable entanglement as a function of fidelity; exactly 0 at or below
/// the F = 1/2 threshold.
inline double distillable_entanglement(double fidelity) {
    if (!(fidelity >= 0.0 && fidelity <= 1.0))
        throw std::domain_error("distillable_entanglement: fidelity must be in [0,1]");
    if (fidelity <= 0.5) return 0.0;
    return de_from_gamma(2.0 * fidelity - 1.0);
}

/// log10 of de_from_gamma(10^l10_gamma), usable far below the underflow
/// threshold of the direct evaluation.  For tiny gamma,
/// E ~ eps (log2(1/eps) + log2 e) with eps = gamma^2/4.
inline double log10_de_from_log10_gamma(double l10_gamma) {
    if (l10_gamma >= 0.0) return 0.0;
    if (l10_gamma == -std::numeric_limits<double>::infinity())
        return -std::numeric_limits<double>::infinity();
    if (l10_gamma > -130.0)
        return std::log10(de_from_gamma(std::pow(10.0, l10_gamma)));
    const double l10_eps = 2.0 * l10_gamma - std::log10(4.0);
    const double log2_inv_eps = -l10_eps / std::numbers::ln2 * std::numbers::ln10;
    return l10_eps + std::log10(log2_inv_eps + std::numbers::log2e);
}

/// Apply phase decoherence for t seconds in a memory pair of lifetime tau_m:
/// gamma -> gamma * exp(-2 t / tau_m).
inline BellMixture dephase(BellMixture state, double t, double tau_m) {
    if (!(t >= 0.0)) throw std::domain_error("dephase: t must be >= 0");
    if (!(tau_m > 0.0)) throw std::domain_error("dephase: tau_m must be > 0");
    return BellMixture{state.gamma * std::exp(-2.0 * t / tau_m)};
}

/// Entanglement swap of two Bell mixtures: coefficients multiply (dephasing
/// exponents add under the swap).
inline BellMixture swap_merge(BellMixture a, BellMixture b) {
    return BellMixture{a.gamma * b.gamma};
}

/// Expected number of attempt steps until both segments of a swap hold an
/// entangled pair, <k> = (3-2p) / (p(2-p)).
inline double expected_waiting_steps(double p) {
    if (!(p > 0.0 && p <= 1.0))
        throw std::domain_error("expected_waiting_steps: p must be in (0,1]");
    return (3.0 - 2.0 * p) / (p * (2.0 - p));
}

}  // namespace qrep
