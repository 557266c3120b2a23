#pragma once

// Parameter sweeps producing the figure-ready tables: level-1 rate-ratio
// grids over (p, beta), per-nesting-level ratios, node-distance scans and
// optimal-buffer-time curves.  Every sweep is a pure function of its inputs;
// rows are emitted in sorted axis order, so identical inputs give
// byte-identical tables.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qrep/optimize.hpp"
#include "qrep/rates.hpp"
#include "qrep/table.hpp"

namespace qrep {

struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    int points = 2;
    bool log_scale = false;

    std::vector<double> values() const {
        if (points < 2) throw std::invalid_argument("Axis: need at least 2 points");
        if (!(lo < hi)) throw std::invalid_argument("Axis: lo must be < hi");
        if (log_scale && !(lo > 0.0))
            throw std::invalid_argument("Axis: log axis requires lo > 0");
        std::vector<double> v(static_cast<std::size_t>(points));
        for (int i = 0; i < points; ++i) {
            const double t = double(i) / double(points - 1);
            v[std::size_t(i)] = log_scale
                                    ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)))
                                    : lo + t * (hi - lo);
        }
        v.front() = lo;
        v.back() = hi;
        return v;
    }
};

/// Node-distance parametrization: p = exp(-L0/La) and
/// beta = exp(-(L0/La)(La/(c tau_M))), with tau_C = L0/c.
struct DistanceModel {
    double la_km = 20.0;     // attenuation length
    double c_m_s = 2.0e8;    // signal speed in fiber
    double tau_m_s = 1e-3;   // memory lifetime

    void validate() const {
        if (!(la_km > 0.0 && c_m_s > 0.0 && tau_m_s > 0.0))
            throw std::domain_error("DistanceModel: all fields must be positive");
    }

    /// Link parameters at segment length l0_km; p_s, p_t and f are taken
    /// from `base`.
    LinkParams at(double l0_km, const LinkParams& base) const {
        validate();
        if (!(l0_km > 0.0)) throw std::domain_error("DistanceModel: L0 must be > 0");
        const double c_km_s = c_m_s / 1000.0;
        const double p = std::exp(-l0_km / la_km);
        const double beta = std::exp(-(l0_km / la_km) * (la_km / (c_km_s * tau_m_s)));
        const double tau_c = l0_km / c_km_s;
        return LinkParams::from_beta(p, base.p_s, base.p_t, beta, tau_c, base.f);
    }
};

namespace detail {

/// log10 of the level-1 rate ratio at the optimal buffer time; the second
/// member reports whether either rate vanished (null sentinel for callers).
struct RatioPoint {
    std::uint64_t n_opt = 1;
    double log10_eta = 0.0;
    bool defined = false;
};

inline RatioPoint level1_log10_ratio(const LinkParams& par) {
    RatioPoint pt;
    const auto opt = optimal_n_level1(par);
    pt.n_opt = opt.n_opt;
    const double r_obp = opt.rate_at_opt;
    const double r_cp = rate_cp_level1(par);
    if (r_obp > 0.0 && r_cp > 0.0) {
        pt.log10_eta = std::log10(r_obp) - std::log10(r_cp);
        pt.defined = true;
    }
    return pt;
}

}  // namespace detail

/// Grid of log10(R_OBP(n_opt) / R_CP) over (p, beta).  Points where either
/// rate is zero emit a null log10_eta.
inline Table sweep_grid_ratio(const Axis& p_axis, const Axis& beta_axis,
                              const LinkParams& base) {
    Table t;
    t.columns = {"p", "beta", "n_opt", "log10_eta"};
    for (double p : p_axis.values()) {
        for (double beta : beta_axis.values()) {
            const auto par = LinkParams::from_beta(p, base.p_s, base.p_t, beta,
                                                   base.tau_c, base.f);
            const auto pt = detail::level1_log10_ratio(par);
            auto& row = t.add_row();
            row.push_back(Cell::real(p));
            row.push_back(Cell::real(beta));
            row.push_back(Cell::integer(std::int64_t(pt.n_opt)));
            row.push_back(pt.defined ? Cell::real(pt.log10_eta) : Cell::null());
        }
    }
    return t;
}

/// Per-nesting-level comparison of the two protocols with hierarchically
/// optimized buffer times.
inline Table sweep_nesting(const LinkParams& par, int n_levels, StageExponent conv) {
    const auto obp = hierarchical_optimize(par, n_levels, conv);
    const auto cp = chain_cp(par, n_levels);
    Table t;
    t.columns = {"level", "n_in", "n_out", "log10_rate_obp", "log10_rate_cp",
                 "log10_eta"};
    for (int i = 0; i < n_levels; ++i) {
        const auto& o = obp.report.levels[std::size_t(i)];
        const auto& c = cp.levels[std::size_t(i)];
        auto& row = t.add_row();
        row.push_back(Cell::integer(i + 1));
        row.push_back(Cell::integer(std::int64_t(o.n_in)));
        row.push_back(Cell::integer(std::int64_t(o.n_out)));
        row.push_back(Cell::real(o.log10_rate));
        row.push_back(Cell::real(c.log10_rate));
        row.push_back(Cell::real(o.log10_rate - c.log10_rate));
    }
    return t;
}

/// Level-1 advantage versus node distance, one series per memory lifetime.
inline Table sweep_distance(const Axis& l0_axis, const std::vector<double>& tau_m_list,
                            const DistanceModel& model, const LinkParams& base) {
    if (tau_m_list.empty())
        throw std::invalid_argument("sweep_distance: need at least one tau_m");
    Table t;
    t.columns = {"l0_km", "tau_m_s", "p", "beta", "n_opt", "log10_eta"};
    for (double l0 : l0_axis.values()) {
        for (double tau_m : tau_m_list) {
            DistanceModel m = model;
            m.tau_m_s = tau_m;
            const auto par = m.at(l0, base);
            const auto pt = detail::level1_log10_ratio(par);
            auto& row = t.add_row();
            row.push_back(Cell::real(l0));
            row.push_back(Cell::real(tau_m));
            row.push_back(Cell::real(par.p));
            row.push_back(Cell::real(par.beta));
            row.push_back(Cell::integer(std::int64_t(pt.n_opt)));
            row.push_back(pt.defined ? Cell::real(pt.log10_eta) : Cell::null());
        }
    }
    return t;
}

enum class NoptSweepVariable { p, beta };

/// Optimal buffer time along one parameter axis, the other fixed by `base`.
inline Table sweep_nopt(NoptSweepVariable variable, const Axis& axis,
                        const LinkParams& base) {
    Table t;
    t.columns = {variable == NoptSweepVariable::p ? "p" : "beta", "n_opt"};
    for (double x : axis.values()) {
        const auto par = (variable == NoptSweepVariable::p)
                             ? LinkParams::from_beta(x, base.p_s, base.p_t, base.beta,
                                                     base.tau_c, base.f)
                             : LinkParams::from_beta(base.p, base.p_s, base.p_t, x,
                                                     base.tau_c, base.f);
        const auto opt = optimal_n_level1(par);
        auto& row = t.add_row();
        row.push_back(Cell::real(x));
        row.push_back(Cell::integer(std::int64_t(opt.n_opt)));
    }
    return t;
}

/// Level-1 ratio against the low-(p,beta) closed-form approximation 3.6/p.
inline Table sweep_ratio_asymptote(const Axis& p_axis, const LinkParams& base) {
    Table t;
    t.columns = {"p", "n_opt", "eta", "eta_approx", "rel_deviation"};
    for (double p : p_axis.values()) {
        const auto par = LinkParams::from_beta(p, base.p_s, base.p_t, base.beta,
                                               base.tau_c, base.f);
        const auto pt = detail::level1_log10_ratio(par);
        const double eta = pt.defined ? std::pow(10.0, pt.log10_eta) : 0.0;
        const double approx = 3.6 / p;
        auto& row = t.add_row();
        row.push_back(Cell::real(p));
        row.push_back(Cell::integer(std::int64_t(pt.n_opt)));
        row.push_back(pt.defined ? Cell::real(eta) : Cell::null());
        row.push_back(Cell::real(approx));
        row.push_back(pt.defined ? Cell::real(eta / approx - 1.0) : Cell::null());
    }
    return t;
}

}  // namespace qrep
