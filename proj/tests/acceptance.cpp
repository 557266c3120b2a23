// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails.  Everything here goes through the public library surface
// (plus the CLI binary for the determinism criterion).

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "qrep/qrep.hpp"

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& what) {
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion,
                what.c_str());
    if (!pass) ++failures;
}

qrep::LinkParams point(double p, double beta, double p_s = 1.0, double p_t = 1.0,
                       double tau_c = 1.0) {
    return qrep::LinkParams::from_beta(p, p_s, p_t, beta, tau_c);
}

std::string run_cli_capture(const std::string& args, int& exit_code) {
    const std::string cmd = std::string("\"") + QREP_CLI_PATH + "\" " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
        exit_code = -1;
        return {};
    }
    std::string out;
    char buf[8192];
    std::size_t n = 0;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    const int status = pclose(pipe);
    exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return out;
}

// --- criterion bodies -----------------------------------------------------

void criterion_1_nopt_fixtures() {
    const bool pass = qrep::optimal_n_level1(point(0.1, 0.9)).n_opt == 3 &&
                      qrep::optimal_n_level1(point(0.05, 0.8)).n_opt == 2 &&
                      qrep::optimal_n_level1(point(0.1, 0.4)).n_opt == 1;
    report(1, pass, "optimal buffer times at (0.1,0.9)->3, (0.05,0.8)->2, (0.1,0.4)->1");
}

void criterion_2_regimes() {
    // ten evenly spaced samples of each stated regime
    std::string offending;
    for (int i = 0; i < 10; ++i) {
        const double p = std::min(0.55 + 0.05 * double(i), 1.0);
        const auto n = qrep::optimal_n_level1(point(p, 0.99)).n_opt;
        if (n != 1)
            offending += " n_opt(p=" + std::to_string(p) + ",beta=0.99)=" + std::to_string(n);
    }
    for (int i = 1; i <= 10; ++i) {
        const double beta = 0.07 * double(i);
        const auto n = qrep::optimal_n_level1(point(0.01, beta)).n_opt;
        if (n != 1)
            offending += " n_opt(p=0.01,beta=" + std::to_string(beta) + ")=" + std::to_string(n);
    }
    report(2, offending.empty(),
           "n_opt = 1 for p > 0.5 at beta = 0.99 and for beta <= 0.7 at p = 0.01" +
               (offending.empty() ? std::string{}
                                  : " -- counterexamples:" + offending +
                                        " (the n = 1 plateau verifiably starts near "
                                        "p = 0.57; waiting one extra cycle still wins "
                                        "by ~2% at p = 0.55)"));
}

void criterion_3_asymptotic_ratio() {
    bool pass = true;
    for (double p : {0.01, 0.02, 0.05, 0.1}) {
        const auto par = point(p, 0.1);
        const auto opt = qrep::optimal_n_level1(par);
        const double eta = qrep::rate_obp_level1(par, opt.n_opt) / qrep::rate_cp_level1(par);
        if (std::abs(eta * p / 3.6 - 1.0) > 0.2) pass = false;
    }
    report(3, pass, "rate ratio within 20% of 3.6/p for beta = 0.1, p in [0.01, 0.1]");
}

void criterion_4_state_of_art() {
    const auto par = qrep::find_preset("soa").params;
    const auto opt = qrep::optimal_n_level1(par);
    const double l10 = std::log10(qrep::rate_obp_level1(par, opt.n_opt)) -
                       std::log10(qrep::rate_cp_level1(par));
    report(4, l10 >= 4.0 && l10 <= 5.0,
           "state-of-art point log10 ratio in [4, 5] (got " + std::to_string(l10) + ")");
}

double distance_log10_eta(double l0_km, double tau_m) {
    qrep::DistanceModel model;
    model.tau_m_s = tau_m;
    const auto base = point(0.5, 0.5, 0.5);
    const auto par = model.at(l0_km, base);
    const auto opt = qrep::optimal_n_level1(par);
    return std::log10(qrep::rate_obp_level1(par, opt.n_opt)) -
           std::log10(qrep::rate_cp_level1(par));
}

void criterion_5_distance() {
    const double at_1ms = distance_log10_eta(100.0, 1e-3);
    const double at_100us = distance_log10_eta(100.0, 1e-4);
    const bool pass = std::abs(at_1ms - 2.0) <= 0.5 && at_100us > at_1ms;
    report(5, pass,
           "100 km, 1 ms memories: log10 ratio = 2 +- 0.5 (got " + std::to_string(at_1ms) +
               "), higher still at 100 us (got " + std::to_string(at_100us) + ")");
}

void criterion_6_nesting() {
    const int levels = 8;
    const auto lo = qrep::find_preset("nesting-low-ps").params;
    const auto hi = qrep::find_preset("nesting-high-ps").params;
    const auto obp_lo = qrep::hierarchical_optimize(lo, levels);
    const auto obp_hi = qrep::hierarchical_optimize(hi, levels);
    const auto cp_lo = qrep::chain_cp(lo, levels);
    const auto cp_hi = qrep::chain_cp(hi, levels);

    // (a) the swap success probability cancels from the level-1 ratio
    const double eta1_lo = obp_lo.report.levels[0].rate / cp_lo.levels[0].rate;
    const double eta1_hi = obp_hi.report.levels[0].rate / cp_hi.levels[0].rate;
    const bool pass_a = std::abs(eta1_lo / eta1_hi - 1.0) <= 1e-12;

    std::vector<double> ratio_lo(levels), ratio_hi(levels);
    for (int i = 0; i < levels; ++i) {
        ratio_lo[std::size_t(i)] = obp_lo.report.levels[std::size_t(i)].log10_rate -
                                   cp_lo.levels[std::size_t(i)].log10_rate;
        ratio_hi[std::size_t(i)] = obp_hi.report.levels[std::size_t(i)].log10_rate -
                                   cp_hi.levels[std::size_t(i)].log10_rate;
    }
    // (b) low swap success: the advantage grows strictly with the level
    bool pass_b = true;
    for (int i = 1; i < levels; ++i)
        if (!(ratio_lo[std::size_t(i)] > ratio_lo[std::size_t(i) - 1])) pass_b = false;
    // (c) high swap success grows strictly slower at every level
    bool pass_c = true;
    for (int i = 1; i < levels; ++i) {
        const double inc_lo = ratio_lo[std::size_t(i)] - ratio_lo[std::size_t(i) - 1];
        const double inc_hi = ratio_hi[std::size_t(i)] - ratio_hi[std::size_t(i) - 1];
        if (!(inc_hi < inc_lo)) pass_c = false;
    }
    report(6, pass_a && pass_b && pass_c,
           "nesting behavior at p=0.02, beta=0.2: level-1 ratio p_s-independent (a), "
           "strictly growing advantage at p_s=0.5 (b), smaller increments at p_s=0.75 (c)");
}

// independent double sums, duplicated here on purpose: the acceptance gate
// must not share its oracle with the library
double brute_gamma_obp(double p, double beta, std::uint64_t n) {
    double num = 0.0, norm = 0.0;
    for (std::uint64_t k1 = 1; k1 <= n; ++k1)
        for (std::uint64_t k2 = 1; k2 <= n; ++k2) {
            const double w = std::pow(1.0 - p, double(k1 + k2 - 2)) * p * p;
            const auto dk = (k1 > k2) ? k1 - k2 : k2 - k1;
            const auto m = (k1 > k2) ? k1 : k2;
            num += w * std::pow(beta, 2.0 * double(dk) + 2.0 * double(n - m) + 3.0);
            norm += w;
        }
    return num / norm;
}

double brute_gamma_cp(double p, double beta) {
    const double q = 1.0 - p;
    std::uint64_t k_max = 1;
    while (std::pow(q, double(k_max)) > 1e-14 && k_max < 100000) ++k_max;
    double num = 0.0, norm = 0.0;
    for (std::uint64_t k1 = 1; k1 <= k_max; ++k1)
        for (std::uint64_t k2 = 1; k2 <= k_max; ++k2) {
            const double w = std::pow(q, double(k1 + k2 - 2)) * p * p;
            const auto dk = (k1 > k2) ? k1 - k2 : k2 - k1;
            num += w * std::pow(beta, 2.0 * double(dk) + 3.0);
            norm += w;
        }
    return num / norm;
}

double brute_gamma_stage(double p, double beta, std::uint64_t n_in, std::uint64_t n_out,
                         bool k1_only) {
    double num = 0.0, norm = 0.0;
    for (std::uint64_t k1 = 1; k1 <= n_out; ++k1)
        for (std::uint64_t k2 = 1; k2 <= n_out; ++k2) {
            const double w = std::pow(1.0 - p, double(k1 + k2 - 2)) * p * p;
            double e = 0.0;
            if (k1_only) {
                e = double(n_in) * (2.0 * double(n_out - k1) + 2.0) + 1.0;
            } else {
                const auto dk = (k1 > k2) ? k1 - k2 : k2 - k1;
                const auto m = (k1 > k2) ? k1 : k2;
                e = double(n_in) * (2.0 * double(dk) + 2.0 * double(n_out - m) + 2.0) + 1.0;
            }
            num += w * std::pow(beta, e);
            norm += w;
        }
    return num / norm;
}

void criterion_7_oracle_equivalence() {
    const double p_grid[] = {0.05, 0.1, 0.3, 0.5, 0.9};
    const double beta_grid[] = {0.1, 0.3, 0.6, 0.9, 0.99};
    const std::uint64_t n_grid[] = {1, 2, 3, 5, 10};
    bool pass = true;
    double worst = 0.0;
    for (double p : p_grid)
        for (double beta : beta_grid) {
            for (std::uint64_t n : n_grid) {
                const double a = qrep::gamma_opt(p, beta, n);
                const double b = brute_gamma_obp(p, beta, n);
                worst = std::max(worst, std::abs(a - b) / b);
            }
            const double a = qrep::gamma_can(p, beta);
            const double b = brute_gamma_cp(p, beta);
            worst = std::max(worst, std::abs(a - b) / b);
        }
    for (bool k1_only : {true, false})
        for (double p : {0.1, 0.5, 0.9})
            for (double beta : {0.3, 0.6, 0.9})
                for (std::uint64_t n_in : {1, 2, 3})
                    for (std::uint64_t n_out : {1, 2, 3}) {
                        const double a = qrep::gamma_opt_level(
                            p, beta, n_in, n_out,
                            k1_only ? qrep::StageExponent::k1_only
                                    : qrep::StageExponent::symmetric);
                        const double b = brute_gamma_stage(p, beta, n_in, n_out, k1_only);
                        worst = std::max(worst, std::abs(a - b) / b);
                    }
    pass = worst <= 1e-10;
    report(7, pass,
           "closed forms match brute-force sums to 1e-10 (worst relative deviation " +
               std::to_string(worst) + ")");
}

void criterion_8_monte_carlo() {
    const qrep::McConfig cfg{100000, 7, 1e-12};
    const auto par = point(0.5, 0.6);
    bool pass = true;

    const auto obp = qrep::simulate_level1_obp(par, 2, cfg);
    pass = pass && std::abs(obp.mean_gamma - 0.09312) <= 3.0 * obp.stderr_gamma;
    pass = pass && std::abs(obp.success_prob - 0.5625) <= 3.0 * obp.stderr_success;

    const auto cp = qrep::simulate_level1_cp(par, cfg);
    pass = pass && std::abs(cp.mean_gamma - qrep::gamma_can(0.5, 0.6)) <= 3.0 * cp.stderr_gamma;
    pass = pass && std::abs(cp.mean_wait - 8.0 / 3.0) <= 3.0 * cp.stderr_wait;

    const qrep::StageParams st_k1{0.5, 0.6, 1, 2, qrep::StageExponent::k1_only};
    const auto k1 = qrep::simulate_stage(st_k1, cfg);
    pass = pass && std::abs(k1.mean_gamma - 0.12384) <= 3.0 * k1.stderr_gamma;

    const qrep::StageParams st_sym{0.5, 0.6, 1, 2, qrep::StageExponent::symmetric};
    const auto sym = qrep::simulate_stage(st_sym, cfg);
    pass = pass && std::abs(sym.mean_gamma - 0.09312) <= 3.0 * sym.stderr_gamma;

    // byte-identical reruns, library and CLI
    int code_a = -1, code_b = -1;
    const auto out_a = run_cli_capture("validate --trials 100000 --seed 7", code_a);
    const auto out_b = run_cli_capture("validate --trials 100000 --seed 7", code_b);
    pass = pass && code_a == 0 && code_b == 0 && !out_a.empty() && out_a == out_b;

    report(8, pass,
           "Monte-Carlo estimates within 3 standard errors at 1e5 trials; "
           "repeated runs byte-identical");
}

void criterion_9_structure() {
    bool pass = qrep::memory_count(qrep::Protocol::cp, 1) == 8 &&
                qrep::memory_count(qrep::Protocol::obp, 1) == 12;
    std::mt19937_64 rng(20250808);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double p = std::pow(10.0, -2.0 * unit(rng));
        const double beta = 0.05 + 0.94 * unit(rng);
        const double p_s = 0.3 + 0.7 * unit(rng);
        const double p_t = 0.5 + 0.5 * unit(rng);
        const auto par = qrep::LinkParams::from_beta(std::min(p, 0.9), std::min(p_s, 1.0),
                                                     std::min(p_t, 1.0), beta, 1.0);
        for (int n_m = 1; n_m <= 8; ++n_m) {
            try {
                const auto res = qrep::hierarchical_optimize(par, n_m);
                res.schedule.validate();
                if (res.schedule.n_in[0] != 1) pass = false;
                for (std::size_t i = 0; i + 1 < res.schedule.levels(); ++i)
                    if (res.schedule.n_in[i + 1] * 2 !=
                        res.schedule.n_out[i] * res.schedule.n_in[i])
                        pass = false;
            } catch (const std::exception&) {
                pass = false;
            }
        }
    }
    report(9, pass,
           "hierarchical schedules synchronize for N_m = 1..8 over 20 random points; "
           "memory counts (cp,1)=8 and (obp,1)=12");
}

}  // namespace

int main() {
    criterion_1_nopt_fixtures();
    criterion_2_regimes();
    criterion_3_asymptotic_ratio();
    criterion_4_state_of_art();
    criterion_5_distance();
    criterion_6_nesting();
    criterion_7_oracle_equivalence();
    criterion_8_monte_carlo();
    criterion_9_structure();
    if (failures) {
        std::printf("%d criterion(s) FAILED\n", failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
