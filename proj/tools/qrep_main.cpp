// Command-line frontend: rates, coefficients, buffer-time optimization,
// schedule evaluation, parameter sweeps and Monte-Carlo validation, with
// deterministic CSV/JSON output.
//
// Exit codes: 0 success, 2 usage error, 3 domain error, 4 validation failure.

#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qrep/qrep.hpp"

namespace {

using qrep::Cell;
using qrep::LinkParams;
using qrep::Meta;
using qrep::Table;

constexpr int exit_ok = 0;
constexpr int exit_usage = 2;
constexpr int exit_domain = 3;
constexpr int exit_validation = 4;

std::string fmt(double v) { return qrep::detail::format_real(v); }
std::string fmt(std::uint64_t v) { return std::to_string(v); }

struct OutputOpts {
    std::string format = "csv";
    std::string path;
    std::string config_path;
};

void add_output_options(CLI::App* cmd, OutputOpts& out) {
    cmd->add_option("--format", out.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->envname("QREP_FORMAT");
    cmd->add_option("--output,-o", out.path, "write output to this file instead of stdout");
    cmd->add_option("--config", out.config_path,
                    "read options from a flat key=value file (flags win)");
}

/// Apply a flat `key = value` config file to a subcommand.  Keys mirror the
/// long flag names without the leading dashes; values set this way never
/// override options given on the command line.
void apply_config(CLI::App* cmd, const std::string& path) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file: " + path);
    std::string line;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return (a == std::string::npos) ? std::string{} : s.substr(a, b - a + 1);
    };
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.resize(hash);
        const std::string text = trim(line);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                        ": expected key = value");
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        CLI::Option* opt = cmd->get_option_no_throw("--" + key);
        if (!opt)
            throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                        ": unknown option '" + key + "'");
        if (opt->count() > 0) continue;  // command line wins
        opt->add_result(value);
        opt->run_callback();
    }
}

void emit(const Table& table, const Meta& meta, const OutputOpts& out) {
    std::ostringstream body;
    if (out.format == "json")
        qrep::write_json(table, meta, body);
    else
        qrep::write_csv(table, body);
    if (out.path.empty()) {
        std::cout << body.str();
    } else {
        std::ofstream file(out.path, std::ios::binary);
        if (!file) throw std::invalid_argument("cannot open output file: " + out.path);
        file << body.str();
    }
}

/// Link-parameter flags shared by most subcommands.  Precedence:
/// explicit flag > config file > preset > built-in default.
struct ParamOpts {
    double p = 1.0;
    double beta = 1.0;
    double tau_c = 1.0;
    double tau_m = 0.0;
    double p_s = 1.0;
    double p_t = 1.0;
    double f = 1.0;
    double l0_km = 0.0;
    double c_m_s = 2.0e8;
    std::string preset;

    CLI::Option* p_opt = nullptr;
    CLI::Option* beta_opt = nullptr;
    CLI::Option* tau_c_opt = nullptr;
    CLI::Option* tau_m_opt = nullptr;
    CLI::Option* p_s_opt = nullptr;
    CLI::Option* p_t_opt = nullptr;
    CLI::Option* f_opt = nullptr;
    CLI::Option* l0_opt = nullptr;
};

void add_param_options(CLI::App* cmd, ParamOpts& po, bool distance_shortcut = true) {
    po.p_opt = cmd->add_option("--p", po.p, "entanglement generation probability per attempt");
    po.beta_opt = cmd->add_option("--beta", po.beta, "memory quality parameter");
    po.tau_c_opt = cmd->add_option("--tau-c", po.tau_c, "one-way classical communication time, s");
    po.tau_m_opt = cmd->add_option("--tau-m", po.tau_m, "memory lifetime, s (derives beta with tau-c)");
    po.p_s_opt = cmd->add_option("--ps", po.p_s, "swap success probability");
    po.p_t_opt = cmd->add_option("--pt", po.p_t, "inter-level transfer probability");
    po.f_opt = cmd->add_option("--f", po.f, "initial segment fidelity");
    if (distance_shortcut) {
        po.l0_opt = cmd->add_option("--l0-km", po.l0_km,
                                    "segment length, km; sets tau-c via the signal speed");
        cmd->add_option("--c", po.c_m_s, "signal speed, m/s (with --l0-km)");
        po.l0_opt->excludes(po.tau_c_opt);
    }
    cmd->add_option("--preset", po.preset, "start from a named parameter set (see `presets`)");
    po.beta_opt->excludes(po.tau_m_opt);
}

LinkParams resolve_params(const ParamOpts& po) {
    LinkParams base = LinkParams::from_beta(1.0, 1.0, 1.0, 1.0, 1.0, 1.0);
    if (!po.preset.empty()) base = qrep::find_preset(po.preset).params;
    const double p = po.p_opt->count() ? po.p : base.p;
    const double p_s = po.p_s_opt->count() ? po.p_s : base.p_s;
    const double p_t = po.p_t_opt->count() ? po.p_t : base.p_t;
    const double f = po.f_opt->count() ? po.f : base.f;
    double tau_c = po.tau_c_opt->count() ? po.tau_c : base.tau_c;
    if (po.l0_opt && po.l0_opt->count()) {
        if (!(po.c_m_s > 0.0)) throw std::domain_error("signal speed must be positive");
        tau_c = po.l0_km * 1000.0 / po.c_m_s;
    }
    if (po.tau_m_opt->count())
        return LinkParams::from_times(p, p_s, p_t, tau_c, po.tau_m, f);
    const double beta = po.beta_opt->count() ? po.beta : base.beta;
    return LinkParams::from_beta(p, p_s, p_t, beta, tau_c, f);
}

std::string axis_meta(const qrep::Axis& ax) {
    return fmt(ax.lo) + ".." + fmt(ax.hi) + " points=" + std::to_string(ax.points) +
           (ax.log_scale ? " log" : " linear");
}

Meta param_meta(const std::string& subcommand, const LinkParams& par) {
    return Meta{
        {"tool", "qrep"},
        {"version", qrep::version},
        {"subcommand", subcommand},
        {"p", fmt(par.p)},
        {"beta", fmt(par.beta)},
        {"p_s", fmt(par.p_s)},
        {"p_t", fmt(par.p_t)},
        {"f", fmt(par.f)},
        {"tau_c", fmt(par.tau_c)},
    };
}

void push_chain_rows(Table& table, const qrep::ChainReport& report,
                     const LinkParams& par) {
    table.columns = {"level", "n_in", "n_out", "p_in", "p_out",
                     "gamma_level", "cumulative_gamma", "log10_cumulative_gamma",
                     "fidelity", "de", "per_cycle", "rate", "log10_rate",
                     "output_period"};
    for (const auto& lv : report.levels) {
        // ebits per two-way communication cycle of this level
        const double cycle = 2.0 * std::exp2(double(lv.level - 1)) * par.tau_c;
        auto& row = table.add_row();
        row.push_back(Cell::integer(lv.level));
        row.push_back(Cell::integer(std::int64_t(lv.n_in)));
        row.push_back(Cell::integer(std::int64_t(lv.n_out)));
        row.push_back(Cell::real(lv.p_in));
        row.push_back(Cell::real(lv.p_out));
        row.push_back(Cell::real(lv.gamma_level));
        row.push_back(Cell::real(lv.cumulative_gamma));
        row.push_back(Cell::real(lv.log10_cumulative_gamma));
        row.push_back(Cell::real(lv.fidelity));
        row.push_back(Cell::real(lv.de));
        row.push_back(Cell::real(lv.rate * cycle));
        row.push_back(Cell::real(lv.rate));
        row.push_back(Cell::real(lv.log10_rate));
        row.push_back(Cell::real(lv.output_period));
    }
}

std::vector<std::uint64_t> parse_uint_list(const std::string& text) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(item, &pos);
        if (pos != item.size())
            throw std::invalid_argument("not an integer: '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("empty integer list");
    return out;
}

std::vector<double> parse_real_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t pos = 0;
        const double v = std::stod(item, &pos);
        if (pos != item.size())
            throw std::invalid_argument("not a number: '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("empty number list");
    return out;
}

// --------------------------------------------------------------------------
// Subcommands
// --------------------------------------------------------------------------

int run_rate(const LinkParams& par, std::uint64_t n, bool use_n_opt,
             const OutputOpts& out) {
    Meta meta = param_meta("rate", par);
    if (use_n_opt) {
        const auto opt = qrep::optimal_n_level1(par);
        n = opt.n_opt;
        meta.emplace_back("n_opt", fmt(opt.n_opt));
        meta.emplace_back("search_bound", fmt(opt.search_bound));
        meta.emplace_back("threshold_hit", opt.threshold_hit ? "true" : "false");
    }
    meta.emplace_back("n", fmt(n));

    const double g_obp = qrep::gamma_opt(par.p, par.beta, n) * par.f;
    const double g_cp = qrep::gamma_can(par.p, par.beta) * par.f;
    const double r_obp = qrep::rate_obp_level1(par, n);
    const double r_cp = qrep::rate_cp_level1(par);
    const double k_avg = qrep::expected_waiting_steps(par.p);
    const double cycle = 2.0 * par.tau_c;

    Table t;
    t.columns = {"n", "gamma_obp", "fidelity_obp", "de_obp", "per_cycle_obp", "rate_obp",
                 "gamma_cp", "fidelity_cp", "de_cp", "k_avg", "per_cycle_cp", "rate_cp",
                 "eta", "log10_eta"};
    auto& row = t.add_row();
    row.push_back(Cell::integer(std::int64_t(n)));
    row.push_back(Cell::real(g_obp));
    row.push_back(Cell::real(0.5 * (1.0 + g_obp)));
    row.push_back(Cell::real(qrep::de_from_gamma(g_obp)));
    row.push_back(Cell::real(r_obp * cycle));
    row.push_back(Cell::real(r_obp));
    row.push_back(Cell::real(g_cp));
    row.push_back(Cell::real(0.5 * (1.0 + g_cp)));
    row.push_back(Cell::real(qrep::de_from_gamma(g_cp)));
    row.push_back(Cell::real(k_avg));
    row.push_back(Cell::real(r_cp * cycle));
    row.push_back(Cell::real(r_cp));
    if (r_obp > 0.0 && r_cp > 0.0) {
        row.push_back(Cell::real(r_obp / r_cp));
        row.push_back(Cell::real(std::log10(r_obp) - std::log10(r_cp)));
    } else {
        row.push_back(Cell::null());
        row.push_back(Cell::null());
    }
    emit(t, meta, out);
    return exit_ok;
}

int run_gamma(const LinkParams& par, std::uint64_t n, int cp_levels,
              bool stage_mode, const qrep::StageParams& stage,
              const OutputOpts& out) {
    Meta meta = param_meta("gamma", par);
    meta.emplace_back("n", fmt(n));
    Table t;
    t.columns = {"quantity", "value"};
    auto add = [&t](const std::string& name, double v) {
        auto& row = t.add_row();
        row.push_back(Cell::text(name));
        row.push_back(Cell::real(v));
    };
    add("gamma_obp", qrep::gamma_opt(par.p, par.beta, n));
    add("gamma_cp", qrep::gamma_can(par.p, par.beta));
    for (int j = 1; j <= cp_levels; ++j)
        add("gamma_cp_level_" + std::to_string(j), qrep::gamma_can_level(j, par));
    if (stage_mode) {
        meta.emplace_back("p_in", fmt(stage.p_in));
        meta.emplace_back("beta_level", fmt(stage.beta_level));
        meta.emplace_back("n_in", fmt(stage.n_in));
        meta.emplace_back("n_out", fmt(stage.n_out));
        add("gamma_stage_k1",
            qrep::gamma_opt_level(stage.p_in, stage.beta_level, stage.n_in,
                                  stage.n_out, qrep::StageExponent::k1_only));
        add("gamma_stage_symmetric",
            qrep::gamma_opt_level(stage.p_in, stage.beta_level, stage.n_in,
                                  stage.n_out, qrep::StageExponent::symmetric));
    }
    emit(t, meta, out);
    return exit_ok;
}

int run_optimize(const LinkParams& par, int levels, qrep::StageExponent conv,
                 const OutputOpts& out) {
    Meta meta = param_meta("optimize", par);
    meta.emplace_back("levels", std::to_string(levels));
    meta.emplace_back("convention", qrep::to_string(conv));
    Table t;
    if (levels == 1) {
        const auto opt = qrep::optimal_n_level1(par);
        t.columns = {"n_opt", "rate_at_opt", "search_bound", "threshold_hit"};
        auto& row = t.add_row();
        row.push_back(Cell::integer(std::int64_t(opt.n_opt)));
        row.push_back(Cell::real(opt.rate_at_opt));
        row.push_back(Cell::integer(std::int64_t(opt.search_bound)));
        row.push_back(Cell::integer(opt.threshold_hit ? 1 : 0));
    } else {
        const auto res = qrep::hierarchical_optimize(par, levels, conv);
        meta.emplace_back("memories_obp", fmt(qrep::memory_count(qrep::Protocol::obp, levels)));
        meta.emplace_back("memories_cp", fmt(qrep::memory_count(qrep::Protocol::cp, levels)));
        push_chain_rows(t, res.report, par);
    }
    emit(t, meta, out);
    return exit_ok;
}

int run_chain(const LinkParams& par, const std::string& protocol,
              const std::string& n_out_list, int levels, qrep::StageExponent conv,
              const OutputOpts& out) {
    Meta meta = param_meta("chain", par);
    meta.emplace_back("protocol", protocol);
    Table t;
    if (protocol == "cp") {
        push_chain_rows(t, qrep::chain_cp(par, levels), par);
        meta.emplace_back("levels", std::to_string(levels));
        meta.emplace_back("memories", fmt(qrep::memory_count(qrep::Protocol::cp, levels)));
    } else {
        if (n_out_list.empty())
            throw std::invalid_argument("chain: --n-out is required for the obp protocol");
        const auto schedule = qrep::LevelSchedule::from_n_out(parse_uint_list(n_out_list));
        push_chain_rows(t, qrep::chain_obp(par, schedule, conv), par);
        meta.emplace_back("convention", qrep::to_string(conv));
        meta.emplace_back("memories",
                          fmt(qrep::memory_count(qrep::Protocol::obp, int(schedule.levels()))));
    }
    emit(t, meta, out);
    return exit_ok;
}

/// Mean and variance of a per-trial statistic under the exact trajectory
/// distribution.  Sampling noise at rare-trajectory grid points makes
/// sample standard errors unusable (the mean of beta^e can be dominated by
/// trajectories far rarer than 1/trials), so the validation z-scores are
/// formed against these exact moments instead.
struct Moments {
    double mean = 0.0;
    double var = 0.0;
};

class MomentAccumulator {
public:
    void add(double weight, double value) {
        w_ += weight;
        wx_ += weight * value;
        wxx_ += weight * value * value;
    }
    Moments finish() const {
        Moments m;
        m.mean = wx_ / w_;
        m.var = std::max(0.0, wxx_ / w_ - m.mean * m.mean);
        return m;
    }

private:
    double w_ = 0.0;
    double wx_ = 0.0;
    double wxx_ = 0.0;
};

struct TrajectoryStats {
    Moments value;     // beta^e, success-conditioned
    Moments exponent;  // e, success-conditioned
    Moments wait;      // max(k1,k2), unbounded protocol only
};

TrajectoryStats obp_trajectory_stats(double p, double beta, std::uint64_t n) {
    MomentAccumulator value, exponent;
    for (std::uint64_t k1 = 1; k1 <= n; ++k1)
        for (std::uint64_t k2 = 1; k2 <= n; ++k2) {
            const double w = std::pow(1.0 - p, double(k1 + k2 - 2)) * p * p;
            const auto dk = (k1 > k2) ? k1 - k2 : k2 - k1;
            const auto m = (k1 > k2) ? k1 : k2;
            const double e = 2.0 * double(dk) + 2.0 * double(n - m) + 3.0;
            value.add(w, std::pow(beta, e));
            exponent.add(w, e);
        }
    return {value.finish(), exponent.finish(), {}};
}

TrajectoryStats stage_trajectory_stats(const qrep::StageParams& st) {
    MomentAccumulator value, exponent;
    for (std::uint64_t k1 = 1; k1 <= st.n_out; ++k1)
        for (std::uint64_t k2 = 1; k2 <= st.n_out; ++k2) {
            const double w = std::pow(1.0 - st.p_in, double(k1 + k2 - 2));
            double e = 0.0;
            if (st.convention == qrep::StageExponent::k1_only) {
                e = double(st.n_in) * (2.0 * double(st.n_out - k1) + 2.0) + 1.0;
            } else {
                const auto dk = (k1 > k2) ? k1 - k2 : k2 - k1;
                const auto m = (k1 > k2) ? k1 : k2;
                e = double(st.n_in) *
                        (2.0 * double(dk) + 2.0 * double(st.n_out - m) + 2.0) +
                    1.0;
            }
            value.add(w, std::pow(st.beta_level, e));
            exponent.add(w, e);
        }
    return {value.finish(), exponent.finish(), {}};
}

/// Moments under the capped draw the simulator actually performs (pairs
/// beyond k_cap are redrawn, i.e. the distribution is truncated and
/// renormalized).
TrajectoryStats cp_trajectory_stats(double p, double beta, double cutoff) {
    std::uint64_t k_cap = 1;
    if (p < 1.0)
        k_cap = std::max<std::uint64_t>(
            1, std::uint64_t(std::ceil(std::log(cutoff) / std::log1p(-p))));
    MomentAccumulator value, exponent, wait;
    for (std::uint64_t k1 = 1; k1 <= k_cap; ++k1)
        for (std::uint64_t k2 = 1; k2 <= k_cap; ++k2) {
            const double w = std::pow(1.0 - p, double(k1 + k2 - 2));
            const auto dk = (k1 > k2) ? k1 - k2 : k2 - k1;
            const double e = 2.0 * double(dk) + 3.0;
            value.add(w, std::pow(beta, e));
            exponent.add(w, e);
            wait.add(w, double(k1 > k2 ? k1 : k2));
        }
    return {value.finish(), exponent.finish(), wait.finish()};
}

int run_validate(const LinkParams& base, const qrep::McConfig& cfg,
                 const OutputOpts& out) {
    Table t;
    t.columns = {"check", "p", "beta", "n_in", "n_out",
                 "analytic", "estimate", "stderr", "z", "pass"};
    std::uint64_t failures = 0;

    auto push = [&](const std::string& check, double p, double beta,
                    std::uint64_t n_in, std::uint64_t n_out, double analytic,
                    double estimate, double se) {
        // exact checks (se == 0) get a tiny absolute slack: the analytic
        // side itself carries rounding at the 1e-15 level
        const double z = (se > 0.0) ? std::abs(estimate - analytic) / se : 0.0;
        const bool pass = (se > 0.0) ? (z <= 3.0)
                                     : (std::abs(estimate - analytic) <= 1e-12);
        failures += pass ? 0 : 1;
        auto& row = t.add_row();
        row.push_back(Cell::text(check));
        row.push_back(Cell::real(p));
        row.push_back(Cell::real(beta));
        row.push_back(Cell::integer(std::int64_t(n_in)));
        row.push_back(Cell::integer(std::int64_t(n_out)));
        row.push_back(Cell::real(analytic));
        row.push_back(Cell::real(estimate));
        row.push_back(Cell::real(se));
        row.push_back(Cell::real(z));
        row.push_back(Cell::integer(pass ? 1 : 0));
    };

    const double p_grid[] = {0.05, 0.1, 0.3, 0.5, 0.9};
    const double beta_grid[] = {0.1, 0.3, 0.6, 0.9, 0.99};
    const std::uint64_t n_grid[] = {1, 2, 3, 5, 10};
    const double trials = double(cfg.trials);

    for (double p : p_grid) {
        for (double beta : beta_grid) {
            const auto par = LinkParams::from_beta(p, base.p_s, base.p_t, beta,
                                                   base.tau_c, 1.0);
            for (std::uint64_t n : n_grid) {
                const auto est = qrep::simulate_level1_obp(par, n, cfg);
                const auto stats = obp_trajectory_stats(p, beta, n);
                const double miss = std::pow(1.0 - p, double(n));
                const double p_succ = (1.0 - miss) * (1.0 - miss);
                const double n_eff = trials * p_succ;
                push("gamma_obp", p, beta, 1, n, qrep::gamma_opt(p, beta, n),
                     est.mean_gamma, std::sqrt(stats.value.var / n_eff));
                push("exponent_obp", p, beta, 1, n, stats.exponent.mean,
                     est.mean_exponent, std::sqrt(stats.exponent.var / n_eff));
                push("success_obp", p, beta, 1, n, p_succ, est.success_prob,
                     std::sqrt(p_succ * (1.0 - p_succ) / trials));
            }
            const auto est = qrep::simulate_level1_cp(par, cfg);
            const auto stats = cp_trajectory_stats(p, beta, cfg.cp_cutoff);
            push("gamma_cp", p, beta, 1, 1, qrep::gamma_can(p, beta), est.mean_gamma,
                 std::sqrt(stats.value.var / trials));
            push("exponent_cp", p, beta, 1, 1, stats.exponent.mean, est.mean_exponent,
                 std::sqrt(stats.exponent.var / trials));
            push("waiting_steps", p, beta, 1, 1, qrep::expected_waiting_steps(p),
                 est.mean_wait, std::sqrt(stats.wait.var / trials));
        }
    }

    const double stage_p[] = {0.1, 0.5, 0.9};
    const double stage_beta[] = {0.3, 0.6, 0.9};
    const std::pair<std::uint64_t, std::uint64_t> stage_n[] = {{1, 2}, {2, 3}, {3, 1}};
    for (auto conv : {qrep::StageExponent::k1_only, qrep::StageExponent::symmetric}) {
        for (double p : stage_p) {
            for (double beta : stage_beta) {
                for (auto [n_in, n_out] : stage_n) {
                    const qrep::StageParams stage{p, beta, n_in, n_out, conv};
                    const auto est = qrep::simulate_stage(stage, cfg);
                    const auto stats = stage_trajectory_stats(stage);
                    const double miss = std::pow(1.0 - p, double(n_out));
                    const double n_eff = trials * (1.0 - miss) * (1.0 - miss);
                    push(std::string("gamma_stage_") + qrep::to_string(conv), p, beta,
                         n_in, n_out, qrep::gamma_opt_level(p, beta, n_in, n_out, conv),
                         est.mean_gamma, std::sqrt(stats.value.var / n_eff));
                    push(std::string("exponent_stage_") + qrep::to_string(conv), p,
                         beta, n_in, n_out, stats.exponent.mean, est.mean_exponent,
                         std::sqrt(stats.exponent.var / n_eff));
                }
            }
        }
    }

    const auto checks = std::uint64_t(t.rows.size());
    const auto allowed = std::max<std::uint64_t>(1, (checks + 99) / 100);
    Meta meta{
        {"tool", "qrep"},
        {"version", qrep::version},
        {"subcommand", "validate"},
        {"trials", fmt(cfg.trials)},
        {"seed", fmt(cfg.seed)},
        {"cp_cutoff", fmt(cfg.cp_cutoff)},
        {"checks", fmt(checks)},
        {"failures", fmt(failures)},
        {"allowed_failures", fmt(allowed)},
    };
    emit(t, meta, out);
    return failures > allowed ? exit_validation : exit_ok;
}

int run_presets(const OutputOpts& out) {
    Table t;
    t.columns = {"name", "p", "beta", "p_s", "p_t", "f", "tau_c", "note"};
    for (const auto& preset : qrep::presets()) {
        auto& row = t.add_row();
        row.push_back(Cell::text(preset.name));
        row.push_back(Cell::real(preset.params.p));
        row.push_back(Cell::real(preset.params.beta));
        row.push_back(Cell::real(preset.params.p_s));
        row.push_back(Cell::real(preset.params.p_t));
        row.push_back(Cell::real(preset.params.f));
        row.push_back(Cell::real(preset.params.tau_c));
        row.push_back(Cell::text(preset.note));
    }
    emit(t, Meta{{"tool", "qrep"}, {"version", qrep::version}, {"subcommand", "presets"}}, out);
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantum repeater rate analysis with optimized memory buffer times"};
    app.require_subcommand(1);
    std::function<int()> action;

    // rate
    {
        auto* cmd = app.add_subcommand("rate", "level-1 rates and their ratio");
        auto po = std::make_shared<ParamOpts>();
        auto out = std::make_shared<OutputOpts>();
        auto n = std::make_shared<std::uint64_t>(1);
        auto use_opt = std::make_shared<bool>(false);
        add_param_options(cmd, *po);
        add_output_options(cmd, *out);
        cmd->add_option("--n", *n, "buffer time in attempt cycles");
        cmd->add_flag("--n-opt", *use_opt, "use the optimal buffer time");
        cmd->callback([&action, cmd, po, out, n, use_opt] {
            action = [=] {
                apply_config(cmd, out->config_path);
                return run_rate(resolve_params(*po), *n, *use_opt, *out);
            };
        });
    }

    // gamma
    {
        auto* cmd = app.add_subcommand("gamma", "average-state coefficients");
        auto po = std::make_shared<ParamOpts>();
        auto out = std::make_shared<OutputOpts>();
        auto n = std::make_shared<std::uint64_t>(1);
        auto cp_levels = std::make_shared<int>(0);
        auto stage = std::make_shared<qrep::StageParams>();
        add_param_options(cmd, *po);
        add_output_options(cmd, *out);
        cmd->add_option("--n", *n, "buffer time in attempt cycles");
        cmd->add_option("--cp-levels", *cp_levels, "also list per-level coefficients up to this level");
        auto* pin_opt = cmd->add_option("--p-in", stage->p_in, "stage input probability");
        auto* bl_opt = cmd->add_option("--beta-level", stage->beta_level, "stage memory quality");
        auto* nin_opt = cmd->add_option("--n-in", stage->n_in, "stage input cycle count");
        auto* nout_opt = cmd->add_option("--n-out", stage->n_out, "stage buffer cycles");
        cmd->callback([&action, cmd, po, out, n, cp_levels, stage, pin_opt, bl_opt,
                       nin_opt, nout_opt] {
            action = [=] {
                apply_config(cmd, out->config_path);
                const bool stage_mode = pin_opt->count() || bl_opt->count() ||
                                        nin_opt->count() || nout_opt->count();
                auto par = resolve_params(*po);
                qrep::StageParams st = *stage;
                if (!pin_opt->count()) st.p_in = par.p;
                if (!bl_opt->count()) st.beta_level = par.beta;
                return run_gamma(par, *n, *cp_levels, stage_mode, st, *out);
            };
        });
    }

    // optimize
    {
        auto* cmd = app.add_subcommand("optimize",
                                       "optimal buffer time or full hierarchical schedule");
        auto po = std::make_shared<ParamOpts>();
        auto out = std::make_shared<OutputOpts>();
        auto levels = std::make_shared<int>(1);
        auto conv = std::make_shared<std::string>("k1");
        add_param_options(cmd, *po);
        add_output_options(cmd, *out);
        cmd->add_option("--levels", *levels, "number of nesting levels");
        cmd->add_option("--convention", *conv, "stage exponent convention")
            ->check(CLI::IsMember({"k1", "symmetric"}));
        cmd->callback([&action, cmd, po, out, levels, conv] {
            action = [=] {
                apply_config(cmd, out->config_path);
                return run_optimize(resolve_params(*po), *levels,
                                    qrep::parse_stage_exponent(*conv), *out);
            };
        });
    }

    // chain
    {
        auto* cmd = app.add_subcommand("chain", "evaluate a user-supplied schedule");
        auto po = std::make_shared<ParamOpts>();
        auto out = std::make_shared<OutputOpts>();
        auto protocol = std::make_shared<std::string>("obp");
        auto n_out_list = std::make_shared<std::string>();
        auto levels = std::make_shared<int>(1);
        auto conv = std::make_shared<std::string>("k1");
        add_param_options(cmd, *po);
        add_output_options(cmd, *out);
        cmd->add_option("--protocol", *protocol, "obp or cp")
            ->check(CLI::IsMember({"obp", "cp"}));
        cmd->add_option("--n-out", *n_out_list, "comma-separated buffer times per level (obp)");
        cmd->add_option("--levels", *levels, "levels to evaluate (cp)");
        cmd->add_option("--convention", *conv, "stage exponent convention")
            ->check(CLI::IsMember({"k1", "symmetric"}));
        cmd->callback([&action, cmd, po, out, protocol, n_out_list, levels, conv] {
            action = [=] {
                apply_config(cmd, out->config_path);
                return run_chain(resolve_params(*po), *protocol, *n_out_list, *levels,
                                 qrep::parse_stage_exponent(*conv), *out);
            };
        });
    }

    // sweep
    {
        auto* sweep = app.add_subcommand("sweep", "parameter sweeps");
        sweep->require_subcommand(1);

        // grid-ratio
        {
            auto* cmd = sweep->add_subcommand("grid-ratio",
                                              "log10 rate ratio over a (p, beta) grid");
            auto po = std::make_shared<ParamOpts>();
            auto out = std::make_shared<OutputOpts>();
            auto pax = std::make_shared<qrep::Axis>(qrep::Axis{0.01, 1.0, 101, true});
            auto bax = std::make_shared<qrep::Axis>(qrep::Axis{0.01, 1.0, 101, false});
            add_param_options(cmd, *po);
            add_output_options(cmd, *out);
            cmd->add_option("--p-min", pax->lo);
            cmd->add_option("--p-max", pax->hi);
            cmd->add_option("--p-points", pax->points);
            cmd->add_flag("--p-log,!--p-linear", pax->log_scale, "log-spaced p axis");
            cmd->add_option("--beta-min", bax->lo);
            cmd->add_option("--beta-max", bax->hi);
            cmd->add_option("--beta-points", bax->points);
            cmd->add_flag("--beta-log,!--beta-linear", bax->log_scale, "log-spaced beta axis");
            cmd->callback([&action, cmd, po, out, pax, bax] {
                action = [=] {
                    apply_config(cmd, out->config_path);
                    auto par = resolve_params(*po);
                    Meta meta = param_meta("sweep grid-ratio", par);
                    meta.emplace_back("p_axis", axis_meta(*pax));
                    meta.emplace_back("beta_axis", axis_meta(*bax));
                    emit(qrep::sweep_grid_ratio(*pax, *bax, par), meta, *out);
                    return exit_ok;
                };
            });
        }

        // nesting
        {
            auto* cmd = sweep->add_subcommand("nesting", "per-nesting-level rate ratio");
            auto po = std::make_shared<ParamOpts>();
            auto out = std::make_shared<OutputOpts>();
            auto levels = std::make_shared<int>(8);
            auto conv = std::make_shared<std::string>("k1");
            add_param_options(cmd, *po);
            add_output_options(cmd, *out);
            cmd->add_option("--levels", *levels, "number of nesting levels");
            cmd->add_option("--convention", *conv, "stage exponent convention")
                ->check(CLI::IsMember({"k1", "symmetric"}));
            cmd->callback([&action, cmd, po, out, levels, conv] {
                action = [=] {
                    apply_config(cmd, out->config_path);
                    auto par = resolve_params(*po);
                    Meta meta = param_meta("sweep nesting", par);
                    meta.emplace_back("levels", std::to_string(*levels));
                    meta.emplace_back("convention", *conv);
                    emit(qrep::sweep_nesting(par, *levels,
                                             qrep::parse_stage_exponent(*conv)),
                         meta, *out);
                    return exit_ok;
                };
            });
        }

        // distance
        {
            auto* cmd = sweep->add_subcommand("distance",
                                              "level-1 advantage vs node distance");
            auto po = std::make_shared<ParamOpts>();
            auto out = std::make_shared<OutputOpts>();
            auto ax = std::make_shared<qrep::Axis>(qrep::Axis{10.0, 200.0, 39, false});
            auto model = std::make_shared<qrep::DistanceModel>();
            auto tau_m_list = std::make_shared<std::string>("1e-3,1e-4");
            add_param_options(cmd, *po, false);
            add_output_options(cmd, *out);
            cmd->add_option("--l0-min", ax->lo, "smallest segment length, km");
            cmd->add_option("--l0-max", ax->hi, "largest segment length, km");
            cmd->add_option("--l0-points", ax->points);
            cmd->add_option("--la", model->la_km, "attenuation length, km");
            cmd->add_option("--c", model->c_m_s, "signal speed, m/s");
            cmd->add_option("--tau-m-list", *tau_m_list, "memory lifetimes, s (comma list)");
            cmd->callback([&action, cmd, po, out, ax, model, tau_m_list] {
                action = [=] {
                    apply_config(cmd, out->config_path);
                    auto par = resolve_params(*po);
                    Meta meta = param_meta("sweep distance", par);
                    meta.emplace_back("l0_axis", axis_meta(*ax));
                    meta.emplace_back("la_km", fmt(model->la_km));
                    meta.emplace_back("c_m_s", fmt(model->c_m_s));
                    meta.emplace_back("tau_m_list", *tau_m_list);
                    emit(qrep::sweep_distance(*ax, parse_real_list(*tau_m_list), *model, par),
                         meta, *out);
                    return exit_ok;
                };
            });
        }

        // nopt-vs-p / nopt-vs-beta / ratio-asymptote
        struct AxisSweepSpec {
            const char* name;
            const char* help;
            qrep::Axis axis;
        };
        const AxisSweepSpec axis_sweeps[] = {
            {"nopt-vs-p", "optimal buffer time vs p", {1e-3, 1.0, 61, true}},
            {"nopt-vs-beta", "optimal buffer time vs beta", {0.05, 0.99, 48, false}},
            {"ratio-asymptote", "rate ratio vs the 3.6/p approximation", {0.01, 0.1, 11, true}},
        };
        for (const auto& spec : axis_sweeps) {
            auto* cmd = sweep->add_subcommand(spec.name, spec.help);
            auto po = std::make_shared<ParamOpts>();
            auto out = std::make_shared<OutputOpts>();
            auto ax = std::make_shared<qrep::Axis>(spec.axis);
            const std::string kind = spec.name;
            add_param_options(cmd, *po);
            add_output_options(cmd, *out);
            cmd->add_option("--axis-min", ax->lo);
            cmd->add_option("--axis-max", ax->hi);
            cmd->add_option("--axis-points", ax->points);
            cmd->add_flag("--axis-log,!--axis-linear", ax->log_scale, "log-spaced axis");
            cmd->callback([&action, cmd, po, out, ax, kind] {
                action = [=] {
                    apply_config(cmd, out->config_path);
                    auto par = resolve_params(*po);
                    Meta meta = param_meta("sweep " + kind, par);
                    meta.emplace_back("axis", axis_meta(*ax));
                    Table t;
                    if (kind == "nopt-vs-p")
                        t = qrep::sweep_nopt(qrep::NoptSweepVariable::p, *ax, par);
                    else if (kind == "nopt-vs-beta")
                        t = qrep::sweep_nopt(qrep::NoptSweepVariable::beta, *ax, par);
                    else
                        t = qrep::sweep_ratio_asymptote(*ax, par);
                    emit(t, meta, *out);
                    return exit_ok;
                };
            });
        }
    }

    // validate
    {
        auto* cmd = app.add_subcommand("validate",
                                       "Monte-Carlo check of every closed form");
        auto po = std::make_shared<ParamOpts>();
        auto out = std::make_shared<OutputOpts>();
        auto cfg = std::make_shared<qrep::McConfig>();
        add_param_options(cmd, *po);
        add_output_options(cmd, *out);
        cmd->add_option("--trials", cfg->trials, "trials per grid point");
        cmd->add_option("--seed", cfg->seed, "random seed");
        cmd->add_option("--cp-cutoff", cfg->cp_cutoff, "tail mass bound for unbounded draws");
        cmd->callback([&action, cmd, po, out, cfg] {
            action = [=] {
                apply_config(cmd, out->config_path);
                return run_validate(resolve_params(*po), *cfg, *out);
            };
        });
    }

    // presets
    {
        auto* cmd = app.add_subcommand("presets", "list named parameter sets");
        auto out = std::make_shared<OutputOpts>();
        add_output_options(cmd, *out);
        cmd->callback([&action, cmd, out] {
            action = [=] {
                apply_config(cmd, out->config_path);
                return run_presets(*out);
            };
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        return action ? action() : exit_usage;
    } catch (const qrep::InfeasibleScheduleError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_domain;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_domain;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    }
}
