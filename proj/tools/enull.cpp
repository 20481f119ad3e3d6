// Command-line front end: levels -> nullfit -> adjust -> screen / benefit,
// plus the simulation study. Every subcommand is a pure function of its
// input files, flags, and seed, and writes a JSON manifest next to its
// primary output.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "enull/benefit.hpp"
#include "enull/error.hpp"
#include "enull/io.hpp"
#include "enull/levels.hpp"
#include "enull/nullmodel.hpp"
#include "enull/screening.hpp"
#include "enull/simstudy.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr std::uint64_t kDefaultSeed = 1729;

struct Global {
    std::uint64_t seed = kDefaultSeed;
    unsigned threads = 1;
    bool quiet = false;
};

void write_manifest(const std::string& primary_output, const std::string& subcommand,
                    const nlohmann::json& params, const nlohmann::json& inputs,
                    const nlohmann::json& outputs, std::uint64_t seed,
                    double runtime_s) {
    nlohmann::json m{{"subcommand", subcommand}, {"parameters", params},
                     {"inputs", inputs},         {"outputs", outputs},
                     {"seed", seed},             {"version", kVersion},
                     {"runtime_seconds", runtime_s}};
    auto out = enull::detail::open_out(primary_output + ".manifest.json");
    out << m.dump(2) << '\n';
}

class Timer {
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             start_).count();
    }
};

std::vector<std::size_t> parse_grid(const std::string& spec) {
    std::vector<std::size_t> grid;
    if (spec.find(':') != std::string::npos) {
        auto parts = enull::detail::split(spec, ':');
        if (parts.size() != 3)
            throw enull::input_error("grid spec must be start:step:stop");
        long start = std::stol(parts[0]), step = std::stol(parts[1]),
             stop = std::stol(parts[2]);
        if (step <= 0 || start < 0 || stop < start)
            throw enull::input_error("invalid start:step:stop grid '" + spec + "'");
        for (long v = start; v <= stop; v += step)
            grid.push_back(static_cast<std::size_t>(v));
    } else {
        for (const auto& tok : enull::detail::split(spec, ',')) {
            if (tok.empty()) continue;
            long v = std::stol(tok);
            if (v < 0) throw enull::input_error("negative d1 in grid '" + spec + "'");
            grid.push_back(static_cast<std::size_t>(v));
        }
    }
    if (grid.empty()) throw enull::input_error("empty grid spec");
    return grid;
}

std::vector<double> parse_double_list(const std::string& spec) {
    std::vector<double> out;
    for (const auto& tok : enull::detail::split(spec, ','))
        if (!tok.empty())
            out.push_back(enull::detail::parse_double(tok, "list"));
    if (out.empty()) throw enull::input_error("empty list '" + spec + "'");
    return out;
}

int cmd_levels(const Global& g, const std::string& in_path,
               const std::string& out_path) {
    Timer timer;
    auto tsv = enull::read_feature_tsv(in_path);
    auto v = enull::levels_from_table(tsv.table);
    enull::write_levels_csv(out_path, v);
    write_manifest(out_path, "levels", {{"input_format", "tsv"}},
                   {{"table", in_path}}, {{"levels", out_path}}, g.seed,
                   timer.seconds());
    if (!g.quiet)
        std::cout << "levels: " << v.size() << " features, " << v.n_included()
                  << " included\n";
    return 0;
}

int cmd_nullfit(const Global& g, const std::string& in_path,
                const std::string& out_path, double center_fraction) {
    Timer timer;
    auto v = enull::read_levels_csv(in_path);
    auto model = enull::fit_null(v.included_z(), center_fraction);
    enull::write_null_json(out_path, model);
    write_manifest(out_path, "nullfit", {{"center_fraction", center_fraction}},
                   {{"levels", in_path}}, {{"null_model", out_path}}, g.seed,
                   timer.seconds());
    if (!g.quiet)
        std::cout << "nullfit: mu0=" << enull::fmt_double(model.mu0)
                  << " sigma0=" << enull::fmt_double(model.sigma0)
                  << " p0=" << enull::fmt_double(model.p0) << '\n';
    return 0;
}

int cmd_adjust(const Global& g, const std::string& levels_path,
               const std::string& null_path, const std::string& out_path,
               const std::string& table_path, const std::string& report_path) {
    Timer timer;
    auto v = enull::read_levels_csv(levels_path);
    auto null = enull::read_null_json(null_path);
    auto adjusted = enull::adjust_vector(v, null);
    enull::write_levels_csv(out_path, adjusted);

    std::size_t down_crossed = 0, up_crossed = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v.included(i)) continue;
        if (v.level[i] > 0.99 && adjusted.level[i] <= 0.99) ++down_crossed;
        if (1.0 - v.level[i] > 0.99 && 1.0 - adjusted.level[i] <= 0.99) ++up_crossed;
    }

    if (!report_path.empty()) {
        std::vector<double> ratios(v.size(),
                                   std::numeric_limits<double>::quiet_NaN());
        if (!table_path.empty()) {
            auto tsv = enull::read_feature_tsv(table_path);
            std::unordered_map<std::string, double> by_id;
            for (std::size_t i = 0; i < tsv.table.n_features(); ++i) {
                const auto& obs = tsv.table.observations[i];
                if (obs.empty()) continue;
                double mean = 0.0;
                for (double x : obs) mean += x;
                mean /= static_cast<double>(obs.size());
                // geometric mean of the ratios themselves
                by_id[tsv.table.feature_ids[i]] = std::pow(tsv.log_base, mean);
            }
            for (std::size_t i = 0; i < v.size(); ++i) {
                auto it = by_id.find(v.feature_ids[i]);
                if (it != by_id.end()) ratios[i] = it->second;
            }
        }
        auto rep = enull::detail::open_out(report_path);
        rep << "feature_id,estimated_ratio,level_assumed,level_estimated,delta\n";
        for (std::size_t i = 0; i < v.size(); ++i) {
            rep << v.feature_ids[i] << ',' << enull::fmt_double(ratios[i]) << ',';
            if (v.included(i))
                rep << enull::fmt_double(v.level[i]) << ','
                    << enull::fmt_double(adjusted.level[i]) << ','
                    << enull::fmt_double(adjusted.level[i] - v.level[i]);
            else
                rep << ",,";
            rep << '\n';
        }
    }

    nlohmann::json outputs{{"adjusted_levels", out_path}};
    if (!report_path.empty()) outputs["report"] = report_path;
    write_manifest(out_path, "adjust",
                   {{"crossed_99_down", down_crossed},
                    {"crossed_99_up", up_crossed}},
                   {{"levels", levels_path}, {"null_model", null_path}}, outputs,
                   g.seed, timer.seconds());
    if (!g.quiet)
        std::cout << "adjust: " << down_crossed
                  << " features lost >99% confidence of downregulation, "
                  << up_crossed << " of upregulation\n";
    return 0;
}

int cmd_screen(const Global& g, const std::string& levels_path,
               const std::string& null_path, const std::string& out_path,
               double a, double c, std::size_t n_mc,
               const std::string& sweep_spec, const std::string& sweep_path) {
    Timer timer;
    auto v = enull::read_levels_csv(levels_path);
    enull::ConfidenceVector adjusted = v;
    bool have_null = !null_path.empty();
    if (have_null) {
        auto null = enull::read_null_json(null_path);
        adjusted = enull::adjust_vector(v, null);
    }

    enull::LossParams params{a, c, n_mc, g.seed};
    auto report = enull::optimize_decisions(adjusted, params);
    enull::write_decisions_csv(out_path, report);

    if (!sweep_spec.empty()) {
        if (sweep_path.empty())
            throw enull::input_error("--sweep-a requires --sweep-out");
        auto sweep = enull::detail::open_out(sweep_path);
        sweep << "one_plus_a,null,n_decisions\n";
        for (double av : parse_double_list(sweep_spec)) {
            enull::LossParams sp{av, c, n_mc, g.seed};
            auto assumed_rep = enull::optimize_decisions(v, sp);
            sweep << enull::fmt_double(1.0 + av) << ",assumed,"
                  << assumed_rep.n_decisions << '\n';
            if (have_null) {
                auto est_rep = enull::optimize_decisions(adjusted, sp);
                sweep << enull::fmt_double(1.0 + av) << ",estimated,"
                      << est_rep.n_decisions << '\n';
            }
        }
    }

    nlohmann::json inputs{{"levels", levels_path}};
    if (have_null) inputs["null_model"] = null_path;
    nlohmann::json outputs{{"decisions", out_path}};
    if (!sweep_path.empty()) outputs["sweep"] = sweep_path;
    write_manifest(out_path, "screen",
                   {{"a", a},
                    {"c", c},
                    {"n_mc", n_mc},
                    {"n_decisions", report.n_decisions},
                    {"expected_loss", report.expected_loss}},
                   inputs, outputs, g.seed, timer.seconds());
    if (!g.quiet)
        std::cout << "screen: n_decisions=" << report.n_decisions
                  << " expected_loss=" << enull::fmt_double(report.expected_loss)
                  << '\n';
    return 0;
}

int cmd_benefit(const Global& g, const std::string& levels_path,
                const std::string& null_path, const std::string& out_path,
                const std::string& grid_spec, const std::string& mode_name,
                double center_fraction) {
    Timer timer;
    auto v = enull::read_levels_csv(levels_path);
    auto null = enull::read_null_json(null_path);
    auto grid = parse_grid(grid_spec);
    enull::DenullMode mode;
    if (mode_name == "sign-preserving") mode = enull::DenullMode::sign_preserving;
    else if (mode_name == "literal") mode = enull::DenullMode::literal;
    else throw enull::input_error("unknown --mode '" + mode_name + "'");

    auto curve = enull::benefit_curve(v, null, grid, center_fraction, mode);

    auto out = enull::detail::open_out(out_path);
    out << "d1,nonancillarity_bits,relevance_bits,benefit_bits\n";
    for (std::size_t i = 0; i < grid.size(); ++i)
        out << grid[i] << ',' << enull::fmt_double(curve.nonancillarity[i]) << ','
            << enull::fmt_double(curve.relevance) << ','
            << enull::fmt_double(curve.benefit[i]) << '\n';

    write_manifest(out_path, "benefit",
                   {{"d1_grid", grid_spec},
                    {"mode", mode_name},
                    {"center_fraction", center_fraction},
                    {"relevance_bits", curve.relevance}},
                   {{"levels", levels_path}, {"null_model", null_path}},
                   {{"curve", out_path}}, g.seed, timer.seconds());
    if (!g.quiet)
        std::cout << "benefit: relevance=" << enull::fmt_double(curve.relevance)
                  << " bits over " << grid.size() << " grid points\n";
    return 0;
}

int cmd_simulate(const Global& g, const std::string& config_path,
                 const std::string& trials_path, const std::string& summary_path) {
    Timer timer;
    enull::StudyConfig config;
    {
        auto in = enull::detail::open_in(config_path);
        nlohmann::json j;
        try {
            in >> j;
            config = j.get<enull::StudyConfig>();
        } catch (const nlohmann::json::exception& e) {
            throw enull::input_error(config_path + ": invalid study config: " +
                                     e.what());
        }
    }
    auto result = enull::run_study(config, g.threads);

    {
        auto out = enull::detail::open_out(trials_path);
        out << "k,sigma_k,mu0_hat,sigma0_hat,conservatism_unaffected,"
               "conservatism_affected\n";
        for (const auto& t : result.trials) {
            out << t.k << ',' << enull::fmt_double(t.sigma_k) << ',';
            if (t.fit_ok)
                out << enull::fmt_double(t.null_fit.mu0) << ','
                    << enull::fmt_double(t.null_fit.sigma0);
            else
                out << ',';
            out << ','
                << (t.fit_ok || config.null_mode == enull::NullMode::assumed
                        ? enull::fmt_double(t.cons_unaffected(config.null_mode))
                        : "")
                << ','
                << (t.fit_ok || config.null_mode == enull::NullMode::assumed
                        ? enull::fmt_double(t.cons_affected(config.null_mode))
                        : "")
                << '\n';
        }
    }
    {
        auto out = enull::detail::open_out(summary_path);
        out << "null_mode,feature_class,mean_conservatism,stderr,n_trials\n";
        auto row = [&](const char* nm, const char* cls,
                       const enull::CellSummary& s) {
            out << nm << ',' << cls << ',' << enull::fmt_double(s.mean) << ','
                << enull::fmt_double(s.stderr_mean) << ',' << s.n_trials << '\n';
        };
        row("assumed", "unaffected", result.summary_unaffected_assumed);
        row("assumed", "affected", result.summary_affected_assumed);
        row("estimated", "unaffected", result.summary_unaffected_estimated);
        row("estimated", "affected", result.summary_affected_estimated);
    }

    nlohmann::json cfg_json = config;
    write_manifest(summary_path, "simulate",
                   {{"config", cfg_json}, {"failed_trials", result.n_failed}},
                   {{"config_file", config_path}},
                   {{"trials", trials_path}, {"summary", summary_path}}, config.seed,
                   timer.seconds());
    if (!g.quiet)
        std::cout << "simulate: " << config.K << " trials, " << result.n_failed
                  << " fit failures\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Empirical-null estimation, level adjustment, and screening "
                 "for genome-scale confidence levels"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    Global g;
    app.add_option("--seed", g.seed, "RNG seed (fixed default for reproducibility)")
        ->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads")->capture_default_str();
    app.add_flag("--quiet", g.quiet, "suppress progress output");

    // levels
    std::string lv_in, lv_out;
    auto* sc_levels = app.add_subcommand(
        "levels", "one-sided confidence levels from a replicate TSV");
    sc_levels->add_option("--in", lv_in, "feature TSV")->required();
    sc_levels->add_option("--out", lv_out, "levels CSV")->required();

    // nullfit
    std::string nf_in, nf_out;
    double nf_center = 0.5;
    auto* sc_nullfit = app.add_subcommand(
        "nullfit", "truncated-normal MLE of the empirical null");
    sc_nullfit->add_option("--in", nf_in, "levels CSV")->required();
    sc_nullfit->add_option("--out", nf_out, "null model JSON")->required();
    sc_nullfit->add_option("--center-fraction", nf_center,
                           "central quantile span used for the fit")
        ->capture_default_str();

    // adjust
    std::string ad_levels, ad_null, ad_out, ad_table, ad_report;
    auto* sc_adjust =
        app.add_subcommand("adjust", "re-derive levels under a null model");
    sc_adjust->add_option("--levels", ad_levels, "levels CSV")->required();
    sc_adjust->add_option("--null", ad_null, "null model JSON")->required();
    sc_adjust->add_option("--out", ad_out, "adjusted levels CSV")->required();
    sc_adjust->add_option("--table", ad_table,
                          "original feature TSV (for estimated ratios)");
    sc_adjust->add_option("--report", ad_report,
                          "assumed-vs-estimated comparison CSV");

    // screen
    std::string scr_levels, scr_null, scr_out, scr_sweep_spec, scr_sweep_out;
    double scr_a = 0.0, scr_c = 9.0;
    std::size_t scr_nmc = 10000;
    auto* sc_screen = app.add_subcommand(
        "screen", "loss-minimizing sign decisions over the confidence posterior");
    sc_screen->add_option("--levels", scr_levels, "levels CSV")->required();
    sc_screen->add_option("--null", scr_null,
                          "null model JSON applied before optimization");
    sc_screen->add_option("--out", scr_out, "decision CSV")->required();
    sc_screen->add_option("--a", scr_a, "loss acceleration")->capture_default_str();
    sc_screen->add_option("--c", scr_c, "error/non-decision cost ratio")
        ->capture_default_str();
    sc_screen->add_option("--n-mc", scr_nmc, "Monte Carlo draws")
        ->capture_default_str();
    sc_screen->add_option("--sweep-a", scr_sweep_spec,
                          "comma list of a values for a decision-count sweep");
    sc_screen->add_option("--sweep-out", scr_sweep_out, "sweep CSV");

    // benefit
    std::string bn_levels, bn_null, bn_out, bn_grid = "0:100:2000",
                                            bn_mode = "sign-preserving";
    double bn_center = 0.5;
    auto* sc_benefit = app.add_subcommand(
        "benefit", "ancillarity/relevance/benefit curve of the estimated null");
    sc_benefit->add_option("--levels", bn_levels, "levels CSV")->required();
    sc_benefit->add_option("--null", bn_null, "estimated null model JSON")
        ->required();
    sc_benefit->add_option("--out", bn_out, "curve CSV")->required();
    sc_benefit->add_option("--d1-grid", bn_grid, "comma list or start:step:stop")
        ->capture_default_str();
    sc_benefit->add_option("--mode", bn_mode, "sign-preserving|literal")
        ->capture_default_str();
    sc_benefit->add_option("--center-fraction", bn_center,
                           "must match the null fit")->capture_default_str();

    // simulate
    std::string sim_config, sim_trials, sim_summary;
    auto* sc_simulate =
        app.add_subcommand("simulate", "conditional-inference simulation study");
    sc_simulate->add_option("--config", sim_config, "study config JSON")->required();
    sc_simulate->add_option("--out-trials", sim_trials, "per-trial CSV")->required();
    sc_simulate->add_option("--out-summary", sim_summary, "summary CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help / --version
        app.exit(e);
        return 2;
    }

    try {
        if (*sc_levels) return cmd_levels(g, lv_in, lv_out);
        if (*sc_nullfit) return cmd_nullfit(g, nf_in, nf_out, nf_center);
        if (*sc_adjust)
            return cmd_adjust(g, ad_levels, ad_null, ad_out, ad_table, ad_report);
        if (*sc_screen)
            return cmd_screen(g, scr_levels, scr_null, scr_out, scr_a, scr_c,
                              scr_nmc, scr_sweep_spec, scr_sweep_out);
        if (*sc_benefit)
            return cmd_benefit(g, bn_levels, bn_null, bn_out, bn_grid, bn_mode,
                               bn_center);
        if (*sc_simulate) return cmd_simulate(g, sim_config, sim_trials, sim_summary);
    } catch (const enull::input_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const enull::numeric_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 2;
}
