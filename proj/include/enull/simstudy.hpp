#pragma once

// Conditional-inference simulation: K trials of d z-values whose null scale
// is a trial-level precision draw, scored by the conservative error of
// levels computed under an assumed or estimated null against the levels
// conditional on the realized precision.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "enull/error.hpp"
#include "enull/math.hpp"
#include "enull/nullmodel.hpp"
#include "enull/rng.hpp"

namespace enull {

enum class TruthMode { conditional, marginal };
enum class NullMode { estimated, assumed };

struct StudyConfig {
    std::size_t K = 500;
    std::size_t d = 10000;
    std::size_t n_affected = 500;
    std::vector<double> precision_support = {2.0 / 3.0, 1.0, 1.5};
    std::vector<double> precision_probs = {0.3, 0.4, 0.3};
    bool log_uniform_precision = false; // continuous alternative to the
    double log_uniform_lo = -0.6931471805599453;  // discrete support
    double log_uniform_hi = 0.6931471805599453;
    double affected_mean_mult = 2.5;  // affected Z ~ N(mult*s, (sd_mult*s)^2)
    double affected_sd_mult = 1.25;
    double alpha = 0.01;
    double center_fraction = 0.5;
    TruthMode truth_mode = TruthMode::conditional;
    NullMode null_mode = NullMode::estimated;
    std::uint64_t seed = 0;

    void validate() const {
        if (K < 1) throw input_error("study config: K must be >= 1");
        if (n_affected >= d)
            throw input_error("study config: n_affected must be < d");
        if (!(alpha > 0.0 && alpha < 0.5))
            throw input_error("study config: alpha must lie in (0, 0.5)");
        if (truth_mode == TruthMode::marginal && log_uniform_precision)
            throw input_error(
                "study config: marginal truth mode requires a discrete "
                "precision support");
        if (!log_uniform_precision) {
            if (precision_support.empty() ||
                precision_support.size() != precision_probs.size())
                throw input_error("study config: precision support/probs mismatch");
            double s = 0.0;
            for (double p : precision_probs) s += p;
            if (std::fabs(s - 1.0) > 1e-12)
                throw input_error("study config: precision probs must sum to 1");
            for (double v : precision_support)
                if (!(v > 0.0))
                    throw input_error("study config: precision values must be > 0");
        }
    }
};

inline void to_json(nlohmann::json& j, const StudyConfig& c) {
    j = nlohmann::json{
        {"K", c.K},
        {"d", c.d},
        {"n_affected", c.n_affected},
        {"precision_support", c.precision_support},
        {"precision_probs", c.precision_probs},
        {"log_uniform_precision", c.log_uniform_precision},
        {"log_uniform_lo", c.log_uniform_lo},
        {"log_uniform_hi", c.log_uniform_hi},
        {"affected_mean_mult", c.affected_mean_mult},
        {"affected_sd_mult", c.affected_sd_mult},
        {"alpha", c.alpha},
        {"center_fraction", c.center_fraction},
        {"truth_mode", c.truth_mode == TruthMode::conditional ? "conditional"
                                                              : "marginal"},
        {"null_mode",
         c.null_mode == NullMode::estimated ? "estimated" : "assumed"},
        {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, StudyConfig& c) {
    c = StudyConfig{};
    if (j.contains("K")) j.at("K").get_to(c.K);
    if (j.contains("d")) j.at("d").get_to(c.d);
    if (j.contains("n_affected")) j.at("n_affected").get_to(c.n_affected);
    if (j.contains("precision_support"))
        j.at("precision_support").get_to(c.precision_support);
    if (j.contains("precision_probs"))
        j.at("precision_probs").get_to(c.precision_probs);
    if (j.contains("log_uniform_precision"))
        j.at("log_uniform_precision").get_to(c.log_uniform_precision);
    if (j.contains("log_uniform_lo")) j.at("log_uniform_lo").get_to(c.log_uniform_lo);
    if (j.contains("log_uniform_hi")) j.at("log_uniform_hi").get_to(c.log_uniform_hi);
    if (j.contains("affected_mean_mult"))
        j.at("affected_mean_mult").get_to(c.affected_mean_mult);
    if (j.contains("affected_sd_mult"))
        j.at("affected_sd_mult").get_to(c.affected_sd_mult);
    if (j.contains("alpha")) j.at("alpha").get_to(c.alpha);
    if (j.contains("center_fraction"))
        j.at("center_fraction").get_to(c.center_fraction);
    if (j.contains("truth_mode")) {
        std::string t = j.at("truth_mode").get<std::string>();
        if (t == "conditional") c.truth_mode = TruthMode::conditional;
        else if (t == "marginal") c.truth_mode = TruthMode::marginal;
        else throw input_error("study config: unknown truth_mode '" + t + "'");
    }
    if (j.contains("null_mode")) {
        std::string t = j.at("null_mode").get<std::string>();
        if (t == "estimated") c.null_mode = NullMode::estimated;
        else if (t == "assumed") c.null_mode = NullMode::assumed;
        else throw input_error("study config: unknown null_mode '" + t + "'");
    }
    if (j.contains("seed")) j.at("seed").get_to(c.seed);
    c.validate();
}

struct TrialData {
    double sigma_k = 1.0;
    std::vector<double> z;
};

inline TrialData generate_trial(const StudyConfig& config, std::size_t k) {
    config.validate();
    TrialData t;

    double u_sigma = counter_uniform(config.seed, k, 0, 1);
    if (config.log_uniform_precision) {
        t.sigma_k = std::exp(config.log_uniform_lo +
                             u_sigma * (config.log_uniform_hi - config.log_uniform_lo));
    } else {
        double cum = 0.0;
        t.sigma_k = config.precision_support.back();
        for (std::size_t i = 0; i < config.precision_support.size(); ++i) {
            cum += config.precision_probs[i];
            if (u_sigma < cum) {
                t.sigma_k = config.precision_support[i];
                break;
            }
        }
    }

    const std::size_t n_unaffected = config.d - config.n_affected;
    t.z.resize(config.d);
    for (std::size_t i = 0; i < config.d; ++i) {
        double g = normal_quantile(counter_uniform(config.seed, k, i, 0));
        if (i < n_unaffected)
            t.z[i] = t.sigma_k * g;
        else
            t.z[i] = config.affected_mean_mult * t.sigma_k +
                     config.affected_sd_mult * t.sigma_k * g;
    }
    return t;
}

inline std::vector<double> true_conditional_levels(const std::vector<double>& z,
                                                   double sigma_k) {
    if (!(sigma_k > 0.0))
        throw input_error("true_conditional_levels: sigma_k must be > 0");
    std::vector<double> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = normal_cdf(z[i] / sigma_k);
    return out;
}

inline std::vector<double> marginalize_levels(const std::vector<double>& z,
                                              const std::vector<double>& support,
                                              const std::vector<double>& probs) {
    if (support.empty() || support.size() != probs.size())
        throw input_error("marginalize_levels: support/probs mismatch");
    double s = 0.0;
    for (double p : probs) s += p;
    if (std::fabs(s - 1.0) > 1e-12)
        throw input_error("marginalize_levels: weights must sum to 1");
    std::vector<double> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < support.size(); ++j)
            acc += probs[j] * normal_cdf(z[i] / support[j]);
        out[i] = acc;
    }
    return out;
}

namespace detail {

// z-transform of the marginal mixture level, computed from whichever tail
// is smaller so that extreme z-values stay finite.
inline double marginal_z(double z, const std::vector<double>& support,
                         const std::vector<double>& probs) {
    double lower = 0.0, upper = 0.0;
    for (std::size_t j = 0; j < support.size(); ++j) {
        lower += probs[j] * normal_cdf(z / support[j]);
        upper += probs[j] * normal_cdf(-z / support[j]);
    }
    return lower < 0.5 ? normal_quantile(lower) : -normal_quantile(upper);
}

} // namespace detail

// Eq.-style conservative error: +1 when the null-based level is indecisive
// (inside [alpha, 1-alpha]) while the true conditional level is decisive,
// -1 for the reverse, averaged over the subset.
inline double conservatism(const std::vector<double>& levels_f0,
                           const std::vector<double>& levels_true, double alpha,
                           std::size_t begin, std::size_t end) {
    if (levels_f0.size() != levels_true.size())
        throw input_error("conservatism: level vectors differ in length");
    if (begin >= end || end > levels_f0.size())
        throw input_error("conservatism: empty or invalid subset");
    auto in_band = [alpha](double p) { return p >= alpha && p <= 1.0 - alpha; };
    double acc = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        bool f0 = in_band(levels_f0[i]);
        bool tr = in_band(levels_true[i]);
        acc += (f0 && !tr) ? 1.0 : (tr && !f0) ? -1.0 : 0.0;
    }
    return acc / static_cast<double>(end - begin);
}

struct TrialResult {
    std::size_t k = 0;
    double sigma_k = 1.0;
    bool fit_ok = true;
    std::string fit_error;
    NullModel null_fit; // valid iff fit_ok
    // conservative error per null mode and feature class
    double cons_unaffected_assumed = 0.0;
    double cons_affected_assumed = 0.0;
    double cons_unaffected_estimated = 0.0;
    double cons_affected_estimated = 0.0;

    double cons_unaffected(NullMode m) const {
        return m == NullMode::assumed ? cons_unaffected_assumed
                                      : cons_unaffected_estimated;
    }
    double cons_affected(NullMode m) const {
        return m == NullMode::assumed ? cons_affected_assumed
                                      : cons_affected_estimated;
    }
};

struct CellSummary {
    double mean = 0.0;
    double stderr_mean = 0.0;
    std::size_t n_trials = 0;
};

struct StudyResult {
    std::vector<TrialResult> trials;
    std::size_t n_failed = 0;
    // cells indexed [null mode][feature class]
    CellSummary summary_unaffected_assumed;
    CellSummary summary_affected_assumed;
    CellSummary summary_unaffected_estimated;
    CellSummary summary_affected_estimated;
};

namespace detail {

inline TrialResult run_one_trial(const StudyConfig& config, std::size_t k) {
    TrialResult r;
    r.k = k;
    TrialData data = generate_trial(config, k);
    r.sigma_k = data.sigma_k;

    const std::size_t n_unaff = config.d - config.n_affected;
    std::vector<double> levels_true = true_conditional_levels(data.z, data.sigma_k);

    // observed levels and their z-transform under the chosen truth mode
    std::vector<double> observed, observed_z;
    if (config.truth_mode == TruthMode::conditional) {
        observed.resize(config.d);
        for (std::size_t i = 0; i < config.d; ++i)
            observed[i] = normal_cdf(data.z[i]);
        observed_z = data.z;
    } else {
        observed = marginalize_levels(data.z, config.precision_support,
                                      config.precision_probs);
        observed_z.resize(config.d);
        for (std::size_t i = 0; i < config.d; ++i)
            observed_z[i] = marginal_z(data.z[i], config.precision_support,
                                       config.precision_probs);
    }

    r.cons_unaffected_assumed =
        conservatism(observed, levels_true, config.alpha, 0, n_unaff);
    r.cons_affected_assumed =
        conservatism(observed, levels_true, config.alpha, n_unaff, config.d);

    try {
        r.null_fit = fit_null(observed_z, config.center_fraction);
        std::vector<double> adjusted(config.d);
        for (std::size_t i = 0; i < config.d; ++i)
            adjusted[i] =
                normal_cdf((observed_z[i] - r.null_fit.mu0) / r.null_fit.sigma0);
        r.cons_unaffected_estimated =
            conservatism(adjusted, levels_true, config.alpha, 0, n_unaff);
        r.cons_affected_estimated =
            conservatism(adjusted, levels_true, config.alpha, n_unaff, config.d);
    } catch (const std::exception& e) {
        r.fit_ok = false;
        r.fit_error = e.what();
    }
    return r;
}

inline CellSummary summarize(const std::vector<TrialResult>& trials,
                             double (*pick)(const TrialResult&)) {
    CellSummary s;
    double sum = 0.0;
    for (const auto& t : trials) {
        if (!t.fit_ok) continue;
        sum += pick(t);
        ++s.n_trials;
    }
    if (s.n_trials == 0) return s;
    s.mean = sum / static_cast<double>(s.n_trials);
    double ss = 0.0;
    for (const auto& t : trials) {
        if (!t.fit_ok) continue;
        double dlt = pick(t) - s.mean;
        ss += dlt * dlt;
    }
    if (s.n_trials > 1)
        s.stderr_mean = std::sqrt(ss / static_cast<double>(s.n_trials - 1) /
                                  static_cast<double>(s.n_trials));
    return s;
}

} // namespace detail

inline StudyResult run_study(const StudyConfig& config, unsigned n_threads = 1) {
    config.validate();
    StudyResult result;
    result.trials.resize(config.K);

    if (n_threads <= 1) {
        for (std::size_t k = 0; k < config.K; ++k)
            result.trials[k] = detail::run_one_trial(config, k);
    } else {
        std::vector<std::thread> pool;
        std::size_t per = (config.K + n_threads - 1) / n_threads;
        for (unsigned t = 0; t < n_threads; ++t) {
            std::size_t lo = t * per, hi = std::min(config.K, lo + per);
            if (lo >= hi) break;
            pool.emplace_back([&, lo, hi] {
                for (std::size_t k = lo; k < hi; ++k)
                    result.trials[k] = detail::run_one_trial(config, k);
            });
        }
        for (auto& th : pool) th.join();
    }

    for (const auto& t : result.trials)
        if (!t.fit_ok) ++result.n_failed;

    result.summary_unaffected_assumed = detail::summarize(
        result.trials, [](const TrialResult& t) { return t.cons_unaffected_assumed; });
    result.summary_affected_assumed = detail::summarize(
        result.trials, [](const TrialResult& t) { return t.cons_affected_assumed; });
    result.summary_unaffected_estimated = detail::summarize(
        result.trials,
        [](const TrialResult& t) { return t.cons_unaffected_estimated; });
    result.summary_affected_estimated = detail::summarize(
        result.trials,
        [](const TrialResult& t) { return t.cons_affected_estimated; });
    return result;
}

} // namespace enull
