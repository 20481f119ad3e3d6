#pragma once

// Sign screening under the non-additive loss c*M^(1+a) + m, minimized over
// the confidence posterior. M (the miscall count) is Poisson-binomial over
// the per-feature error probabilities; small decided sets are enumerated
// exactly, larger ones use seeded Monte Carlo with common random numbers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "enull/error.hpp"
#include "enull/levels.hpp"
#include "enull/rng.hpp"

namespace enull {

struct LossParams {
    double a = 0.0;
    double c = 9.0;
    std::size_t n_mc = 10000;
    std::uint64_t seed = 0;

    void validate() const {
        if (a < 0.0) throw input_error("loss params: a must be >= 0");
        if (!(c > 0.0)) throw input_error("loss params: c must be > 0");
        if (n_mc < 1) throw input_error("loss params: n_mc must be >= 1");
    }
};

enum class Action { NoCall, Negative, Positive };

inline const char* to_string(Action a) {
    switch (a) {
        case Action::NoCall: return "NoCall";
        case Action::Negative: return "Negative";
        case Action::Positive: return "Positive";
    }
    return "?";
}

struct DecisionReport {
    std::vector<std::string> feature_ids;
    std::vector<Action> action;
    std::vector<double> error_prob; // min(p, 1-p); NaN for excluded features
    std::size_t n_decisions = 0;
    double expected_loss = 0.0;
    LossParams loss_params;
};

// Largest decided set handled by exact Poisson-binomial enumeration.
inline constexpr std::size_t kExactPoissonBinomialLimit = 20;

namespace detail {

// pmf of the sum of independent Bernoulli(e_i), built by the standard
// convolution recurrence.
inline std::vector<double> poisson_binomial_pmf(const std::vector<double>& e) {
    std::vector<double> pmf(e.size() + 1, 0.0);
    pmf[0] = 1.0;
    std::size_t n = 0;
    for (double p : e) {
        ++n;
        for (std::size_t k = n; k > 0; --k)
            pmf[k] = pmf[k] * (1.0 - p) + pmf[k - 1] * p;
        pmf[0] *= (1.0 - p);
    }
    return pmf;
}

inline double exact_moment(const std::vector<double>& e, double a) {
    auto pmf = poisson_binomial_pmf(e);
    double s = 0.0;
    for (std::size_t k = 1; k < pmf.size(); ++k)
        s += pmf[k] * std::pow(static_cast<double>(k), 1.0 + a);
    return s;
}

} // namespace detail

inline double expected_loss(const std::vector<double>& error_probs_decided,
                            std::size_t m, const LossParams& params) {
    params.validate();
    for (double e : error_probs_decided)
        if (!(e >= 0.0 && e <= 1.0))
            throw input_error("expected_loss: error probability outside [0,1]");

    const double md = static_cast<double>(m);
    if (error_probs_decided.empty()) return md;
    if (params.a == 0.0) {
        double s = std::accumulate(error_probs_decided.begin(),
                                   error_probs_decided.end(), 0.0);
        return params.c * s + md;
    }
    if (error_probs_decided.size() <= kExactPoissonBinomialLimit)
        return params.c * detail::exact_moment(error_probs_decided, params.a) + md;

    const std::size_t n = error_probs_decided.size();
    double acc = 0.0;
    for (std::size_t j = 0; j < params.n_mc; ++j) {
        std::size_t miscalls = 0;
        for (std::size_t i = 0; i < n; ++i)
            miscalls += counter_uniform(params.seed, j, i) < error_probs_decided[i];
        acc += std::pow(static_cast<double>(miscalls), 1.0 + params.a);
    }
    return params.c * acc / static_cast<double>(params.n_mc) + md;
}

// Minimizes expected loss over prefixes of the error-sorted feature order.
// Candidate prefixes share one uniform draw matrix so the argmin over the
// prefix size is deterministic for a given seed.
inline DecisionReport optimize_decisions(const ConfidenceVector& levels,
                                         const LossParams& params) {
    params.validate();
    const std::size_t d = levels.size();

    DecisionReport rep;
    rep.feature_ids = levels.feature_ids;
    rep.action.assign(d, Action::NoCall);
    rep.error_prob.assign(d, std::numeric_limits<double>::quiet_NaN());
    rep.loss_params = params;

    // decidable = included and p != 0.5 (an exact tie carries no direction)
    std::vector<std::size_t> order;
    order.reserve(d);
    for (std::size_t i = 0; i < d; ++i) {
        if (!levels.included(i)) continue;
        double p = levels.level[i];
        rep.error_prob[i] = std::min(p, 1.0 - p);
        if (p != 0.5) order.push_back(i);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t u, std::size_t w) {
        if (rep.error_prob[u] != rep.error_prob[w])
            return rep.error_prob[u] < rep.error_prob[w];
        return u < w;
    });

    const std::size_t nd = order.size();
    std::vector<double> sorted_e(nd);
    for (std::size_t i = 0; i < nd; ++i) sorted_e[i] = rep.error_prob[order[i]];

    // loss[n] for every prefix size n in one pass
    std::vector<double> loss(nd + 1);
    const double base_m = static_cast<double>(d);
    if (params.a == 0.0) {
        double s = 0.0;
        loss[0] = base_m;
        for (std::size_t n = 1; n <= nd; ++n) {
            s += sorted_e[n - 1];
            loss[n] = params.c * s + (base_m - static_cast<double>(n));
        }
    } else {
        const std::size_t n_exact = std::min(nd, kExactPoissonBinomialLimit);
        std::vector<double> pmf(n_exact + 1, 0.0);
        pmf[0] = 1.0;
        loss[0] = base_m;
        for (std::size_t n = 1; n <= n_exact; ++n) {
            double p = sorted_e[n - 1];
            for (std::size_t k = n; k > 0; --k)
                pmf[k] = pmf[k] * (1.0 - p) + pmf[k - 1] * p;
            pmf[0] *= (1.0 - p);
            double moment = 0.0;
            for (std::size_t k = 1; k <= n; ++k)
                moment += pmf[k] * std::pow(static_cast<double>(k), 1.0 + params.a);
            loss[n] = params.c * moment + (base_m - static_cast<double>(n));
        }
        if (nd > n_exact) {
            std::vector<double> pow_table(nd + 1);
            for (std::size_t k = 0; k <= nd; ++k)
                pow_table[k] = std::pow(static_cast<double>(k), 1.0 + params.a);
            std::vector<double> moment_sum(nd + 1, 0.0);
            for (std::size_t j = 0; j < params.n_mc; ++j) {
                std::size_t miscalls = 0;
                for (std::size_t n = 1; n <= nd; ++n) {
                    miscalls +=
                        counter_uniform(params.seed, j, order[n - 1]) < sorted_e[n - 1];
                    if (n > n_exact) moment_sum[n] += pow_table[miscalls];
                }
            }
            for (std::size_t n = n_exact + 1; n <= nd; ++n)
                loss[n] = params.c * moment_sum[n] / static_cast<double>(params.n_mc) +
                          (base_m - static_cast<double>(n));
        }
    }

    // exact ties resolved toward fewer decisions
    std::size_t best_n = 0;
    for (std::size_t n = 1; n <= nd; ++n)
        if (loss[n] < loss[best_n]) best_n = n;

    for (std::size_t i = 0; i < best_n; ++i) {
        std::size_t idx = order[i];
        rep.action[idx] =
            levels.level[idx] > 0.5 ? Action::Negative : Action::Positive;
    }
    rep.n_decisions = best_n;
    rep.expected_loss = loss[best_n];
    return rep;
}

// Exhaustive 3^d search with exact expectations; test oracle only.
inline DecisionReport brute_force_decisions(const ConfidenceVector& levels,
                                            const LossParams& params) {
    params.validate();
    const std::size_t d = levels.size();
    if (d > 12)
        throw input_error("brute_force_decisions: d > 12");

    DecisionReport best;
    best.feature_ids = levels.feature_ids;
    best.action.assign(d, Action::NoCall);
    best.error_prob.assign(d, std::numeric_limits<double>::quiet_NaN());
    best.loss_params = params;
    best.expected_loss = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < d; ++i)
        if (levels.included(i))
            best.error_prob[i] =
                std::min(levels.level[i], 1.0 - levels.level[i]);

    std::size_t total = 1;
    for (std::size_t i = 0; i < d; ++i) total *= 3;

    std::vector<Action> act(d);
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t rem = code;
        bool feasible = true;
        std::vector<double> errs;
        std::size_t m = 0;
        for (std::size_t i = 0; i < d; ++i) {
            Action a = static_cast<Action>(rem % 3);
            rem /= 3;
            act[i] = a;
            if (a == Action::NoCall) {
                ++m;
                continue;
            }
            if (!levels.included(i) || levels.level[i] == 0.5) {
                feasible = false;
                break;
            }
            // error prob of the call actually made
            double p = levels.level[i]; // confidence of theta < 0
            errs.push_back(a == Action::Negative ? 1.0 - p : p);
        }
        if (!feasible) continue;
        double loss = static_cast<double>(m);
        if (!errs.empty()) {
            if (params.a == 0.0)
                loss += params.c * std::accumulate(errs.begin(), errs.end(), 0.0);
            else
                loss += params.c * detail::exact_moment(errs, params.a);
        }
        if (loss < best.expected_loss) {
            best.expected_loss = loss;
            best.action = act;
            best.n_decisions = d - m;
        }
    }
    return best;
}

} // namespace enull
