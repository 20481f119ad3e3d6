#pragma once

// Empirical null on the z-scale: truncated-normal maximum likelihood over
// the central chunk of the z-values, plus the level adjustment it induces.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "enull/error.hpp"
#include "enull/levels.hpp"
#include "enull/math.hpp"

namespace enull {

enum class Provenance { assumed, estimated };

struct NullModel {
    double mu0 = 0.0;
    double sigma0 = 1.0;
    double p0 = 1.0;
    Provenance provenance = Provenance::assumed;
    // present iff estimated
    double interval_lo = 0.0;
    double interval_hi = 0.0;
    std::size_t n_central = 0;

    static NullModel assumed_null() { return NullModel{}; }
};

struct convergence_error : numeric_error {
    convergence_error(const std::string& what, NullModel best_iterate)
        : numeric_error(what), best(best_iterate) {}
    NullModel best;
};

inline void to_json(nlohmann::json& j, const NullModel& m) {
    j = nlohmann::json{{"mu0", m.mu0},
                       {"sigma0", m.sigma0},
                       {"p0", m.p0},
                       {"provenance", m.provenance == Provenance::assumed
                                          ? "assumed" : "estimated"}};
    if (m.provenance == Provenance::estimated) {
        j["central_interval"] = {m.interval_lo, m.interval_hi};
        j["n_central"] = m.n_central;
    }
}

inline void from_json(const nlohmann::json& j, NullModel& m) {
    j.at("mu0").get_to(m.mu0);
    j.at("sigma0").get_to(m.sigma0);
    j.at("p0").get_to(m.p0);
    const std::string prov = j.at("provenance").get<std::string>();
    if (prov == "assumed") {
        m.provenance = Provenance::assumed;
    } else if (prov == "estimated") {
        m.provenance = Provenance::estimated;
        auto iv = j.at("central_interval");
        m.interval_lo = iv.at(0).get<double>();
        m.interval_hi = iv.at(1).get<double>();
        m.n_central = j.at("n_central").get<std::size_t>();
    } else {
        throw input_error("null model: unknown provenance '" + prov + "'");
    }
    if (!(m.sigma0 >= 1e-3))
        throw input_error("null model: sigma0 below 1e-3");
}

namespace detail {

// Linear interpolation of order statistics on sorted data.
inline double quantile_sorted(const std::vector<double>& s, double p) {
    const std::size_t n = s.size();
    double h = p * static_cast<double>(n - 1);
    std::size_t lo = static_cast<std::size_t>(std::floor(h));
    if (lo >= n - 1) return s.back();
    double frac = h - static_cast<double>(lo);
    return s[lo] + frac * (s[lo + 1] - s[lo]);
}

// Sufficient statistics of the central z-values make the truncated-normal
// log-likelihood O(1) per evaluation.
struct TruncStats {
    double a, b;
    double n0;
    double sum, sumsq;

    double loglik(double mu, double sigma) const {
        double h = normal_cdf((b - mu) / sigma) - normal_cdf((a - mu) / sigma);
        if (h <= 0.0) return -std::numeric_limits<double>::infinity();
        double quad = sumsq - 2.0 * mu * sum + n0 * mu * mu;
        return -quad / (2.0 * sigma * sigma) - n0 * std::log(sigma) -
               n0 * 0.9189385332046727418 - n0 * std::log(h);
    }
};

// Nelder-Mead on (mu, sigma), clamped to the search box.
template <typename F>
inline std::array<double, 3> nelder_mead_2d(F&& f, double mu0, double s0,
                                            double mu_lo, double mu_hi,
                                            double s_lo, double s_hi,
                                            int max_iter, double ftol) {
    auto clamp = [&](std::array<double, 2>& x) {
        x[0] = std::clamp(x[0], mu_lo, mu_hi);
        x[1] = std::clamp(x[1], s_lo, s_hi);
    };
    std::array<std::array<double, 2>, 3> pt = {{{mu0, s0},
                                                {mu0 + 0.05 * (s0 + 0.1), s0},
                                                {mu0, s0 * 1.05 + 1e-4}}};
    std::array<double, 3> fv;
    for (int i = 0; i < 3; ++i) {
        clamp(pt[i]);
        fv[i] = f(pt[i][0], pt[i][1]);
    }
    for (int it = 0; it < max_iter; ++it) {
        // order: pt[0] best (lowest f = negative loglik)
        std::array<int, 3> idx = {0, 1, 2};
        std::sort(idx.begin(), idx.end(), [&](int u, int w) { return fv[u] < fv[w]; });
        std::array<std::array<double, 2>, 3> p2 = {pt[idx[0]], pt[idx[1]], pt[idx[2]]};
        std::array<double, 3> f2 = {fv[idx[0]], fv[idx[1]], fv[idx[2]]};
        pt = p2;
        fv = f2;
        if (std::fabs(fv[2] - fv[0]) < ftol * (std::fabs(fv[0]) + ftol)) break;

        std::array<double, 2> cen = {(pt[0][0] + pt[1][0]) / 2.0,
                                     (pt[0][1] + pt[1][1]) / 2.0};
        auto mix = [&](double t) {
            std::array<double, 2> x = {cen[0] + t * (cen[0] - pt[2][0]),
                                       cen[1] + t * (cen[1] - pt[2][1])};
            clamp(x);
            return x;
        };
        auto xr = mix(1.0);
        double fr = f(xr[0], xr[1]);
        if (fr < fv[0]) {
            auto xe = mix(2.0);
            double fe = f(xe[0], xe[1]);
            if (fe < fr) { pt[2] = xe; fv[2] = fe; }
            else { pt[2] = xr; fv[2] = fr; }
        } else if (fr < fv[1]) {
            pt[2] = xr; fv[2] = fr;
        } else {
            auto xc = mix(0.5);
            double fc = f(xc[0], xc[1]);
            if (fc < fv[2]) { pt[2] = xc; fv[2] = fc; }
            else {
                for (int i = 1; i < 3; ++i) {
                    pt[i] = {pt[0][0] + 0.5 * (pt[i][0] - pt[0][0]),
                             pt[0][1] + 0.5 * (pt[i][1] - pt[0][1])};
                    clamp(pt[i]);
                    fv[i] = f(pt[i][0], pt[i][1]);
                }
            }
        }
    }
    int best = 0;
    for (int i = 1; i < 3; ++i)
        if (fv[i] < fv[best]) best = i;
    return {pt[best][0], pt[best][1], fv[best]};
}

} // namespace detail

// Truncated-normal log-likelihood of (mu, sigma) given the central interval
// [a,b]; exposed so tests can check the optimum independently.
inline double truncated_normal_loglik(const std::vector<double>& z, double a,
                                      double b, double mu, double sigma) {
    detail::TruncStats st{a, b, 0.0, 0.0, 0.0};
    for (double v : z) {
        if (v >= a && v <= b) {
            st.n0 += 1.0;
            st.sum += v;
            st.sumsq += v * v;
        }
    }
    return st.loglik(mu, sigma);
}

inline NullModel fit_null(const std::vector<double>& z,
                          double center_fraction = 0.5) {
    if (!(center_fraction > 0.0 && center_fraction <= 1.0))
        throw input_error("fit_null: center_fraction must lie in (0,1]");
    const std::size_t d = z.size();
    if (d < 100)
        throw numeric_error("fit_null: insufficient data (" + std::to_string(d) +
                            " z-values, need >= 100)");

    std::vector<double> sorted(z);
    std::sort(sorted.begin(), sorted.end());
    const double a = detail::quantile_sorted(sorted, (1.0 - center_fraction) / 2.0);
    const double b = detail::quantile_sorted(sorted, (1.0 + center_fraction) / 2.0);

    detail::TruncStats st{a, b, 0.0, 0.0, 0.0};
    std::vector<double> central;
    for (double v : sorted) {
        if (v >= a && v <= b) {
            st.n0 += 1.0;
            st.sum += v;
            st.sumsq += v * v;
            central.push_back(v);
        }
    }
    if (st.n0 < 10.0)
        throw numeric_error("fit_null: degenerate central interval (" +
                            std::to_string(static_cast<std::size_t>(st.n0)) +
                            " z-values in [a,b], need >= 10)");

    double mean_all = 0.0;
    for (double v : z) mean_all += v;
    mean_all /= static_cast<double>(d);
    double var_all = 0.0;
    for (double v : z) var_all += (v - mean_all) * (v - mean_all);
    var_all /= static_cast<double>(d > 1 ? d - 1 : 1);

    const double sigma_lo = 1e-3;
    const double sigma_hi = std::max(10.0 * std::sqrt(var_all), 2.0 * sigma_lo);

    auto neg = [&](double mu, double sigma) { return -st.loglik(mu, sigma); };

    // Coarse grid over the box, then simplex polish from the two best starts.
    double best_mu = 0.0, best_sig = 1.0, best_f = std::numeric_limits<double>::infinity();
    const int gm = 48, gs = 48;
    for (int i = 0; i < gm; ++i) {
        double mu = a + (b - a) * (i + 0.5) / gm;
        for (int j = 0; j < gs; ++j) {
            double sig = sigma_lo * std::pow(sigma_hi / sigma_lo, (j + 0.5) / gs);
            double f = neg(mu, sig);
            if (f < best_f) { best_f = f; best_mu = mu; best_sig = sig; }
        }
    }

    const double med = detail::quantile_sorted(central, 0.5);
    const double iqr = detail::quantile_sorted(central, 0.75) -
                       detail::quantile_sorted(central, 0.25);
    const double sig_start = std::clamp(iqr / 1.349, sigma_lo, sigma_hi);

    std::array<std::array<double, 2>, 2> starts = {{{best_mu, best_sig},
                                                    {std::clamp(med, a, b), sig_start}}};
    std::array<double, 3> best = {best_mu, best_sig, best_f};
    for (const auto& s : starts) {
        auto r = detail::nelder_mead_2d(neg, s[0], s[1], a, b, sigma_lo, sigma_hi,
                                        2000, 1e-14);
        // re-polish with a shrunk simplex around the candidate
        r = detail::nelder_mead_2d(neg, r[0], r[1], a, b, sigma_lo, sigma_hi,
                                   2000, 1e-15);
        if (r[2] < best[2]) best = r;
    }
    if (!std::isfinite(best[2])) {
        NullModel bad;
        bad.mu0 = best[0];
        bad.sigma0 = best[1];
        bad.provenance = Provenance::estimated;
        throw convergence_error("fit_null: optimizer failed to converge", bad);
    }

    NullModel m;
    m.mu0 = best[0];
    m.sigma0 = std::max(best[1], sigma_lo);
    double h = normal_cdf((b - m.mu0) / m.sigma0) - normal_cdf((a - m.mu0) / m.sigma0);
    m.p0 = std::min(1.0, (st.n0 / static_cast<double>(d)) / h);
    m.provenance = Provenance::estimated;
    m.interval_lo = a;
    m.interval_hi = b;
    m.n_central = static_cast<std::size_t>(st.n0);
    return m;
}

// Re-derives the level with respect to the given null: Phi((z - mu0)/sigma0).
inline double adjust_level(double level, const NullModel& null) {
    if (!(level > 0.0 && level < 1.0))
        throw input_error("adjust_level: level must lie strictly inside (0,1)");
    if (null.provenance == Provenance::assumed) return level;
    return normal_cdf((normal_quantile(level) - null.mu0) / null.sigma0);
}

inline ConfidenceVector adjust_vector(const ConfidenceVector& v, const NullModel& null) {
    ConfidenceVector out = v;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v.included(i)) continue;
        if (null.provenance == Provenance::assumed) continue;
        out.z[i] = (v.z[i] - null.mu0) / null.sigma0;
        out.level[i] = normal_cdf(out.z[i]);
    }
    return out;
}

} // namespace enull
