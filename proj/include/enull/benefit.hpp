#pragma once

// Scores the value of conditioning on the estimated null: Renyi order-1/2
// divergence between normals, the denulled refit, and the resulting
// ancillarity/relevance/benefit curve.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "enull/error.hpp"
#include "enull/levels.hpp"
#include "enull/nullmodel.hpp"

namespace enull {

// I_{1/2}(F||G) in bits for F = N(muF, sF^2), G = N(muG, sG^2):
// -2*log2 of the Bhattacharyya coefficient.
inline double renyi_half(const NullModel& f, const NullModel& g) {
    if (!(f.sigma0 > 0.0) || !(g.sigma0 > 0.0))
        throw input_error("renyi_half: sigma must be positive");
    const double vf = f.sigma0 * f.sigma0, vg = g.sigma0 * g.sigma0;
    const double dmu = f.mu0 - g.mu0;
    const double bd = dmu * dmu / (4.0 * (vf + vg)) +
                      0.5 * std::log((vf + vg) / (2.0 * f.sigma0 * g.sigma0));
    return 2.0 / std::log(2.0) * bd;
}

enum class DenullMode { sign_preserving, literal };

// Replaces the d1 included levels farthest from 1/2 with expected null
// order statistics (r - 1/2)/d, r = ascending rank of |level - 1/2|.
// Sign-preserving mode mirrors the replacement across 1/2 for levels
// below it so the evidence direction survives.
inline ConfidenceVector denull(const ConfidenceVector& levels, std::size_t d1,
                               DenullMode mode = DenullMode::sign_preserving) {
    std::vector<std::size_t> inc;
    for (std::size_t i = 0; i < levels.size(); ++i)
        if (levels.included(i)) inc.push_back(i);
    const std::size_t d = inc.size();
    if (d1 > d)
        throw input_error("denull: d1 exceeds the included feature count");

    ConfidenceVector out = levels;
    if (d1 == 0) return out;

    // ascending by distance from 1/2, ties by feature index
    std::vector<std::size_t> by_dist(inc);
    std::sort(by_dist.begin(), by_dist.end(), [&](std::size_t u, std::size_t w) {
        double du = std::fabs(levels.level[u] - 0.5);
        double dw = std::fabs(levels.level[w] - 0.5);
        if (du != dw) return du < dw;
        return u < w;
    });

    for (std::size_t pos = d - d1; pos < d; ++pos) {
        const std::size_t idx = by_dist[pos];
        const double rank = static_cast<double>(pos + 1);
        double repl = (rank - 0.5) / static_cast<double>(d);
        if (mode == DenullMode::sign_preserving && levels.level[idx] < 0.5)
            repl = 1.0 - repl;
        out.level[idx] = repl;
        out.z[idx] = normal_quantile(repl);
    }
    return out;
}

struct BenefitCurve {
    std::vector<std::size_t> d1_grid;
    std::vector<double> nonancillarity; // bits
    double relevance = 0.0;             // bits
    std::vector<double> benefit;        // relevance - nonancillarity
};

inline BenefitCurve benefit_curve(const ConfidenceVector& levels,
                                  const NullModel& null_est,
                                  const std::vector<std::size_t>& d1_grid,
                                  double center_fraction = 0.5,
                                  DenullMode mode = DenullMode::sign_preserving) {
    if (null_est.provenance != Provenance::estimated)
        throw input_error("benefit_curve: null model must be estimated");

    BenefitCurve curve;
    curve.d1_grid = d1_grid;
    curve.relevance = renyi_half(null_est, NullModel::assumed_null());
    curve.nonancillarity.reserve(d1_grid.size());
    curve.benefit.reserve(d1_grid.size());

    for (std::size_t d1 : d1_grid) {
        double na;
        if (d1 == 0) {
            na = 0.0; // identical refit inputs by construction
        } else {
            ConfidenceVector replaced = denull(levels, d1, mode);
            NullModel refit;
            try {
                refit = fit_null(replaced.included_z(), center_fraction);
            } catch (const std::exception& e) {
                throw numeric_error("benefit_curve: refit failed at d1=" +
                                    std::to_string(d1) + ": " + e.what());
            }
            na = renyi_half(refit, null_est);
        }
        curve.nonancillarity.push_back(na);
        curve.benefit.push_back(curve.relevance - na);
    }
    return curve;
}

} // namespace enull
