#pragma once

// Per-feature one-sided confidence levels from replicate measurements.
// The level of feature i is the upper-tail p-value of the one-sample
// t test, read as the confidence that the mean log-ratio is negative.

#include <cmath>
#include <cstddef>
#include <string>
#include <unordered_set>
#include <vector>

#include "enull/error.hpp"
#include "enull/math.hpp"

namespace enull {

struct FeatureTable {
    std::vector<std::string> feature_ids;
    std::vector<std::vector<double>> observations; // ragged; missing = absent

    std::size_t n_features() const { return feature_ids.size(); }

    void validate() const {
        if (feature_ids.empty())
            throw input_error("feature table is empty");
        if (feature_ids.size() != observations.size())
            throw input_error("feature table: id/observation row count mismatch");
        std::unordered_set<std::string> seen;
        for (std::size_t i = 0; i < feature_ids.size(); ++i) {
            if (feature_ids[i].empty())
                throw input_error("feature table: empty feature id at row " +
                                  std::to_string(i + 1));
            if (!seen.insert(feature_ids[i]).second)
                throw input_error("feature table: duplicate feature id '" +
                                  feature_ids[i] + "'");
            for (double v : observations[i])
                if (!std::isfinite(v))
                    throw input_error("feature table: non-finite observation for '" +
                                      feature_ids[i] + "'");
        }
    }
};

enum class Exclusion { none, too_few_observations, nonfinite_z };

inline const char* to_string(Exclusion e) {
    switch (e) {
        case Exclusion::none: return "none";
        case Exclusion::too_few_observations: return "too_few_observations";
        case Exclusion::nonfinite_z: return "nonfinite_z";
    }
    return "?";
}

struct ConfidenceVector {
    std::vector<std::string> feature_ids;
    std::vector<std::size_t> n_obs;
    std::vector<double> level;        // valid iff included
    std::vector<double> z;            // Phi^{-1}(level), valid iff included
    std::vector<Exclusion> exclusion;

    std::size_t size() const { return feature_ids.size(); }
    bool included(std::size_t i) const { return exclusion[i] == Exclusion::none; }

    std::size_t n_included() const {
        std::size_t n = 0;
        for (auto e : exclusion) n += (e == Exclusion::none);
        return n;
    }

    std::vector<double> included_z() const {
        std::vector<double> out;
        out.reserve(size());
        for (std::size_t i = 0; i < size(); ++i)
            if (included(i)) out.push_back(z[i]);
        return out;
    }
};

inline ConfidenceVector levels_from_table(const FeatureTable& table) {
    table.validate();
    ConfidenceVector v;
    const std::size_t d = table.n_features();
    v.feature_ids = table.feature_ids;
    v.n_obs.resize(d);
    v.level.assign(d, std::numeric_limits<double>::quiet_NaN());
    v.z.assign(d, std::numeric_limits<double>::quiet_NaN());
    v.exclusion.assign(d, Exclusion::none);

    for (std::size_t i = 0; i < d; ++i) {
        const auto& obs = table.observations[i];
        const std::size_t n = obs.size();
        v.n_obs[i] = n;
        if (n < 2) {
            v.exclusion[i] = Exclusion::too_few_observations;
            continue;
        }
        double mean = 0.0;
        for (double x : obs) mean += x;
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (double x : obs) ss += (x - mean) * (x - mean);
        double sd = std::sqrt(ss / static_cast<double>(n - 1));

        double level;
        if (sd == 0.0) {
            if (mean != 0.0) {
                v.exclusion[i] = Exclusion::nonfinite_z;
                continue;
            }
            level = 0.5;
        } else {
            double t = mean / (sd / std::sqrt(static_cast<double>(n)));
            level = 1.0 - student_t_cdf(t, static_cast<double>(n - 1));
        }
        if (!(level > 0.0 && level < 1.0)) {
            v.exclusion[i] = Exclusion::nonfinite_z;
            continue;
        }
        v.level[i] = level;
        v.z[i] = normal_quantile(level);
    }
    return v;
}

// 1 - level per feature: confidence of the opposite direction.
inline ConfidenceVector complement(const ConfidenceVector& v) {
    ConfidenceVector out = v;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v.included(i)) continue;
        out.level[i] = 1.0 - v.level[i];
        out.z[i] = -v.z[i];
    }
    return out;
}

} // namespace enull
