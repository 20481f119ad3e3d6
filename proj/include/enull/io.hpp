#pragma once

// File formats: feature TSV in, CSV tables out, null-model / study-config
// JSON, and the per-run manifest. Numeric CSV fields use 17 significant
// digits so round trips are bit-stable.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "enull/error.hpp"
#include "enull/levels.hpp"
#include "enull/nullmodel.hpp"
#include "enull/screening.hpp"

namespace enull {

inline std::string fmt_double(double v) {
    if (std::isnan(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_double(const std::string& s, const std::string& context) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw input_error(context + ": cannot parse number '" + s + "'");
    }
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open input file '" + path + "'");
    return in;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot open output file '" + path + "'");
    return out;
}

} // namespace detail

// TSV: one row per feature, id then observations; blank cells are missing.
// An optional leading "# log_base=natural|log2" line declares the log scale
// of the ratios (natural when absent).
struct TsvTable {
    FeatureTable table;
    double log_base = 2.718281828459045235; // for ratio back-transform
};

inline TsvTable read_feature_tsv(const std::string& path) {
    auto in = detail::open_in(path);
    TsvTable out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.find("log_base=log2") != std::string::npos)
                out.log_base = 2.0;
            continue;
        }
        auto cells = detail::split(line, '\t');
        if (cells[0].empty())
            throw input_error(path + ":" + std::to_string(lineno) +
                              ": missing feature id");
        std::vector<double> obs;
        for (std::size_t i = 1; i < cells.size(); ++i) {
            if (cells[i].empty()) continue; // missing value
            obs.push_back(detail::parse_double(
                cells[i], path + ":" + std::to_string(lineno)));
        }
        out.table.feature_ids.push_back(cells[0]);
        out.table.observations.push_back(std::move(obs));
    }
    if (out.table.feature_ids.empty())
        throw input_error(path + ": no feature rows");
    return out;
}

inline void write_levels_csv(const std::string& path, const ConfidenceVector& v) {
    auto out = detail::open_out(path);
    out << "feature_id,n_obs,level,z,exclusion_reason\n";
    for (std::size_t i = 0; i < v.size(); ++i) {
        out << v.feature_ids[i] << ',' << v.n_obs[i] << ','
            << (v.included(i) ? fmt_double(v.level[i]) : "") << ','
            << (v.included(i) ? fmt_double(v.z[i]) : "") << ','
            << to_string(v.exclusion[i]) << '\n';
    }
}

inline ConfidenceVector read_levels_csv(const std::string& path) {
    auto in = detail::open_in(path);
    ConfidenceVector v;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (lineno == 1 && line.rfind("feature_id", 0) == 0) continue;
        auto cells = detail::split(line, ',');
        if (cells.size() != 5)
            throw input_error(path + ":" + std::to_string(lineno) +
                              ": expected 5 columns");
        const std::string ctx = path + ":" + std::to_string(lineno);
        v.feature_ids.push_back(cells[0]);
        v.n_obs.push_back(cells[1].empty()
                              ? 0
                              : static_cast<std::size_t>(
                                    detail::parse_double(cells[1], ctx)));
        Exclusion ex;
        if (cells[4] == "none") ex = Exclusion::none;
        else if (cells[4] == "too_few_observations") ex = Exclusion::too_few_observations;
        else if (cells[4] == "nonfinite_z") ex = Exclusion::nonfinite_z;
        else throw input_error(ctx + ": unknown exclusion reason '" + cells[4] + "'");
        v.exclusion.push_back(ex);
        if (ex == Exclusion::none) {
            v.level.push_back(detail::parse_double(cells[2], ctx));
            v.z.push_back(detail::parse_double(cells[3], ctx));
        } else {
            v.level.push_back(std::numeric_limits<double>::quiet_NaN());
            v.z.push_back(std::numeric_limits<double>::quiet_NaN());
        }
    }
    if (v.feature_ids.empty()) throw input_error(path + ": no level rows");
    return v;
}

inline void write_null_json(const std::string& path, const NullModel& m) {
    auto out = detail::open_out(path);
    nlohmann::json j = m;
    out << j.dump(2) << '\n';
}

inline NullModel read_null_json(const std::string& path) {
    auto in = detail::open_in(path);
    nlohmann::json j;
    try {
        in >> j;
        return j.get<NullModel>();
    } catch (const nlohmann::json::exception& e) {
        throw input_error(path + ": invalid null model JSON: " + e.what());
    }
}

inline void write_decisions_csv(const std::string& path, const DecisionReport& r) {
    auto out = detail::open_out(path);
    out << "feature_id,action,error_prob\n";
    for (std::size_t i = 0; i < r.feature_ids.size(); ++i)
        out << r.feature_ids[i] << ',' << to_string(r.action[i]) << ','
            << fmt_double(r.error_prob[i]) << '\n';
}

} // namespace enull
