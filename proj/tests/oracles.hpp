#pragma once

// Test-only oracles, independent of the library implementations they check:
// a grid-search maximizer of the truncated-normal likelihood and a
// quadrature evaluation of the order-1/2 divergence between normals.

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

struct TruncFit {
    double mu, sigma, loglik;
};

inline double trunc_loglik(const std::vector<double>& central, double a, double b,
                           double mu, double sigma) {
    auto phi = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
    double h = phi((b - mu) / sigma) - phi((a - mu) / sigma);
    if (h <= 0.0) return -std::numeric_limits<double>::infinity();
    double ll = 0.0;
    for (double z : central) {
        double u = (z - mu) / sigma;
        ll += -0.5 * u * u - 0.5 * std::log(2.0 * M_PI) - std::log(sigma);
    }
    return ll - static_cast<double>(central.size()) * std::log(h);
}

// Zooming grid search over mu in [a,b], sigma in [1e-3, 10*sd].
inline TruncFit grid_search_mle(const std::vector<double>& z,
                                double center_fraction) {
    std::vector<double> s(z);
    std::sort(s.begin(), s.end());
    auto quant = [&](double p) {
        double h = p * static_cast<double>(s.size() - 1);
        std::size_t lo = static_cast<std::size_t>(std::floor(h));
        if (lo >= s.size() - 1) return s.back();
        return s[lo] + (h - lo) * (s[lo + 1] - s[lo]);
    };
    const double a = quant((1.0 - center_fraction) / 2.0);
    const double b = quant((1.0 + center_fraction) / 2.0);
    std::vector<double> central;
    for (double v : s)
        if (v >= a && v <= b) central.push_back(v);

    double mean = 0.0;
    for (double v : z) mean += v;
    mean /= static_cast<double>(z.size());
    double var = 0.0;
    for (double v : z) var += (v - mean) * (v - mean);
    var /= static_cast<double>(z.size() - 1);

    double mu_lo = a, mu_hi = b;
    double s_lo = 1e-3, s_hi = std::max(10.0 * std::sqrt(var), 2e-3);

    TruncFit best{0.0, 1.0, -std::numeric_limits<double>::infinity()};
    const int npts = 81;
    for (int round = 0; round < 8; ++round) {
        for (int i = 0; i < npts; ++i) {
            double mu = mu_lo + (mu_hi - mu_lo) * i / (npts - 1);
            for (int j = 0; j < npts; ++j) {
                double sg = s_lo + (s_hi - s_lo) * j / (npts - 1);
                double ll = trunc_loglik(central, a, b, mu, sg);
                if (ll > best.loglik) best = {mu, sg, ll};
            }
        }
        double mu_span = (mu_hi - mu_lo) * 2.5 / (npts - 1);
        double s_span = (s_hi - s_lo) * 2.5 / (npts - 1);
        mu_lo = std::max(a, best.mu - mu_span);
        mu_hi = std::min(b, best.mu + mu_span);
        s_lo = std::max(1e-3, best.sigma - s_span);
        s_hi = best.sigma + s_span;
    }
    return best;
}

// -2*log2 integral sqrt(f*g) by Simpson's rule over a generous range.
inline double renyi_half_by_quadrature(double mu_f, double s_f, double mu_g,
                                       double s_g) {
    double lo = std::min(mu_f - 14.0 * s_f, mu_g - 14.0 * s_g);
    double hi = std::max(mu_f + 14.0 * s_f, mu_g + 14.0 * s_g);
    const int n = 40000; // even
    double h = (hi - lo) / n;
    auto integrand = [&](double x) {
        double uf = (x - mu_f) / s_f, ug = (x - mu_g) / s_g;
        double log_f = -0.5 * uf * uf - std::log(s_f);
        double log_g = -0.5 * ug * ug - std::log(s_g);
        return std::exp(0.5 * (log_f + log_g) - std::log(2.0 * M_PI) / 2.0);
    };
    double acc = integrand(lo) + integrand(hi);
    for (int i = 1; i < n; ++i)
        acc += integrand(lo + i * h) * (i % 2 ? 4.0 : 2.0);
    double bc = acc * h / 3.0;
    return -2.0 * std::log2(bc);
}

} // namespace oracle
