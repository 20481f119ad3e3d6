#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "enull/math.hpp"
#include "enull/nullmodel.hpp"
#include "oracles.hpp"

using namespace enull;

namespace {

std::vector<double> standard_normal_draws(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<double> z(n);
    for (auto& v : z) v = nd(rng);
    return z;
}

} // namespace

TEST_CASE("fit_null recovers the standard normal") {
    auto z = standard_normal_draws(10000, 32);
    auto m = fit_null(z);
    CHECK(m.mu0 > -0.05);
    CHECK(m.mu0 < 0.05);
    CHECK(m.sigma0 > 0.95);
    CHECK(m.sigma0 < 1.05);
    CHECK(m.provenance == Provenance::estimated);
    CHECK(m.p0 > 0.9);
    CHECK(m.p0 <= 1.0);

    auto gs = oracle::grid_search_mle(z, 0.5);
    double fitted_ll =
        truncated_normal_loglik(z, m.interval_lo, m.interval_hi, m.mu0, m.sigma0);
    CHECK(fitted_ll >= gs.loglik - 1e-8);
}

TEST_CASE("fit_null is affine equivariant") {
    auto z = standard_normal_draws(10000, 32);
    auto m = fit_null(z);

    std::vector<double> z2(z);
    for (auto& v : z2) v = 2.0 * v + 1.0;
    auto m2 = fit_null(z2);
    CHECK(m2.mu0 == Catch::Approx(2.0 * m.mu0 + 1.0).margin(1e-6));
    CHECK(m2.sigma0 == Catch::Approx(2.0 * m.sigma0).margin(1e-6));

    std::mt19937 rng(5);
    std::uniform_real_distribution<double> ad(0.1, 4.0), bd(-3.0, 3.0);
    for (int rep = 0; rep < 3; ++rep) {
        double alpha = ad(rng), beta = bd(rng);
        std::vector<double> zt(z);
        for (auto& v : zt) v = alpha * v + beta;
        auto mt = fit_null(zt);
        CHECK(mt.mu0 == Catch::Approx(alpha * m.mu0 + beta).margin(1e-6));
        CHECK(mt.sigma0 == Catch::Approx(alpha * m.sigma0).margin(1e-6));
    }
}

TEST_CASE("fit_null on a contaminated mixture stays near the null component") {
    // 95% N(0,1) + 5% N(2.5, 1.25^2), the simulation design at unit precision
    std::mt19937_64 rng(32);
    std::normal_distribution<double> null_d(0.0, 1.0), alt_d(2.5, 1.25);
    std::vector<double> z;
    for (int i = 0; i < 9500; ++i) z.push_back(null_d(rng));
    for (int i = 0; i < 500; ++i) z.push_back(alt_d(rng));

    auto m = fit_null(z);
    CHECK(m.mu0 > -0.1);
    CHECK(m.mu0 < 0.1);
    CHECK(m.sigma0 > 0.95);
    CHECK(m.sigma0 < 1.10);

    auto gs = oracle::grid_search_mle(z, 0.5);
    double fitted_ll =
        truncated_normal_loglik(z, m.interval_lo, m.interval_hi, m.mu0, m.sigma0);
    CHECK(fitted_ll >= gs.loglik - 1e-8);
}

TEST_CASE("fit_null on exact uniform order statistics") {
    const std::size_t d = 10000;
    std::vector<double> z(d);
    for (std::size_t i = 0; i < d; ++i)
        z[i] = normal_quantile((static_cast<double>(i) + 0.5) / d);
    auto m = fit_null(z);
    CHECK(m.mu0 > -0.02);
    CHECK(m.mu0 < 0.02);
    CHECK(m.sigma0 > 0.98);
    CHECK(m.sigma0 < 1.02);
}

TEST_CASE("fit_null error paths") {
    std::vector<double> few(50, 0.0);
    CHECK_THROWS_AS(fit_null(few), numeric_error);

    // tiny center fraction leaves fewer than 10 central values
    auto z = standard_normal_draws(100, 1);
    CHECK_THROWS_AS(fit_null(z, 0.05), numeric_error);
    CHECK_THROWS_AS(fit_null(z, 0.0), input_error);
    CHECK_THROWS_AS(fit_null(z, 1.5), input_error);
}

TEST_CASE("adjust_level under the assumed null is the identity") {
    auto null = NullModel::assumed_null();
    for (double p = 0.001; p < 1.0; p += 0.017)
        CHECK(adjust_level(p, null) == p);
}

TEST_CASE("adjust_level matches the reference values") {
    NullModel tomato;
    tomato.mu0 = -0.21;
    tomato.sigma0 = 1.55;
    tomato.provenance = Provenance::estimated;

    CHECK(adjust_level(0.41683383651755769, tomato) ==
          Catch::Approx(0.5).margin(1e-12));
    CHECK(adjust_level(0.99, tomato) ==
          Catch::Approx(0.94911718399354588).margin(1e-10));

    NullModel wide;
    wide.mu0 = 0.0;
    wide.sigma0 = 1.55;
    wide.provenance = Provenance::estimated;
    CHECK(adjust_level(0.01, wide) ==
          Catch::Approx(0.066694646703524715).margin(1e-10));
    CHECK(adjust_level(0.99, wide) ==
          Catch::Approx(0.93330535329647529).margin(1e-10));

    CHECK_THROWS_AS(adjust_level(0.0, tomato), input_error);
    CHECK_THROWS_AS(adjust_level(1.0, tomato), input_error);
}

TEST_CASE("adjust_level monotone and pulled toward 1/2") {
    NullModel m;
    m.mu0 = 0.3;
    m.sigma0 = 1.4;
    m.provenance = Provenance::estimated;
    double prev = 0.0;
    for (double p = 0.001; p < 1.0; p += 0.001) {
        double q = adjust_level(p, m);
        CHECK(q > prev);
        prev = q;
    }

    NullModel centered;
    centered.mu0 = 0.0;
    centered.sigma0 = 1.7;
    centered.provenance = Provenance::estimated;
    for (double p = 0.001; p < 1.0; p += 0.001) {
        double q = adjust_level(p, centered);
        CHECK(std::fabs(q - 0.5) <= std::fabs(p - 0.5) + 1e-15);
    }
}

TEST_CASE("adjustment round trip inverts") {
    NullModel fwd;
    fwd.mu0 = -0.21;
    fwd.sigma0 = 1.55;
    fwd.provenance = Provenance::estimated;
    NullModel inv;
    inv.mu0 = -fwd.mu0 / fwd.sigma0;
    inv.sigma0 = 1.0 / fwd.sigma0;
    inv.provenance = Provenance::estimated;
    for (double p = 0.0005; p < 1.0; p += 0.0101)
        CHECK(adjust_level(adjust_level(p, fwd), inv) ==
              Catch::Approx(p).margin(1e-9));
}

TEST_CASE("adjust_vector passes exclusions through") {
    ConfidenceVector v;
    v.feature_ids = {"a", "b", "c"};
    v.n_obs = {3, 1, 3};
    v.level = {0.5, std::nan(""), 0.99};
    v.z = {0.0, std::nan(""), normal_quantile(0.99)};
    v.exclusion = {Exclusion::none, Exclusion::too_few_observations,
                   Exclusion::none};

    NullModel m;
    m.mu0 = 0.0;
    m.sigma0 = 1.55;
    m.provenance = Provenance::estimated;
    auto out = adjust_vector(v, m);
    CHECK(out.level[0] == 0.5);
    CHECK(out.exclusion[1] == Exclusion::too_few_observations);
    CHECK(out.level[2] == Catch::Approx(0.93330535329647529).margin(1e-10));

    auto same = adjust_vector(v, NullModel::assumed_null());
    CHECK(same.level[0] == v.level[0]);
    CHECK(same.level[2] == v.level[2]);
}

TEST_CASE("null model JSON round trip is exact") {
    NullModel m;
    m.mu0 = -0.2099999999999999;
    m.sigma0 = 1.55;
    m.p0 = 0.9337;
    m.provenance = Provenance::estimated;
    m.interval_lo = -0.7123456789012345;
    m.interval_hi = 0.6987654321098765;
    m.n_central = 5000;

    nlohmann::json j = m;
    auto back = j.get<NullModel>();
    CHECK(back.mu0 == m.mu0);
    CHECK(back.sigma0 == m.sigma0);
    CHECK(back.p0 == m.p0);
    CHECK(back.interval_lo == m.interval_lo);
    CHECK(back.interval_hi == m.interval_hi);
    CHECK(back.n_central == m.n_central);

    nlohmann::json j2 = back;
    CHECK(j.dump() == j2.dump());
}
