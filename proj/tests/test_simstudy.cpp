#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "enull/simstudy.hpp"

using namespace enull;

namespace {

StudyConfig mixture_config() {
    StudyConfig c;
    c.K = 500;
    c.d = 10000;
    c.n_affected = 500;
    c.seed = 7;
    return c;
}

} // namespace

TEST_CASE("degenerate precision mixture always draws the single value") {
    StudyConfig c = mixture_config();
    c.precision_support = {1.0};
    c.precision_probs = {1.0};
    c.K = 10;
    for (std::size_t k = 0; k < c.K; ++k)
        CHECK(generate_trial(c, k).sigma_k == 1.0);
}

TEST_CASE("precision frequencies match the mixture weights") {
    StudyConfig c = mixture_config();
    std::size_t ones = 0;
    for (std::size_t k = 0; k < c.K; ++k)
        ones += generate_trial(c, k).sigma_k == 1.0;
    double freq = static_cast<double>(ones) / static_cast<double>(c.K);
    CHECK(freq > 0.40 - 0.07); // binomial 3-sigma band
    CHECK(freq < 0.40 + 0.07);
}

TEST_CASE("unaffected z-values are centered") {
    StudyConfig c = mixture_config();
    auto t = generate_trial(c, 3);
    const std::size_t n_unaff = c.d - c.n_affected;
    double mean = 0.0;
    for (std::size_t i = 0; i < n_unaff; ++i) mean += t.z[i];
    mean /= static_cast<double>(n_unaff);
    CHECK(std::fabs(mean) < 4.0 * t.sigma_k / 100.0); // CLT 4-sigma band

    // affected block sits near affected_mean_mult * sigma_k
    double amean = 0.0;
    for (std::size_t i = n_unaff; i < c.d; ++i) amean += t.z[i];
    amean /= static_cast<double>(c.n_affected);
    CHECK(std::fabs(amean - 2.5 * t.sigma_k) < 4.0 * 1.25 * t.sigma_k /
                                                   std::sqrt(500.0));
}

TEST_CASE("true conditional levels") {
    CHECK(true_conditional_levels({0.0}, 2.0)[0] == 0.5);
    CHECK(true_conditional_levels({1.3}, 1.0)[0] ==
          Catch::Approx(normal_cdf(1.3)).margin(1e-15));
    CHECK(true_conditional_levels({3.0}, 1.5)[0] ==
          Catch::Approx(0.97724986805182079).margin(1e-12));
    CHECK_THROWS_AS(true_conditional_levels({1.0}, 0.0), input_error);
}

TEST_CASE("marginal levels") {
    std::vector<double> support{2.0 / 3.0, 1.0, 1.5};
    std::vector<double> probs{0.3, 0.4, 0.3};
    CHECK(marginalize_levels({0.0}, support, probs)[0] ==
          Catch::Approx(0.5).margin(1e-15));
    CHECK(marginalize_levels({0.7}, {1.0}, {1.0})[0] ==
          Catch::Approx(normal_cdf(0.7)).margin(1e-15));
    CHECK(marginalize_levels({1.645}, support, probs)[0] ==
          Catch::Approx(0.93704706452283597).margin(1e-12));
    CHECK_THROWS_AS(marginalize_levels({0.0}, support, {0.3, 0.3}), input_error);

    // strictly increasing in z
    double prev = 0.0;
    for (double z = -6.0; z <= 6.0; z += 0.1) {
        double v = marginalize_levels({z}, support, probs)[0];
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("conservatism statistic") {
    CHECK(conservatism({0.5, 0.9}, {0.5, 0.9}, 0.01, 0, 2) == 0.0);
    CHECK(conservatism({0.5, 0.995}, {0.5, 0.95}, 0.01, 0, 2) ==
          Catch::Approx(-0.5));
    CHECK(conservatism({0.5, 0.95}, {0.5, 0.995}, 0.01, 0, 2) ==
          Catch::Approx(0.5));
    CHECK_THROWS_AS(conservatism({0.5}, {0.5}, 0.01, 1, 1), input_error);

    // antisymmetry on random vectors
    std::vector<double> a{0.001, 0.3, 0.992, 0.5, 0.999};
    std::vector<double> b{0.02, 0.995, 0.4, 0.005, 0.97};
    CHECK(conservatism(a, b, 0.01, 0, a.size()) ==
          Catch::Approx(-conservatism(b, a, 0.01, 0, a.size())).margin(1e-15));
}

TEST_CASE("unit precision trial has zero assumed-null conservatism") {
    StudyConfig c = mixture_config();
    c.precision_support = {1.0};
    c.precision_probs = {1.0};
    c.K = 1;
    auto result = run_study(c);
    CHECK(result.trials[0].cons_unaffected_assumed == 0.0);
    CHECK(result.trials[0].cons_affected_assumed == 0.0);
}

TEST_CASE("homogeneous precision leaves both null modes nearly calibrated") {
    StudyConfig c = mixture_config();
    c.precision_support = {1.0};
    c.precision_probs = {1.0};
    c.K = 20;
    auto result = run_study(c);
    REQUIRE(result.n_failed == 0);
    CHECK(std::fabs(result.summary_unaffected_assumed.mean) <= 0.01);
    CHECK(std::fabs(result.summary_unaffected_estimated.mean) <= 0.01);
}

TEST_CASE("study results are schedule independent") {
    StudyConfig c = mixture_config();
    c.K = 8;
    c.d = 2000;
    c.n_affected = 100;
    auto seq = run_study(c, 1);
    auto par = run_study(c, 4);
    REQUIRE(seq.trials.size() == par.trials.size());
    for (std::size_t k = 0; k < seq.trials.size(); ++k) {
        CHECK(seq.trials[k].sigma_k == par.trials[k].sigma_k);
        CHECK(seq.trials[k].cons_unaffected_assumed ==
              par.trials[k].cons_unaffected_assumed);
        CHECK(seq.trials[k].cons_unaffected_estimated ==
              par.trials[k].cons_unaffected_estimated);
        CHECK(seq.trials[k].null_fit.mu0 == par.trials[k].null_fit.mu0);
        CHECK(seq.trials[k].null_fit.sigma0 == par.trials[k].null_fit.sigma0);
    }
}

TEST_CASE("log-uniform precision variant stays in range") {
    StudyConfig c = mixture_config();
    c.log_uniform_precision = true;
    c.K = 20;
    for (std::size_t k = 0; k < c.K; ++k) {
        double s = generate_trial(c, k).sigma_k;
        CHECK(s >= 0.5);
        CHECK(s <= 2.0);
    }
    c.truth_mode = TruthMode::marginal;
    CHECK_THROWS_AS(run_study(c), input_error);
}

TEST_CASE("config JSON round trip") {
    StudyConfig c = mixture_config();
    c.truth_mode = TruthMode::marginal;
    c.null_mode = NullMode::assumed;
    nlohmann::json j = c;
    auto back = j.get<StudyConfig>();
    CHECK(back.K == c.K);
    CHECK(back.precision_support == c.precision_support);
    CHECK(back.truth_mode == TruthMode::marginal);
    CHECK(back.null_mode == NullMode::assumed);
    CHECK(back.seed == c.seed);

    nlohmann::json bad{{"truth_mode", "bogus"}};
    CHECK_THROWS_AS(bad.get<StudyConfig>(), input_error);
}
