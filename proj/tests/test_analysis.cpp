#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "relaysim/analysis.hpp"
#include "relaysim/harness.hpp"

using namespace relaysim;

namespace {

SystemParams base_params(double a_sq, double b_sq_gamma) {
    SystemParams p;
    p.a_sq = a_sq;
    p.b_sq = b_sq_gamma;
    p.gamma = 1.0;
    return p;
}

}  // namespace

TEST_CASE("min-cut rate follows the two-cut minimum") {
    CHECK(min_cut_rate(base_params(2.0, 0.5)) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(min_cut_rate(base_params(0.5, 3.0)) == doctest::Approx(1.0).epsilon(1e-15));

    SystemParams p = base_params(1.0, 0.0);
    p.T_d = 0.2;
    p.T_c = 2.0;
    p.T_s = 1.0;
    CHECK(min_cut_rate(p) ==
          doctest::Approx(p.snr_base * (1.0 - 2.0 * p.T_d / p.T_c)).epsilon(1e-15));
}

TEST_CASE("cut-set upper bound follows the broadcast and access cuts") {
    CHECK(cutset_upper(base_params(2.0, 0.5)) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(cutset_upper(base_params(0.0, 0.0)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(cutset_upper(base_params(1e9, 0.5)) == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("block-Markov bound equals the min-cut without guard overhead") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unif(0.0, 5.0);
    for (int i = 0; i < 1000; ++i) {
        const SystemParams p = base_params(unif(rng), unif(rng));
        CHECK(min_cut_rate(p) == block_markov_lower(p));
    }
}

TEST_CASE("strong source-relay links make the bounds meet") {
    const SystemParams p = base_params(3.0, 0.5);
    CHECK(block_markov_lower(p) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(block_markov_lower(p) == cutset_upper(p));
    const RateReport r = rate_report(p);
    CHECK(r.capacity_known);
    CHECK(r.min_cut == r.cutset_ub);

    CHECK(block_markov_lower(base_params(0.5, 1.0)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_FALSE(rate_report(base_params(0.5, 1.0)).capacity_known);
}

TEST_CASE("bounds are ordered for all gains") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> unif(0.0, 8.0);
    for (int i = 0; i < 500; ++i) {
        SystemParams p = base_params(unif(rng), unif(rng));
        p.gamma = 0.25 + unif(rng);
        CHECK(block_markov_lower(p) <= cutset_upper(p));
    }
}

TEST_CASE("regime classification splits on the source-relay gain") {
    const Regime direct = classify_regime(base_params(0.5, 1.0));
    CHECK(direct.tag == RegimeTag::Direct);
    CHECK(direct.R_1 == 0.0);
    CHECK(direct.R_2 == doctest::Approx(1.0).epsilon(1e-15));

    const Regime mid = classify_regime(base_params(1.2, 0.5));
    CHECK(mid.tag == RegimeTag::RelayLimitedBySR);
    CHECK(mid.R_1 == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(mid.R_2 == doctest::Approx(1.0).epsilon(1e-15));

    const Regime top = classify_regime(base_params(3.0, 0.5));
    CHECK(top.tag == RegimeTag::RelayLimitedByMACut);
    CHECK(top.R_1 == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(top.R_2 == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("planner yields a single bin in the direct regime") {
    SystemParams p = base_params(0.5, 1.0);
    p.N = 4;
    const double target = std::log(8.0) * p.theta / (p.N * p.T_s);
    const CodebookPlan plan = plan_codebook(p, target);
    CHECK(plan.cb.M_R == 1);
    CHECK(plan.cb.M_D == 8);
    CHECK(plan.achieved_rate == doctest::Approx(target).epsilon(1e-12));
    CHECK(plan.R_1 == 0.0);
}

TEST_CASE("planner splits rate proportionally to the regime allocation") {
    SystemParams p = base_params(1.2, 0.5);
    p.N = 4;
    const double target = std::log(64.0) * p.theta / (p.N * p.T_s);
    const CodebookPlan plan = plan_codebook(p, target);
    // R_1:R_2 = 0.2:1.0, so ln M_R = ln(64)/6 = ln 2 and ln M_D = ln 32.
    CHECK(plan.cb.M_R == 2);
    CHECK(plan.cb.M_D == 32);
    CHECK(plan.achieved_rate == doctest::Approx(target).epsilon(1e-9));
}

TEST_CASE("planner never allocates more bins than messages") {
    std::mt19937_64 rng(555);
    std::uniform_real_distribution<double> unif(0.1, 4.0);
    for (int i = 0; i < 200; ++i) {
        SystemParams p = base_params(unif(rng), unif(rng));
        p.N = 8;
        const double target = 0.5 * min_cut_rate(p);
        const CodebookPlan plan = plan_codebook(p, target, 1'000'000'000'000ULL);
        CHECK(plan.cb.M_R <= plan.cb.M_S);
        CHECK(plan.cb.M_S == plan.cb.M_R * plan.cb.M_D);
    }
}

TEST_CASE("planner rejects rates above the min-cut") {
    SystemParams p = base_params(1.5, 0.5);
    CHECK_THROWS_AS(plan_codebook(p, 2.0 * min_cut_rate(p)), PlanningError);
}

TEST_CASE("planner reports resource exhaustion for oversized codebooks") {
    SystemParams p = base_params(0.5, 1.0);
    p.N = 64;
    CHECK_THROWS_AS(plan_codebook(p, 0.9 * min_cut_rate(p), 4), ResourceError);
}

TEST_CASE("bandwidth occupies one tone slot per codeword") {
    SystemParams p;
    CHECK(bandwidths(CodebookParams::make(1, 8), p).W_S == doctest::Approx(8.0));
    CHECK(bandwidths(CodebookParams::make(1, 8), p).W_R == doctest::Approx(1.0));
    const double w8 = bandwidths(CodebookParams::make(2, 4), p).W_S;
    const double w16 = bandwidths(CodebookParams::make(2, 8), p).W_S;
    CHECK(w16 == doctest::Approx(2.0 * w8));

    p.T_s = 1.0;
    p.T_d = 0.25;
    CHECK(bandwidths(CodebookParams::make(1, 4), p).W_S == doctest::Approx(8.0));
}

TEST_CASE("tilted log-moment function evaluates and peaks as expected") {
    CHECK(g_function(2.0, 0.0) == 0.0);
    CHECK(g_function(2.0, 0.5) == doctest::Approx(1.0 - std::log(2.0)).epsilon(1e-15));
    CHECK_THROWS_AS(g_function(2.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(g_function(2.0, -0.1), std::domain_error);

    for (double A : {1.3, 2.0, 5.0, 20.0}) {
        const double u_star = 1.0 - 1.0 / A;
        const double h = 1e-7;
        const double deriv =
            (g_function(A, u_star + h) - g_function(A, u_star - h)) / (2.0 * h);
        CHECK(std::abs(deriv) < 1e-6);
        CHECK(g_function(A, u_star) > g_function(A, u_star - 0.01));
        CHECK(g_function(A, u_star) > g_function(A, u_star + 0.009));
    }
}

TEST_CASE("error exponent matches its closed form") {
    CHECK(chernoff_exponent(2.0) == doctest::Approx(1.0 - std::log(2.0)).epsilon(1e-15));
    const double e = std::exp(1.0);
    CHECK(chernoff_exponent(e) == doctest::Approx(e - 2.0).epsilon(1e-15));
    CHECK(chernoff_exponent(1.0 + 1e-8) > 0.0);
    CHECK(chernoff_exponent(1.0 + 1e-8) < 1e-15);
    CHECK_THROWS_AS(chernoff_exponent(1.0), std::domain_error);
    CHECK_THROWS_AS(chernoff_exponent(0.5), std::domain_error);
}

TEST_CASE("per-stage false-alarm terms reduce to codebook-scaled exponentials") {
    SystemParams p;
    p.a_sq = 1.5;
    p.b_sq = 0.5;
    p.gamma = 2.0;
    p.snr_base = 6.0;
    p.N = 16;
    p.eps = p.eps1 = p.eps2 = 0.5;
    const CodebookParams cb = CodebookParams::make(4, 8);
    const Thresholds th = make_thresholds(p);
    const ChernoffBounds b = chernoff_error_bounds(p, cb, th);

    const double n = static_cast<double>(p.N);
    CHECK_FALSE(b.e11.clamped);
    CHECK(b.e11.exp_term ==
          doctest::Approx(cb.M_S * std::exp(-n * chernoff_exponent(th.A_R)))
              .epsilon(1e-12));
    CHECK(b.e12.exp_term ==
          doctest::Approx(cb.M_R * std::exp(-n * chernoff_exponent(th.B_R)))
              .epsilon(1e-12));
    CHECK(b.e2.exp_term ==
          doctest::Approx(cb.M_D * std::exp(-n * chernoff_exponent(th.B_S)))
              .epsilon(1e-12));
    CHECK(b.e11.miss_term ==
          doctest::Approx(exact_tails(p.N, th.A_R, 1.0 + p.a_sq * peak_snr(p).rho).P_below)
              .epsilon(1e-12));
}

TEST_CASE("violating the rate condition clamps the stage bound") {
    SystemParams p;
    p.a_sq = 1.1;
    p.snr_base = 0.5;
    p.N = 2;
    const CodebookParams cb = CodebookParams::make(1024, 1024);
    const Thresholds th = make_thresholds(p);
    const ChernoffBounds b = chernoff_error_bounds(p, cb, th);
    CHECK(b.e11.clamped);
    CHECK(b.e11.exp_term == 1.0);
    CHECK(b.e11.total() == 1.0);
}

TEST_CASE("vanishing duty factor drives the rate limit to its wideband value") {
    SystemParams p = base_params(0.5, 1.0);  // direct regime
    p.eps2 = 0.2;
    p.theta = 1e-6;
    p.T_d = 0.1;
    p.T_s = 1.0;
    p.T_c = 1.0;
    const double wideband = (1.0 - p.eps2) * p.snr_base * (1.0 - 2.0 * p.T_d / p.T_s);
    CHECK(chernoff_rate_limit(p) == doctest::Approx(wideband).epsilon(1e-3));
}

TEST_CASE("rate limit is positive and below the min-cut near zero duty factor") {
    for (double a_sq : {0.5, 1.2, 3.0}) {
        SystemParams p = base_params(a_sq, 0.5);
        p.eps = p.eps1 = p.eps2 = 0.1;
        p.theta = 1e-7;
        const double limit = chernoff_rate_limit(p);
        CHECK(limit > 0.0);
        CHECK(limit < min_cut_rate(p));
    }
}

TEST_CASE("regularized lower gamma matches pinned references") {
    struct Ref {
        double a, x, p;
    };
    const Ref refs[] = {
        {1, 2, 0.86466471676338730811},
        {2, 1.5, 0.44217459962892542767},
        {3, 2.5, 0.456186884116670482},
        {7, 7, 0.55028894415130115326},
        {50, 40, 0.070335066659394954437},
        {50, 60, 0.91559331890630817038},
        {300, 250, 0.0011623936310546182942},
        {5, 0.001, 8.3263918642115032568e-18},
        {4, 30, 0.99999999953389679992},
    };
    for (const Ref& r : refs) {
        CHECK(regularized_gamma_p(r.a, r.x) == doctest::Approx(r.p).epsilon(1e-12));
    }
    CHECK(regularized_gamma_p(5.0, 0.0) == 0.0);
}

TEST_CASE("tail split matches closed forms at small repetition counts") {
    CHECK(exact_tails(1, 2.0, 1.0).P_above == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
    CHECK(exact_tails(1, 2.0, 5.0).P_below ==
          doctest::Approx(1.0 - std::exp(-0.4)).epsilon(1e-12));

    // Mean of N exponentials: P(S >= A) = e^{-x} sum_{k<N} x^k / k!, x = N A / s.
    for (std::uint32_t n : {2u, 3u}) {
        for (double A : {0.5, 1.0, 2.5}) {
            for (double s : {1.0, 1.8}) {
                const double x = n * A / s;
                double sum = 0.0, term = 1.0;
                for (std::uint32_t k = 0; k < n; ++k) {
                    sum += term;
                    term *= x / (k + 1);
                }
                const double q = std::exp(-x) * sum;
                CHECK(exact_tails(n, A, s).P_above == doctest::Approx(q).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("tail split is a partition and monotone in its arguments") {
    for (std::uint32_t n : {1u, 4u, 37u, 200u}) {
        for (double A : {0.3, 1.0, 2.0, 6.0}) {
            const GammaTails t = exact_tails(n, A, 1.3);
            CHECK(t.P_below >= 0.0);
            CHECK(t.P_above >= 0.0);
            CHECK(t.P_below + t.P_above == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(exact_tails(n, A + 0.1, 1.3).P_below >= t.P_below);
            CHECK(exact_tails(n, A, 1.5).P_below <= t.P_below);
        }
    }
}

TEST_CASE("tail at the mean approaches one half") {
    CHECK(exact_tails(1000000, 2.0, 2.0).P_below == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(std::abs(exact_tails(1000000, 2.0, 2.0).P_below - 0.500132980761) < 1e-9);
}

TEST_CASE("noise tail never exceeds the exponential bound") {
    for (std::uint32_t n = 1; n <= 256; n *= 2) {
        for (double A : {1.1, 1.5, 2.0, 4.0, 8.0}) {
            const double tail = exact_tails(n, A, 1.0).P_above;
            const double bound = std::exp(-n * chernoff_exponent(A));
            CHECK(tail <= bound);
            CHECK(exact_tail_log_upper(n, A, 1.0) < -static_cast<double>(n) *
                                                        chernoff_exponent(A));
        }
    }
}

TEST_CASE("log-domain tail agrees with the linear tail when representable") {
    for (std::uint32_t n : {1u, 8u, 64u}) {
        for (double A : {1.5, 3.0}) {
            const double linear = exact_tails(n, A, 1.0).P_above;
            CHECK(std::exp(exact_tail_log_upper(n, A, 1.0)) ==
                  doctest::Approx(linear).epsilon(1e-10));
        }
    }
    const double deep = exact_tail_log_upper(256, 8.0, 1.0);
    CHECK(std::isfinite(deep));
    CHECK(deep == doctest::Approx(-1265.301365350643856).epsilon(1e-9));
}

TEST_CASE("single-bin codebooks reduce the oracle to the within-bin stage") {
    SystemParams p;
    p.snr_base = 4.0;
    p.N = 6;
    p.eps2 = 0.4;
    const CodebookParams cb = CodebookParams::make(1, 8);
    const Thresholds th = make_thresholds(p);
    const ExactErrorReport r = exact_end_to_end(p, cb, th);
    CHECK(r.p_e11 == 0.0);
    CHECK(r.p_e12 == 0.0);

    const double rho = peak_snr(p).rho;
    const double miss = exact_tails(p.N, th.B_S, 1.0 + rho).P_below;
    const double fa = exact_tails(p.N, th.B_S, 1.0).P_above;
    const double p2 = (1.0 - miss) * std::pow(1.0 - fa, 7.0);
    CHECK(r.p_e_total == doctest::Approx(1.0 - p2).epsilon(1e-12));
    CHECK(r.p_e2 == doctest::Approx(1.0 - p2).epsilon(1e-12));
}

TEST_CASE("unreachable thresholds force certain error") {
    SystemParams p;
    p.snr_base = 1.0;
    p.N = 30;
    const CodebookParams cb = CodebookParams::make(2, 2);
    Thresholds th;
    th.A_R = 50.0;
    th.B_R = 50.0;
    th.B_S = 50.0;
    const ExactErrorReport r = exact_end_to_end(p, cb, th);
    CHECK(r.p_e_total > 0.9999);
}

TEST_CASE("oracle probabilities satisfy the union-bound structure") {
    std::mt19937_64 rng(808);
    std::uniform_real_distribution<double> unif(0.5, 3.0);
    for (int i = 0; i < 100; ++i) {
        SystemParams p;
        p.a_sq = unif(rng);
        p.b_sq = unif(rng);
        p.gamma = unif(rng);
        p.snr_base = unif(rng);
        p.N = 1 + static_cast<std::uint32_t>(unif(rng) * 10);
        p.eps = p.eps1 = p.eps2 = 0.5;
        const CodebookParams cb = CodebookParams::make(2, 4);
        const ExactErrorReport r = exact_end_to_end(p, cb, make_thresholds(p));
        CHECK(r.p_e_total >= 0.0);
        CHECK(r.p_e_total <= 1.0);
        CHECK(r.p_e_total <= r.p_e11 + r.p_e12 + r.p_e2 + 1e-12);
        CHECK(r.p_e_total + 1e-12 >= r.p_e11);
    }
}

TEST_CASE("oracle stage probabilities are non-increasing in the repetition count") {
    SystemParams p;
    p.a_sq = 1.5;
    p.b_sq = 0.5;
    p.gamma = 2.0;
    p.snr_base = 3.0;
    p.eps = p.eps1 = p.eps2 = 0.5;
    const CodebookParams cb = CodebookParams::make(2, 4);
    double last = 1.0;
    for (std::uint32_t n : {2u, 4u, 8u, 16u, 32u, 64u}) {
        p.N = n;
        const ExactErrorReport r = exact_end_to_end(p, cb, make_thresholds(p));
        CHECK(r.p_e_total <= last + 1e-12);
        last = r.p_e_total;
    }
}

TEST_CASE("oracle matches a large direct-simulation batch") {
    SystemParams p;
    p.a_sq = 1.5;
    p.b_sq = 0.5;
    p.gamma = 2.0;
    p.snr_base = 3.5;
    p.N = 4;
    p.eps = p.eps1 = p.eps2 = 0.5;

    ExperimentConfig cfg;
    cfg.params = p;
    cfg.codebook = CodebookParams::make(4, 2);
    cfg.n_trials = 2000000;
    cfg.base_seed = 424242;
    cfg.engine = Engine::Block;

    const TrialBatchResult res = run_batch(cfg);
    const double exact = res.exact.p_e_total;
    const double se = std::sqrt(exact * (1.0 - exact) / static_cast<double>(cfg.n_trials));
    CHECK(std::abs(res.p_e_hat - exact) <= 3.0 * se);
}
