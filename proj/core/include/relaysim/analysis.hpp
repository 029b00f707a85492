#pragma once

#include <cstdint>
#include <stdexcept>

#include "relaysim/binning.hpp"
#include "relaysim/channel.hpp"
#include "relaysim/scheme.hpp"

namespace relaysim {

// Target rate not achievable by the min-cut.
struct PlanningError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Planned codebook would exceed the configured size cap.
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Rates in nats/s throughout the library.
struct RateReport {
    double min_cut = 0.0;            // min{max(1, a^2), 1 + b^2 gamma} * snr * underspread
    double cutset_ub = 0.0;          // min{1 + a^2, 1 + gamma b^2} * snr
    double block_markov_lb = 0.0;    // min{max(1, a^2), 1 + gamma b^2} * snr
    bool capacity_known = false;     // a^2 >= 1 + b^2 gamma
    double underspread_factor = 1.0; // 1 - 2 T_d / T_c
};

enum class RegimeTag { Direct, RelayLimitedBySR, RelayLimitedByMACut };

// Hyperedge rate allocation: R_1 on the relay edge, R_2 on the direct edge.
struct Regime {
    RegimeTag tag = RegimeTag::Direct;
    double R_1 = 0.0;  // nats/s
    double R_2 = 0.0;  // nats/s
};

// Exact per-stage error probabilities. p_e12 is conditional on relay success,
// p_e2 on both bin stages succeeding; p_e_total = 1 - prod(stage successes).
struct ExactErrorReport {
    double p_miss_relay = 0.0;
    double p_fa_relay = 0.0;
    double p_e11 = 0.0;
    double p_miss_destR = 0.0;
    double p_fa_destR = 0.0;
    double p_e12 = 0.0;
    double p_miss_destS = 0.0;
    double p_fa_destS = 0.0;
    double p_e2 = 0.0;
    double p_e_total = 0.0;
};

struct GammaTails {
    double P_below = 0.0;
    double P_above = 0.0;
};

// One stage of the union bound: exact miss term plus the exponential
// false-alarm term exp(-N(-R_x T_s/theta + A - 1 - ln A)). When the stage's
// rate condition is violated the exponential term is clamped to 1.
struct StageBound {
    double miss_term = 0.0;
    double exp_term = 0.0;
    bool clamped = false;

    double total() const { return miss_term + exp_term < 1.0 ? miss_term + exp_term : 1.0; }
};

struct ChernoffBounds {
    StageBound e11;
    StageBound e12;
    StageBound e2;
};

struct CodebookPlan {
    CodebookParams cb;
    Thresholds thresholds;
    double target_rate = 0.0;    // requested, nats/s
    double achieved_rate = 0.0;  // theta/(N T_s) * ln(M_R M_D) after rounding
    double R_1 = 0.0;            // achieved bin-index rate, nats/s
    double R_2 = 0.0;            // achieved within-bin rate, nats/s
};

struct Bandwidths {
    double W_S = 0.0;  // Hz
    double W_R = 0.0;  // Hz
};

double min_cut_rate(const SystemParams& params);
double cutset_upper(const SystemParams& params);
double block_markov_lower(const SystemParams& params);
RateReport rate_report(const SystemParams& params);

// Direct for a^2 <= 1, RelayLimitedBySR for 1 < a^2 <= 1 + b^2 gamma,
// RelayLimitedByMACut above that.
Regime classify_regime(const SystemParams& params);

// Codebook sizes from the regime's rate split: per edge,
// M = max(1, round(exp(R_edge * N * T_s / theta))). Rates above the min-cut
// raise PlanningError; M_S above max_codebook raises ResourceError.
CodebookPlan plan_codebook(const SystemParams& params, double target_rate,
                           std::uint64_t max_codebook = 1'000'000);

// W_S = M_S / (T_s - 2 T_d), W_R = M_R / (T_s - 2 T_d).
Bandwidths bandwidths(const CodebookParams& cb, const SystemParams& params);

// g_A(u) = A u + ln(1 - u) on u in [0, 1); maximized at u = 1 - 1/A.
double g_function(double A, double u);

// max_u g_A(u) = A - 1 - ln A, strictly positive for A > 1.
double chernoff_exponent(double A);

// Largest rate (nats/s) at which all per-stage Chernoff exponents stay
// positive under the regime's rate split. In the Direct regime only the
// within-bin stage constrains the rate.
double chernoff_rate_limit(const SystemParams& params);

ChernoffBounds chernoff_error_bounds(const SystemParams& params,
                                     const CodebookParams& cb,
                                     const Thresholds& th);

// Regularized lower incomplete gamma P(a, x): series expansion for
// x < a + 1, continued fraction otherwise. Absolute error <= 1e-12.
double regularized_gamma_p(double a, double x);

// Tail split of the mean of N i.i.d. exponentials with mean sigma_sq:
// P_below = P(N, N A / sigma_sq), P_above = 1 - P_below.
GammaTails exact_tails(std::uint32_t N, double A, double sigma_sq);

// ln P_above computed without underflow (continued fraction in log form).
double exact_tail_log_upper(std::uint32_t N, double A, double sigma_sq);

ExactErrorReport exact_end_to_end(const SystemParams& params,
                                  const CodebookParams& cb,
                                  const Thresholds& th);

}  // namespace relaysim
