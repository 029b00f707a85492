#include "relaysim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace relaysim {

namespace {

constexpr int kMaxIter = 1000000;
constexpr double kRelEps = 1e-16;

double gamma_log_prefactor(double a, double x) {
    return -x + a * std::log(x) - std::lgamma(a);
}

// Series expansion of P(a, x), valid and fast for x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int i = 0; i < kMaxIter; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * kRelEps) {
            return sum * std::exp(gamma_log_prefactor(a, x));
        }
    }
    throw std::runtime_error("regularized_gamma_p: series did not converge");
}

// Continued fraction for Q(a, x) (modified Lentz), valid for x >= a + 1.
// Returns only the fraction; the caller applies the prefactor.
double gamma_q_cf_factor(double a, double x) {
    constexpr double kTiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxIter; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kRelEps) return h;
    }
    throw std::runtime_error("regularized_gamma_p: continued fraction did not converge");
}

void check_tail_domain(std::uint32_t N, double A, double sigma_sq) {
    if (N < 1) throw std::domain_error("exact_tails: N must be >= 1");
    if (!(A > 0.0)) throw std::domain_error("exact_tails: threshold must be > 0");
    if (!(sigma_sq > 0.0)) throw std::domain_error("exact_tails: sigma_sq must be > 0");
}

}  // namespace

double min_cut_rate(const SystemParams& p) {
    p.validate();
    const double u = 1.0 - 2.0 * p.T_d / p.T_c;
    return std::min(std::max(1.0, p.a_sq), 1.0 + p.b_sq * p.gamma) * p.snr_base * u;
}

double cutset_upper(const SystemParams& p) {
    p.validate();
    return std::min(1.0 + p.a_sq, 1.0 + p.b_sq * p.gamma) * p.snr_base;
}

double block_markov_lower(const SystemParams& p) {
    p.validate();
    return std::min(std::max(1.0, p.a_sq), 1.0 + p.b_sq * p.gamma) * p.snr_base;
}

RateReport rate_report(const SystemParams& p) {
    RateReport r;
    r.min_cut = min_cut_rate(p);
    r.cutset_ub = cutset_upper(p);
    r.block_markov_lb = block_markov_lower(p);
    r.capacity_known = p.a_sq >= 1.0 + p.b_sq * p.gamma;
    r.underspread_factor = 1.0 - 2.0 * p.T_d / p.T_c;
    return r;
}

Regime classify_regime(const SystemParams& p) {
    p.validate();
    const double base = p.snr_base * (1.0 - 2.0 * p.T_d / p.T_c);
    const double ma_cut = 1.0 + p.b_sq * p.gamma;
    Regime r;
    r.R_2 = base;
    if (p.a_sq <= 1.0) {
        r.tag = RegimeTag::Direct;
        r.R_1 = 0.0;
    } else if (p.a_sq <= ma_cut) {
        r.tag = RegimeTag::RelayLimitedBySR;
        r.R_1 = (p.a_sq - 1.0) * base;
    } else {
        r.tag = RegimeTag::RelayLimitedByMACut;
        r.R_1 = p.b_sq * p.gamma * base;
    }
    return r;
}

CodebookPlan plan_codebook(const SystemParams& p, double target_rate,
                           std::uint64_t max_codebook) {
    p.validate();
    if (!(target_rate > 0.0)) {
        throw std::invalid_argument("plan_codebook: target rate must be > 0");
    }
    if (max_codebook < 1) {
        throw std::invalid_argument("plan_codebook: max_codebook must be >= 1");
    }
    const double mc = min_cut_rate(p);
    if (target_rate > mc) {
        throw PlanningError("plan_codebook: target rate " + std::to_string(target_rate) +
                            " nats/s exceeds min-cut " + std::to_string(mc));
    }

    const Regime reg = classify_regime(p);
    const double sum = reg.R_1 + reg.R_2;
    const double s1 = reg.R_1 / sum;
    const double s2 = reg.R_2 / sum;
    const double ln_total = target_rate * static_cast<double>(p.N) * p.T_s / p.theta;

    // Message counts beyond 2^62 cannot round to a valid size on any cap.
    const double ln_m_r = s1 * ln_total;
    const double ln_m_d = s2 * ln_total;
    if (ln_m_r > 43.0 || ln_m_d > 43.0) {
        throw ResourceError("plan_codebook: codebook of ln size " + std::to_string(ln_total) +
                            " exceeds cap " + std::to_string(max_codebook));
    }

    const auto round_size = [](double ln_m) {
        const long long r = std::llround(std::exp(ln_m));
        return static_cast<std::uint64_t>(std::max(1LL, r));
    };

    CodebookPlan plan;
    plan.cb = CodebookParams::make(round_size(ln_m_r), round_size(ln_m_d));
    if (plan.cb.M_S > max_codebook) {
        throw ResourceError("plan_codebook: codebook size " + std::to_string(plan.cb.M_S) +
                            " exceeds cap " + std::to_string(max_codebook));
    }
    plan.thresholds = make_thresholds(p);
    plan.target_rate = target_rate;
    const double k = p.theta / (static_cast<double>(p.N) * p.T_s);
    plan.R_1 = k * std::log(static_cast<double>(plan.cb.M_R));
    plan.R_2 = k * std::log(static_cast<double>(plan.cb.M_D));
    plan.achieved_rate = k * std::log(static_cast<double>(plan.cb.M_S));
    return plan;
}

Bandwidths bandwidths(const CodebookParams& cb, const SystemParams& p) {
    p.validate();
    cb.validate();
    const double window = p.T_s - 2.0 * p.T_d;
    return Bandwidths{static_cast<double>(cb.M_S) / window,
                      static_cast<double>(cb.M_R) / window};
}

double g_function(double A, double u) {
    if (!(u >= 0.0 && u < 1.0)) {
        throw std::domain_error("g_function: u must be in [0, 1)");
    }
    return A * u + std::log1p(-u);
}

double chernoff_exponent(double A) {
    if (!(A > 1.0)) {
        throw std::domain_error("chernoff_exponent: threshold must be > 1");
    }
    return A - 1.0 - std::log(A);
}

double chernoff_rate_limit(const SystemParams& p) {
    p.validate();
    const Thresholds th = make_thresholds(p);
    const auto cexp = [](double A) { return A > 1.0 ? A - 1.0 - std::log(A) : 0.0; };
    const double k = p.theta / p.T_s;
    const Regime reg = classify_regime(p);
    if (reg.tag == RegimeTag::Direct) {
        return k * cexp(th.B_S);
    }
    const double sum = reg.R_1 + reg.R_2;
    const double s1 = reg.R_1 / sum;
    const double s2 = reg.R_2 / sum;
    double lim = cexp(th.A_R);
    if (s1 > 0.0) lim = std::min(lim, cexp(th.B_R) / s1);
    if (s2 > 0.0) lim = std::min(lim, cexp(th.B_S) / s2);
    return k * lim;
}

ChernoffBounds chernoff_error_bounds(const SystemParams& p, const CodebookParams& cb,
                                     const Thresholds& th) {
    p.validate();
    cb.validate();
    const double rho = peak_snr(p).rho;
    const double n = static_cast<double>(p.N);

    const auto stage = [&](double A, double sigma_sq, double ln_m) {
        StageBound s;
        s.miss_term = exact_tails(p.N, A, sigma_sq).P_below;
        if (A <= 1.0) {
            s.exp_term = 1.0;
            s.clamped = true;
            return s;
        }
        const double t = ln_m - n * chernoff_exponent(A);
        if (t >= 0.0) {
            s.exp_term = 1.0;
            s.clamped = true;
        } else {
            s.exp_term = std::exp(t);
        }
        return s;
    };

    ChernoffBounds out;
    if (cb.M_R > 1) {
        out.e11 = stage(th.A_R, 1.0 + p.a_sq * rho, std::log(static_cast<double>(cb.M_S)));
        out.e12 = stage(th.B_R, 1.0 + p.b_sq * p.gamma * rho, std::log(static_cast<double>(cb.M_R)));
    }
    out.e2 = stage(th.B_S, 1.0 + rho, std::log(static_cast<double>(cb.M_D)));
    return out;
}

double regularized_gamma_p(double a, double x) {
    if (!(a > 0.0)) throw std::domain_error("regularized_gamma_p: a must be > 0");
    if (!(x >= 0.0)) throw std::domain_error("regularized_gamma_p: x must be >= 0");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) {
        return gamma_p_series(a, x);
    }
    return 1.0 - std::exp(gamma_log_prefactor(a, x)) * gamma_q_cf_factor(a, x);
}

GammaTails exact_tails(std::uint32_t N, double A, double sigma_sq) {
    check_tail_domain(N, A, sigma_sq);
    const double a = static_cast<double>(N);
    const double x = a * A / sigma_sq;
    if (x < a + 1.0) {
        const double below = gamma_p_series(a, x);
        return GammaTails{below, 1.0 - below};
    }
    const double above = std::exp(gamma_log_prefactor(a, x)) * gamma_q_cf_factor(a, x);
    return GammaTails{1.0 - above, above};
}

double exact_tail_log_upper(std::uint32_t N, double A, double sigma_sq) {
    check_tail_domain(N, A, sigma_sq);
    const double a = static_cast<double>(N);
    const double x = a * A / sigma_sq;
    if (x < a + 1.0) {
        return std::log1p(-gamma_p_series(a, x));
    }
    return gamma_log_prefactor(a, x) + std::log(gamma_q_cf_factor(a, x));
}

ExactErrorReport exact_end_to_end(const SystemParams& p, const CodebookParams& cb,
                                  const Thresholds& th) {
    p.validate();
    cb.validate();
    const double rho = peak_snr(p).rho;

    ExactErrorReport r;
    r.p_miss_relay = exact_tails(p.N, th.A_R, 1.0 + p.a_sq * rho).P_below;
    r.p_fa_relay = exact_tails(p.N, th.A_R, 1.0).P_above;
    r.p_miss_destR = exact_tails(p.N, th.B_R, 1.0 + p.b_sq * p.gamma * rho).P_below;
    r.p_fa_destR = exact_tails(p.N, th.B_R, 1.0).P_above;
    r.p_miss_destS = exact_tails(p.N, th.B_S, 1.0 + rho).P_below;
    r.p_fa_destS = exact_tails(p.N, th.B_S, 1.0).P_above;

    const double m_d = static_cast<double>(cb.M_D);
    const double m_r = static_cast<double>(cb.M_R);

    double q_relay = 1.0;
    double p_bin = 1.0;
    if (cb.M_R > 1) {
        // Relay success: the sent bin fires and no other bin fires.
        const double sent_bin_fires =
            1.0 - r.p_miss_relay * std::pow(1.0 - r.p_fa_relay, m_d - 1.0);
        q_relay = sent_bin_fires * std::pow(1.0 - r.p_fa_relay, m_d * (m_r - 1.0));
        // Bin stage success: the forwarded column fires alone.
        p_bin = (1.0 - r.p_miss_destR) * std::pow(1.0 - r.p_fa_destR, m_r - 1.0);
    }
    // Within-bin success over the true bin: the sent column fires alone.
    const double p_msg = (1.0 - r.p_miss_destS) * std::pow(1.0 - r.p_fa_destS, m_d - 1.0);

    r.p_e11 = 1.0 - q_relay;
    r.p_e12 = 1.0 - p_bin;
    r.p_e2 = 1.0 - p_msg;
    r.p_e_total = 1.0 - q_relay * p_bin * p_msg;
    return r;
}

}  // namespace relaysim
