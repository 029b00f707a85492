#include "relaysim/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace relaysim {

void SystemParams::validate() const {
    if (!(a_sq >= 0.0)) throw std::invalid_argument("SystemParams: a_sq must be >= 0");
    if (!(b_sq >= 0.0)) throw std::invalid_argument("SystemParams: b_sq must be >= 0");
    if (!(gamma >= 0.0)) throw std::invalid_argument("SystemParams: gamma must be >= 0");
    if (!(snr_base > 0.0)) throw std::invalid_argument("SystemParams: snr_base must be > 0");
    if (!(T_s > 0.0)) throw std::invalid_argument("SystemParams: T_s must be > 0");
    if (!(T_d >= 0.0)) throw std::invalid_argument("SystemParams: T_d must be >= 0");
    if (!(T_c > 0.0)) throw std::invalid_argument("SystemParams: T_c must be > 0");
    if (!(T_s <= T_c)) throw std::invalid_argument("SystemParams: T_s must be <= T_c");
    if (!(2.0 * T_d < T_s)) throw std::invalid_argument("SystemParams: 2*T_d must be < T_s");
    if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("SystemParams: theta must be in (0, 1]");
    if (N < 1) throw std::invalid_argument("SystemParams: N must be >= 1");
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("SystemParams: eps must be in (0, 1)");
    if (!(eps1 > 0.0 && eps1 < 1.0)) throw std::invalid_argument("SystemParams: eps1 must be in (0, 1)");
    if (!(eps2 > 0.0 && eps2 < 1.0)) throw std::invalid_argument("SystemParams: eps2 must be in (0, 1)");
}

PeakSnr peak_snr(const SystemParams& params) {
    params.validate();
    return PeakSnr{params.snr_base * (params.T_s - 2.0 * params.T_d) / params.theta};
}

double link_gain(Link link, const SystemParams& params) {
    switch (link) {
        case Link::SR: return params.a_sq;
        case Link::SD: return 1.0;
        case Link::RD: return params.b_sq;
    }
    throw std::invalid_argument("link_gain: unknown link");
}

double signal_power_scale(Link link, const SystemParams& params) {
    const double rho = peak_snr(params).rho;
    return link == Link::RD ? params.gamma * rho : rho;
}

double draw_uniform(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

cdouble draw_cn(Rng& rng) {
    const double u1 = 1.0 - draw_uniform(rng);  // (0, 1], keeps log finite
    const double u2 = draw_uniform(rng);
    const double r = std::sqrt(-std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    return cdouble{r * std::cos(phi), r * std::sin(phi)};
}

GainSequence draw_gains(Link link, const SystemParams& params, Rng& rng) {
    params.validate();
    const double amp = std::sqrt(link_gain(link, params));
    GainSequence seq;
    seq.link = link;
    seq.values.resize(params.N);
    for (auto& g : seq.values) {
        g = amp * draw_cn(rng);
    }
    return seq;
}

cdouble path_sum_gain(std::uint32_t L, double total_gain, Rng& rng) {
    if (L < 1) throw std::invalid_argument("path_sum_gain: L must be >= 1");
    if (!(total_gain >= 0.0)) throw std::invalid_argument("path_sum_gain: total_gain must be >= 0");
    const double amp = std::sqrt(total_gain / static_cast<double>(L));
    cdouble sum{0.0, 0.0};
    for (std::uint32_t l = 0; l < L; ++l) {
        const cdouble a = amp * draw_cn(rng);
        const double phi = 2.0 * std::numbers::pi * draw_uniform(rng);
        sum += a * cdouble{std::cos(phi), std::sin(phi)};
    }
    return sum;
}

CorrelationBlock make_correlations(Link link, std::optional<std::uint64_t> sent,
                                   std::uint64_t M, const SystemParams& params,
                                   Rng& rng) {
    params.validate();
    if (M < 1) throw std::invalid_argument("make_correlations: M must be >= 1");
    if (sent && *sent >= M) {
        throw std::out_of_range("make_correlations: sent index " + std::to_string(*sent) +
                                " not in [0, " + std::to_string(M) + ")");
    }

    CorrelationBlock block;
    block.link = link;
    block.N = params.N;
    block.M = M;
    block.sent = sent;

    GainSequence gains;
    double sig_amp = 0.0;
    if (sent) {
        gains = draw_gains(link, params, rng);
        sig_amp = std::sqrt(signal_power_scale(link, params));
    }

    block.data.resize(static_cast<std::size_t>(params.N) * M);
    for (auto& w : block.data) {
        w = draw_cn(rng);
    }
    if (sent) {
        for (std::uint32_t n = 0; n < params.N; ++n) {
            block.at(n, *sent) += sig_amp * gains.values[n];
        }
    }
    return block;
}

}  // namespace relaysim
