#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace relaysim {

using cdouble = std::complex<double>;

// All randomness flows through mt19937_64. Uniform doubles are built from the
// top 53 bits of one engine output, complex normals via Box-Muller on two
// uniforms, so streams are reproducible for a fixed seed on any platform.
using Rng = std::mt19937_64;

enum class Link { SR, SD, RD };

// Channel and scheme scalars. Total link gains are relative to the
// source->destination link, which is normalized to 1.
struct SystemParams {
    double a_sq = 1.0;      // source->relay total gain
    double b_sq = 1.0;      // relay->destination total gain
    double gamma = 1.0;     // relay/source power ratio, P_R = gamma * P_S
    double snr_base = 1.0;  // P_S / N_0, 1/s
    double T_s = 1.0;       // symbol duration, s
    double T_d = 0.0;       // delay spread, s
    double T_c = 1.0;       // coherence time, s
    double theta = 1.0;     // duty factor in (0, 1]
    std::uint32_t N = 1;    // repetition count
    double eps = 0.2;       // relay threshold margin
    double eps1 = 0.2;      // destination bin threshold margin
    double eps2 = 0.2;      // destination within-bin threshold margin

    void validate() const;
};

// Per-correlation peak SNR: rho = (P_S/N_0) * (T_s - 2*T_d) / theta.
struct PeakSnr {
    double rho = 0.0;
};

PeakSnr peak_snr(const SystemParams& params);

// Total gain of a link: a_sq (SR), 1 (SD), b_sq (RD).
double link_gain(Link link, const SystemParams& params);

// Power scale multiplying the unit-variance-per-gain signal term:
// rho for SR and SD, gamma * rho for RD. The per-entry signal variance is
// link_gain * signal_power_scale.
double signal_power_scale(Link link, const SystemParams& params);

// Per-repetition aggregate complex gains G(n) of one link.
struct GainSequence {
    Link link = Link::SD;
    std::vector<cdouble> values;
};

// N x M complex correlator outputs for one link, stored column-major.
// Entry (n, k) = delta_{k,sent} * sqrt(signal_power_scale) * G(n) + W_k(n)
// with W_k(n) i.i.d. CN(0, 1). sent == nullopt means noise only.
struct CorrelationBlock {
    Link link = Link::SD;
    std::uint32_t N = 0;
    std::uint64_t M = 0;
    std::optional<std::uint64_t> sent;
    std::vector<cdouble> data;

    cdouble& at(std::uint32_t n, std::uint64_t k) { return data[k * N + n]; }
    const cdouble& at(std::uint32_t n, std::uint64_t k) const { return data[k * N + n]; }
};

// Uniform double in [0, 1) from one engine output.
double draw_uniform(Rng& rng);

// One CN(0, 1) draw (real and imaginary parts N(0, 1/2)).
cdouble draw_cn(Rng& rng);

// N i.i.d. CN(0, link_gain) draws, one per repetition.
GainSequence draw_gains(Link link, const SystemParams& params, Rng& rng);

// Aggregate gain as an explicit sum of L paths, each a CN(0, total_gain/L)
// amplitude times an independent uniform phasor. Validation mode for the
// Gaussian gain model; the aggregate is exactly CN(0, total_gain) at every L.
// Per path, the amplitude is drawn before the phase.
cdouble path_sum_gain(std::uint32_t L, double total_gain, Rng& rng);

// Build one correlation block. Draw order: the N gains first (skipped for
// noise-only blocks), then noise column-major (columns outer, repetitions
// inner). The signal term is added to the sent column without extra draws.
CorrelationBlock make_correlations(Link link, std::optional<std::uint64_t> sent,
                                   std::uint64_t M, const SystemParams& params,
                                   Rng& rng);

}  // namespace relaysim
