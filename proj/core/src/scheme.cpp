#include "relaysim/scheme.hpp"

#include <stdexcept>
#include <string>

namespace relaysim {

Thresholds make_thresholds(const SystemParams& params) {
    const double rho = peak_snr(params).rho;
    Thresholds th;
    th.A_R = 1.0 + (1.0 - params.eps) * params.a_sq * rho;
    th.B_R = 1.0 + (1.0 - params.eps1) * params.b_sq * params.gamma * rho;
    th.B_S = 1.0 + (1.0 - params.eps2) * rho;
    return th;
}

ErrorType classify_outcome(std::uint64_t m, const CodebookParams& cb,
                           const std::optional<std::uint64_t>& relay_bin,
                           const std::optional<std::uint64_t>& dest_bin,
                           const std::optional<std::uint64_t>& dest_message) {
    const Message truth = split(m, cb);
    if (cb.M_R > 1) {
        if (!relay_bin || *relay_bin != truth.m1) return ErrorType::e11;
        if (!dest_bin || *dest_bin != truth.m1) return ErrorType::e12;
    }
    if (!dest_message || *dest_message != m) return ErrorType::e2;
    return ErrorType::none;
}

std::vector<double> decision_stats(const CorrelationBlock& block) {
    if (block.N < 1) throw std::invalid_argument("decision_stats: block has no rows");
    if (block.M < 1) throw std::invalid_argument("decision_stats: block has no columns");
    std::vector<double> stats(block.M);
    for (std::uint64_t k = 0; k < block.M; ++k) {
        double acc = 0.0;
        for (std::uint32_t n = 0; n < block.N; ++n) {
            acc += std::norm(block.at(n, k));
        }
        stats[k] = acc / static_cast<double>(block.N);
    }
    return stats;
}

std::optional<std::uint64_t> relay_decode(const std::vector<double>& stats,
                                          double A_R, const CodebookParams& cb) {
    cb.validate();
    if (stats.size() != cb.M_S) {
        throw std::invalid_argument("relay_decode: expected " + std::to_string(cb.M_S) +
                                    " stats, got " + std::to_string(stats.size()));
    }
    std::uint64_t fired_bins = 0;
    std::uint64_t last_bin = 0;
    bool have_last = false;
    for (std::uint64_t k = 0; k < cb.M_S; ++k) {
        if (stats[k] >= A_R) {
            const std::uint64_t bin = k / cb.M_D;
            if (!have_last || bin != last_bin) {
                ++fired_bins;
                last_bin = bin;
                have_last = true;
            }
        }
    }
    if (fired_bins == 1) return last_bin;
    return std::nullopt;
}

CorrelationBlock relay_forward(std::optional<std::uint64_t> m1_hat,
                               const SystemParams& params,
                               const CodebookParams& cb, Rng& rng) {
    cb.validate();
    if (m1_hat && *m1_hat >= cb.M_R) {
        throw std::out_of_range("relay_forward: bin index " + std::to_string(*m1_hat) +
                                " not in [0, " + std::to_string(cb.M_R) + ")");
    }
    return make_correlations(Link::RD, m1_hat, cb.M_R, params, rng);
}

std::optional<std::uint64_t> dest_decode_bin(const std::vector<double>& stats_rd,
                                             double B_R) {
    if (stats_rd.empty()) throw std::invalid_argument("dest_decode_bin: empty stats");
    std::uint64_t fired = 0;
    std::uint64_t last = 0;
    for (std::uint64_t k = 0; k < stats_rd.size(); ++k) {
        if (stats_rd[k] >= B_R) {
            ++fired;
            last = k;
        }
    }
    if (fired == 1) return last;
    return std::nullopt;
}

std::optional<std::uint64_t> dest_decode_within_bin(
    const std::vector<double>& stats_bin, double B_S) {
    if (stats_bin.empty()) throw std::invalid_argument("dest_decode_within_bin: empty stats");
    std::uint64_t fired = 0;
    std::uint64_t last = 0;
    for (std::uint64_t l = 0; l < stats_bin.size(); ++l) {
        if (stats_bin[l] >= B_S) {
            ++fired;
            last = l;
        }
    }
    if (fired == 1) return last;
    return std::nullopt;
}

DecodeOutcome run_trial(std::uint64_t m, const SystemParams& params,
                        const CodebookParams& cb, const Thresholds& th,
                        Rng& rng) {
    params.validate();
    cb.validate();
    if (m >= cb.M_S) {
        throw std::out_of_range("run_trial: message " + std::to_string(m) +
                                " not in [0, " + std::to_string(cb.M_S) + ")");
    }

    DecodeOutcome out;

    if (cb.M_R == 1) {
        const CorrelationBlock sd = make_correlations(Link::SD, m, cb.M_S, params, rng);
        out.dest_bin = 0;
        const auto m2 = dest_decode_within_bin(decision_stats(sd), th.B_S);
        if (m2) out.dest_message = join(0, *m2, cb);
        out.error_type = classify_outcome(m, cb, out.relay_bin, out.dest_bin, out.dest_message);
        return out;
    }

    const CorrelationBlock sr = make_correlations(Link::SR, m, cb.M_S, params, rng);
    const CorrelationBlock sd = make_correlations(Link::SD, m, cb.M_S, params, rng);

    out.relay_bin = relay_decode(decision_stats(sr), th.A_R, cb);

    const CorrelationBlock rd = relay_forward(out.relay_bin, params, cb, rng);
    out.dest_bin = dest_decode_bin(decision_stats(rd), th.B_R);

    if (out.dest_bin) {
        const std::vector<double> stats_sd = decision_stats(sd);
        const auto first = stats_sd.begin() + static_cast<std::ptrdiff_t>(*out.dest_bin * cb.M_D);
        const std::vector<double> bin_stats(first, first + static_cast<std::ptrdiff_t>(cb.M_D));
        const auto m2 = dest_decode_within_bin(bin_stats, th.B_S);
        if (m2) out.dest_message = join(*out.dest_bin, *m2, cb);
    }

    out.error_type = classify_outcome(m, cb, out.relay_bin, out.dest_bin, out.dest_message);
    return out;
}

}  // namespace relaysim
