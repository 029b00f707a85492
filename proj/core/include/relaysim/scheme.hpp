#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "relaysim/binning.hpp"
#include "relaysim/channel.hpp"

namespace relaysim {

// Detection thresholds, each a (1 - margin) fraction of the way from the
// noise floor to the signal column's mean energy:
//   A_R = 1 + (1-eps)  * a^2 * rho      (relay, SR link)
//   B_R = 1 + (1-eps1) * b^2 * gamma * rho  (destination bin, RD link)
//   B_S = 1 + (1-eps2) * rho            (destination within-bin, SD link)
struct Thresholds {
    double A_R = 1.0;
    double B_R = 1.0;
    double B_S = 1.0;
};

Thresholds make_thresholds(const SystemParams& params);

// First stage that failed against the transmitted message:
//   e11  relay decoded a wrong bin or declared an error
//   e12  relay correct, destination bin stage wrong or declared
//   e2   bin stages correct, within-bin stage wrong or declared
// none means every stage matched the truth, which implies the final message
// estimate is present and equal to the transmitted one. The converse does not
// hold: a trial tagged e11 can still carry a final estimate reached through
// later-stage false alarms.
enum class ErrorType { none, e11, e12, e2 };

struct DecodeOutcome {
    std::optional<std::uint64_t> relay_bin;     // relay bin estimate
    std::optional<std::uint64_t> dest_bin;      // destination bin estimate
    std::optional<std::uint64_t> dest_message;  // final message estimate
    ErrorType error_type = ErrorType::none;
};

// Truth-gated stage classification shared by the trial engines. With M_R == 1
// the relay and bin stages are vacuous and only e2 can occur.
ErrorType classify_outcome(std::uint64_t m, const CodebookParams& cb,
                           const std::optional<std::uint64_t>& relay_bin,
                           const std::optional<std::uint64_t>& dest_bin,
                           const std::optional<std::uint64_t>& dest_message);

// S_k = (1/N) * sum_n |entry(n, k)|^2 per column.
std::vector<double> decision_stats(const CorrelationBlock& block);

// Relay bin decision: the set of bins containing at least one frequency with
// S_k >= A_R must be a singleton, otherwise a declared error (nullopt).
std::optional<std::uint64_t> relay_decode(const std::vector<double>& stats,
                                          double A_R, const CodebookParams& cb);

// Phase-2 transmission of the bin index over the RD link with M_R candidate
// frequencies. A declared relay error produces a noise-only block.
CorrelationBlock relay_forward(std::optional<std::uint64_t> m1_hat,
                               const SystemParams& params,
                               const CodebookParams& cb, Rng& rng);

// Destination step 1: {k : stats[k] >= B_R} must be a singleton.
std::optional<std::uint64_t> dest_decode_bin(const std::vector<double>& stats_rd,
                                             double B_R);

// Destination step 2 on the stats of one bin: {l : stats[l] >= B_S} must be a
// singleton. Returns the within-bin offset.
std::optional<std::uint64_t> dest_decode_within_bin(
    const std::vector<double>& stats_bin, double B_S);

// One end-to-end trial over materialized correlation blocks. Blocks are drawn
// in SR, SD, RD order. With M_R == 1 the relay is bypassed and the
// destination decodes within the single bin over all M_S frequencies.
DecodeOutcome run_trial(std::uint64_t m, const SystemParams& params,
                        const CodebookParams& cb, const Thresholds& th,
                        Rng& rng);

}  // namespace relaysim
