#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "relaysim/analysis.hpp"

namespace relaysim {

// Block materializes correlation blocks and runs the threshold decoders on
// them. Counts samples the per-stage threshold-crossing pattern directly from
// the exact column tail probabilities; the decision statistics enter the
// decoders only through that pattern, so both engines draw the trial outcome
// from the same distribution. Counts stays O(1) per trial in the codebook
// size, which is what makes large planned codebooks simulable.
enum class Engine { Block, Counts };

enum class EmitFormat { Csv, JsonLines };

struct ExperimentConfig {
    SystemParams params;
    std::optional<CodebookParams> codebook;  // explicit sizes
    std::optional<double> rate_fraction;     // plan at this fraction of chernoff_rate_limit
    std::uint64_t n_trials = 1000;
    std::uint64_t base_seed = 1;
    Engine engine = Engine::Block;
    std::uint64_t max_codebook = 1'000'000;
    unsigned threads = 0;  // 0 = hardware concurrency
    // Cartesian sweep axes in declaration order (first axis outermost).
    std::vector<std::pair<std::string, std::vector<double>>> axes;

    // Requires exactly one of codebook / rate_fraction.
    void validate() const;
};

// Codebook, thresholds and achieved rates for one experiment point.
struct ResolvedCodebook {
    CodebookParams cb;
    Thresholds th;
    std::optional<double> target_rate;  // set when planned from rate_fraction
    double achieved_rate = 0.0;         // nats/s
    double R_1 = 0.0;
    double R_2 = 0.0;
};

ResolvedCodebook resolve_codebook(const ExperimentConfig& cfg);

struct WilsonInterval {
    double lo = 0.0;
    double hi = 1.0;
};

// z-quantiles pinned as constants so intervals are identical across builds.
inline constexpr double kZ95 = 1.959963984540054;
inline constexpr double kZ99 = 2.5758293035489004;

WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t n, double z);

struct TrialBatchResult {
    std::uint64_t n_trials = 0;
    std::uint64_t n_none = 0;
    std::uint64_t n_e11 = 0;
    std::uint64_t n_e12 = 0;
    std::uint64_t n_e2 = 0;
    double p_e_hat = 0.0;       // (n_trials - n_none) / n_trials
    double ci_halfwidth = 0.0;  // half of the 95% Wilson interval width
    ExactErrorReport exact;
    ChernoffBounds bounds;
    double wall_seconds = 0.0;
};

// Per-trial seed: splitmix64 finalizer of base_seed + (index + 1) * golden
// gamma. Trials are independent streams, so execution order cannot matter.
std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t trial_index);

// Uniform index in [0, m) by rejection on the raw 64-bit engine output.
// m == 1 returns 0 without consuming a draw.
std::uint64_t uniform_index(Rng& rng, std::uint64_t m);

// n_trials independent trials. Each trial seeds its own generator, draws the
// message uniformly, then runs the configured engine. Aggregation is a
// commutative count sum, so threaded and serial runs agree exactly.
TrialBatchResult run_batch(const ExperimentConfig& cfg);

struct SweepRecord {
    std::vector<std::pair<std::string, double>> axis;  // axis values at this point
    SystemParams params;
    std::optional<double> rate_fraction;
    Engine engine = Engine::Block;
    std::uint64_t n_trials = 0;
    std::uint64_t base_seed = 0;
    RateReport rates;
    Regime regime;
    std::optional<ResolvedCodebook> resolved;
    std::optional<Bandwidths> bw;
    std::optional<TrialBatchResult> batch;
    std::string status = "ok";  // "ok" or the point's failure message
};

using SweepProgress =
    std::function<void(std::size_t index, std::size_t total, const SweepRecord& rec)>;

// Cartesian product of cfg.axes, one batch per point. Per-point failures are
// recorded in the record's status and the sweep continues.
std::vector<SweepRecord> sweep(const ExperimentConfig& cfg,
                               const SweepProgress& progress = {});

// Explicit per-point override lists instead of a Cartesian product.
std::vector<SweepRecord> sweep_cells(
    const ExperimentConfig& base,
    const std::vector<std::vector<std::pair<std::string, double>>>& cells,
    const SweepProgress& progress = {});

// Set one sweepable scalar. Keys: a_sq, b_sq, gamma, snr_base, T_s, T_d, T_c,
// theta, N, eps, eps1, eps2, M_R, M_D, n_trials, rate_fraction.
void apply_axis_value(ExperimentConfig& cfg, const std::string& key, double value);

// Fixed CSV column order; documented in docs/schema.md.
const std::vector<std::string>& csv_columns();

// Floats are serialized with "%.17g" in both formats. CSV carries no
// wall-clock field, so identical seeds give byte-identical files; JSON lines
// add schema_version and wall_seconds.
std::string render_csv(const std::vector<SweepRecord>& records);
std::string render_jsonl(const std::vector<SweepRecord>& records);

void emit(const std::vector<SweepRecord>& records, EmitFormat format,
          const std::string& path);

}  // namespace relaysim
