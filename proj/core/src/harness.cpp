#include "relaysim/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace relaysim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

bool draw_bernoulli(Rng& rng, double p) { return draw_uniform(rng) < p; }

// Exceedance pattern probabilities for the Counts engine, all derived from
// the exact column tails of the configured thresholds.
struct CountsCtx {
    CodebookParams cb;
    double hit_sr = 0.0;       // sent SR column crosses A_R
    double sentbin_fa = 0.0;   // >= 1 false alarm among the sent bin's other columns
    double otherbin_fire = 0.0;  // a non-sent bin contains >= 1 crossing
    double hit_rd = 0.0;       // forwarded RD column crosses B_R
    double fa_rd = 0.0;        // noise RD column crosses B_R
    double hit_sd = 0.0;       // sent SD column crosses B_S
    double fa_sd = 0.0;        // noise SD column crosses B_S
};

CountsCtx make_counts_ctx(const SystemParams& p, const CodebookParams& cb,
                          const Thresholds& th) {
    const double rho = peak_snr(p).rho;
    CountsCtx ctx;
    ctx.cb = cb;
    ctx.hit_sr = exact_tails(p.N, th.A_R, 1.0 + p.a_sq * rho).P_above;
    const double fa_sr = exact_tails(p.N, th.A_R, 1.0).P_above;
    const double md = static_cast<double>(cb.M_D);
    ctx.sentbin_fa = -std::expm1((md - 1.0) * std::log1p(-fa_sr));
    ctx.otherbin_fire = -std::expm1(md * std::log1p(-fa_sr));
    ctx.hit_rd = exact_tails(p.N, th.B_R, 1.0 + p.b_sq * p.gamma * rho).P_above;
    ctx.fa_rd = exact_tails(p.N, th.B_R, 1.0).P_above;
    ctx.hit_sd = exact_tails(p.N, th.B_S, 1.0 + rho).P_above;
    ctx.fa_sd = exact_tails(p.N, th.B_S, 1.0).P_above;
    return ctx;
}

// 0, 1 or 2 (meaning ">= 2") successes among n i.i.d. Bernoulli(p) columns,
// drawn from the exact category probabilities on one uniform.
int draw_count_category(Rng& rng, std::uint64_t n, double p) {
    if (n == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n >= 2 ? 2 : 1;
    const double nd = static_cast<double>(n);
    const double l1p = std::log1p(-p);
    const double p0 = std::exp(nd * l1p);
    const double p1 = std::exp(std::log(nd) + std::log(p) + (nd - 1.0) * l1p);
    const double u = draw_uniform(rng);
    if (u < p0) return 0;
    if (u < p0 + p1) return 1;
    return 2;
}

// Same outcome distribution as scheme::run_trial: the decoders only see
// which columns crossed their thresholds, columns are independent, and a
// lone crossing is uniform over its candidates by exchangeability.
DecodeOutcome run_trial_counts(std::uint64_t m, const CountsCtx& ctx, Rng& rng) {
    const CodebookParams& cb = ctx.cb;
    const Message truth = split(m, cb);
    DecodeOutcome out;

    if (cb.M_R > 1) {
        const bool sent_col = draw_bernoulli(rng, ctx.hit_sr);
        const bool sent_bin = draw_bernoulli(rng, ctx.sentbin_fa) || sent_col;
        const int others = draw_count_category(rng, cb.M_R - 1, ctx.otherbin_fire);
        if (sent_bin && others == 0) {
            out.relay_bin = truth.m1;
        } else if (!sent_bin && others == 1) {
            const std::uint64_t idx = uniform_index(rng, cb.M_R - 1);
            out.relay_bin = idx >= truth.m1 ? idx + 1 : idx;
        }

        if (out.relay_bin) {
            const bool fwd_col = draw_bernoulli(rng, ctx.hit_rd);
            const int rd_others = draw_count_category(rng, cb.M_R - 1, ctx.fa_rd);
            if (fwd_col && rd_others == 0) {
                out.dest_bin = *out.relay_bin;
            } else if (!fwd_col && rd_others == 1) {
                const std::uint64_t idx = uniform_index(rng, cb.M_R - 1);
                out.dest_bin = idx >= *out.relay_bin ? idx + 1 : idx;
            }
        } else {
            const int fired = draw_count_category(rng, cb.M_R, ctx.fa_rd);
            if (fired == 1) out.dest_bin = uniform_index(rng, cb.M_R);
        }
    } else {
        out.dest_bin = 0;
    }

    if (out.dest_bin) {
        if (*out.dest_bin == truth.m1) {
            const bool sent_col = draw_bernoulli(rng, ctx.hit_sd);
            const int others = draw_count_category(rng, cb.M_D - 1, ctx.fa_sd);
            if (sent_col && others == 0) {
                out.dest_message = m;
            } else if (!sent_col && others == 1) {
                const std::uint64_t idx = uniform_index(rng, cb.M_D - 1);
                out.dest_message = join(*out.dest_bin, idx >= truth.m2 ? idx + 1 : idx, cb);
            }
        } else {
            const int fired = draw_count_category(rng, cb.M_D, ctx.fa_sd);
            if (fired == 1) {
                out.dest_message = join(*out.dest_bin, uniform_index(rng, cb.M_D), cb);
            }
        }
    }

    out.error_type = classify_outcome(m, cb, out.relay_bin, out.dest_bin, out.dest_message);
    return out;
}

struct StageCounts {
    std::uint64_t none = 0;
    std::uint64_t e11 = 0;
    std::uint64_t e12 = 0;
    std::uint64_t e2 = 0;

    void add(ErrorType t) {
        switch (t) {
            case ErrorType::none: ++none; break;
            case ErrorType::e11: ++e11; break;
            case ErrorType::e12: ++e12; break;
            case ErrorType::e2: ++e2; break;
        }
    }
    void merge(const StageCounts& o) {
        none += o.none;
        e11 += o.e11;
        e12 += o.e12;
        e2 += o.e2;
    }
};

TrialBatchResult run_batch_resolved(const ExperimentConfig& cfg, const ResolvedCodebook& rc) {
    const auto t0 = std::chrono::steady_clock::now();

    const SystemParams& p = cfg.params;
    const CodebookParams& cb = rc.cb;
    const Thresholds& th = rc.th;
    CountsCtx ctx;
    if (cfg.engine == Engine::Counts) ctx = make_counts_ctx(p, cb, th);

    const auto run_range = [&](std::uint64_t lo, std::uint64_t hi, StageCounts& out) {
        for (std::uint64_t i = lo; i < hi; ++i) {
            Rng rng(trial_seed(cfg.base_seed, i));
            const std::uint64_t m = uniform_index(rng, cb.M_S);
            const DecodeOutcome outcome = cfg.engine == Engine::Counts
                                              ? run_trial_counts(m, ctx, rng)
                                              : run_trial(m, p, cb, th, rng);
            out.add(outcome.error_type);
        }
    };

    unsigned n_threads = cfg.threads != 0 ? cfg.threads : std::thread::hardware_concurrency();
    if (n_threads == 0) n_threads = 1;
    n_threads = static_cast<unsigned>(
        std::min<std::uint64_t>(n_threads, std::max<std::uint64_t>(1, cfg.n_trials / 256)));

    StageCounts total;
    if (n_threads <= 1) {
        run_range(0, cfg.n_trials, total);
    } else {
        std::vector<StageCounts> partial(n_threads);
        std::vector<std::thread> workers;
        std::exception_ptr first_error;
        std::mutex error_mutex;
        const std::uint64_t chunk = (cfg.n_trials + n_threads - 1) / n_threads;
        for (unsigned t = 0; t < n_threads; ++t) {
            const std::uint64_t lo = static_cast<std::uint64_t>(t) * chunk;
            const std::uint64_t hi = std::min(cfg.n_trials, lo + chunk);
            if (lo >= hi) break;
            workers.emplace_back([&, t, lo, hi] {
                try {
                    run_range(lo, hi, partial[t]);
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            });
        }
        for (auto& w : workers) w.join();
        if (first_error) std::rethrow_exception(first_error);
        for (const auto& c : partial) total.merge(c);
    }

    TrialBatchResult res;
    res.n_trials = cfg.n_trials;
    res.n_none = total.none;
    res.n_e11 = total.e11;
    res.n_e12 = total.e12;
    res.n_e2 = total.e2;
    const std::uint64_t errors = cfg.n_trials - total.none;
    res.p_e_hat = static_cast<double>(errors) / static_cast<double>(cfg.n_trials);
    const WilsonInterval w = wilson_interval(errors, cfg.n_trials, kZ95);
    res.ci_halfwidth = (w.hi - w.lo) / 2.0;
    res.exact = exact_end_to_end(p, cb, th);
    res.bounds = chernoff_error_bounds(p, cb, th);
    res.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

void run_point(const ExperimentConfig& pt, SweepRecord& rec) {
    rec.params = pt.params;
    rec.rate_fraction = pt.rate_fraction;
    rec.engine = pt.engine;
    rec.n_trials = pt.n_trials;
    rec.base_seed = pt.base_seed;
    try {
        pt.validate();
        rec.rates = rate_report(pt.params);
        rec.regime = classify_regime(pt.params);
        const ResolvedCodebook rc = resolve_codebook(pt);
        rec.resolved = rc;
        rec.bw = bandwidths(rc.cb, pt.params);
        rec.batch = run_batch_resolved(pt, rc);
        rec.status = "ok";
    } catch (const std::exception& e) {
        rec.status = e.what();
    }
}

std::string fmt_double(double v) {
    if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

const char* engine_name(Engine e) { return e == Engine::Counts ? "counts" : "block"; }

const char* regime_name(RegimeTag t) {
    switch (t) {
        case RegimeTag::Direct: return "Direct";
        case RegimeTag::RelayLimitedBySR: return "RelayLimitedBySR";
        case RegimeTag::RelayLimitedByMACut: return "RelayLimitedByMACut";
    }
    return "?";
}

// Typed cell so CSV and JSON lines render the same record identically.
struct Cell {
    enum class Kind { Missing, Num, Int, Bool, Str } kind = Kind::Missing;
    double num = 0.0;
    std::uint64_t integer = 0;
    bool boolean = false;
    std::string str;

    static Cell missing() { return {}; }
    static Cell of(double v) { Cell c; c.kind = Kind::Num; c.num = v; return c; }
    static Cell of_int(std::uint64_t v) { Cell c; c.kind = Kind::Int; c.integer = v; return c; }
    static Cell of_bool(bool v) { Cell c; c.kind = Kind::Bool; c.boolean = v; return c; }
    static Cell of_str(std::string v) { Cell c; c.kind = Kind::Str; c.str = std::move(v); return c; }
};

std::vector<Cell> record_cells(const SweepRecord& r) {
    std::vector<Cell> cells;
    cells.reserve(csv_columns().size());
    const auto opt_num = [](bool present, double v) {
        return present ? Cell::of(v) : Cell::missing();
    };

    const SystemParams& p = r.params;
    cells.push_back(Cell::of(p.a_sq));
    cells.push_back(Cell::of(p.b_sq));
    cells.push_back(Cell::of(p.gamma));
    cells.push_back(Cell::of(p.snr_base));
    cells.push_back(Cell::of(p.T_s));
    cells.push_back(Cell::of(p.T_d));
    cells.push_back(Cell::of(p.T_c));
    cells.push_back(Cell::of(p.theta));
    cells.push_back(Cell::of_int(p.N));
    cells.push_back(Cell::of(p.eps));
    cells.push_back(Cell::of(p.eps1));
    cells.push_back(Cell::of(p.eps2));
    cells.push_back(Cell::of_str(engine_name(r.engine)));
    cells.push_back(Cell::of_int(r.n_trials));
    cells.push_back(Cell::of_int(r.base_seed));

    const bool rc = r.resolved.has_value();
    cells.push_back(rc ? Cell::of_int(r.resolved->cb.M_S) : Cell::missing());
    cells.push_back(rc ? Cell::of_int(r.resolved->cb.M_R) : Cell::missing());
    cells.push_back(rc ? Cell::of_int(r.resolved->cb.M_D) : Cell::missing());
    cells.push_back(opt_num(rc, rc ? r.resolved->th.A_R : 0));
    cells.push_back(opt_num(rc, rc ? r.resolved->th.B_R : 0));
    cells.push_back(opt_num(rc, rc ? r.resolved->th.B_S : 0));
    cells.push_back(opt_num(r.bw.has_value(), r.bw ? r.bw->W_S : 0));
    cells.push_back(opt_num(r.bw.has_value(), r.bw ? r.bw->W_R : 0));

    cells.push_back(opt_num(r.rate_fraction.has_value(), r.rate_fraction.value_or(0)));
    const bool tgt = rc && r.resolved->target_rate.has_value();
    cells.push_back(opt_num(tgt, tgt ? *r.resolved->target_rate : 0));
    cells.push_back(opt_num(rc, rc ? r.resolved->achieved_rate : 0));
    cells.push_back(opt_num(rc, rc ? r.resolved->R_1 : 0));
    cells.push_back(opt_num(rc, rc ? r.resolved->R_2 : 0));

    cells.push_back(Cell::of(r.rates.min_cut));
    cells.push_back(Cell::of(r.rates.cutset_ub));
    cells.push_back(Cell::of(r.rates.block_markov_lb));
    cells.push_back(Cell::of_bool(r.rates.capacity_known));
    cells.push_back(Cell::of(r.rates.underspread_factor));
    cells.push_back(Cell::of_str(regime_name(r.regime.tag)));
    cells.push_back(Cell::of(r.regime.R_1));
    cells.push_back(Cell::of(r.regime.R_2));

    const bool b = r.batch.has_value();
    cells.push_back(opt_num(b, b ? r.batch->p_e_hat : 0));
    cells.push_back(opt_num(b, b ? r.batch->ci_halfwidth : 0));
    cells.push_back(b ? Cell::of_int(r.batch->n_none) : Cell::missing());
    cells.push_back(b ? Cell::of_int(r.batch->n_e11) : Cell::missing());
    cells.push_back(b ? Cell::of_int(r.batch->n_e12) : Cell::missing());
    cells.push_back(b ? Cell::of_int(r.batch->n_e2) : Cell::missing());
    cells.push_back(opt_num(b, b ? r.batch->exact.p_e_total : 0));
    cells.push_back(opt_num(b, b ? r.batch->exact.p_e11 : 0));
    cells.push_back(opt_num(b, b ? r.batch->exact.p_e12 : 0));
    cells.push_back(opt_num(b, b ? r.batch->exact.p_e2 : 0));
    cells.push_back(opt_num(b, b ? r.batch->exact.p_miss_relay : 0));
    cells.push_back(opt_num(b, b ? r.batch->exact.p_fa_relay : 0));
    cells.push_back(opt_num(b, b ? r.batch->exact.p_miss_destR : 0));
    cells.push_back(opt_num(b, b ? r.batch->exact.p_fa_destR : 0));
    cells.push_back(opt_num(b, b ? r.batch->exact.p_miss_destS : 0));
    cells.push_back(opt_num(b, b ? r.batch->exact.p_fa_destS : 0));
    cells.push_back(opt_num(b, b ? r.batch->bounds.e11.miss_term : 0));
    cells.push_back(opt_num(b, b ? r.batch->bounds.e11.exp_term : 0));
    cells.push_back(b ? Cell::of_bool(r.batch->bounds.e11.clamped) : Cell::missing());
    cells.push_back(opt_num(b, b ? r.batch->bounds.e12.miss_term : 0));
    cells.push_back(opt_num(b, b ? r.batch->bounds.e12.exp_term : 0));
    cells.push_back(b ? Cell::of_bool(r.batch->bounds.e12.clamped) : Cell::missing());
    cells.push_back(opt_num(b, b ? r.batch->bounds.e2.miss_term : 0));
    cells.push_back(opt_num(b, b ? r.batch->bounds.e2.exp_term : 0));
    cells.push_back(b ? Cell::of_bool(r.batch->bounds.e2.clamped) : Cell::missing());

    cells.push_back(Cell::of_str(r.status));
    return cells;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

std::string csv_cell(const Cell& c) {
    switch (c.kind) {
        case Cell::Kind::Missing: return "";
        case Cell::Kind::Num: return fmt_double(c.num);
        case Cell::Kind::Int: return std::to_string(c.integer);
        case Cell::Kind::Bool: return c.boolean ? "1" : "0";
        case Cell::Kind::Str: return csv_escape(c.str);
    }
    return "";
}

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (const char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

std::string json_cell(const Cell& c) {
    switch (c.kind) {
        case Cell::Kind::Missing: return "null";
        case Cell::Kind::Num:
            if (!std::isfinite(c.num)) return "null";
            return fmt_double(c.num);
        case Cell::Kind::Int: return std::to_string(c.integer);
        case Cell::Kind::Bool: return c.boolean ? "true" : "false";
        case Cell::Kind::Str: return "\"" + json_escape(c.str) + "\"";
    }
    return "null";
}

}  // namespace

void ExperimentConfig::validate() const {
    params.validate();
    if (codebook.has_value() == rate_fraction.has_value()) {
        throw std::invalid_argument(
            "ExperimentConfig: exactly one of codebook and rate_fraction must be set");
    }
    if (codebook) codebook->validate();
    if (rate_fraction && !(*rate_fraction > 0.0)) {
        throw std::invalid_argument("ExperimentConfig: rate_fraction must be > 0");
    }
    if (n_trials < 1) throw std::invalid_argument("ExperimentConfig: n_trials must be >= 1");
    if (max_codebook < 1) throw std::invalid_argument("ExperimentConfig: max_codebook must be >= 1");
    for (const auto& [key, values] : axes) {
        if (values.empty()) {
            throw std::invalid_argument("ExperimentConfig: sweep axis '" + key + "' is empty");
        }
        ExperimentConfig probe = *this;
        probe.axes.clear();
        apply_axis_value(probe, key, values.front());  // key check only
    }
}

ResolvedCodebook resolve_codebook(const ExperimentConfig& cfg) {
    cfg.params.validate();
    ResolvedCodebook rc;
    if (cfg.codebook) {
        rc.cb = *cfg.codebook;
        rc.cb.validate();
        rc.th = make_thresholds(cfg.params);
        const double k = cfg.params.theta /
                         (static_cast<double>(cfg.params.N) * cfg.params.T_s);
        rc.R_1 = k * std::log(static_cast<double>(rc.cb.M_R));
        rc.R_2 = k * std::log(static_cast<double>(rc.cb.M_D));
        rc.achieved_rate = k * std::log(static_cast<double>(rc.cb.M_S));
        return rc;
    }
    if (!cfg.rate_fraction) {
        throw std::invalid_argument("resolve_codebook: no codebook and no rate_fraction");
    }
    const double limit = chernoff_rate_limit(cfg.params);
    const double target = *cfg.rate_fraction * limit;
    const CodebookPlan plan = plan_codebook(cfg.params, target, cfg.max_codebook);
    rc.cb = plan.cb;
    rc.th = plan.thresholds;
    rc.target_rate = target;
    rc.achieved_rate = plan.achieved_rate;
    rc.R_1 = plan.R_1;
    rc.R_2 = plan.R_2;
    return rc;
}

WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t n, double z) {
    if (!(z > 0.0)) throw std::invalid_argument("wilson_interval: z must be > 0");
    if (n == 0) return WilsonInterval{0.0, 1.0};
    if (successes > n) throw std::invalid_argument("wilson_interval: successes > n");
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = (z / denom) * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
    return WilsonInterval{std::max(0.0, center - half), std::min(1.0, center + half)};
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t trial_index) {
    return splitmix64(base_seed + 0x9E3779B97F4A7C15ULL * (trial_index + 1));
}

std::uint64_t uniform_index(Rng& rng, std::uint64_t m) {
    if (m == 0) throw std::invalid_argument("uniform_index: m must be >= 1");
    if (m == 1) return 0;
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t rem = (max % m + 1) % m;  // 2^64 mod m
    for (;;) {
        const std::uint64_t r = rng();
        if (rem == 0 || r < max - rem + 1) return r % m;
    }
}

TrialBatchResult run_batch(const ExperimentConfig& cfg) {
    cfg.validate();
    return run_batch_resolved(cfg, resolve_codebook(cfg));
}

std::vector<SweepRecord> sweep(const ExperimentConfig& cfg, const SweepProgress& progress) {
    cfg.validate();
    if (cfg.axes.empty()) throw std::invalid_argument("sweep: no axes configured");

    std::size_t total = 1;
    for (const auto& [key, values] : cfg.axes) total *= values.size();

    std::vector<SweepRecord> records;
    records.reserve(total);
    std::vector<std::size_t> odo(cfg.axes.size(), 0);
    for (std::size_t i = 0; i < total; ++i) {
        ExperimentConfig pt = cfg;
        pt.axes.clear();
        SweepRecord rec;
        for (std::size_t a = 0; a < cfg.axes.size(); ++a) {
            const double v = cfg.axes[a].second[odo[a]];
            rec.axis.emplace_back(cfg.axes[a].first, v);
        }
        try {
            for (const auto& [key, v] : rec.axis) apply_axis_value(pt, key, v);
            run_point(pt, rec);
        } catch (const std::exception& e) {
            rec.params = pt.params;
            rec.status = e.what();
        }
        records.push_back(std::move(rec));
        if (progress) progress(i, total, records.back());

        for (std::size_t a = cfg.axes.size(); a-- > 0;) {
            if (++odo[a] < cfg.axes[a].second.size()) break;
            odo[a] = 0;
        }
    }
    return records;
}

std::vector<SweepRecord> sweep_cells(
    const ExperimentConfig& base,
    const std::vector<std::vector<std::pair<std::string, double>>>& cells,
    const SweepProgress& progress) {
    if (cells.empty()) throw std::invalid_argument("sweep_cells: no cells configured");
    std::vector<SweepRecord> records;
    records.reserve(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        ExperimentConfig pt = base;
        pt.axes.clear();
        SweepRecord rec;
        rec.axis = cells[i];
        try {
            for (const auto& [key, v] : cells[i]) apply_axis_value(pt, key, v);
            run_point(pt, rec);
        } catch (const std::exception& e) {
            rec.params = pt.params;
            rec.status = e.what();
        }
        records.push_back(std::move(rec));
        if (progress) progress(i, cells.size(), records.back());
    }
    return records;
}

void apply_axis_value(ExperimentConfig& cfg, const std::string& key, double v) {
    const auto as_count = [&](const char* what, std::uint64_t lo,
                              std::uint64_t hi) -> std::uint64_t {
        if (!(v >= static_cast<double>(lo)) || v != std::floor(v) ||
            v > static_cast<double>(hi)) {
            throw std::invalid_argument(std::string("axis ") + what +
                                        ": value must be an integer in range");
        }
        return static_cast<std::uint64_t>(v);
    };

    if (key == "a_sq") cfg.params.a_sq = v;
    else if (key == "b_sq") cfg.params.b_sq = v;
    else if (key == "gamma") cfg.params.gamma = v;
    else if (key == "snr_base") cfg.params.snr_base = v;
    else if (key == "T_s") cfg.params.T_s = v;
    else if (key == "T_d") cfg.params.T_d = v;
    else if (key == "T_c") cfg.params.T_c = v;
    else if (key == "theta") cfg.params.theta = v;
    else if (key == "eps") cfg.params.eps = v;
    else if (key == "eps1") cfg.params.eps1 = v;
    else if (key == "eps2") cfg.params.eps2 = v;
    else if (key == "N") cfg.params.N = static_cast<std::uint32_t>(as_count("N", 1, 0xFFFFFFFFULL));
    else if (key == "n_trials") cfg.n_trials = as_count("n_trials", 1, ~0ULL);
    else if (key == "M_R" || key == "M_D") {
        if (!cfg.codebook) {
            throw std::invalid_argument("axis " + key + " requires an explicit codebook");
        }
        const std::uint64_t size = as_count(key.c_str(), 1, ~0ULL);
        cfg.codebook = key == "M_R" ? CodebookParams::make(size, cfg.codebook->M_D)
                                    : CodebookParams::make(cfg.codebook->M_R, size);
    } else if (key == "rate_fraction") {
        if (cfg.codebook) {
            throw std::invalid_argument("axis rate_fraction conflicts with an explicit codebook");
        }
        cfg.rate_fraction = v;
    } else {
        throw std::invalid_argument("unknown sweep axis: " + key);
    }
}

const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols = {
        "a_sq", "b_sq", "gamma", "snr_base", "T_s", "T_d", "T_c", "theta", "N",
        "eps", "eps1", "eps2", "engine", "n_trials", "base_seed",
        "M_S", "M_R", "M_D", "A_R", "B_R", "B_S", "W_S", "W_R",
        "rate_fraction", "target_rate", "achieved_rate", "achieved_R_1", "achieved_R_2",
        "min_cut", "cutset_ub", "block_markov_lb", "capacity_known", "underspread_factor",
        "regime", "regime_R_1", "regime_R_2",
        "p_e_hat", "ci_halfwidth", "n_none", "n_e11", "n_e12", "n_e2",
        "exact_p_e", "exact_p_e11", "exact_p_e12", "exact_p_e2",
        "exact_p_miss_relay", "exact_p_fa_relay", "exact_p_miss_destR", "exact_p_fa_destR",
        "exact_p_miss_destS", "exact_p_fa_destS",
        "chernoff_e11_miss", "chernoff_e11_exp", "chernoff_e11_clamped",
        "chernoff_e12_miss", "chernoff_e12_exp", "chernoff_e12_clamped",
        "chernoff_e2_miss", "chernoff_e2_exp", "chernoff_e2_clamped",
        "status",
    };
    return cols;
}

std::string render_csv(const std::vector<SweepRecord>& records) {
    std::string out;
    const auto& cols = csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (i) out += ',';
        out += cols[i];
    }
    out += '\n';
    for (const auto& rec : records) {
        const auto cells = record_cells(rec);
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += csv_cell(cells[i]);
        }
        out += '\n';
    }
    return out;
}

std::string render_jsonl(const std::vector<SweepRecord>& records) {
    std::string out;
    const auto& cols = csv_columns();
    for (const auto& rec : records) {
        const auto cells = record_cells(rec);
        out += "{\"schema_version\":1";
        for (std::size_t i = 0; i < cells.size(); ++i) {
            out += ",\"";
            out += cols[i];
            out += "\":";
            out += json_cell(cells[i]);
        }
        out += ",\"wall_seconds\":";
        out += rec.batch ? fmt_double(rec.batch->wall_seconds) : "null";
        out += "}\n";
    }
    return out;
}

void emit(const std::vector<SweepRecord>& records, EmitFormat format,
          const std::string& path) {
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw std::runtime_error("emit: cannot open '" + path + "' for writing");
    }
    const std::string body =
        format == EmitFormat::Csv ? render_csv(records) : render_jsonl(records);
    file << body;
    file.flush();
    if (!file) {
        throw std::runtime_error("emit: write to '" + path + "' failed");
    }
}

}  // namespace relaysim
