#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "relaysim/harness.hpp"

using ordered_json = nlohmann::ordered_json;
using namespace relaysim;

namespace {

constexpr double kLn2 = 0.6931471805599453;

double bits(double nats) { return nats / kLn2; }

struct CliOptions {
    std::string config_path;
    std::vector<std::string> sets;
    std::string out_path;
    std::string format = "csv";
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> trials;
    bool quiet = false;
};

ordered_json load_config(const std::string& path) {
    if (path.empty()) return ordered_json::object();
    std::ifstream file(path);
    if (!file) {
        throw std::invalid_argument("cannot open config file: " + path);
    }
    try {
        return ordered_json::parse(file);
    } catch (const ordered_json::exception& e) {
        throw std::invalid_argument("config file " + path + ": " + e.what());
    }
}

// --set a.b.c=value: navigate/create objects along the dotted path. The value
// is parsed as JSON when possible, otherwise taken as a string.
void apply_set(ordered_json& root, const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw std::invalid_argument("--set expects key=value, got: " + assignment);
    }
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);

    ordered_json value;
    try {
        value = ordered_json::parse(raw);
    } catch (const ordered_json::exception&) {
        value = raw;
    }

    ordered_json* node = &root;
    std::size_t pos = 0;
    for (;;) {
        const std::size_t dot = key.find('.', pos);
        const std::string part = key.substr(pos, dot - pos);
        if (part.empty()) {
            throw std::invalid_argument("--set key has an empty path segment: " + key);
        }
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        ordered_json& next = (*node)[part];
        if (!next.is_object()) {
            if (!next.is_null()) {
                throw std::invalid_argument("--set " + key + ": '" + part +
                                            "' is not an object");
            }
            next = ordered_json::object();
        }
        node = &next;
        pos = dot + 1;
    }
}

const std::set<std::string>& axis_keys() {
    static const std::set<std::string> keys = {
        "a_sq", "b_sq", "gamma", "snr_base", "T_s", "T_d", "T_c", "theta",
        "N", "eps", "eps1", "eps2", "M_R", "M_D", "n_trials", "rate_fraction",
    };
    return keys;
}

void require_keys(const ordered_json& j, const std::set<std::string>& allowed,
                  const std::string& where) {
    if (!j.is_object()) {
        throw std::invalid_argument("config: " + where + " must be an object");
    }
    for (const auto& item : j.items()) {
        if (!allowed.count(item.key())) {
            throw std::invalid_argument("config: unknown key '" + item.key() +
                                        "' in " + where);
        }
    }
}

double num_at(const ordered_json& j, const std::string& key, const std::string& where) {
    const auto& v = j.at(key);
    if (!v.is_number()) {
        throw std::invalid_argument("config: " + where + "." + key + " must be a number");
    }
    return v.get<double>();
}

std::uint64_t count_at(const ordered_json& j, const std::string& key,
                       const std::string& where) {
    const auto& v = j.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        throw std::invalid_argument("config: " + where + "." + key +
                                    " must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

SystemParams params_from_json(const ordered_json& j) {
    static const std::set<std::string> allowed = {
        "a_sq", "b_sq", "gamma", "snr_base", "T_s", "T_d", "T_c", "theta",
        "N", "eps", "eps1", "eps2",
    };
    require_keys(j, allowed, "params");
    SystemParams p;
    const auto set_num = [&](const char* key, double& field) {
        if (j.contains(key)) field = num_at(j, key, "params");
    };
    set_num("a_sq", p.a_sq);
    set_num("b_sq", p.b_sq);
    set_num("gamma", p.gamma);
    set_num("snr_base", p.snr_base);
    set_num("T_s", p.T_s);
    set_num("T_d", p.T_d);
    set_num("T_c", p.T_c);
    set_num("theta", p.theta);
    set_num("eps", p.eps);
    set_num("eps1", p.eps1);
    set_num("eps2", p.eps2);
    if (j.contains("N")) p.N = static_cast<std::uint32_t>(count_at(j, "N", "params"));
    return p;
}

struct SweepSpec {
    std::vector<std::pair<std::string, std::vector<double>>> axes;
    std::vector<std::vector<std::pair<std::string, double>>> cells;
};

SweepSpec sweep_from_json(const ordered_json& j) {
    require_keys(j, {"axes", "cells"}, "sweep");
    if (j.contains("axes") == j.contains("cells")) {
        throw std::invalid_argument("config: sweep needs exactly one of axes / cells");
    }
    SweepSpec spec;
    if (j.contains("axes")) {
        const auto& axes = j.at("axes");
        if (!axes.is_array() || axes.empty()) {
            throw std::invalid_argument("config: sweep.axes must be a non-empty array");
        }
        for (const auto& axis : axes) {
            require_keys(axis, {"key", "values"}, "sweep.axes[]");
            if (!axis.contains("key") || !axis.contains("values")) {
                throw std::invalid_argument("config: sweep axis needs key and values");
            }
            const std::string key = axis.at("key").get<std::string>();
            if (!axis_keys().count(key)) {
                throw std::invalid_argument("config: unknown sweep axis '" + key + "'");
            }
            const auto& values = axis.at("values");
            if (!values.is_array() || values.empty()) {
                throw std::invalid_argument("config: sweep axis '" + key +
                                            "' needs a non-empty values array");
            }
            std::vector<double> vs;
            for (const auto& v : values) {
                if (!v.is_number()) {
                    throw std::invalid_argument("config: sweep axis '" + key +
                                                "' has a non-numeric value");
                }
                vs.push_back(v.get<double>());
            }
            spec.axes.emplace_back(key, std::move(vs));
        }
    } else {
        const auto& cells = j.at("cells");
        if (!cells.is_array() || cells.empty()) {
            throw std::invalid_argument("config: sweep.cells must be a non-empty array");
        }
        for (const auto& cell : cells) {
            if (!cell.is_object() || cell.empty()) {
                throw std::invalid_argument("config: each sweep cell must be a non-empty object");
            }
            std::vector<std::pair<std::string, double>> kv;
            for (const auto& item : cell.items()) {
                if (!axis_keys().count(item.key())) {
                    throw std::invalid_argument("config: unknown cell key '" +
                                                item.key() + "'");
                }
                if (!item.value().is_number()) {
                    throw std::invalid_argument("config: cell key '" + item.key() +
                                                "' has a non-numeric value");
                }
                kv.emplace_back(item.key(), item.value().get<double>());
            }
            spec.cells.push_back(std::move(kv));
        }
    }
    return spec;
}

struct ParsedConfig {
    ExperimentConfig experiment;
    SweepSpec sweep;
    bool has_codebook_or_fraction = false;
};

ParsedConfig config_from_json(const ordered_json& j, const CliOptions& opt) {
    static const std::set<std::string> allowed = {
        "params", "codebook", "rate_fraction", "n_trials", "base_seed",
        "engine", "max_codebook", "threads", "sweep",
    };
    require_keys(j, allowed, "config root");

    ParsedConfig out;
    ExperimentConfig& cfg = out.experiment;
    if (j.contains("params")) cfg.params = params_from_json(j.at("params"));
    if (j.contains("codebook")) {
        const auto& cb = j.at("codebook");
        require_keys(cb, {"M_R", "M_D"}, "codebook");
        if (!cb.contains("M_R") || !cb.contains("M_D")) {
            throw std::invalid_argument("config: codebook needs M_R and M_D");
        }
        cfg.codebook = CodebookParams::make(count_at(cb, "M_R", "codebook"),
                                            count_at(cb, "M_D", "codebook"));
    }
    if (j.contains("rate_fraction")) {
        if (!j.at("rate_fraction").is_number()) {
            throw std::invalid_argument("config: rate_fraction must be a number");
        }
        cfg.rate_fraction = j.at("rate_fraction").get<double>();
    }
    if (j.contains("n_trials")) cfg.n_trials = count_at(j, "n_trials", "config");
    if (j.contains("base_seed")) cfg.base_seed = count_at(j, "base_seed", "config");
    if (j.contains("engine")) {
        const std::string name = j.at("engine").get<std::string>();
        if (name == "block") cfg.engine = Engine::Block;
        else if (name == "counts") cfg.engine = Engine::Counts;
        else throw std::invalid_argument("config: engine must be 'block' or 'counts'");
    }
    if (j.contains("max_codebook")) cfg.max_codebook = count_at(j, "max_codebook", "config");
    if (j.contains("threads")) {
        cfg.threads = static_cast<unsigned>(count_at(j, "threads", "config"));
    }
    if (j.contains("sweep")) out.sweep = sweep_from_json(j.at("sweep"));
    out.has_codebook_or_fraction = cfg.codebook.has_value() || cfg.rate_fraction.has_value();

    if (opt.seed) cfg.base_seed = *opt.seed;
    if (opt.trials) cfg.n_trials = *opt.trials;
    return out;
}

ParsedConfig resolve_cli_config(const CliOptions& opt) {
    ordered_json j = load_config(opt.config_path);
    for (const auto& s : opt.sets) apply_set(j, s);
    return config_from_json(j, opt);
}

EmitFormat parse_format(const std::string& name) {
    return name == "jsonl" ? EmitFormat::JsonLines : EmitFormat::Csv;
}

void write_records(const std::vector<SweepRecord>& records, const CliOptions& opt) {
    const EmitFormat fmt = parse_format(opt.format);
    if (!opt.out_path.empty()) {
        emit(records, fmt, opt.out_path);
    } else {
        std::cout << (fmt == EmitFormat::Csv ? render_csv(records) : render_jsonl(records));
    }
}

int cmd_rates(const CliOptions& opt) {
    const ParsedConfig pc = resolve_cli_config(opt);
    const SystemParams& p = pc.experiment.params;
    p.validate();

    const RateReport rates = rate_report(p);
    const Regime regime = classify_regime(p);
    const double limit = chernoff_rate_limit(p);

    const char* regime_name = regime.tag == RegimeTag::Direct ? "Direct"
                              : regime.tag == RegimeTag::RelayLimitedBySR
                                  ? "RelayLimitedBySR"
                                  : "RelayLimitedByMACut";

    std::printf("min_cut            %.6g bits/s\n", bits(rates.min_cut));
    std::printf("cutset_ub          %.6g bits/s\n", bits(rates.cutset_ub));
    std::printf("block_markov_lb    %.6g bits/s\n", bits(rates.block_markov_lb));
    std::printf("capacity_known     %s\n", rates.capacity_known ? "yes" : "no");
    std::printf("underspread_factor %.6g\n", rates.underspread_factor);
    std::printf("regime             %s\n", regime_name);
    std::printf("edge rate R_1      %.6g bits/s\n", bits(regime.R_1));
    std::printf("edge rate R_2      %.6g bits/s\n", bits(regime.R_2));
    std::printf("threshold limit    %.6g bits/s\n", bits(limit));

    if (pc.has_codebook_or_fraction) {
        const ResolvedCodebook rc = resolve_codebook(pc.experiment);
        const Bandwidths bw = bandwidths(rc.cb, p);
        std::printf("codebook           M_S=%llu (M_R=%llu x M_D=%llu)\n",
                    static_cast<unsigned long long>(rc.cb.M_S),
                    static_cast<unsigned long long>(rc.cb.M_R),
                    static_cast<unsigned long long>(rc.cb.M_D));
        std::printf("thresholds         A_R=%.6g B_R=%.6g B_S=%.6g\n", rc.th.A_R,
                    rc.th.B_R, rc.th.B_S);
        if (rc.target_rate) {
            std::printf("target rate        %.6g bits/s\n", bits(*rc.target_rate));
        }
        std::printf("achieved rate      %.6g bits/s (R_1=%.6g, R_2=%.6g)\n",
                    bits(rc.achieved_rate), bits(rc.R_1), bits(rc.R_2));
        std::printf("bandwidth          W_S=%.6g Hz, W_R=%.6g Hz\n", bw.W_S, bw.W_R);
    }
    return 0;
}

int cmd_simulate(const CliOptions& opt) {
    const ParsedConfig pc = resolve_cli_config(opt);
    const ExperimentConfig& cfg = pc.experiment;
    cfg.validate();

    SweepRecord rec;
    rec.params = cfg.params;
    rec.rate_fraction = cfg.rate_fraction;
    rec.engine = cfg.engine;
    rec.n_trials = cfg.n_trials;
    rec.base_seed = cfg.base_seed;
    rec.rates = rate_report(cfg.params);
    rec.regime = classify_regime(cfg.params);
    const ResolvedCodebook rc = resolve_codebook(cfg);
    rec.resolved = rc;
    rec.bw = bandwidths(rc.cb, cfg.params);
    rec.batch = run_batch(cfg);

    write_records({rec}, opt);

    if (!opt.quiet) {
        const TrialBatchResult& b = *rec.batch;
        std::ostream& os = opt.out_path.empty() ? std::cerr : std::cout;
        char line[256];
        std::snprintf(line, sizeof(line),
                      "p_e_hat %.6g +- %.6g   exact %.6g   chernoff %.6g   (%llu trials, %.2fs)",
                      b.p_e_hat, b.ci_halfwidth, b.exact.p_e_total,
                      b.bounds.e11.total() + b.bounds.e12.total() + b.bounds.e2.total(),
                      static_cast<unsigned long long>(b.n_trials), b.wall_seconds);
        os << line << "\n";
    }
    return 0;
}

int cmd_sweep(const CliOptions& opt) {
    const ParsedConfig pc = resolve_cli_config(opt);
    if (pc.sweep.axes.empty() && pc.sweep.cells.empty()) {
        throw std::invalid_argument("config: sweep subcommand needs a sweep section");
    }

    const SweepProgress progress = [&](std::size_t i, std::size_t total,
                                       const SweepRecord& rec) {
        if (opt.quiet) return;
        std::cerr << "[" << (i + 1) << "/" << total << "] ";
        for (std::size_t k = 0; k < rec.axis.size(); ++k) {
            if (k) std::cerr << " ";
            std::cerr << rec.axis[k].first << "=" << rec.axis[k].second;
        }
        if (rec.status == "ok") {
            if (rec.batch) std::cerr << "  p_e_hat=" << rec.batch->p_e_hat;
        } else {
            std::cerr << "  warning: " << rec.status;
        }
        std::cerr << "\n";
    };

    std::vector<SweepRecord> records;
    if (!pc.sweep.cells.empty()) {
        ExperimentConfig base = pc.experiment;
        records = sweep_cells(base, pc.sweep.cells, progress);
    } else {
        ExperimentConfig cfg = pc.experiment;
        cfg.axes = pc.sweep.axes;
        records = sweep(cfg, progress);
    }

    write_records(records, opt);

    const bool any_ok = std::any_of(records.begin(), records.end(),
                                    [](const SweepRecord& r) { return r.status == "ok"; });
    if (!any_ok) {
        std::cerr << "error: all sweep points failed\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rate bounds and Monte Carlo error simulation for a frequency-binned "
                 "peaky-FSK relay channel"};
    app.require_subcommand(1);

    CliOptions opt;
    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "JSON config file");
        sub->add_option("--set", opt.sets, "dotted-key override, key=value (repeatable)");
        sub->add_option("--out", opt.out_path, "output file path (default: stdout)");
        sub->add_option("--format", opt.format, "output format")
            ->check(CLI::IsMember({"csv", "jsonl"}));
        sub->add_option("--seed", opt.seed, "base RNG seed override");
        sub->add_option("--trials", opt.trials, "trial count override");
        sub->add_flag("--quiet", opt.quiet, "suppress summary and progress output");
    };

    CLI::App* rates = app.add_subcommand("rates", "print rate bounds and regime");
    CLI::App* simulate = app.add_subcommand("simulate", "run one Monte Carlo batch");
    CLI::App* sweep = app.add_subcommand("sweep", "run a parameter sweep");
    add_common(rates);
    add_common(simulate);
    add_common(sweep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (rates->parsed()) return cmd_rates(opt);
        if (simulate->parsed()) return cmd_simulate(opt);
        return cmd_sweep(opt);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
