#include "bct/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#include "bct/analysis.hpp"
#include "bct/geometry.hpp"
#include "json.hpp"

namespace bct::harness {

namespace {

using geometry::Angle;
using geometry::kPi;
using protocol::CoinMode;
using protocol::Strategy;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt6(double x) {
    if (std::isnan(x)) {
        return "";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

double round6(double x) {
    if (!std::isfinite(x)) {
        return x;
    }
    return std::strtod(fmt6(x).c_str(), nullptr);
}

void add_flag(std::string& flags, const std::string& key, double value) {
    if (!flags.empty()) flags += ';';
    flags += key + '=' + fmt6(value);
}

void add_flag(std::string& flags, const std::string& word) {
    if (!flags.empty()) flags += ';';
    flags += word;
}

bool near(double x, double y) { return std::fabs(x - y) <= 1e-9; }

double ratio(std::uint64_t k, std::uint64_t n) {
    return static_cast<double>(k) / static_cast<double>(n);
}

Manifest manifest_for(const ExperimentConfig& config, std::string strategy) {
    Manifest m;
    m.experiment = std::string(to_string(config.experiment));
    m.seed = config.seed;
    m.trials = config.trials;
    m.strategy = std::move(strategy);
    m.coin = std::string(protocol::to_string(config.coin_mode));
    return m;
}

SweepRow make_row(std::vector<double> params, std::uint64_t hits, std::uint64_t n,
                  double closed_form) {
    SweepRow row;
    row.params = std::move(params);
    row.trials = n;
    row.estimate = ratio(hits, n);
    row.std_error = standard_error(row.estimate, n);
    row.closed_form = closed_form;
    row.deviation = row.estimate - closed_form;
    return row;
}

// Deviation beyond 4 standard errors of the reference value.
bool outside_4se(double estimate, double reference, std::uint64_t n) {
    return std::fabs(estimate - reference) > 4.0 * standard_error(reference, n) + 1e-12;
}

bool in_window(double theta, const analysis::ThetaWindow& w) {
    return theta >= w.lo && theta <= w.hi;
}

void check_range(const std::vector<double>& grid, std::string_view name, double lo, double hi,
                 bool hi_inclusive) {
    for (const double x : grid) {
        const bool ok = std::isfinite(x) && x >= lo && (hi_inclusive ? x <= hi : x < hi);
        if (!ok) {
            throw ConfigError(std::string(name) + " value " + fmt6(x) + " outside [" + fmt6(lo) +
                              ", " + fmt6(hi) + (hi_inclusive ? "]" : ")"));
        }
    }
}

void require(const std::vector<double>& grid, std::string_view name) {
    if (grid.empty()) {
        throw ConfigError(std::string(name) + " must not be empty");
    }
}

void check_finite(const std::vector<double>& grid, std::string_view name) {
    for (const double x : grid) {
        if (!std::isfinite(x)) {
            throw ConfigError(std::string(name) + " contains a non-finite value");
        }
    }
}

std::vector<double> linspace(double lo, double hi, int steps) {
    std::vector<double> out;
    if (steps == 1) {
        out.push_back(lo);
        return out;
    }
    for (int i = 0; i < steps; ++i) {
        out.push_back(lo + (hi - lo) * static_cast<double>(i) / (steps - 1));
    }
    return out;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace

std::string_view to_string(Experiment experiment) {
    switch (experiment) {
        case Experiment::correlation: return "correlation";
        case Experiment::opposite_axes: return "opposite-axes";
        case Experiment::visibility: return "visibility";
        case Experiment::audit: return "audit";
        case Experiment::remedy: return "remedy";
        case Experiment::calibrate: return "calibrate";
    }
    return "?";
}

Experiment parse_experiment(std::string_view name) {
    for (const auto e : {Experiment::correlation, Experiment::opposite_axes, Experiment::visibility,
                         Experiment::audit, Experiment::remedy, Experiment::calibrate}) {
        if (to_string(e) == name) return e;
    }
    throw ConfigError("unknown experiment '" + std::string(name) + "'");
}

std::string_view to_string(OutputFormat format) {
    return format == OutputFormat::json ? "json" : "csv";
}

OutputFormat parse_format(std::string_view name) {
    if (name == "csv") return OutputFormat::csv;
    if (name == "json") return OutputFormat::json;
    throw ConfigError("unknown output format '" + std::string(name) + "'");
}

ExperimentConfig default_config(Experiment experiment) {
    ExperimentConfig c;
    c.experiment = experiment;
    switch (experiment) {
        case Experiment::correlation:
            c.alice_grid = {kPi / 2.0};
            c.angle_grid = linspace(0.0, kPi, 11);
            break;
        case Experiment::calibrate:
            // Generic positions: no setting sits on an alpha boundary.
            c.alice_grid = linspace(0.1, 0.1 + 11.0 * kPi / 6.0, 12);
            c.angle_grid = linspace(0.05, 0.05 + 11.0 * kPi / 6.0, 12);
            c.trials = 100'000;
            break;
        case Experiment::opposite_axes:
            c.nu_grid = linspace(0.0, kPi / 5.0, 11);
            break;
        case Experiment::visibility:
            c.nu_grid = {kPi / 10.0};
            c.visibility_grid = {0.5, 0.5396, 0.6, 0.7, 0.8, 0.9, 0.989, 0.99, 0.992, 1.0};
            c.trials = 200'000;
            break;
        case Experiment::audit:
            c.theta_grid = linspace(0.3 * kPi, 0.5 * kPi, 21);
            c.trials = 100'000;
            break;
        case Experiment::remedy:
            c.nu_grid = {0.0, kPi / 10.0, kPi / 5.0};
            break;
    }
    return c;
}

void validate(const ExperimentConfig& c) {
    if (c.trials < 1) throw ConfigError("trials must be at least 1");
    if (c.workers < 1) throw ConfigError("workers must be at least 1");
    check_finite(c.alice_grid, "alice grid");
    check_finite(c.angle_grid, "angle grid");
    if (!std::isfinite(c.alice) || !std::isfinite(c.bob)) {
        throw ConfigError("audit settings must be finite");
    }
    check_range(c.nu_grid, "nu grid", 0.0, analysis::kNuMax, true);
    check_range(c.theta_grid, "theta grid", 0.0, geometry::kThetaRange, false);
    check_range(c.visibility_grid, "visibility grid", 0.0, 1.0, true);
    switch (c.experiment) {
        case Experiment::correlation:
        case Experiment::calibrate:
            require(c.alice_grid, "alice grid");
            require(c.angle_grid, "angle grid");
            break;
        case Experiment::opposite_axes:
        case Experiment::remedy:
            require(c.nu_grid, "nu grid");
            break;
        case Experiment::visibility:
            require(c.nu_grid, "nu grid");
            require(c.visibility_grid, "visibility grid");
            break;
        case Experiment::audit:
            require(c.theta_grid, "theta grid");
            break;
    }
}

double parse_number(std::string_view text) {
    std::string s = trim(text);
    if (s.empty()) throw ConfigError("empty number");
    double scale = 1.0;
    if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
        scale = kPi;
        s.resize(s.size() - 2);
        if (s.empty() || s == "+") return kPi;
        if (s == "-") return -kPi;
        if (s.back() == '*') s.pop_back();
    }
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ConfigError("not a number: '" + std::string(text) + "'");
    }
    if (used != s.size()) throw ConfigError("not a number: '" + std::string(text) + "'");
    return value * scale;
}

std::vector<double> parse_grid(std::string_view spec) {
    const std::string s = trim(spec);
    if (s.empty()) throw ConfigError("empty grid");
    if (s.find(':') != std::string::npos) {
        const auto parts = split(s, ':');
        if (parts.size() != 3) throw ConfigError("grid must be lo:hi:steps, got '" + s + "'");
        const double lo = parse_number(parts[0]);
        const double hi = parse_number(parts[1]);
        const double steps = parse_number(parts[2]);
        if (!(steps >= 1.0) || steps != std::floor(steps) || steps > 1e7) {
            throw ConfigError("grid steps must be a positive integer, got '" + parts[2] + "'");
        }
        return linspace(lo, hi, static_cast<int>(steps));
    }
    std::vector<double> out;
    for (const auto& item : split(s, ',')) out.push_back(parse_number(item));
    return out;
}

double standard_error(double p, std::uint64_t n) {
    if (n == 0) return 0.0;
    return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

Tally run_batches(std::uint64_t trials, std::uint64_t seed, std::uint64_t stream, unsigned workers,
                  const std::function<void(Rng&, std::uint64_t, Tally&)>& body) {
    const std::uint64_t batches = (trials + kBatchSize - 1) / kBatchSize;
    std::vector<Tally> per_batch(batches, Tally{});
    const auto run_batch = [&](std::uint64_t b) {
        Rng rng(substream_seed(seed, stream, b));
        const std::uint64_t count = std::min(kBatchSize, trials - b * kBatchSize);
        body(rng, count, per_batch[b]);
    };

    const unsigned threads =
        static_cast<unsigned>(std::min<std::uint64_t>(std::max(workers, 1u), batches));
    if (threads <= 1) {
        for (std::uint64_t b = 0; b < batches; ++b) run_batch(b);
    } else {
        std::vector<std::exception_ptr> errors(threads);
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::uint64_t b = w; b < batches; b += threads) run_batch(b);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    Tally total{};
    for (const auto& t : per_batch) {
        for (std::size_t i = 0; i < total.size(); ++i) total[i] += t[i];
    }
    return total;
}

SweepTable run_correlation_sweep(const ExperimentConfig& config) {
    validate(config);
    SweepTable table;
    table.manifest = manifest_for(config, protocol::describe(config.strategy));
    table.param_names = {"a", "b", "separation"};
    std::uint64_t stream = 0;
    for (const double a_rad : config.alice_grid) {
        for (const double b_rad : config.angle_grid) {
            const Angle a(a_rad);
            const Angle b(b_rad);
            const Tally t = run_batches(
                config.trials, config.seed, stream++, config.workers,
                [&](Rng& rng, std::uint64_t n, Tally& tally) {
                    for (std::uint64_t i = 0; i < n; ++i) {
                        const auto r = protocol::bct_trial(a, b, rng, config.strategy);
                        tally[0] += r.alice == r.bob;
                        tally[1] += r.record.multiple_boundaries;
                        tally[2] += r.record.clamped;
                    }
                });
            const double oracle = qm::qm_prob_equal(a, b);
            SweepRow row = make_row({a.radians(), b.radians(), geometry::arc_distance(a, b)}, t[0],
                                    config.trials, oracle);
            if (t[1] > 0) add_flag(row.flags, "multi_boundary", static_cast<double>(t[1]));
            if (t[2] > 0) add_flag(row.flags, "clamped", static_cast<double>(t[2]));
            if (outside_4se(row.estimate, oracle, config.trials)) add_flag(row.flags, "exceeds_4se");
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

SweepTable run_opposite_axes_sweep(const ExperimentConfig& config) {
    validate(config);
    SweepTable table;
    table.manifest = manifest_for(config, protocol::describe(config.strategy));
    table.param_names = {"nu"};
    const Angle b1(0.0);
    const auto min_claim = analysis::nu_curve_minimum_claim();
    std::uint64_t stream = 0;
    for (const double nu : config.nu_grid) {
        const Angle a = analysis::alice_setting_for_nu(nu);
        const auto window = analysis::anomaly_window(nu);
        const Tally t = run_batches(
            config.trials, config.seed, stream++, config.workers,
            [&](Rng& rng, std::uint64_t n, Tally& tally) {
                for (std::uint64_t i = 0; i < n; ++i) {
                    const auto r =
                        protocol::two_bob_trial(a, b1, rng, config.strategy, config.coin_mode);
                    const bool equal = r.bob1 == r.bob2;
                    tally[0] += equal;
                    tally[1] += equal && in_window(r.record1.theta, window);
                }
            });
        const double closed = analysis::p_opposite_equal_closed(nu).total;
        SweepRow row = make_row({nu}, t[0], config.trials, closed);
        const double inside = ratio(t[1], config.trials);
        const double inside_se = standard_error(inside, config.trials);
        add_flag(row.flags, "in_interval", inside);
        add_flag(row.flags, "in_interval_se", inside_se);
        add_flag(row.flags, "in_interval_exact",
                 analysis::two_bob_equal_over(a, b1, window.lo, window.hi, config.strategy,
                                              config.coin_mode));
        add_flag(row.flags, "full_theta_exact",
                 analysis::two_bob_equal_full_theta(a, b1, config.strategy, config.coin_mode));
        if (row.estimate > closed + 4.0 * row.std_error) {
            add_flag(row.flags, "excess_outside_I_III", row.estimate - inside);
        }
        if (near(nu, kPi / 10.0)) add_flag(row.flags, "claimed_max", 0.284);
        if (near(nu, 0.0) || near(nu, analysis::kNuMax)) {
            add_flag(row.flags, "claimed_min", min_claim.claimed);
            const bool formula_ok = std::fabs(inside - closed) <= 4.0 * inside_se + 0.005;
            const bool claim_ok = std::fabs(inside - min_claim.claimed) <= 4.0 * inside_se + 0.005;
            add_flag(row.flags, claim_ok ? "claimed_min_consistent" : "claimed_min_rejected");
            add_flag(row.flags, formula_ok ? "formula_consistent" : "formula_rejected");
        }
        table.rows.push_back(std::move(row));

        for (const double theta : config.theta_grid) {
            const Tally c = run_batches(
                config.trials, config.seed, stream++, config.workers,
                [&](Rng& rng, std::uint64_t n, Tally& tally) {
                    for (std::uint64_t i = 0; i < n; ++i) {
                        const auto r = protocol::two_bob_trial_at(a, b1, theta, rng, config.strategy,
                                                                  config.coin_mode);
                        tally[0] += r.bob1 == r.bob2;
                    }
                });
            SweepRow diag = make_row({nu}, c[0], config.trials,
                                     analysis::two_bob_equal_given_theta(a, b1, theta,
                                                                         config.strategy,
                                                                         config.coin_mode));
            add_flag(diag.flags, "conditioned_theta", theta);
            table.rows.push_back(std::move(diag));
        }
    }
    return table;
}

SweepTable run_visibility_scan(const ExperimentConfig& config) {
    validate(config);
    SweepTable table;
    table.manifest = manifest_for(config, protocol::describe(config.strategy));
    table.param_names = {"V", "nu", "p_effective", "p_peff1", "p_peff2", "p_peff_total",
                         "v_threshold"};
    const Angle b1(0.0);
    const auto claim = analysis::visibility_threshold_claim();
    std::uint64_t stream = 0;
    for (const double nu : config.nu_grid) {
        const Angle a = analysis::alice_setting_for_nu(nu);
        const auto window = analysis::anomaly_window(nu);
        for (const double v : config.visibility_grid) {
            const auto rep = analysis::visibility_report(v, nu);
            // Each Bob's outcome survives with probability V; erased trials
            // never count as equal.
            const Tally t = run_batches(
                config.trials, config.seed, stream++, config.workers,
                [&](Rng& rng, std::uint64_t n, Tally& tally) {
                    for (std::uint64_t i = 0; i < n; ++i) {
                        const auto r =
                            protocol::two_bob_trial(a, b1, rng, config.strategy, config.coin_mode);
                        const bool kept1 = rng.bernoulli(v);
                        const bool kept2 = rng.bernoulli(v);
                        const bool equal = kept1 && kept2 && r.bob1 == r.bob2;
                        tally[0] += equal;
                        tally[1] += equal && in_window(r.record1.theta, window);
                    }
                });
            SweepRow row = make_row({v, nu, rep.p_effective, rep.p_peff1, rep.p_peff2,
                                     rep.p_peff_total, rep.v_threshold},
                                    t[0], config.trials, rep.p_effective);
            add_flag(row.flags, "in_interval", ratio(t[1], config.trials));
            if (row.estimate > rep.p_effective + 4.0 * row.std_error) {
                add_flag(row.flags, "excess_outside_I_III",
                         row.estimate - ratio(t[1], config.trials));
            }
            if (near(nu, kPi / 10.0)) add_flag(row.flags, "claimed_v_threshold", claim.claimed);
            if (v < rep.v_threshold) add_flag(row.flags, "below_threshold");
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

SweepTable run_audit(const ExperimentConfig& config) {
    validate(config);
    SweepTable table;
    table.manifest = manifest_for(config, protocol::describe(config.strategy));
    table.labelled = true;
    table.param_names = {"theta"};
    const Angle a(config.alice);
    const Angle b(config.bob);
    const auto audit = analysis::per_theta_consistency_audit(a, b, config.theta_grid, config.strategy);
    std::uint64_t stream = 0;
    for (const auto& row : audit) {
        const Tally t = run_batches(
            config.trials, config.seed, stream++, config.workers,
            [&](Rng& rng, std::uint64_t n, Tally& tally) {
                for (std::uint64_t i = 0; i < n; ++i) {
                    const auto r = protocol::two_bob_trial_at(a, b, row.theta, rng, config.strategy,
                                                              config.coin_mode);
                    tally[0] += r.alice == r.bob1;
                    tally[1] += r.alice == -r.bob2;
                }
            });
        SweepRow direct = make_row({row.theta}, t[0], config.trials, row.p_equal);
        direct.label = "P(cA=cB|b)";
        SweepRow reversed = make_row({row.theta}, t[1], config.trials, row.p_anti_opposite);
        reversed.label = "P(cA=-cB|b+pi)";
        for (SweepRow* r : {&direct, &reversed}) {
            add_flag(r->flags, row.violation ? "violation" : "consistent");
            if (outside_4se(r->estimate, r->closed_form, config.trials)) {
                add_flag(r->flags, "mc_exceeds_4se");
            }
        }
        table.rows.push_back(std::move(direct));
        table.rows.push_back(std::move(reversed));
    }
    return table;
}

SweepTable run_remedy_analysis(const ExperimentConfig& config) {
    validate(config);
    SweepTable table;
    const auto semantics = config.strategy.flip_semantics;
    table.manifest = manifest_for(config, "remedy/" + std::string(protocol::to_string(semantics)));
    table.manifest.coin = "both";
    table.labelled = true;
    table.param_names = {"nu", "theta"};

    struct Combo {
        Strategy strategy;
        CoinMode coin;
    };
    const std::vector<Combo> combos = {
        {protocol::kNoFlip, CoinMode::independent},
        {{protocol::FlipRule::cyclic_distance, semantics}, CoinMode::independent},
        {{protocol::FlipRule::cyclic_distance, semantics}, CoinMode::shared},
        {{protocol::FlipRule::absolute_difference, semantics}, CoinMode::independent},
        {{protocol::FlipRule::absolute_difference, semantics}, CoinMode::shared},
    };

    const Angle b1(0.0);
    const Angle b2 = b1.opposite();
    std::uint64_t stream = 0;
    for (const auto& combo : combos) {
        const std::string name =
            protocol::describe(combo.strategy) + "/" + std::string(protocol::to_string(combo.coin));
        for (const double nu : config.nu_grid) {
            const Angle a = analysis::alice_setting_for_nu(nu);
            const Tally t = run_batches(
                config.trials, config.seed, stream++, config.workers,
                [&](Rng& rng, std::uint64_t n, Tally& tally) {
                    for (std::uint64_t i = 0; i < n; ++i) {
                        const auto r = protocol::two_bob_trial(a, b1, rng, combo.strategy, combo.coin);
                        tally[0] += r.bob1 == r.bob2;
                        tally[1] += r.alice == r.bob2;
                    }
                });
            SweepRow equal = make_row(
                {nu, kNaN}, t[0], config.trials,
                analysis::two_bob_equal_full_theta(a, b1, combo.strategy, combo.coin));
            equal.label = name + ":b1_eq_b2";
            add_flag(equal.flags, t[0] == 0 ? "anomaly_free" : "anomaly_present");

            const double oracle = qm::qm_prob_equal(a, b2);
            SweepRow corr = make_row({nu, kNaN}, t[1], config.trials, oracle);
            corr.label = name + ":alice_b2_equal";
            add_flag(corr.flags, outside_4se(corr.estimate, oracle, config.trials)
                                     ? "correlation_broken"
                                     : "correlation_preserved");
            table.rows.push_back(std::move(equal));
            table.rows.push_back(std::move(corr));

            for (const double theta : config.theta_grid) {
                const Tally c = run_batches(
                    config.trials, config.seed, stream++, config.workers,
                    [&](Rng& rng, std::uint64_t n, Tally& tally) {
                        for (std::uint64_t i = 0; i < n; ++i) {
                            const auto r = protocol::two_bob_trial_at(a, b1, theta, rng,
                                                                      combo.strategy, combo.coin);
                            tally[0] += r.bob1 == r.bob2;
                        }
                    });
                SweepRow diag = make_row(
                    {nu, theta}, c[0], config.trials,
                    analysis::two_bob_equal_given_theta(a, b1, theta, combo.strategy, combo.coin));
                diag.label = name + ":b1_eq_b2";
                add_flag(diag.flags, "conditioned_theta", theta);
                table.rows.push_back(std::move(diag));
            }
        }
    }
    return table;
}

SweepTable run_calibration(const ExperimentConfig& config) {
    validate(config);
    SweepTable table;
    table.manifest = manifest_for(config, "all");
    table.labelled = true;
    table.param_names = {"a", "b", "max_abs_dev", "mean_abs_dev", "pairs_over_4se"};

    using protocol::FlipRule;
    using protocol::FlipSemantics;
    const std::vector<Strategy> strategies = {
        protocol::kNoFlip,
        {FlipRule::cyclic_distance, FlipSemantics::continue_then_negate},
        {FlipRule::cyclic_distance, FlipSemantics::terminate_with_negated_c},
        {FlipRule::absolute_difference, FlipSemantics::continue_then_negate},
        {FlipRule::absolute_difference, FlipSemantics::terminate_with_negated_c},
    };

    std::uint64_t stream = 0;
    std::size_t best = 0;
    double best_dev = std::numeric_limits<double>::infinity();
    for (const auto& strategy : strategies) {
        double max_dev = -1.0;
        double sum_dev = 0.0;
        std::size_t pairs = 0;
        std::size_t over = 0;
        SweepRow worst;
        for (const double a_rad : config.alice_grid) {
            for (const double b_rad : config.angle_grid) {
                const Angle a(a_rad);
                const Angle b(b_rad);
                const Tally t = run_batches(
                    config.trials, config.seed, stream++, config.workers,
                    [&](Rng& rng, std::uint64_t n, Tally& tally) {
                        for (std::uint64_t i = 0; i < n; ++i) {
                            const auto r = protocol::bct_trial(a, b, rng, strategy);
                            tally[0] += r.alice == r.bob;
                        }
                    });
                const double oracle = qm::qm_prob_equal(a, b);
                SweepRow row = make_row({a.radians(), b.radians()}, t[0], config.trials, oracle);
                const double dev = std::fabs(row.deviation);
                sum_dev += dev;
                ++pairs;
                over += outside_4se(row.estimate, oracle, config.trials);
                if (dev > max_dev) {
                    max_dev = dev;
                    worst = row;
                }
            }
        }
        worst.label = protocol::describe(strategy);
        worst.params.push_back(max_dev);
        worst.params.push_back(sum_dev / static_cast<double>(pairs));
        worst.params.push_back(static_cast<double>(over));
        if (max_dev < best_dev) {
            best_dev = max_dev;
            best = table.rows.size();
        }
        table.rows.push_back(std::move(worst));
    }
    add_flag(table.rows[best].flags, "best");
    return table;
}

SweepTable run_experiment(const ExperimentConfig& config) {
    validate(config);
    switch (config.experiment) {
        case Experiment::correlation: return run_correlation_sweep(config);
        case Experiment::opposite_axes: return run_opposite_axes_sweep(config);
        case Experiment::visibility: return run_visibility_scan(config);
        case Experiment::audit: return run_audit(config);
        case Experiment::remedy: return run_remedy_analysis(config);
        case Experiment::calibrate: return run_calibration(config);
    }
    throw ConfigError("unknown experiment");
}

std::string render(const SweepTable& table, OutputFormat format) {
    const Manifest& m = table.manifest;
    if (format == OutputFormat::csv) {
        std::ostringstream os;
        os << "# experiment=" << m.experiment << '\n'
           << "# seed=" << m.seed << '\n'
           << "# trials=" << m.trials << '\n'
           << "# strategy=" << m.strategy << '\n'
           << "# coin=" << m.coin << '\n'
           << "# version=bctlab " << m.version << '\n';
        if (table.labelled) os << "case,";
        for (const auto& p : table.param_names) os << p << ',';
        os << "trials,estimate,stderr,closed_form,deviation,flags\n";
        for (const auto& row : table.rows) {
            if (table.labelled) os << row.label << ',';
            for (const double p : row.params) os << fmt6(p) << ',';
            os << row.trials << ',' << fmt6(row.estimate) << ',' << fmt6(row.std_error) << ','
               << fmt6(row.closed_form) << ',' << fmt6(row.deviation) << ',' << row.flags << '\n';
        }
        return os.str();
    }

    nlohmann::ordered_json doc;
    doc["manifest"] = {{"experiment", m.experiment}, {"seed", m.seed},   {"trials", m.trials},
                       {"strategy", m.strategy},     {"coin", m.coin},   {"version", m.version}};
    auto rows = nlohmann::ordered_json::array();
    const auto number = [](double x) -> nlohmann::ordered_json {
        if (std::isnan(x)) return nullptr;
        return round6(x);
    };
    for (const auto& row : table.rows) {
        nlohmann::ordered_json r;
        if (table.labelled) r["case"] = row.label;
        for (std::size_t i = 0; i < table.param_names.size(); ++i) {
            r[table.param_names[i]] = number(row.params[i]);
        }
        r["trials"] = row.trials;
        r["estimate"] = number(row.estimate);
        r["stderr"] = number(row.std_error);
        r["closed_form"] = number(row.closed_form);
        r["deviation"] = number(row.deviation);
        r["flags"] = row.flags;
        rows.push_back(std::move(r));
    }
    doc["rows"] = std::move(rows);
    return doc.dump(2) + "\n";
}

void emit(const SweepTable& table, OutputFormat format, const std::string& path) {
    const std::string text = render(table, format);
    if (path.empty() || path == "-") {
        std::cout << text;
        std::cout.flush();
        if (!std::cout) throw IoError("failed writing to stdout");
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    out.close();
    if (!out) throw IoError("failed writing '" + path + "'");
}

SweepTable parse_csv(std::string_view text) {
    SweepTable table;
    std::istringstream in{std::string(text)};
    std::string line;
    bool have_header = false;
    std::size_t params = 0;
    const auto cell = [](const std::string& s) {
        return s.empty() ? kNaN : std::strtod(s.c_str(), nullptr);
    };
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto body = trim(std::string_view(line).substr(1));
            const auto eq = body.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = body.substr(0, eq);
            const std::string value = body.substr(eq + 1);
            Manifest& m = table.manifest;
            if (key == "experiment") m.experiment = value;
            else if (key == "seed") m.seed = std::stoull(value);
            else if (key == "trials") m.trials = std::stoull(value);
            else if (key == "strategy") m.strategy = value;
            else if (key == "coin") m.coin = value;
            else if (key == "version") m.version = value.rfind("bctlab ", 0) == 0 ? value.substr(7) : value;
            continue;
        }
        auto fields = split(line, ',');
        if (!have_header) {
            table.labelled = !fields.empty() && fields[0] == "case";
            const std::size_t first = table.labelled ? 1 : 0;
            if (fields.size() < first + 6) throw std::invalid_argument("CSV header too short");
            params = fields.size() - first - 6;
            table.param_names.assign(fields.begin() + static_cast<std::ptrdiff_t>(first),
                                     fields.begin() + static_cast<std::ptrdiff_t>(first + params));
            have_header = true;
            continue;
        }
        const std::size_t first = table.labelled ? 1 : 0;
        if (fields.size() != first + params + 6) {
            throw std::invalid_argument("CSV row has " + std::to_string(fields.size()) +
                                        " fields, expected " + std::to_string(first + params + 6));
        }
        SweepRow row;
        if (table.labelled) row.label = fields[0];
        for (std::size_t i = 0; i < params; ++i) row.params.push_back(cell(fields[first + i]));
        const std::size_t k = first + params;
        row.trials = std::stoull(fields[k]);
        row.estimate = cell(fields[k + 1]);
        row.std_error = cell(fields[k + 2]);
        row.closed_form = cell(fields[k + 3]);
        row.deviation = cell(fields[k + 4]);
        row.flags = fields[k + 5];
        table.rows.push_back(std::move(row));
    }
    if (!have_header) throw std::invalid_argument("CSV has no header row");
    return table;
}

}  // namespace bct::harness
