#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bct/protocol.hpp"
#include "bct/rng.hpp"

namespace bct::harness {

inline constexpr std::string_view kVersion = "1.0.0";

enum class Experiment { correlation, opposite_axes, visibility, audit, remedy, calibrate };
enum class OutputFormat { csv, json };

std::string_view to_string(Experiment experiment);
Experiment parse_experiment(std::string_view name);
std::string_view to_string(OutputFormat format);
OutputFormat parse_format(std::string_view name);

/// Rejected configuration; nothing has run yet when this is thrown.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Output destination could not be written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    Experiment experiment = Experiment::correlation;
    std::uint64_t trials = 1'000'000;
    std::uint64_t seed = 20240601;
    protocol::Strategy strategy = protocol::kNoFlip;
    protocol::CoinMode coin_mode = protocol::CoinMode::independent;
    std::vector<double> alice_grid;       ///< correlation, calibrate
    std::vector<double> angle_grid;       ///< Bob settings: correlation, calibrate
    std::vector<double> nu_grid;          ///< opposite-axes, visibility, remedy
    std::vector<double> theta_grid;       ///< audit; conditioned rows elsewhere
    std::vector<double> visibility_grid;  ///< visibility
    double alice = geometry::kPi / 2.0;   ///< audit
    double bob = 0.0;                     ///< audit
    OutputFormat format = OutputFormat::csv;
    std::string output_path;              ///< empty or "-" for stdout
    unsigned workers = 1;
};

/// Config with the default grids for `experiment` filled in.
ExperimentConfig default_config(Experiment experiment);

/// Throws ConfigError describing the first violation.
void validate(const ExperimentConfig& config);

/// Parses "lo:hi:steps" (inclusive, evenly spaced) or a comma list. Each
/// number may carry a "pi" suffix: "0.35pi", "pi", "-pi".
std::vector<double> parse_grid(std::string_view spec);
double parse_number(std::string_view text);

struct Manifest {
    std::string experiment;
    std::uint64_t seed = 0;
    std::uint64_t trials = 0;
    std::string strategy;
    std::string coin;
    std::string version{kVersion};
};

struct SweepRow {
    std::string label;           ///< only emitted when the table has labels
    std::vector<double> params;  ///< NaN renders as an empty cell
    std::uint64_t trials = 0;
    double estimate = 0.0;
    double std_error = 0.0;
    double closed_form = 0.0;
    double deviation = 0.0;
    std::string flags;           ///< ';'-separated, never contains ','
};

struct SweepTable {
    Manifest manifest;
    bool labelled = false;
    std::vector<std::string> param_names;
    std::vector<SweepRow> rows;
};

/// sqrt(p(1-p)/n)
double standard_error(double p, std::uint64_t n);

SweepTable run_correlation_sweep(const ExperimentConfig& config);
SweepTable run_opposite_axes_sweep(const ExperimentConfig& config);
SweepTable run_visibility_scan(const ExperimentConfig& config);
SweepTable run_audit(const ExperimentConfig& config);
SweepTable run_remedy_analysis(const ExperimentConfig& config);
SweepTable run_calibration(const ExperimentConfig& config);

/// Validates, then dispatches on config.experiment.
SweepTable run_experiment(const ExperimentConfig& config);

std::string render(const SweepTable& table, OutputFormat format);

/// Writes to `path`, or stdout for "" / "-". Throws IoError naming the path.
void emit(const SweepTable& table, OutputFormat format, const std::string& path);

/// Inverse of render(csv). Manifest lines are read back when present.
SweepTable parse_csv(std::string_view text);

/// Integer counters filled by one batch of trials.
using Tally = std::array<std::uint64_t, 8>;

/// Trials per batch; batch b of stream r draws from substream_seed(seed, r, b).
inline constexpr std::uint64_t kBatchSize = 8192;

/// Runs `trials` trials split into fixed batches across `workers` threads
/// and sums the per-batch tallies. The result does not depend on `workers`.
Tally run_batches(std::uint64_t trials, std::uint64_t seed, std::uint64_t stream,
                  unsigned workers, const std::function<void(Rng&, std::uint64_t, Tally&)>& body);

}  // namespace bct::harness
