#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "phi4/diagnostics.hpp"
#include "phi4/model.hpp"
#include "phi4/msilcc.hpp"
#include "phi4/nlsolve.hpp"

namespace phi4 {

enum class Scheme { newton, bddv, msilcc, midpoint0d };
enum class InitialShape { sine, cn };
enum class OutputFormat { csv, json };

Scheme parse_scheme(const std::string& s);
std::string to_string(Scheme s);
InitialShape parse_initial(const std::string& s);
std::string to_string(InitialShape s);
OutputFormat parse_format(const std::string& s);

struct RunConfig {
    Scheme scheme = Scheme::msilcc;
    InitialShape initial = InitialShape::sine;
    double amplitude = 10.0;
    PotentialParams potential{};
    std::size_t n_sites = 128;
    double length = 1.0;
    double duration_over_l = 1.0;
    long record_every = 1;
    long snapshot_every = 0;  // rows between field snapshots, 0 disables
    SolverSettings solver{};
    double overflow = 1e6;
    int threads = 0;  // 0 keeps the OpenMP default
    std::string out;
    OutputFormat format = OutputFormat::csv;
    bool force = false;

    void validate() const;
    GridSpec grid() const;
};

// Applies "key = value" pairs; throws ConfigError naming the key.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

// Parses a key=value file ('#' starts a comment). Errors name the line.
std::map<std::string, std::string> read_config_file(const std::string& path);

enum class RunStatus { clean, diverged, solver_failure };

struct Snapshot {
    long row = 0;
    double time = 0.0;
    Row x;
    Row phi;
};

struct RunRecord {
    DiagnosticsRecord d;
    double dq0_rel = 0.0;
    double dq1_rel = 0.0;
    double ref_err = 0.0;  // NaN when no exact solution is known
};

struct RunResult {
    RunConfig config;
    RunStatus status = RunStatus::clean;
    std::string message;
    std::vector<RunRecord> records;
    std::vector<Snapshot> snapshots;
    std::vector<double> energy_series;  // every diagnosed row, recorded or not
    SolverStats stats;
    double exact_energy = 0.0;
    double runtime_seconds = 0.0;
};

// Integrates and collects diagnostics in memory; never touches the file system.
RunResult simulate(const RunConfig& cfg);

int exit_code(RunStatus s);

void write_csv(std::ostream& os, const RunResult& r);
void write_json(std::ostream& os, const RunResult& r);
void write_metadata(std::ostream& os, const RunResult& r);
void write_snapshots_csv(std::ostream& os, const std::vector<RunResult>& runs);

// Thrown when outputs cannot be written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Runs one configuration and writes its outputs; returns the process exit code.
int run(const RunConfig& cfg, std::ostream& log);

const std::vector<std::string>& preset_names();

struct PresetPlan {
    std::string name;
    std::vector<RunConfig> runs;
};

// Member configurations of a preset; base supplies sites, length, solver and threads.
PresetPlan preset(const std::string& name, const RunConfig& base);

// Log-spaced grid with points_per_decade points per factor of ten, both ends included.
std::vector<double> log_grid(double lo, double hi, int points_per_decade);

// Runs a preset and writes one CSV per figure into cfg.out (a directory).
int run_preset(const std::string& name, const RunConfig& base, std::ostream& log);

struct Histogram {
    double lo = 0.0, hi = 0.0;
    std::vector<std::uint64_t> counts;
    std::uint64_t below = 0, above = 0;
};
// Values divided by their mean, binned on [lo, hi].
Histogram normalized_histogram(const std::vector<double>& values, double lo, double hi, int bins);

}  // namespace phi4
