// harness.hpp — experiment registry, run configuration, and report output.
//
// Every experiment consumes a RunConfig, emits detail rows in a fixed CSV
// schema, and returns a list of named assertions.  The process exit status of
// the CLI is zero iff every hard assertion passed.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gffnet {

struct RunConfig {
    std::string experiment;
    std::uint64_t seed = 1;
    int replicas = 1;
    int threads = 1;
    double tol = 0.0;      // 0 => experiment default
    std::string out_dir;   // empty => no files written
    // Free-form key=value options (from --config file and per-command flags).
    std::map<std::string, std::string> extra;

    bool has(const std::string& key) const { return extra.count(key) != 0; }
    std::string get(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    void validate() const;  // throws ConfigError (replicas >= 1, threads >= 1, ...)
};

// Load key=value lines (with '#' comments) into cfg.extra; later sources win.
void load_config_file(const std::string& path, RunConfig& cfg);

// One row of the detail CSV.  Schema, in column order:
//   experiment,n,zeta,gamma,replica,stat,value,seed
struct CsvRow {
    std::string experiment;
    long long n = 0;
    long long zeta = 0;
    double gamma = 0.0;
    long long replica = 0;
    std::string stat;
    double value = 0.0;
    std::uint64_t seed = 0;
};

struct Assertion {
    enum class Kind { Hard, Statistical, Soft };
    std::string name;
    Kind kind = Kind::Hard;
    bool pass = false;
    double value = 0.0;
    double bound = 0.0;
    std::string detail;
};

struct RunResult {
    std::string experiment;
    std::vector<CsvRow> rows;
    std::vector<Assertion> assertions;
    // Extra scalar summary entries for report.json (name -> value).
    std::vector<std::pair<std::string, double>> summary;
    // Optional plain-text table blocks written as <name>.dat files.
    std::vector<std::pair<std::string, std::string>> tables;

    bool passed() const;        // all hard assertions pass
    bool fully_passed() const;  // all assertions of every kind pass
};

using ExperimentFn = std::function<RunResult(const RunConfig&)>;

// Registry of named experiments (populated in experiments.cpp).
const std::map<std::string, ExperimentFn>& experiment_registry();

// Look up and run; throws ConfigError for unknown names.
RunResult run_experiment(const RunConfig& cfg);

// Write report.json, detail.csv, and any .dat tables under cfg.out_dir.
// Output is deterministic: identical configs produce byte-identical files.
void write_outputs(const RunConfig& cfg, const RunResult& result);

// Render helpers (exposed for tests).
std::string render_csv(const std::vector<CsvRow>& rows);
std::string render_report_json(const RunConfig& cfg, const RunResult& result);

// Run fn(replica_index) for replica indices [0, replicas) on up to `threads`
// worker threads.  Results are collected into a preallocated vector so output
// order is independent of scheduling.
void parallel_replicas(int replicas, int threads,
                       const std::function<void(int)>& fn);

}  // namespace gffnet
