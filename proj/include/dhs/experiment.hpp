#pragma once

#include "dhs/metrics.hpp"
#include "dhs/task.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dhs {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/*
  Instance URIs: pi:<n>, pi-prime:<n>, artificial:<depth>:<branching>:<seed>,
  transport:<locations>:<packages>:<seed>; anything else is a task file.
*/
std::unique_ptr<Task> load_instance(const std::string &uri);
/// Generator name for URIs, parent directory name for files.
std::string instance_domain(const std::string &uri);

struct ExperimentConfig {
    std::vector<std::string> instances;
    std::vector<std::string> policies;
    std::vector<std::uint64_t> seeds = {0};
    std::size_t max_expansions = 1000000;
    double max_seconds = 300.0;
    int workers = 1;
    std::string out_dir = "results";
    std::string portfolio = "default";
};

/*
  Reads `key = value` lines ('#' starts a comment). Values are quoted
  strings, numbers or [..] lists of them. Keys: instances, policies, seeds,
  max_expansions, max_seconds, workers, out_dir, portfolio.
*/
ExperimentConfig parse_experiment_config(const std::string &text);
ExperimentConfig load_experiment_config(const std::string &path);

struct RunRecord {
    std::string instance;
    std::string domain;
    std::string policy;
    std::uint64_t seed = 0;
    std::string outcome;
    std::size_t expansions = 0;
    std::size_t generated = 0;
    std::optional<std::int64_t> cost;
    double wall_time_ms = 0.0;
    /// Empty when the trace is shorter than four steps.
    std::vector<std::vector<double>> usage;
    SwitchHistogram switching;

    bool solved() const { return outcome == "plan-found"; }
};

std::string record_to_json(const RunRecord &r);
RunRecord record_from_json(const std::string &text);

struct Job {
    std::string instance;
    std::string policy;
    std::uint64_t seed;
};

/// Cross product in config order. alt:all expands to every permutation of
/// the instance's portfolio, bare rnd to rnd:<seed>.
std::vector<Job> expand_jobs(const ExperimentConfig &config);

/// Runs one job (deterministic except for wall time).
RunRecord run_job(const Job &job, const ExperimentConfig &config);

struct ExperimentSummary {
    std::size_t jobs = 0;
    std::size_t executed = 0;
    std::size_t reused = 0;
};

/*
  Executes every job whose result file is missing (up to `workers` at a time
  unless `parallel` is false) and writes runs.csv, summary.json and
  summary.txt into out_dir.
*/
ExperimentSummary run_experiment(const ExperimentConfig &config, bool parallel = true);

/// All records under <dir>/runs, sorted by (instance, policy, seed).
std::vector<RunRecord> load_records(const std::filesystem::path &dir);

std::string report_csv(const std::vector<RunRecord> &records);
std::string report_json(const std::vector<RunRecord> &records);
std::string report_table(const std::vector<RunRecord> &records);

}  // namespace dhs
