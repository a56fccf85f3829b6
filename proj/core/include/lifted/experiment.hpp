#ifndef LIFTED_EXPERIMENT_HPP
#define LIFTED_EXPERIMENT_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lifted/model.hpp"
#include "lifted/tame.hpp"

namespace lifted {

struct ExperimentConfig {
  int domain_size = 20;  // people per group domain
  int journals = 2;
  int groups = 4;
  double dropout = 0.1;
  int steps = 20;
  int interval = 2;  // merging pass cadence, in steps
  double epsilon = 0.05;
  double alpha = 0.005;
  std::vector<int> offsets{0, 2, 4};
  std::uint64_t seed = 1;
  bool significance_gate = true;
};

enum class RunMode { none, tame };

struct MetricsRow {
  int step = 0;
  int pi = 0;  // query time (absolute)
  std::string query;
  std::vector<double> exact;   // reference marginal (plain run)
  std::vector<double> approx;  // measured pipeline's marginal
  double abs_error = 0;
  int msg_groups = 0;  // classes in the message leaving this step
};

struct TameLogRow {
  int step = 0;
  std::string partition;
  std::string args;
  long long m = 0;
  int l = 0;
  double f = 0;
  double f_crit = 0;
  std::string decision;
  int groups_before = 0;
  int groups_after = 0;
};

struct RunResult {
  std::vector<MetricsRow> rows;
  std::vector<TameLogRow> tame_log;
  std::map<int, std::map<std::string, int>> msg_groups_by_step;
  std::vector<double> step_seconds;  // median over repetitions
  double total_seconds = 0;
  int gate_rejections = 0;
  int gate_accepts = 0;  // clusterings discarded by the gate
};

struct SummaryRow {
  int pi = 0;  // offset
  double max_error = 0;
  double min_error = 0;
  double avg_error = 0;
};

// Two-slice researcher/reputation model used throughout the experiments:
// per person X a reputation R(X) persisting across steps and boosted by
// attendance A(X), with attendance also driving research D(X) and
// publications Pub(X, J) over journals J.
PDM reputation_pdm(int people, int journals = 2);
Model reputation_g0(int people, int journals = 2);

// Group-wise evidence on D(X): per step and group one shared observed value,
// with each individual's observation dropped independently with probability
// `dropout`. Deterministic in the seed.
Evidence gen_evidence(const ExperimentConfig& cfg);

// Runs forward filtering over the reputation model, answering filtering and
// prediction queries for one representative per group at every step and
// offset. In tame mode a plain run over the same evidence provides the
// reference marginals. Wall time per step covers advance+calibrate of the
// measured pipeline only; with timing_repetitions > 1 the pipeline is
// re-run and per-step medians are reported.
RunResult run_experiment(const ExperimentConfig& cfg, RunMode mode,
                         int timing_repetitions = 1);

// Per-offset error statistics over the metric rows.
std::vector<SummaryRow> summarize(const std::vector<MetricsRow>& rows);

void write_metrics_csv(const std::string& path,
                       const std::vector<MetricsRow>& rows);
void write_summary_csv(const std::string& path,
                       const std::vector<SummaryRow>& rows);
void write_tame_log_csv(const std::string& path,
                        const std::vector<TameLogRow>& rows);
void write_timings(const std::string& path, const RunResult& result);

// The three standard option configs (interval, epsilon) at desk scale.
std::vector<ExperimentConfig> option_configs(std::uint64_t seed);

// Runs the three options and writes their CSVs under out_dir/option<i>/.
void replicate_options(const std::string& out_dir, std::uint64_t seed);

}  // namespace lifted

#endif
