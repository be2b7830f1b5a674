#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "sil/estimators.hpp"
#include "sil/simgen.hpp"

namespace sil {

// Mean over datasets of the per-dataset mean squared prediction error.
double test_mse(const Eigen::MatrixXd& beta,
                const std::vector<double>& intercepts, const MultiStudy& test);

struct CoefMetrics {
  double l2 = 0.0;   // average per-dataset estimation error
  double fpr = 0.0;  // selected among truly zero entries, pooled
  double fnr = 0.0;  // missed among truly nonzero entries, pooled
};

// Rates are NaN when the corresponding truth class is empty.
CoefMetrics coef_metrics(const Eigen::MatrixXd& beta_hat,
                         const Eigen::MatrixXd& beta_true);

// True when sign(beta_hat) matches sign(beta_true) entrywise.
bool exact_sign_recovery(const Eigen::MatrixXd& beta_hat,
                         const Eigen::MatrixXd& beta_true);

struct ReplicateCell {
  int replicate = 0;
  bool ok = false;
  std::string error;
  double mse = 0.0;
  double l2 = 0.0;
  double fpr = 0.0;
  double fnr = 0.0;
};

struct MethodSummary {
  std::string method;
  std::vector<ReplicateCell> cells;  // one per replicate, in order
  int ok_count = 0;
  int failed_count = 0;
  double mse_mean = 0.0, mse_se = 0.0;
  double l2_mean = 0.0, l2_se = 0.0;
  double fpr_mean = 0.0, fpr_se = 0.0;
  double fnr_mean = 0.0, fnr_se = 0.0;
};

struct MetricsReport {
  std::string scenario;
  int replicates = 0;
  double edge_drop_fraction = 0.0;
  double total_seconds = 0.0;  // wall time, reported only in the run log
  std::vector<MethodSummary> methods;
};

struct ExperimentOptions {
  TuningGrid grid;
  TuneOptions tune;
  int threads = 1;
};

// Runs every method over `replicates` independently drawn studies and
// aggregates test error and coefficient recovery. Each (replicate, method)
// cell regenerates its study from (cfg.seed := seed, replicate), so results
// do not depend on thread count or scheduling.
MetricsReport run_experiment(const ScenarioConfig& cfg,
                             const std::vector<std::string>& methods,
                             int replicates, std::uint64_t seed,
                             const ExperimentOptions& opts = {});

// Same protocol with a fraction of true graph edges deleted before fitting,
// redrawn per replicate and shared by every graph-using method in it.
// Methods that ignore the graph reproduce run_experiment exactly.
MetricsReport run_sensitivity(const ScenarioConfig& cfg,
                              const std::vector<std::string>& methods,
                              int replicates, std::uint64_t seed,
                              double edge_drop_fraction,
                              const ExperimentOptions& opts = {});

// Summary table, one method per row; NaN prints as NA.
void write_report_csv(const MetricsReport& report, const std::string& path);

// Aligned table with a standard-error line beneath each method row.
std::string format_report_text(const MetricsReport& report);
void write_report_text(const MetricsReport& report, const std::string& path);

// Per-cell values at full precision, for exact recomputation of the summary.
void write_cells_csv(const MetricsReport& report, const std::string& path);

}  // namespace sil
