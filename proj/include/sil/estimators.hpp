#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "sil/graph.hpp"
#include "sil/penalty.hpp"
#include "sil/solver.hpp"

namespace sil {

// FHT fits every dataset on its own; FHM merges all datasets with each row
// weighted by the reciprocal of its dataset size; IHM and IHT fit jointly
// with shared or per-dataset selection.
enum class Integration { FHT, FHM, IHM, IHT };

struct ModelSpec {
  std::string name;
  Integration integration = Integration::IHM;
  Rho1 rho1 = Rho1::Linear;
  Rho2 rho2 = Rho2::Frobenius;
  bool uses_graph = false;
  bool tune_eta = false;
  bool tune_alpha = false;
  bool tune_ridge = false;
  double alpha = 1.0;     // fixed value when tune_alpha is off
  bool adaptive = false;  // correlation-based penalty weights
};

// Resolves one of the named presets: Lasso, Enet, SRIG, FHM-Lasso, FHM-Enet,
// FHM-SRIG, gLasso, L2-gMCP, sgLasso, L1-gMCP, and SIL-{Lasso,MCP,LS}-{IHM,IHT}.
ModelSpec make_preset(const std::string& name);

std::vector<std::string> preset_names();

struct TuningGrid {
  std::vector<double> lambda;  // explicit values; empty derives from lambda_max
  int num_lambda = 25;
  double lambda_min_ratio = 1e-3;
  std::vector<double> eta;  // empty derives from mean |y|
  int num_eta = 10;
  std::vector<double> lambda_ridge = {0.0, 1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  std::vector<double> alpha = {0.0, 0.25, 0.5, 0.75, 1.0};
  void validate() const;
};

// Smaller grid for quick studies: 10 lambdas, 5 etas, ridge {0, 1e-2, 1}.
TuningGrid reduced_grid();

struct TuneOptions {
  bool standardize = true;
  FitOptions fit;
  int threads = 1;
};

struct GridPoint {
  int dataset = -1;  // which study under per-dataset integration, else -1
  double lambda = 0.0;
  double eta = 0.0;
  double lambda_ridge = 0.0;
  double alpha = 1.0;
  double val_error = 0.0;
  int nnz = 0;
  bool ok = true;
  std::string error;
};

struct TunedModel {
  ModelSpec spec;
  Eigen::MatrixXd beta;            // p by M, original scale
  std::vector<double> intercepts;  // per study
  std::vector<PenaltyConfig> chosen;  // one entry, or one per study for FHT
  double val_error = 0.0;
  std::vector<GridPoint> table;
};

// Penalty weight multipliers d_j, reciprocal to the average absolute
// per-study inner product between feature j and the centered response.
Eigen::VectorXd adaptive_weights(const MultiStudy& data);

// Mean over studies of the per-study mean squared prediction error.
double prediction_mse(const Eigen::MatrixXd& beta,
                      const std::vector<double>& intercepts,
                      const MultiStudy& data);

// Fits the spec over the whole grid, scoring every candidate on the
// validation split; ties break toward fewer nonzeros, then larger lambda.
// The working graph is ignored by specs that do not use one.
TunedModel grid_search(const ModelSpec& spec, const PredictorGraph& graph,
                       const MultiStudy& train, const MultiStudy& validate,
                       const TuningGrid& grid, const TuneOptions& opts = {});

}  // namespace sil
