#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sil/graph.hpp"
#include "sil/rng.hpp"
#include "sil/solver.hpp"

namespace sil {

enum class Scenario { Ring, Hub, Random };

const char* scenario_name(Scenario sc);
Scenario parse_scenario(const std::string& name);

struct ScenarioConfig {
  Scenario scenario = Scenario::Ring;
  int blocks = 10;
  int block_size = 10;
  int num_studies = 5;
  Eigen::VectorXd alpha;  // empty uses default_alpha
  double p_ht = 0.0;      // chance a dataset drops the second block
  double sigma2 = 1.0;
  int n_train = 200;
  int n_valid = 200;
  int n_test = 1000;
  std::uint64_t seed = 0;

  int p() const { return blocks * block_size; }
  void validate() const;
};

// (1, 1/3, ..., 1/3) for ring and random structures, (1, 1/4, ...) for hub;
// sized to give roughly 2.5 signal-to-noise with unit error variance.
Eigen::VectorXd default_alpha(Scenario sc, int p_B);

// Lower-triangle nonzero positions (row > col, 0-based) for one block:
// ring closes a cycle, hub stars node 0, random keeps each pair with
// probability 3/p_B.
std::vector<std::pair<int, int>> scenario_support(Scenario sc, int p_B,
                                                  Rng& rng);

// Fills the support with U(-1.5,-0.5) draws, symmetrizes, sets the diagonal
// to 0.5 minus the row sum, and rescales so the inverse has unit diagonal.
// Diagonal dominance makes the result positive definite; a failed
// factorization redraws values up to 100 times before giving up.
Eigen::MatrixXd gen_block_precision_from_support(
    const std::vector<std::pair<int, int>>& support, int p_B, Rng& rng);

Eigen::MatrixXd gen_block_precision(Scenario sc, int p_B, Rng& rng);

struct SyntheticStudy {
  std::vector<Eigen::MatrixXd> precisions;  // per study, p by p block diagonal
  Eigen::MatrixXd beta_true;                // p by M
  // off-diagonal support, shared across studies
  PredictorGraph graph = edgeless_graph(0);
  MultiStudy train;
  MultiStudy validate;
  MultiStudy test;
};

// First block gets Omega_1 alpha, second gets Omega_2 alpha zeroed with
// probability p_ht per dataset, the rest stay zero.
Eigen::MatrixXd gen_true_beta(const ScenarioConfig& cfg,
                              const std::vector<Eigen::MatrixXd>& precisions,
                              Rng& rng);

// Full draw for one replicate: precisions (support shared across datasets),
// coefficients, and Gaussian train/validation/test splits. Deterministic in
// (cfg.seed, replicate) and independent of call order.
SyntheticStudy sample_study(const ScenarioConfig& cfg, int replicate = 0);

}  // namespace sil
