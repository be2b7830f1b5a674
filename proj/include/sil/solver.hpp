#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sil/graph.hpp"
#include "sil/penalty.hpp"

namespace sil {

// One dataset with response y (n) and design x (n by p).
struct Study {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  int rows() const { return (int)x.rows(); }
};

// Horizontally partitioned data: several studies over the same feature set.
struct MultiStudy {
  std::vector<Study> studies;

  int num_studies() const { return (int)studies.size(); }
  int num_features() const;
  int total_rows() const;
  void validate() const;
};

struct FitOptions {
  double tol = 1e-8;
  int max_iter = 10000;
  bool accelerated = true;
  double step_shrink = 0.5;
  double initial_step = 0.0;  // 0 picks min(1, nonconvex step cap)
};

struct FitResult {
  Eigen::MatrixXd latent;          // stacked group rows by M
  Eigen::MatrixXd beta;            // p by M
  std::vector<double> intercepts;  // per study, zero in standardized space
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;       // objective after each accepted iterate
  std::vector<double> step_sizes;  // accepted step per iteration
};

struct FitProblem {
  const MultiStudy& data;
  const NeighborhoodIndex& nb;
  PenaltyConfig penalty;
};

// beta_k^m accumulates every latent row that feature k owns across groups.
Eigen::MatrixXd recover_beta(const Eigen::MatrixXd& latent,
                             const NeighborhoodIndex& nb);

// Squared-error loss sum_m ||y^m - X^m beta^m||^2 / (2 n_m) plus the group
// ridge term. Works through beta, never through per-group design copies.
double smooth_value(const FitProblem& prob, const Eigen::MatrixXd& latent);

// Same, also filling the gradient with respect to every latent row.
double smooth_value_grad(const FitProblem& prob, const Eigen::MatrixXd& latent,
                         Eigen::MatrixXd& grad);

double objective_value(const FitProblem& prob, const Eigen::MatrixXd& latent);

// One proximal-gradient step from y with halving line search. On return the
// accepted step is stored back into t and the smooth value at z into fz.
Eigen::MatrixXd backtracked_prox_step(const FitProblem& prob,
                                      const Eigen::MatrixXd& y, double fy,
                                      const Eigen::MatrixXd& grad, double& t,
                                      double& fz, double step_shrink);

// Accelerated proximal gradient with monotone restarts; plain proximal
// gradient when opts.accelerated is false. Throws on nonfinite objectives.
FitResult fista_fit(const FitProblem& prob, const FitOptions& opts = {},
                    const Eigen::MatrixXd* warm_start = nullptr);

// Smallest lambda for which the zero fit is stationary.
double lambda_max(const MultiStudy& data, const NeighborhoodIndex& nb,
                  const GroupWeights& w, Rho2 rho2, double alpha = 1.0);

// Per-study column standardization (mean zero, variance one with the 1/n
// convention) and response centering. Constant columns keep scale one.
struct Standardizer {
  std::vector<Eigen::VectorXd> x_mean;
  std::vector<Eigen::VectorXd> x_scale;
  std::vector<double> y_mean;

  static Standardizer fit(const MultiStudy& data);
  MultiStudy apply(const MultiStudy& data) const;

  // Rescales a standardized-space fit to the original units and fills the
  // per-study intercepts. The latent rows are rescaled consistently so the
  // scatter-sum identity keeps holding.
  void back_transform(const NeighborhoodIndex& nb, FitResult& fit) const;
};

}  // namespace sil
