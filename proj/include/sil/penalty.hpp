#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sil/graph.hpp"

namespace sil {

enum class Rho1 { Linear, MCP, LogSum };
enum class Rho2 { Frobenius, L21, Mixture };

// Composite group penalty lambda * sum_j tau_j * rho1(rho2(Delta_j)), plus a
// ridge term lambda_ridge * a_j / 2 * ||Delta_j||_F^2 that is handled by the
// smooth part of the objective.
//
// rho2 measures a block either by its Frobenius norm (all datasets selected
// together) or by the sum of its per-dataset column norms (columns may drop
// individually). Mixture blends the two and is defined for the convex outer
// penalty only.
struct PenaltyConfig {
  Rho1 rho1 = Rho1::Linear;
  Rho2 rho2 = Rho2::Frobenius;
  double lambda = 0.0;
  double eta = 1.0;          // concavity scale for MCP / LogSum
  double alpha = 1.0;        // Mixture blend, 1 = pure Frobenius
  double lambda_ridge = 0.0;
  GroupWeights weights;

  // Throws std::invalid_argument when the combination is malformed
  // (Mixture with a nonconvex outer penalty, nonpositive eta, ...).
  void validate(int p) const;

  bool convex() const { return rho1 == Rho1::Linear; }

  // Largest step size admissible for the nonconvex proximal operators,
  // +inf for convex configurations.
  double step_cap() const;
};

// Penalty value over all groups; latent rows are stacked per group in the
// order given by nb.offsets. Excludes the ridge term.
double penalty_value(const PenaltyConfig& cfg, const Eigen::MatrixXd& latent,
                     const NeighborhoodIndex& nb);

// Single-block penalty value at the given weight.
double penalty_block_value(const PenaltyConfig& cfg, double tau,
                           const Eigen::MatrixXd& block);

// Block soft-thresholding: (1 - threshold/||Delta||_F)_+ Delta.
Eigen::MatrixXd prox_group_frobenius(const Eigen::MatrixXd& delta,
                                     double threshold);

// Proximal operator of lambda*tau*eta*log(1 + ||.||_F/eta) at step t.
// Requires t < eta/(lambda*tau).
Eigen::MatrixXd prox_ls1(const Eigen::MatrixXd& delta, double lambda, double t,
                         double tau, double eta);

// Proximal operator of lambda*tau*eta*log(1 + sum_m ||col_m||_2/eta).
// Requires t < eta/(lambda*tau).
Eigen::MatrixXd prox_ls2(const Eigen::MatrixXd& delta, double lambda, double t,
                         double tau, double eta);

// Shared shrinkage level for the log-sum column prox: the unique h in (0,1]
// with h = 1/(1 + c*sum_l(xi_l - h)_+), found by scanning the sorted xi.
// xi_m = ||col_m||_2/(lambda*t*tau), c = lambda*t*tau/eta in (0,1).
double solve_h(const std::vector<double>& xis, double c);

enum class McpInner { Frobenius, L21 };

// Proximal operator of lambda*tau*rho_mcp(rho2(.)) where
// rho_mcp(x) = x - x^2/(2*lambda*eta) capped at lambda*eta/2.
// Requires t*tau < eta (firm-threshold scaling) and, per the solver's
// step policy, t < eta/(lambda*tau).
Eigen::MatrixXd prox_mcp(const Eigen::MatrixXd& delta, double lambda, double t,
                         double tau, double eta, McpInner inner);

// Proximal operator of lambda*tau*(alpha*||.||_F + (1-alpha)*sum_m||col_m||_2):
// column-wise soft threshold at (1-alpha)*lambda*t*tau, then block soft
// threshold at alpha*lambda*t*tau.
Eigen::MatrixXd prox_mixture(const Eigen::MatrixXd& delta, double lambda,
                             double t, double tau, double alpha);

// Applies the configured prox for one group with weight tau at step t.
void prox_block_inplace(const PenaltyConfig& cfg, double t, double tau,
                        Eigen::Ref<Eigen::MatrixXd> block);

}  // namespace sil
