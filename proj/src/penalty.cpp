#include "sil/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace sil {

namespace {

void check_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream msg;
    msg << name << " must be positive and finite, got " << v;
    throw std::invalid_argument(msg.str());
  }
}

void check_step_bound(double lambda, double t, double tau, double eta) {
  double cap = eta / (lambda * tau);
  if (!(t < cap)) {
    std::ostringstream msg;
    msg << "step " << t << " too large for log-sum prox; require t < "
        << "eta/(lambda*tau) = " << cap;
    throw std::invalid_argument(msg.str());
  }
}

// rho_mcp(x) = x - x^2/(2*lambda*eta) below the cap lambda*eta, constant
// lambda*eta/2 beyond it.
double mcp_rho(double x, double lambda, double eta) {
  double knot = lambda * eta;
  if (x >= knot) return knot / 2.0;
  return x - x * x / (2.0 * knot);
}

double mcp_l21_objective(const Eigen::MatrixXd& w, const Eigen::MatrixXd& delta,
                         double lambda, double t, double tau, double eta) {
  double s = w.colwise().norm().sum();
  return (w - delta).squaredNorm() / (2.0 * t) +
         lambda * tau * mcp_rho(s, lambda, eta);
}

}  // namespace

void PenaltyConfig::validate(int p) const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("lambda must be nonnegative and finite");
  if (!(lambda_ridge >= 0.0) || !std::isfinite(lambda_ridge))
    throw std::invalid_argument("lambda_ridge must be nonnegative and finite");
  if (rho1 != Rho1::Linear) {
    check_positive(eta, "eta");
    if (rho2 == Rho2::Mixture)
      throw std::invalid_argument(
          "Mixture norm is only defined for the convex outer penalty");
  }
  if (rho2 == Rho2::Mixture && (!(alpha >= 0.0) || !(alpha <= 1.0)))
    throw std::invalid_argument("alpha must lie in [0, 1]");
  if ((int)weights.tau.size() != p)
    throw std::invalid_argument("group weights do not match feature count");
  for (double tj : weights.tau)
    if (!(tj > 0.0) || !std::isfinite(tj))
      throw std::invalid_argument("group weights must be positive and finite");
}

double PenaltyConfig::step_cap() const {
  double inf = std::numeric_limits<double>::infinity();
  if (rho1 == Rho1::Linear || lambda == 0.0 || weights.tau.empty()) return inf;
  double mt = weights.max_tau();
  if (rho1 == Rho1::LogSum) return eta / (lambda * mt);
  return std::min(eta / (lambda * mt), eta / mt);
}

double penalty_block_value(const PenaltyConfig& cfg, double tau,
                           const Eigen::MatrixXd& block) {
  if (cfg.lambda == 0.0) return 0.0;
  double x;
  switch (cfg.rho2) {
    case Rho2::Frobenius:
      x = block.norm();
      break;
    case Rho2::L21:
      x = block.colwise().norm().sum();
      break;
    case Rho2::Mixture:
      return cfg.lambda * tau *
             (cfg.alpha * block.norm() +
              (1.0 - cfg.alpha) * block.colwise().norm().sum());
  }
  switch (cfg.rho1) {
    case Rho1::Linear:
      return cfg.lambda * tau * x;
    case Rho1::LogSum:
      return cfg.lambda * tau * cfg.eta * std::log1p(x / cfg.eta);
    case Rho1::MCP:
      return cfg.lambda * tau * mcp_rho(x, cfg.lambda, cfg.eta);
  }
  return 0.0;
}

double penalty_value(const PenaltyConfig& cfg, const Eigen::MatrixXd& latent,
                     const NeighborhoodIndex& nb) {
  double total = 0.0;
  for (int j = 0; j < nb.num_groups(); ++j) {
    Eigen::MatrixXd block =
        latent.middleRows(nb.offsets[j], nb.sizes[j]);
    total += penalty_block_value(cfg, cfg.weights.tau[j], block);
  }
  return total;
}

Eigen::MatrixXd prox_group_frobenius(const Eigen::MatrixXd& delta,
                                     double threshold) {
  if (threshold == 0.0) return delta;
  if (!(threshold > 0.0))
    throw std::invalid_argument("threshold must be nonnegative");
  double x = delta.norm();
  if (x <= threshold) return Eigen::MatrixXd::Zero(delta.rows(), delta.cols());
  return (1.0 - threshold / x) * delta;
}

Eigen::MatrixXd prox_ls1(const Eigen::MatrixXd& delta, double lambda, double t,
                         double tau, double eta) {
  check_positive(t, "t");
  check_positive(tau, "tau");
  check_positive(eta, "eta");
  double lt = lambda * t * tau;
  if (lt == 0.0) return delta;
  check_step_bound(lambda, t, tau, eta);

  double x = delta.norm();
  if (x <= lt) return Eigen::MatrixXd::Zero(delta.rows(), delta.cols());

  // Shrinkage level h in (0,1): smaller root of c*h^2 - (1 + x/eta)*h + 1
  // with c = lt/eta; the discriminant is positive whenever x > lt.
  double c = lt / eta;
  double b = 1.0 + x / eta;
  double disc = b * b - 4.0 * c;
  if (disc < 0.0) {
    if (disc < -1e-12) throw std::logic_error("log-sum prox: negative discriminant");
    disc = 0.0;
  }
  double h = (b - std::sqrt(disc)) / (2.0 * c);
  double factor = 1.0 - lt * h / x;
  if (factor <= 0.0) return Eigen::MatrixXd::Zero(delta.rows(), delta.cols());
  return factor * delta;
}

double solve_h(const std::vector<double>& xis, double c) {
  if (xis.empty()) throw std::invalid_argument("solve_h: empty xi list");
  if (!(c > 0.0) || !(c < 1.0))
    throw std::invalid_argument("solve_h: c must lie in (0, 1)");
  for (double xi : xis)
    if (!(xi >= 0.0) || !std::isfinite(xi))
      throw std::invalid_argument("solve_h: xi must be nonnegative and finite");

  std::vector<double> s(xis);
  std::sort(s.begin(), s.end());
  int m = (int)s.size();
  if (s[m - 1] <= 1.0) return 1.0;

  // h solves h = 1/(1 + c*sum_l(xi_l - h)_+). Scan the intervals cut by the
  // sorted xi below 1; on each, the active set is fixed and h is the smaller
  // root of c*n_k*h^2 - (1 + c*S_k)*h + 1 with n_k terms summing to S_k.
  int below = 0;
  while (below < m && s[below] < 1.0) ++below;
  std::vector<double> suffix(m + 1, 0.0);
  for (int i = m - 1; i >= 0; --i) suffix[i] = suffix[i + 1] + s[i];

  const double slack = 1e-12;
  for (int k = 0; k <= below; ++k) {
    double lower = (k == 0) ? 0.0 : s[k - 1];
    double upper = (k == below) ? 1.0 : s[k];
    int n_active = m - k;
    double sum_active = suffix[k];
    double b = 1.0 + c * sum_active;
    double disc = b * b - 4.0 * c * n_active;
    if (disc < 0.0) continue;
    double h = (b - std::sqrt(disc)) / (2.0 * c * n_active);
    if (h >= lower - slack && h < upper + slack) return std::min(h, 1.0);
  }
  throw std::logic_error("solve_h: interval scan found no root");
}

Eigen::MatrixXd prox_ls2(const Eigen::MatrixXd& delta, double lambda, double t,
                         double tau, double eta) {
  check_positive(t, "t");
  check_positive(tau, "tau");
  check_positive(eta, "eta");
  double lt = lambda * t * tau;
  if (lt == 0.0) return delta;
  check_step_bound(lambda, t, tau, eta);

  std::vector<double> xis(delta.cols());
  for (int j = 0; j < delta.cols(); ++j) xis[j] = delta.col(j).norm() / lt;
  double h = solve_h(xis, lt / eta);

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(delta.rows(), delta.cols());
  for (int j = 0; j < delta.cols(); ++j) {
    double n = delta.col(j).norm();
    if (n > lt * h) w.col(j) = (1.0 - lt * h / n) * delta.col(j);
  }
  return w;
}

Eigen::MatrixXd prox_mcp(const Eigen::MatrixXd& delta, double lambda, double t,
                         double tau, double eta, McpInner inner) {
  check_positive(t, "t");
  check_positive(tau, "tau");
  check_positive(eta, "eta");
  double lt = lambda * t * tau;
  if (lt == 0.0) return delta;
  if (!(t * tau < eta)) {
    std::ostringstream msg;
    msg << "step " << t << " too large for MCP prox; require t < eta/tau = "
        << eta / tau;
    throw std::invalid_argument(msg.str());
  }

  if (inner == McpInner::Frobenius) {
    // Firm thresholding on the block norm.
    double x = delta.norm();
    if (x >= lambda * eta) return delta;
    if (x <= lt) return Eigen::MatrixXd::Zero(delta.rows(), delta.cols());
    double scale = (1.0 - lt / x) / (1.0 - t * tau / eta);
    return scale * delta;
  }

  // Column norms shrink by a shared level g = (1 - c*sum_l(xi_l - g)_+)_+
  // with c = t*tau/eta; every interval of the sorted xi yields a linear
  // candidate, and the nonconvexity is settled by comparing objectives.
  int mcols = (int)delta.cols();
  std::vector<double> xis(mcols);
  for (int j = 0; j < mcols; ++j) xis[j] = delta.col(j).norm() / lt;
  std::vector<double> s(xis);
  std::sort(s.begin(), s.end());
  std::vector<double> suffix(mcols + 1, 0.0);
  for (int i = mcols - 1; i >= 0; --i) suffix[i] = suffix[i + 1] + s[i];

  double c = t * tau / eta;
  std::vector<double> candidates = {0.0, 1.0};
  int below = 0;
  while (below < mcols && s[below] < 1.0) ++below;
  const double slack = 1e-12;
  for (int k = 0; k <= below; ++k) {
    double lower = (k == 0) ? 0.0 : s[k - 1];
    double upper = (k == below) ? 1.0 : s[k];
    int n_active = mcols - k;
    double den = 1.0 - c * n_active;
    if (std::abs(den) < 1e-14) continue;
    double g = (1.0 - c * suffix[k]) / den;
    if (g > 0.0 && g <= 1.0 && g >= lower - slack && g < upper + slack)
      candidates.push_back(g);
  }

  Eigen::MatrixXd best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (double g : candidates) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(delta.rows(), delta.cols());
    for (int j = 0; j < mcols; ++j) {
      double n = delta.col(j).norm();
      if (n > lt * g) w.col(j) = (1.0 - lt * g / n) * delta.col(j);
    }
    double obj = mcp_l21_objective(w, delta, lambda, t, tau, eta);
    if (obj < best_obj) {
      best_obj = obj;
      best = std::move(w);
    }
  }
  return best;
}

Eigen::MatrixXd prox_mixture(const Eigen::MatrixXd& delta, double lambda,
                             double t, double tau, double alpha) {
  check_positive(t, "t");
  check_positive(tau, "tau");
  if (!(alpha >= 0.0) || !(alpha <= 1.0))
    throw std::invalid_argument("alpha must lie in [0, 1]");
  double lt = lambda * t * tau;
  if (lt == 0.0) return delta;

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(delta.rows(), delta.cols());
  double col_thr = (1.0 - alpha) * lt;
  for (int j = 0; j < delta.cols(); ++j) {
    double n = delta.col(j).norm();
    if (n > col_thr) w.col(j) = (1.0 - col_thr / n) * delta.col(j);
  }
  return prox_group_frobenius(w, alpha * lt);
}

void prox_block_inplace(const PenaltyConfig& cfg, double t, double tau,
                        Eigen::Ref<Eigen::MatrixXd> block) {
  switch (cfg.rho1) {
    case Rho1::Linear:
      switch (cfg.rho2) {
        case Rho2::Frobenius:
          block = prox_group_frobenius(block, cfg.lambda * t * tau);
          return;
        case Rho2::L21:
          block = prox_mixture(block, cfg.lambda, t, tau, 0.0);
          return;
        case Rho2::Mixture:
          block = prox_mixture(block, cfg.lambda, t, tau, cfg.alpha);
          return;
      }
      return;
    case Rho1::LogSum:
      block = (cfg.rho2 == Rho2::Frobenius)
                  ? prox_ls1(block, cfg.lambda, t, tau, cfg.eta)
                  : prox_ls2(block, cfg.lambda, t, tau, cfg.eta);
      return;
    case Rho1::MCP:
      block = prox_mcp(block, cfg.lambda, t, tau, cfg.eta,
                       cfg.rho2 == Rho2::Frobenius ? McpInner::Frobenius
                                                   : McpInner::L21);
      return;
  }
}

}  // namespace sil
