#include "sil/solver.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace sil {

int MultiStudy::num_features() const {
  if (studies.empty()) throw std::invalid_argument("no studies");
  int p = (int)studies[0].x.cols();
  for (const Study& s : studies)
    if ((int)s.x.cols() != p)
      throw std::invalid_argument("studies disagree on feature count");
  return p;
}

int MultiStudy::total_rows() const {
  int n = 0;
  for (const Study& s : studies) n += s.rows();
  return n;
}

void MultiStudy::validate() const {
  if (studies.empty()) throw std::invalid_argument("no studies");
  num_features();
  for (size_t m = 0; m < studies.size(); ++m) {
    const Study& s = studies[m];
    if (s.rows() < 1) {
      std::ostringstream msg;
      msg << "study " << m + 1 << " has no rows";
      throw std::invalid_argument(msg.str());
    }
    if (s.y.size() != s.x.rows()) {
      std::ostringstream msg;
      msg << "study " << m + 1 << ": response length " << s.y.size()
          << " does not match " << s.x.rows() << " design rows";
      throw std::invalid_argument(msg.str());
    }
    if (!s.x.allFinite() || !s.y.allFinite()) {
      std::ostringstream msg;
      msg << "study " << m + 1 << " contains nonfinite values";
      throw std::invalid_argument(msg.str());
    }
  }
}

Eigen::MatrixXd recover_beta(const Eigen::MatrixXd& latent,
                             const NeighborhoodIndex& nb) {
  if (latent.rows() != nb.total_rows())
    throw std::invalid_argument("latent row count does not match groups");
  Eigen::MatrixXd beta =
      Eigen::MatrixXd::Zero(nb.num_groups(), latent.cols());
  for (int j = 0; j < nb.num_groups(); ++j) {
    const std::vector<int>& group = nb.groups[j];
    for (int i = 0; i < nb.sizes[j]; ++i)
      beta.row(group[i]) += latent.row(nb.offsets[j] + i);
  }
  return beta;
}

namespace {

double ridge_value(const FitProblem& prob, const Eigen::MatrixXd& latent) {
  double lr = prob.penalty.lambda_ridge;
  if (lr == 0.0) return 0.0;
  double total = 0.0;
  for (int j = 0; j < prob.nb.num_groups(); ++j)
    total += lr * prob.nb.sizes[j] / 2.0 *
             latent.middleRows(prob.nb.offsets[j], prob.nb.sizes[j])
                 .squaredNorm();
  return total;
}

double loss_value(const FitProblem& prob, const Eigen::MatrixXd& beta,
                  Eigen::MatrixXd* score) {
  const MultiStudy& data = prob.data;
  double total = 0.0;
  for (int m = 0; m < data.num_studies(); ++m) {
    const Study& s = data.studies[m];
    double n = (double)s.rows();
    Eigen::VectorXd r = s.y - s.x * beta.col(m);
    total += r.squaredNorm() / (2.0 * n);
    if (score) score->col(m) = s.x.transpose() * r / n;
  }
  return total;
}

}  // namespace

double smooth_value(const FitProblem& prob, const Eigen::MatrixXd& latent) {
  Eigen::MatrixXd beta = recover_beta(latent, prob.nb);
  return loss_value(prob, beta, nullptr) + ridge_value(prob, latent);
}

double smooth_value_grad(const FitProblem& prob, const Eigen::MatrixXd& latent,
                         Eigen::MatrixXd& grad) {
  const NeighborhoodIndex& nb = prob.nb;
  Eigen::MatrixXd beta = recover_beta(latent, nb);
  Eigen::MatrixXd score(beta.rows(), beta.cols());
  double value = loss_value(prob, beta, &score);

  grad.resize(latent.rows(), latent.cols());
  double lr = prob.penalty.lambda_ridge;
  double ridge = 0.0;
  for (int j = 0; j < nb.num_groups(); ++j) {
    const std::vector<int>& group = nb.groups[j];
    for (int i = 0; i < nb.sizes[j]; ++i)
      grad.row(nb.offsets[j] + i) = -score.row(group[i]);
    if (lr > 0.0) {
      auto block = latent.middleRows(nb.offsets[j], nb.sizes[j]);
      grad.middleRows(nb.offsets[j], nb.sizes[j]) += lr * nb.sizes[j] * block;
      ridge += lr * nb.sizes[j] / 2.0 * block.squaredNorm();
    }
  }
  return value + ridge;
}

double objective_value(const FitProblem& prob, const Eigen::MatrixXd& latent) {
  return smooth_value(prob, latent) +
         penalty_value(prob.penalty, latent, prob.nb);
}

Eigen::MatrixXd backtracked_prox_step(const FitProblem& prob,
                                      const Eigen::MatrixXd& y, double fy,
                                      const Eigen::MatrixXd& grad, double& t,
                                      double& fz, double step_shrink) {
  if (!(step_shrink > 0.0) || !(step_shrink < 1.0))
    throw std::invalid_argument("step_shrink must lie in (0, 1)");
  const NeighborhoodIndex& nb = prob.nb;
  for (int halvings = 0; halvings < 200; ++halvings) {
    Eigen::MatrixXd z = y - t * grad;
    for (int j = 0; j < nb.num_groups(); ++j)
      prox_block_inplace(prob.penalty, t, prob.penalty.weights.tau[j],
                         z.middleRows(nb.offsets[j], nb.sizes[j]));
    fz = smooth_value(prob, z);
    double lin = (grad.cwiseProduct(z - y)).sum();
    double quad = (z - y).squaredNorm() / (2.0 * t);
    double bound = fy + lin + quad;
    if (fz <= bound + 1e-12 * std::max(1.0, std::abs(fz))) return z;
    t *= step_shrink;
  }
  throw std::runtime_error("line search failed to find an admissible step");
}

FitResult fista_fit(const FitProblem& prob, const FitOptions& opts,
                    const Eigen::MatrixXd* warm_start) {
  prob.data.validate();
  int p = prob.data.num_features();
  if (prob.nb.num_groups() != p)
    throw std::invalid_argument("neighborhoods do not match feature count");
  prob.penalty.validate(p);
  if (!(opts.tol > 0.0) || opts.max_iter < 1)
    throw std::invalid_argument("bad fit options");

  int rows = prob.nb.total_rows();
  int nm = prob.data.num_studies();
  Eigen::MatrixXd x;
  if (warm_start) {
    if (warm_start->rows() != rows || warm_start->cols() != nm)
      throw std::invalid_argument("warm start has wrong shape");
    x = *warm_start;
  } else {
    x = Eigen::MatrixXd::Zero(rows, nm);
  }

  double cap = 0.99 * prob.penalty.step_cap();
  double t = opts.initial_step > 0.0 ? opts.initial_step : 1.0;
  t = std::min(t, cap);

  FitResult out;
  Eigen::MatrixXd x_prev = x;
  double theta = 1.0, theta_prev = 1.0;
  double fx = objective_value(prob, x);
  if (!std::isfinite(fx))
    throw std::runtime_error("nonfinite objective at the starting point");
  out.trace.push_back(fx);

  Eigen::MatrixXd grad;
  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    bool momentum = opts.accelerated && theta_prev > 1.0;
    Eigen::MatrixXd y =
        momentum ? (x + ((theta_prev - 1.0) / theta) * (x - x_prev)).eval()
                 : x;
    double fy = smooth_value_grad(prob, y, grad);
    double fz = 0.0;
    Eigen::MatrixXd z =
        backtracked_prox_step(prob, y, fy, grad, t, fz, opts.step_shrink);
    double obj = fz + penalty_value(prob.penalty, z, prob.nb);

    if (obj <= fx) {
      x_prev = x;
      x = std::move(z);
      theta_prev = theta;
      theta = (1.0 + std::sqrt(1.0 + 4.0 * theta * theta)) / 2.0;
    } else {
      // Momentum overshot: fall back to a plain step from x and restart.
      if (momentum) {
        double fxs = smooth_value_grad(prob, x, grad);
        z = backtracked_prox_step(prob, x, fxs, grad, t, fz, opts.step_shrink);
        obj = fz + penalty_value(prob.penalty, z, prob.nb);
      }
      theta_prev = 1.0;
      theta = 1.0;
      if (obj <= fx) {
        x_prev = x;
        x = std::move(z);
      } else {
        obj = fx;  // no decrease left at this scale
      }
    }
    if (!std::isfinite(obj)) throw std::runtime_error("objective diverged");

    out.trace.push_back(obj);
    out.step_sizes.push_back(t);
    out.iterations = iter;
    double rel = std::abs(fx - obj) / std::max(1.0, std::abs(fx));
    fx = obj;
    if (rel < opts.tol) {
      out.converged = true;
      break;
    }
  }

  out.latent = std::move(x);
  out.beta = recover_beta(out.latent, prob.nb);
  out.intercepts.assign(nm, 0.0);
  out.objective = fx;
  return out;
}

double lambda_max(const MultiStudy& data, const NeighborhoodIndex& nb,
                  const GroupWeights& w, Rho2 rho2, double alpha) {
  data.validate();
  int p = data.num_features();
  if (nb.num_groups() != p || (int)w.tau.size() != p)
    throw std::invalid_argument("index or weights do not match feature count");
  if (rho2 == Rho2::Mixture && (!(alpha >= 0.0) || !(alpha <= 1.0)))
    throw std::invalid_argument("alpha must lie in [0, 1]");

  int nm = data.num_studies();
  Eigen::MatrixXd score(p, nm);
  for (int m = 0; m < nm; ++m) {
    const Study& s = data.studies[m];
    score.col(m) = s.x.transpose() * s.y / (double)s.rows();
  }

  double best = 0.0;
  for (int j = 0; j < p; ++j) {
    Eigen::MatrixXd g(nb.sizes[j], nm);
    for (int i = 0; i < nb.sizes[j]; ++i) g.row(i) = score.row(nb.groups[j][i]);
    double tau = w.tau[j];

    if (rho2 == Rho2::Frobenius || (rho2 == Rho2::Mixture && alpha == 1.0)) {
      best = std::max(best, g.norm() / tau);
      continue;
    }
    Eigen::VectorXd colnorms = g.colwise().norm();
    if (rho2 == Rho2::L21 || (rho2 == Rho2::Mixture && alpha == 0.0)) {
      best = std::max(best, colnorms.maxCoeff() / tau);
      continue;
    }

    // Mixture: the zero block stays optimal while the column-soft-thresholded
    // score fits inside the Frobenius ball; the crossing lambda solves
    // sum_m ((c_m - (1-alpha) lambda tau)_+)^2 = (alpha lambda tau)^2.
    double top = colnorms.maxCoeff();
    if (top == 0.0) continue;
    double hi = top / ((1.0 - alpha) * tau);
    double lo = 0.0;
    for (int it = 0; it < 200 && (hi - lo) > 1e-15 * hi; ++it) {
      double mid = (lo + hi) / 2.0;
      double soft = 0.0;
      for (int m = 0; m < nm; ++m) {
        double v = colnorms(m) - (1.0 - alpha) * mid * tau;
        if (v > 0.0) soft += v * v;
      }
      double ball = alpha * mid * tau;
      if (soft > ball * ball)
        lo = mid;
      else
        hi = mid;
    }
    best = std::max(best, hi);
  }
  return best;
}

Standardizer Standardizer::fit(const MultiStudy& data) {
  data.validate();
  int p = data.num_features();
  Standardizer s;
  for (const Study& st : data.studies) {
    double n = (double)st.rows();
    Eigen::VectorXd mean = st.x.colwise().mean();
    Eigen::VectorXd scale(p);
    for (int k = 0; k < p; ++k) {
      double var = (st.x.col(k).array() - mean(k)).square().sum() / n;
      scale(k) = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    s.x_mean.push_back(std::move(mean));
    s.x_scale.push_back(std::move(scale));
    s.y_mean.push_back(st.y.mean());
  }
  return s;
}

MultiStudy Standardizer::apply(const MultiStudy& data) const {
  if (data.studies.size() != x_mean.size())
    throw std::invalid_argument("standardizer built for a different split");
  MultiStudy out;
  for (size_t m = 0; m < data.studies.size(); ++m) {
    Study st;
    st.x = (data.studies[m].x.rowwise() - x_mean[m].transpose()).array()
               .rowwise() /
           x_scale[m].transpose().array();
    st.y = data.studies[m].y.array() - y_mean[m];
    out.studies.push_back(std::move(st));
  }
  return out;
}

void Standardizer::back_transform(const NeighborhoodIndex& nb,
                                  FitResult& fit) const {
  int nm = (int)x_mean.size();
  if (fit.beta.cols() != nm || fit.beta.rows() != nb.num_groups())
    throw std::invalid_argument("fit does not match standardizer shape");
  for (int m = 0; m < nm; ++m) {
    for (int j = 0; j < nb.num_groups(); ++j) {
      for (int i = 0; i < nb.sizes[j]; ++i)
        fit.latent(nb.offsets[j] + i, m) /= x_scale[m](nb.groups[j][i]);
    }
    fit.beta.col(m).array() /= x_scale[m].array();
  }
  fit.intercepts.assign(nm, 0.0);
  for (int m = 0; m < nm; ++m)
    fit.intercepts[m] = y_mean[m] - fit.beta.col(m).dot(x_mean[m]);
}

}  // namespace sil
