#include "sil/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "sil/parallel.hpp"

namespace sil {

std::vector<std::string> preset_names() {
  return {"Lasso",       "Enet",        "SRIG",         "FHM-Lasso",
          "FHM-Enet",    "FHM-SRIG",    "gLasso",       "L2-gMCP",
          "SIL-Lasso-IHM", "SIL-MCP-IHM", "SIL-LS-IHM", "sgLasso",
          "L1-gMCP",     "SIL-Lasso-IHT", "SIL-MCP-IHT", "SIL-LS-IHT"};
}

ModelSpec make_preset(const std::string& raw) {
  std::string name = raw;
  std::replace(name.begin(), name.end(), ' ', '-');
  ModelSpec s;
  s.name = name;
  if (name == "Lasso" || name == "FHM-Lasso") {
    s.integration = name == "Lasso" ? Integration::FHT : Integration::FHM;
  } else if (name == "Enet" || name == "FHM-Enet") {
    s.integration = name == "Enet" ? Integration::FHT : Integration::FHM;
    s.tune_ridge = true;
  } else if (name == "SRIG" || name == "FHM-SRIG") {
    s.integration = name == "SRIG" ? Integration::FHT : Integration::FHM;
    s.uses_graph = true;
  } else if (name == "gLasso") {
    s.integration = Integration::IHM;
  } else if (name == "L2-gMCP") {
    s.integration = Integration::IHM;
    s.rho1 = Rho1::MCP;
    s.tune_eta = true;
  } else if (name == "SIL-Lasso-IHM") {
    s.integration = Integration::IHM;
    s.rho2 = Rho2::Mixture;
    s.alpha = 1.0;
    s.uses_graph = true;
    s.adaptive = true;
    s.tune_ridge = true;
  } else if (name == "SIL-MCP-IHM") {
    s.integration = Integration::IHM;
    s.rho1 = Rho1::MCP;
    s.uses_graph = true;
    s.adaptive = true;
    s.tune_eta = true;
    s.tune_ridge = true;
  } else if (name == "SIL-LS-IHM") {
    s.integration = Integration::IHM;
    s.rho1 = Rho1::LogSum;
    s.uses_graph = true;
    s.adaptive = true;
    s.tune_eta = true;
    s.tune_ridge = true;
  } else if (name == "sgLasso") {
    s.integration = Integration::IHT;
    s.rho2 = Rho2::Mixture;
    s.tune_alpha = true;
  } else if (name == "L1-gMCP") {
    s.integration = Integration::IHT;
    s.rho1 = Rho1::MCP;
    s.rho2 = Rho2::L21;
    s.tune_eta = true;
  } else if (name == "SIL-Lasso-IHT") {
    s.integration = Integration::IHT;
    s.rho2 = Rho2::Mixture;
    s.uses_graph = true;
    s.adaptive = true;
    s.tune_alpha = true;
    s.tune_ridge = true;
  } else if (name == "SIL-MCP-IHT") {
    s.integration = Integration::IHT;
    s.rho1 = Rho1::MCP;
    s.rho2 = Rho2::L21;
    s.uses_graph = true;
    s.adaptive = true;
    s.tune_eta = true;
    s.tune_ridge = true;
  } else if (name == "SIL-LS-IHT") {
    s.integration = Integration::IHT;
    s.rho1 = Rho1::LogSum;
    s.rho2 = Rho2::L21;
    s.uses_graph = true;
    s.adaptive = true;
    s.tune_eta = true;
    s.tune_ridge = true;
  } else {
    std::ostringstream msg;
    msg << "unknown preset '" << raw << "'; supported:";
    for (const std::string& n : preset_names()) msg << " " << n;
    throw std::invalid_argument(msg.str());
  }
  return s;
}

void TuningGrid::validate() const {
  if (num_lambda < 1 || num_eta < 1)
    throw std::invalid_argument("grid sizes must be at least 1");
  if (!(lambda_min_ratio > 0.0) || !(lambda_min_ratio <= 1.0))
    throw std::invalid_argument("lambda_min_ratio must lie in (0, 1]");
  for (double v : lambda)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("lambda values must be nonnegative");
  for (double v : eta)
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("eta values must be positive");
  if (lambda_ridge.empty() || alpha.empty())
    throw std::invalid_argument("ridge and alpha axes must be non-empty");
  for (double v : lambda_ridge)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("lambda_ridge values must be nonnegative");
  for (double v : alpha)
    if (!(v >= 0.0) || !(v <= 1.0))
      throw std::invalid_argument("alpha values must lie in [0, 1]");
}

TuningGrid reduced_grid() {
  TuningGrid g;
  g.num_lambda = 10;
  g.num_eta = 5;
  g.lambda_ridge = {0.0, 1e-2, 1.0};
  return g;
}

Eigen::VectorXd adaptive_weights(const MultiStudy& data) {
  data.validate();
  int p = data.num_features();
  int nm = data.num_studies();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(p);
  for (const Study& s : data.studies) {
    Eigen::VectorXd yc = s.y.array() - s.y.mean();
    acc += s.x.transpose() * yc / (double)s.rows();
  }
  Eigen::VectorXd d(p);
  std::vector<double> finite;
  for (int j = 0; j < p; ++j) {
    double avg = std::abs(acc(j)) / nm;
    d(j) = avg > 0.0 ? 1.0 / avg : std::numeric_limits<double>::infinity();
    if (std::isfinite(d(j))) finite.push_back(d(j));
  }
  if (finite.empty()) return Eigen::VectorXd::Ones(p);
  size_t mid = finite.size() / 2;
  std::nth_element(finite.begin(), finite.begin() + mid, finite.end());
  double med = finite[mid];
  for (int j = 0; j < p; ++j)
    d(j) = std::min(std::max(d(j), 1e-6 * med), 1e6 * med);
  return d;
}

double prediction_mse(const Eigen::MatrixXd& beta,
                      const std::vector<double>& intercepts,
                      const MultiStudy& data) {
  if (beta.cols() != data.num_studies() ||
      (int)intercepts.size() != data.num_studies() ||
      beta.rows() != data.num_features())
    throw std::invalid_argument("coefficient shape does not match data");
  double total = 0.0;
  for (int m = 0; m < data.num_studies(); ++m) {
    const Study& s = data.studies[m];
    Eigen::VectorXd r =
        s.y - s.x * beta.col(m) - Eigen::VectorXd::Constant(s.rows(), intercepts[m]);
    total += r.squaredNorm() / (double)s.rows();
  }
  return total / data.num_studies();
}

namespace {

std::vector<double> lambda_path(const TuningGrid& grid, double lmax) {
  if (!grid.lambda.empty()) {
    std::vector<double> v = grid.lambda;
    std::sort(v.begin(), v.end(), std::greater<double>());
    return v;
  }
  if (!(lmax > 0.0)) return {0.0};
  int n = grid.num_lambda;
  if (n == 1) return {lmax};
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i)
    v[i] = lmax * std::pow(grid.lambda_min_ratio, i / (n - 1.0));
  return v;
}

std::vector<double> eta_axis(const TuningGrid& grid, const MultiStudy& data) {
  if (!grid.eta.empty()) return grid.eta;
  double total = 0.0;
  int count = 0;
  for (const Study& s : data.studies) {
    total += s.y.cwiseAbs().sum();
    count += s.rows();
  }
  double scale = count > 0 ? total / count : 1.0;
  if (!(scale > 0.0)) scale = 1.0;
  int n = grid.num_eta;
  if (n == 1) return {scale};
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i)
    v[i] = scale * std::pow(10.0, -2.0 + 3.0 * i / (n - 1.0));
  return v;
}

int count_nonzero(const Eigen::MatrixXd& beta) {
  int nnz = 0;
  for (int c = 0; c < beta.cols(); ++c)
    for (int r = 0; r < beta.rows(); ++r)
      if (beta(r, c) != 0.0) ++nnz;
  return nnz;
}

// (validation error, nonzeros, -lambda) lexicographic preference.
bool better_point(double val, int nnz, double lambda, double best_val,
                  int best_nnz, double best_lambda) {
  if (val != best_val) return val < best_val;
  if (nnz != best_nnz) return nnz < best_nnz;
  return lambda > best_lambda;
}

struct CoreResult {
  FitResult fit;
  PenaltyConfig best;
  double val_error = std::numeric_limits<double>::infinity();
  int nnz = 0;
  double lambda = 0.0;
  bool any_ok = false;
  std::vector<GridPoint> table;
};

// Sweeps the whole grid on (already standardized) training data. Each
// (eta, ridge, alpha) combination is an independent warm-started lambda
// chain; the winner is picked in fixed enumeration order so the result does
// not depend on thread scheduling.
CoreResult run_grid_core(const ModelSpec& spec, const MultiStudy& strain,
                         const NeighborhoodIndex& nb, const GroupWeights& w,
                         const TuningGrid& grid,
                         const std::function<double(const FitResult&)>& score,
                         const FitOptions& fit_opts, int threads,
                         int dataset_tag) {
  std::vector<double> etas =
      spec.tune_eta ? eta_axis(grid, strain) : std::vector<double>{1.0};
  std::vector<double> ridges =
      spec.tune_ridge ? grid.lambda_ridge : std::vector<double>{0.0};
  std::vector<double> alphas;
  if (spec.rho2 == Rho2::Mixture)
    alphas = spec.tune_alpha ? grid.alpha : std::vector<double>{spec.alpha};
  else
    alphas = {1.0};

  std::vector<std::vector<double>> paths(alphas.size());
  for (size_t a = 0; a < alphas.size(); ++a)
    paths[a] =
        lambda_path(grid, lambda_max(strain, nb, w, spec.rho2, alphas[a]));

  struct Combo {
    double eta, ridge, alpha;
    int alpha_idx;
  };
  std::vector<Combo> combos;
  for (double eta : etas)
    for (double ridge : ridges)
      for (size_t a = 0; a < alphas.size(); ++a)
        combos.push_back({eta, ridge, alphas[a], (int)a});

  struct ComboOut {
    std::vector<GridPoint> points;
    FitResult fit;
    PenaltyConfig cfg;
    double val = std::numeric_limits<double>::infinity();
    int nnz = 0;
    double lambda = 0.0;
    bool ok = false;
  };
  std::vector<ComboOut> outs(combos.size());

  parallel_for((int)combos.size(), threads, [&](int ci) {
    const Combo& combo = combos[ci];
    ComboOut& out = outs[ci];
    Eigen::MatrixXd warm;
    bool have_warm = false;
    for (double lambda : paths[combo.alpha_idx]) {
      PenaltyConfig cfg;
      cfg.rho1 = spec.rho1;
      cfg.rho2 = spec.rho2;
      cfg.lambda = lambda;
      cfg.eta = combo.eta;
      cfg.alpha = combo.alpha;
      cfg.lambda_ridge = combo.ridge;
      cfg.weights = w;

      GridPoint gp;
      gp.dataset = dataset_tag;
      gp.lambda = lambda;
      gp.eta = combo.eta;
      gp.lambda_ridge = combo.ridge;
      gp.alpha = combo.alpha;
      try {
        FitProblem prob{strain, nb, cfg};
        FitResult f = fista_fit(prob, fit_opts, have_warm ? &warm : nullptr);
        warm = f.latent;
        have_warm = true;
        gp.val_error = score(f);
        gp.nnz = count_nonzero(f.beta);
        if (!out.ok || better_point(gp.val_error, gp.nnz, lambda, out.val,
                                    out.nnz, out.lambda)) {
          out.ok = true;
          out.val = gp.val_error;
          out.nnz = gp.nnz;
          out.lambda = lambda;
          out.fit = f;
          out.cfg = cfg;
        }
      } catch (const std::exception& e) {
        gp.ok = false;
        gp.error = e.what();
      }
      out.points.push_back(gp);
    }
  });

  CoreResult res;
  for (size_t ci = 0; ci < outs.size(); ++ci) {
    ComboOut& out = outs[ci];
    res.table.insert(res.table.end(), out.points.begin(), out.points.end());
    if (out.ok && (!res.any_ok || better_point(out.val, out.nnz, out.lambda,
                                               res.val_error, res.nnz,
                                               res.lambda))) {
      res.any_ok = true;
      res.val_error = out.val;
      res.nnz = out.nnz;
      res.lambda = out.lambda;
      res.fit = std::move(out.fit);
      res.best = std::move(out.cfg);
    }
  }
  return res;
}

MultiStudy single_study(const MultiStudy& data, int m) {
  MultiStudy out;
  out.studies.push_back(data.studies[m]);
  return out;
}

// Merge per-dataset rows with weight sqrt(N/n_m), so the pooled least
// squares weighs each point by the reciprocal of its dataset's size.
MultiStudy merge_weighted(const MultiStudy& data) {
  int n_total = data.total_rows();
  int p = data.num_features();
  Study merged;
  merged.x.resize(n_total, p);
  merged.y.resize(n_total);
  int at = 0;
  for (const Study& s : data.studies) {
    double wrow = std::sqrt((double)n_total / s.rows());
    merged.x.middleRows(at, s.rows()) = wrow * s.x;
    merged.y.segment(at, s.rows()) = wrow * s.y;
    at += s.rows();
  }
  MultiStudy out;
  out.studies.push_back(std::move(merged));
  return out;
}

GroupWeights weights_for(const ModelSpec& spec, const NeighborhoodIndex& nb,
                         const MultiStudy& strain) {
  if (!spec.adaptive) return group_weights(nb);
  Eigen::VectorXd d = adaptive_weights(strain);
  return group_weights(nb, std::vector<double>(d.data(), d.data() + d.size()));
}

}  // namespace

TunedModel grid_search(const ModelSpec& spec, const PredictorGraph& graph,
                       const MultiStudy& train, const MultiStudy& validate,
                       const TuningGrid& grid, const TuneOptions& opts) {
  train.validate();
  validate.validate();
  grid.validate();
  int p = train.num_features();
  int nm = train.num_studies();
  if (validate.num_features() != p || validate.num_studies() != nm)
    throw std::invalid_argument("train and validation splits do not match");

  PredictorGraph working =
      spec.uses_graph ? graph : edgeless_graph(p);
  if (working.num_features() != p)
    throw std::invalid_argument("graph does not match feature count");
  NeighborhoodIndex nb = neighborhoods(working);

  TunedModel model;
  model.spec = spec;
  model.beta = Eigen::MatrixXd::Zero(p, nm);
  model.intercepts.assign(nm, 0.0);

  if (spec.integration == Integration::IHM ||
      spec.integration == Integration::IHT) {
    Standardizer std_;
    MultiStudy strain = train;
    if (opts.standardize) {
      std_ = Standardizer::fit(train);
      strain = std_.apply(train);
    }
    GroupWeights w = weights_for(spec, nb, strain);
    auto score = [&](const FitResult& f) {
      FitResult local = f;
      if (opts.standardize) std_.back_transform(nb, local);
      return prediction_mse(local.beta, local.intercepts, validate);
    };
    CoreResult core = run_grid_core(spec, strain, nb, w, grid, score, opts.fit,
                                    opts.threads, -1);
    if (!core.any_ok)
      throw std::runtime_error("every grid fit failed for " + spec.name);
    if (opts.standardize) std_.back_transform(nb, core.fit);
    model.beta = core.fit.beta;
    model.intercepts = core.fit.intercepts;
    model.chosen = {core.best};
    model.val_error = core.val_error;
    model.table = std::move(core.table);
    return model;
  }

  if (spec.integration == Integration::FHM) {
    Standardizer std_;
    MultiStudy sdata = train;
    if (opts.standardize) {
      std_ = Standardizer::fit(train);
      sdata = std_.apply(train);
    }
    MultiStudy merged = merge_weighted(sdata);
    GroupWeights w = weights_for(spec, nb, merged);
    auto expand = [&](const FitResult& f, Eigen::MatrixXd& beta,
                      std::vector<double>& icepts) {
      beta.resize(p, nm);
      icepts.assign(nm, 0.0);
      for (int m = 0; m < nm; ++m) {
        if (opts.standardize) {
          beta.col(m) = f.beta.col(0).array() / std_.x_scale[m].array();
          icepts[m] = std_.y_mean[m] - beta.col(m).dot(std_.x_mean[m]);
        } else {
          beta.col(m) = f.beta.col(0);
        }
      }
    };
    auto score = [&](const FitResult& f) {
      Eigen::MatrixXd beta;
      std::vector<double> icepts;
      expand(f, beta, icepts);
      return prediction_mse(beta, icepts, validate);
    };
    CoreResult core = run_grid_core(spec, merged, nb, w, grid, score, opts.fit,
                                    opts.threads, -1);
    if (!core.any_ok)
      throw std::runtime_error("every grid fit failed for " + spec.name);
    expand(core.fit, model.beta, model.intercepts);
    model.chosen = {core.best};
    model.val_error = core.val_error;
    model.table = std::move(core.table);
    return model;
  }

  // FHT: independent fit and tuning per dataset.
  double total_val = 0.0;
  for (int m = 0; m < nm; ++m) {
    MultiStudy tr = single_study(train, m);
    MultiStudy va = single_study(validate, m);
    Standardizer std_;
    MultiStudy strain = tr;
    if (opts.standardize) {
      std_ = Standardizer::fit(tr);
      strain = std_.apply(tr);
    }
    GroupWeights w = weights_for(spec, nb, strain);
    auto score = [&](const FitResult& f) {
      FitResult local = f;
      if (opts.standardize) std_.back_transform(nb, local);
      return prediction_mse(local.beta, local.intercepts, va);
    };
    CoreResult core = run_grid_core(spec, strain, nb, w, grid, score, opts.fit,
                                    opts.threads, m + 1);
    if (!core.any_ok)
      throw std::runtime_error("every grid fit failed for " + spec.name);
    if (opts.standardize) std_.back_transform(nb, core.fit);
    model.beta.col(m) = core.fit.beta.col(0);
    model.intercepts[m] = core.fit.intercepts[0];
    model.chosen.push_back(core.best);
    total_val += core.val_error;
    model.table.insert(model.table.end(), core.table.begin(),
                       core.table.end());
  }
  model.val_error = total_val / nm;
  return model;
}

}  // namespace sil
