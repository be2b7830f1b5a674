#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "sil/cli_run.hpp"
#include "sil/estimators.hpp"
#include "sil/eval.hpp"
#include "sil/io.hpp"
#include "sil/penalty.hpp"
#include "sil/rng.hpp"
#include "sil/simgen.hpp"
#include "sil/solver.hpp"

using namespace sil;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& detail) {
  if (!cond) throw Failure(detail);
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

Eigen::MatrixXd random_block(Rng& rng, int rows, int cols, double scale) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(-scale, scale);
  return m;
}

PredictorGraph ring_block_graph(int blocks, int block_size) {
  std::vector<std::pair<int, int>> edges;
  for (int b = 0; b < blocks; ++b) {
    int base = b * block_size;
    for (int i = 0; i < block_size; ++i)
      edges.push_back({base + i + 1, base + (i + 1) % block_size + 1});
  }
  return PredictorGraph::from_edge_list(blocks * block_size, edges);
}

PredictorGraph chain_graph(int p, int chain_edges) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i <= chain_edges; ++i) edges.push_back({i, i + 1});
  return PredictorGraph::from_edge_list(p, edges);
}

MultiStudy random_problem_data(Rng& rng, int p, int num_studies, int n) {
  MultiStudy data;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  int active = std::min(p, 5);
  for (int j = 0; j < active; ++j)
    beta(j) = (rng.bernoulli(0.5) ? 1.0 : -1.0) * rng.uniform(0.5, 1.5);
  for (int m = 0; m < num_studies; ++m) {
    Study s;
    s.x.resize(n, p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < p; ++j) s.x(i, j) = rng.normal();
    s.y = s.x * beta;
    for (int i = 0; i < n; ++i) s.y(i) += 0.5 * rng.normal();
    data.studies.push_back(std::move(s));
  }
  return data;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

const MethodSummary& method_row(const MetricsReport& report,
                                const std::string& name) {
  for (const MethodSummary& s : report.methods)
    if (s.method == name) return s;
  throw Failure("missing method row " + name);
}

void require_all_ok(const MetricsReport& report) {
  for (const MethodSummary& s : report.methods)
    require(s.failed_count == 0, s.method + " failed in " +
                                     std::to_string(s.failed_count) +
                                     " replicates: " +
                                     (s.cells.empty() ? std::string()
                                                      : s.cells[0].error));
}

int wins_against(const MethodSummary& a, const MethodSummary& b) {
  int wins = 0;
  for (size_t r = 0; r < a.cells.size(); ++r)
    if (a.cells[r].mse < b.cells[r].mse) ++wins;
  return wins;
}

// ---------------------------------------------------------------------------

std::string criterion_1() {
  Rng rng(101);
  double worst_gap = 0.0;
  struct Form {
    Rho1 r1;
    Rho2 r2;
    bool columnwise;
  };
  const std::vector<Form> forms = {
      {Rho1::Linear, Rho2::Frobenius, false}, {Rho1::LogSum, Rho2::Frobenius, false},
      {Rho1::LogSum, Rho2::L21, true},        {Rho1::MCP, Rho2::Frobenius, false},
      {Rho1::MCP, Rho2::L21, true},           {Rho1::Linear, Rho2::Mixture, true}};

  for (const Form& form : forms) {
    for (int trial = 0; trial < 200; ++trial) {
      int rows = 1 + (int)rng.below(8);
      int cols = 1 + (int)rng.below(6);
      Eigen::MatrixXd w = random_block(rng, rows, cols, 2.0);
      PenaltyConfig cfg;
      cfg.rho1 = form.r1;
      cfg.rho2 = form.r2;
      cfg.lambda = rng.uniform(0.2, 1.2);
      cfg.eta = rng.uniform(0.5, 2.5);
      cfg.alpha = rng.uniform(0.0, 1.0);
      double tau = rng.uniform(0.4, 2.0);
      double cap = 2.0;
      if (form.r1 == Rho1::LogSum) cap = cfg.eta / (cfg.lambda * tau);
      if (form.r1 == Rho1::MCP)
        cap = std::min(cfg.eta / (cfg.lambda * tau), cfg.eta / tau);
      double t = rng.uniform(0.1, 0.85) * cap;

      Eigen::MatrixXd z;
      if (form.r1 == Rho1::Linear && form.r2 == Rho2::Frobenius)
        z = prox_group_frobenius(w, cfg.lambda * t * tau);
      else if (form.r1 == Rho1::LogSum && form.r2 == Rho2::Frobenius)
        z = prox_ls1(w, cfg.lambda, t, tau, cfg.eta);
      else if (form.r1 == Rho1::LogSum)
        z = prox_ls2(w, cfg.lambda, t, tau, cfg.eta);
      else if (form.r1 == Rho1::MCP)
        z = prox_mcp(w, cfg.lambda, t, tau, cfg.eta,
                     form.r2 == Rho2::Frobenius ? McpInner::Frobenius
                                                : McpInner::L21);
      else
        z = prox_mixture(w, cfg.lambda, t, tau, cfg.alpha);

      auto pen_mat = [&](const Eigen::MatrixXd& m) {
        return penalty_block_value(cfg, tau, m);
      };
      Eigen::MatrixXd ref;
      if (!form.columnwise) {
        double x = w.norm();
        auto pen_r = [&](double r) {
          if (x == 0.0) return pen_mat(w);
          return pen_mat(((r / x) * w).eval());
        };
        ref = oracle::prox_radial(w, t, pen_r);
      } else {
        Eigen::VectorXd norms(cols);
        for (int m = 0; m < cols; ++m) norms(m) = w.col(m).norm();
        auto pen_s = [&](const Eigen::VectorXd& s) {
          Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
          for (int c = 0; c < cols; ++c)
            if (norms(c) > 0.0) m.col(c) = (s(c) / norms(c)) * w.col(c);
          return pen_mat(m);
        };
        ref = oracle::prox_columnwise(w, t, pen_s);
      }
      double got = oracle::prox_objective(w, z, t, pen_mat);
      double best = oracle::prox_objective(w, ref, t, pen_mat);
      worst_gap = std::max(worst_gap, got - best);
      require(got <= best + 1e-8,
              "prox objective exceeds scan minimizer by " + num(got - best));
    }
  }

  double worst_res = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    int m = 1 + (int)rng.below(6);
    std::vector<double> xis(m);
    for (double& x : xis) x = rng.uniform(0.0, 50.0);
    double c = rng.uniform(0.01, 0.99);
    double h = solve_h(xis, c);
    double acc = 0.0;
    for (double x : xis) acc += std::max(x - h, 0.0);
    double res = std::abs(h - 1.0 / (1.0 + c * acc));
    worst_res = std::max(worst_res, res);
    require(res < 1e-10, "shared-level fixed point residual " + num(res));
  }
  return "6 prox forms x 200 blocks, worst objective gap " + num(worst_gap) +
         "; worst shared-level residual " + num(worst_res);
}

std::string criterion_2() {
  Rng rng(202);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    int p = 4 + (int)rng.below(10);
    int ns = 1 + (int)rng.below(3);
    int n = 6 + (int)rng.below(10);
    std::vector<std::pair<int, int>> edges;
    for (int j = 1; j <= p; ++j)
      for (int k = j + 1; k <= p; ++k)
        if (rng.bernoulli(0.25)) edges.push_back({j, k});
    PredictorGraph g = PredictorGraph::from_edge_list(p, edges);
    NeighborhoodIndex nb = neighborhoods(g);
    MultiStudy data = random_problem_data(rng, p, ns, n);

    PenaltyConfig pc;
    pc.lambda = 0.1;
    pc.lambda_ridge = (trial % 2 == 0) ? rng.uniform(0.01, 0.5) : 0.0;
    pc.weights = group_weights(nb);
    FitProblem prob{data, nb, pc};

    Eigen::MatrixXd latent = random_block(rng, nb.total_rows(), ns, 1.0);
    Eigen::MatrixXd grad(latent.rows(), latent.cols());
    smooth_value_grad(prob, latent, grad);
    Eigen::MatrixXd fd = oracle::fd_gradient(
        [&](const Eigen::MatrixXd& l) { return smooth_value(prob, l); },
        latent);
    double rel = (grad - fd).norm() / std::max(1.0, fd.norm());
    worst = std::max(worst, rel);
    require(rel < 1e-5, "gradient relative error " + num(rel));
  }
  return "50 problems, worst gradient relative error " + num(worst);
}

std::string criterion_3() {
  Rng rng(303);
  PredictorGraph g = ring_block_graph(4, 5);
  NeighborhoodIndex nb = neighborhoods(g);
  double worst_gap = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    MultiStudy data = random_problem_data(rng, 20, 3, 40);
    PenaltyConfig pc;
    pc.rho1 = Rho1::Linear;
    pc.rho2 = (trial % 3 == 0) ? Rho2::Frobenius
                               : (trial % 3 == 1 ? Rho2::L21 : Rho2::Mixture);
    pc.alpha = (pc.rho2 == Rho2::Mixture) ? 0.5 : 1.0;
    pc.lambda_ridge = (trial % 2 == 0) ? 0.01 : 0.0;
    pc.weights = group_weights(nb);
    pc.lambda = rng.uniform(0.1, 0.4) *
                lambda_max(data, nb, pc.weights, pc.rho2, pc.alpha);
    FitProblem prob{data, nb, pc};

    FitOptions fast;
    fast.tol = 1e-10;
    fast.max_iter = 50000;
    FitResult fit = fista_fit(prob, fast);
    require(fit.converged, "accelerated solve did not converge");
    for (size_t i = 1; i < fit.trace.size(); ++i)
      require(fit.trace[i] <= fit.trace[i - 1] + 1e-12,
              "objective trace increased at step " + std::to_string(i));

    FitOptions ref;
    ref.accelerated = false;
    ref.tol = 1e-12;
    ref.max_iter = 500000;
    FitResult base = fista_fit(prob, ref);
    double gap = std::abs(fit.objective - base.objective);
    worst_gap = std::max(worst_gap, gap);
    require(gap <= 1e-6, "objective gap to long plain-step reference " + num(gap));
  }
  return "20 instances, worst objective gap to reference " + num(worst_gap) +
         ", traces monotone";
}

std::string criterion_4() {
  double worst_diag = 0.0;
  for (Scenario sc : {Scenario::Ring, Scenario::Hub, Scenario::Random}) {
    ScenarioConfig cfg;
    cfg.scenario = sc;
    cfg.blocks = 3;
    cfg.block_size = 6;
    cfg.num_studies = 2;
    cfg.n_train = 10;
    cfg.n_valid = 5;
    cfg.n_test = 5;
    cfg.seed = 404;
    SyntheticStudy study = sample_study(cfg, 0);
    for (const Eigen::MatrixXd& omega : study.precisions) {
      Eigen::MatrixXd sigma = omega.inverse();
      double d = (sigma.diagonal().array() - 1.0).abs().maxCoeff();
      worst_diag = std::max(worst_diag, d);
      require(d < 1e-8, "inverse-precision diagonal off by " + num(d));
    }
  }

  ScenarioConfig big;
  big.blocks = 1;
  big.block_size = 5;
  big.num_studies = 1;
  big.n_train = 50000;
  big.n_valid = 10;
  big.n_test = 10;
  big.seed = 405;
  SyntheticStudy bs = sample_study(big, 0);
  const Eigen::MatrixXd& x = bs.train.studies[0].x;
  Eigen::RowVectorXd mean = x.colwise().mean();
  Eigen::MatrixXd centered = x.rowwise() - mean;
  Eigen::MatrixXd cov = centered.transpose() * centered / (double)x.rows();
  Eigen::MatrixXd target = bs.precisions[0].inverse();
  double cov_err = (cov - target).array().abs().maxCoeff();
  require(cov_err < 0.05,
          "empirical covariance off by " + num(cov_err) + " entrywise");

  ScenarioConfig s1;
  s1.seed = 406;
  double snr_sum = 0.0;
  int snr_n = 0;
  for (int r = 0; r < 10; ++r) {
    SyntheticStudy study = sample_study(s1, r);
    for (int m = 0; m < s1.num_studies; ++m) {
      Eigen::MatrixXd sigma = study.precisions[m].inverse();
      Eigen::VectorXd b = study.beta_true.col(m);
      snr_sum += b.dot(sigma * b) / s1.sigma2;
      ++snr_n;
    }
  }
  double snr = snr_sum / snr_n;
  require(snr >= 2.0 && snr <= 3.0,
          "signal-to-noise estimate " + num(snr) + " outside [2, 3]");
  return "unit inverse diagonals (worst " + num(worst_diag) +
         "), covariance error " + num(cov_err) + ", signal-to-noise " +
         num(snr);
}

ExperimentOptions benchmark_options() {
  ExperimentOptions opts;
  opts.grid = reduced_grid();
  opts.tune.fit.tol = 1e-7;
  opts.tune.fit.max_iter = 4000;
  return opts;
}

MetricsReport c5_report;  // shared with criterion 7's intact baseline

std::string criterion_5() {
  ScenarioConfig sc;  // ring, 10 blocks of 10, 5 studies, 200/200/1000 rows
  sc.seed = 2024;
  std::vector<std::string> methods = {"Lasso", "gLasso", "SIL-Lasso-IHM",
                                      "SIL-MCP-IHM", "SIL-LS-IHM"};
  c5_report = run_experiment(sc, methods, 20, sc.seed, benchmark_options());
  require_all_ok(c5_report);

  const MethodSummary& ls = method_row(c5_report, "SIL-LS-IHM");
  require(ls.mse_mean >= 1.05 && ls.mse_mean <= 1.16,
          "joint log-sum mean test error " + num(ls.mse_mean) +
              " outside [1.05, 1.16]");

  const MethodSummary& glasso = method_row(c5_report, "gLasso");
  std::string win_note;
  for (const char* name : {"SIL-Lasso-IHM", "SIL-MCP-IHM", "SIL-LS-IHM"}) {
    int wins = wins_against(method_row(c5_report, name), glasso);
    win_note += std::string(win_note.empty() ? "" : "/") + std::to_string(wins);
    require(wins >= 16, std::string(name) + " beats gLasso in only " +
                            std::to_string(wins) + "/20 replicates");
  }

  double sil_lasso_fnr = method_row(c5_report, "SIL-Lasso-IHM").fnr_mean;
  require(sil_lasso_fnr <= 0.05,
          "joint lasso miss rate " + num(sil_lasso_fnr) + " above 0.05");
  double lasso_fnr = method_row(c5_report, "Lasso").fnr_mean;
  require(lasso_fnr >= 0.15,
          "per-dataset lasso miss rate " + num(lasso_fnr) + " below 0.15");

  return "mean test error " + num(ls.mse_mean) + ", wins vs gLasso " +
         win_note + "/20, miss rates " + num(sil_lasso_fnr) + " vs " +
         num(lasso_fnr);
}

std::string criterion_6() {
  ScenarioConfig sc;
  sc.p_ht = 0.3;
  sc.seed = 2025;
  MetricsReport report = run_experiment(sc, {"sgLasso", "SIL-LS-IHT"}, 20,
                                        sc.seed, benchmark_options());
  require_all_ok(report);
  const MethodSummary& sil = method_row(report, "SIL-LS-IHT");
  const MethodSummary& sg = method_row(report, "sgLasso");
  require(sil.mse_mean < sg.mse_mean,
          "mean test error " + num(sil.mse_mean) + " not below sgLasso " +
              num(sg.mse_mean));
  int wins = wins_against(sil, sg);
  require(wins >= 16, "per-dataset selection wins only " +
                          std::to_string(wins) + "/20 replicates");
  return "mean test error " + num(sil.mse_mean) + " vs " + num(sg.mse_mean) +
         ", " + std::to_string(wins) + "/20 wins";
}

std::string criterion_7() {
  ScenarioConfig sc;
  sc.seed = 2024;
  std::vector<std::string> methods = {"SRIG", "SIL-LS-IHM"};
  ExperimentOptions opts = benchmark_options();
  MetricsReport intact = run_experiment(sc, methods, 20, sc.seed, opts);
  MetricsReport dropped =
      run_sensitivity(sc, methods, 20, sc.seed, 0.2, opts);
  require_all_ok(intact);
  require_all_ok(dropped);

  double sil_intact = method_row(intact, "SIL-LS-IHM").mse_mean;
  double sil_dropped = method_row(dropped, "SIL-LS-IHM").mse_mean;
  double srig_intact = method_row(intact, "SRIG").mse_mean;
  double srig_dropped = method_row(dropped, "SRIG").mse_mean;
  double d_sil = sil_dropped - sil_intact;
  double d_srig = srig_dropped - srig_intact;
  require(d_sil < 0.05, "joint log-sum degradation " + num(d_sil) +
                            " not below 0.05");
  require(d_srig > d_sil, "per-dataset graph method degradation " +
                              num(d_srig) + " not above " + num(d_sil));
  return "degradation " + num(d_sil) + " (" + num(sil_intact) + " to " +
         num(sil_dropped) + ") vs " + num(d_srig) + " (" + num(srig_intact) +
         " to " + num(srig_dropped) + ")";
}

std::string criterion_8() {
  ModelSpec spec = make_preset("SIL-LS-IHM");
  spec.adaptive = true;
  TuningGrid grid = reduced_grid();
  TuneOptions topts;
  topts.fit.tol = 1e-7;
  topts.fit.max_iter = 4000;

  std::vector<int> sizes = {100, 400};
  std::vector<double> rates;
  for (int n : sizes) {
    ScenarioConfig cfg;
    cfg.n_train = n;
    cfg.n_test = 10;  // test split unused here
    cfg.seed = 515;
    int hits = 0;
    for (int r = 0; r < 30; ++r) {
      SyntheticStudy study = sample_study(cfg, r);
      TunedModel model = grid_search(spec, study.graph, study.train,
                                     study.validate, grid, topts);
      if (exact_sign_recovery(model.beta, study.beta_true)) ++hits;
    }
    rates.push_back(hits / 30.0);
  }
  require(rates[1] >= rates[0],
          "sign recovery rate fell from " + num(rates[0]) + " at n=100 to " +
              num(rates[1]) + " at n=400");
  return "sign recovery rate " + num(rates[0]) + " at n=100, " +
         num(rates[1]) + " at n=400 over 30 replicates";
}

double median_iter_seconds(int p, int chain_edges, int num_studies, int n,
                           std::uint64_t seed) {
  Rng rng(seed);
  PredictorGraph g = chain_graph(p, chain_edges);
  NeighborhoodIndex nb = neighborhoods(g);
  MultiStudy data = random_problem_data(rng, p, num_studies, n);
  PenaltyConfig pc;
  pc.rho1 = Rho1::LogSum;
  pc.eta = 1.0;
  pc.lambda = 0.05;
  pc.weights = group_weights(nb);
  FitProblem prob{data, nb, pc};
  FitOptions opts;
  opts.tol = 1e-300;  // never satisfied; runs exactly max_iter steps
  opts.max_iter = 40;

  std::vector<double> times;
  for (int rep = 0; rep < 5; ++rep) {
    auto t0 = std::chrono::steady_clock::now();
    FitResult fit = fista_fit(prob, opts);
    auto t1 = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double>(t1 - t0).count() /
                    fit.iterations);
  }
  return median(times);
}

std::string criterion_9() {
  double base = median_iter_seconds(600, 300, 3, 120, 901);
  double twice_p = median_iter_seconds(1200, 300, 3, 120, 902);
  double twice_m = median_iter_seconds(600, 300, 6, 120, 903);
  double rp = twice_p / base;
  double rm = twice_m / base;
  require(rp <= 2.5, "doubling features scales iteration time by " + num(rp));
  require(rm <= 2.5, "doubling datasets scales iteration time by " + num(rm));
  return "iteration time ratios: features x2 -> " + num(rp) +
         ", datasets x2 -> " + num(rm) + " (base " + num(base * 1e3) +
         " ms)";
}

std::string criterion_10() {
  namespace fs = std::filesystem;
  auto fresh = [](const char* name) {
    fs::path p = fs::temp_directory_path() / name;
    fs::remove_all(p);
    return p.string();
  };
  auto slurp = [](const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Failure("missing output file " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
  };

  RunConfig cfg;
  cfg.command = "experiment";
  cfg.methods = {"Lasso", "SRIG", "SIL-LS-IHM"};
  cfg.replicates = 3;
  cfg.seed = 99;
  cfg.scenario.blocks = 2;
  cfg.scenario.block_size = 5;
  cfg.scenario.num_studies = 3;
  cfg.scenario.n_train = 40;
  cfg.scenario.n_valid = 20;
  cfg.scenario.n_test = 20;
  cfg.grid.lambda = {0.3, 0.1};
  cfg.grid.eta = {1.0};
  cfg.grid.lambda_ridge = {0.0, 0.01};

  std::string a = fresh("sil_accept_t1"), b = fresh("sil_accept_t4");
  cfg.threads = 1;
  cfg.out_dir = a;
  require(run_command(cfg) == 0, "single-thread run failed");
  cfg.threads = 4;
  cfg.out_dir = b;
  require(run_command(cfg) == 0, "four-thread run failed");

  for (const char* f : {"/report.csv", "/report.txt", "/cells.csv"}) {
    if (slurp(a + f) != slurp(b + f))
      throw Failure(std::string("thread counts disagree on ") + (f + 1));
  }
  fs::remove_all(a);
  fs::remove_all(b);
  return "report.csv, report.txt, cells.csv byte-identical at 1 and 4 threads";
}

}  // namespace

int main() {
  struct Entry {
    int id;
    std::function<std::string()> run;
  };
  const std::vector<Entry> entries = {
      {1, criterion_1}, {2, criterion_2}, {3, criterion_3}, {4, criterion_4},
      {5, criterion_5}, {6, criterion_6}, {7, criterion_7}, {8, criterion_8},
      {9, criterion_9}, {10, criterion_10}};

  int failures = 0;
  for (const Entry& e : entries) {
    auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    try {
      detail = e.run();
    } catch (const std::exception& ex) {
      ok = false;
      detail = ex.what();
    }
    auto t1 = std::chrono::steady_clock::now();
    double secs = std::chrono::duration<double>(t1 - t0).count();
    std::printf("criterion %2d: %s  %s  (%.1fs)\n", e.id,
                ok ? "PASS" : "FAIL", detail.c_str(), secs);
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
