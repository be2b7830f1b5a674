#include "sil/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "sil/parallel.hpp"

namespace sil {

namespace {

constexpr std::uint64_t kEdgeDropTag = 6;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

double test_mse(const Eigen::MatrixXd& beta,
                const std::vector<double>& intercepts, const MultiStudy& test) {
  return prediction_mse(beta, intercepts, test);
}

CoefMetrics coef_metrics(const Eigen::MatrixXd& beta_hat,
                         const Eigen::MatrixXd& beta_true) {
  if (beta_hat.rows() != beta_true.rows() ||
      beta_hat.cols() != beta_true.cols())
    throw std::invalid_argument("coefficient matrices must share a shape");
  CoefMetrics out;
  double sum = 0.0;
  for (int m = 0; m < beta_true.cols(); ++m)
    sum += (beta_hat.col(m) - beta_true.col(m)).norm();
  out.l2 = sum / (double)beta_true.cols();

  long long true_zero = 0, false_pos = 0, true_nonzero = 0, false_neg = 0;
  for (int m = 0; m < beta_true.cols(); ++m) {
    for (int j = 0; j < beta_true.rows(); ++j) {
      if (beta_true(j, m) == 0.0) {
        ++true_zero;
        if (beta_hat(j, m) != 0.0) ++false_pos;
      } else {
        ++true_nonzero;
        if (beta_hat(j, m) == 0.0) ++false_neg;
      }
    }
  }
  out.fpr = true_zero ? (double)false_pos / (double)true_zero : kNaN;
  out.fnr = true_nonzero ? (double)false_neg / (double)true_nonzero : kNaN;
  return out;
}

bool exact_sign_recovery(const Eigen::MatrixXd& beta_hat,
                         const Eigen::MatrixXd& beta_true) {
  if (beta_hat.rows() != beta_true.rows() ||
      beta_hat.cols() != beta_true.cols())
    throw std::invalid_argument("coefficient matrices must share a shape");
  for (int m = 0; m < beta_true.cols(); ++m)
    for (int j = 0; j < beta_true.rows(); ++j) {
      double a = beta_hat(j, m), b = beta_true(j, m);
      int sa = (a > 0.0) - (a < 0.0);
      int sb = (b > 0.0) - (b < 0.0);
      if (sa != sb) return false;
    }
  return true;
}

namespace {

void summarize(MethodSummary& s) {
  s.ok_count = 0;
  s.failed_count = 0;
  for (const ReplicateCell& c : s.cells) (c.ok ? s.ok_count : s.failed_count)++;

  auto agg = [&](double ReplicateCell::*field, double& mean, double& se) {
    int n = s.ok_count;
    if (n == 0) {
      mean = kNaN;
      se = kNaN;
      return;
    }
    double sum = 0.0;
    for (const ReplicateCell& c : s.cells)
      if (c.ok) sum += c.*field;
    mean = sum / n;
    if (n < 2) {
      se = kNaN;
      return;
    }
    double ss = 0.0;
    for (const ReplicateCell& c : s.cells)
      if (c.ok) ss += (c.*field - mean) * (c.*field - mean);
    se = std::sqrt(ss / (n - 1)) / std::sqrt((double)n);
  };
  agg(&ReplicateCell::mse, s.mse_mean, s.mse_se);
  agg(&ReplicateCell::l2, s.l2_mean, s.l2_se);
  agg(&ReplicateCell::fpr, s.fpr_mean, s.fpr_se);
  agg(&ReplicateCell::fnr, s.fnr_mean, s.fnr_se);
}

MetricsReport run_cells(const ScenarioConfig& base,
                        const std::vector<std::string>& methods,
                        int replicates, std::uint64_t seed,
                        double edge_drop_fraction,
                        const ExperimentOptions& opts) {
  if (replicates < 1)
    throw std::invalid_argument("replicates must be at least 1");
  if (methods.empty()) throw std::invalid_argument("no methods given");
  if (!(edge_drop_fraction >= 0.0) || edge_drop_fraction >= 1.0)
    throw std::invalid_argument("edge drop fraction must lie in [0, 1)");

  ScenarioConfig cfg = base;
  cfg.seed = seed;
  cfg.validate();

  std::vector<ModelSpec> specs;
  specs.reserve(methods.size());
  for (const std::string& name : methods) specs.push_back(make_preset(name));

  TuneOptions tune = opts.tune;
  if (opts.threads > 1) tune.threads = 1;

  int nm = (int)methods.size();
  MetricsReport report;
  report.scenario = scenario_name(cfg.scenario);
  report.replicates = replicates;
  report.edge_drop_fraction = edge_drop_fraction;
  report.methods.resize(nm);
  for (int k = 0; k < nm; ++k) {
    report.methods[k].method = methods[k];
    report.methods[k].cells.resize(replicates);
  }

  auto t0 = std::chrono::steady_clock::now();
  parallel_for(replicates * nm, opts.threads, [&](int idx) {
    int r = idx / nm;
    int k = idx % nm;
    ReplicateCell& cell = report.methods[k].cells[r];
    cell.replicate = r;
    try {
      SyntheticStudy study = sample_study(cfg, r);
      PredictorGraph graph = study.graph;
      if (edge_drop_fraction > 0.0 && specs[k].uses_graph)
        graph = remove_edges_random(
            study.graph, edge_drop_fraction,
            Rng::derive(seed, {kEdgeDropTag, (std::uint64_t)r}));
      TunedModel model = grid_search(specs[k], graph, study.train,
                                     study.validate, opts.grid, tune);
      cell.mse = test_mse(model.beta, model.intercepts, study.test);
      CoefMetrics cm = coef_metrics(model.beta, study.beta_true);
      cell.l2 = cm.l2;
      cell.fpr = cm.fpr;
      cell.fnr = cm.fnr;
      cell.ok = true;
    } catch (const std::exception& e) {
      cell.ok = false;
      cell.error = e.what();
      cell.mse = cell.l2 = cell.fpr = cell.fnr = kNaN;
    }
  });
  auto t1 = std::chrono::steady_clock::now();
  report.total_seconds = std::chrono::duration<double>(t1 - t0).count();

  for (MethodSummary& s : report.methods) summarize(s);
  return report;
}

std::string fmt3(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string fmt_se(double v) {
  if (std::isnan(v)) return "(NA)";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  std::string s = buf;
  if (s.rfind("0.", 0) == 0)
    s = s.substr(1);
  else if (s.rfind("-0.", 0) == 0)
    s = "-" + s.substr(2);
  return "(" + s + ")";
}

std::string fmt_full(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  return os;
}

}  // namespace

MetricsReport run_experiment(const ScenarioConfig& cfg,
                             const std::vector<std::string>& methods,
                             int replicates, std::uint64_t seed,
                             const ExperimentOptions& opts) {
  return run_cells(cfg, methods, replicates, seed, 0.0, opts);
}

MetricsReport run_sensitivity(const ScenarioConfig& cfg,
                              const std::vector<std::string>& methods,
                              int replicates, std::uint64_t seed,
                              double edge_drop_fraction,
                              const ExperimentOptions& opts) {
  return run_cells(cfg, methods, replicates, seed, edge_drop_fraction, opts);
}

void write_report_csv(const MetricsReport& report, const std::string& path) {
  std::ofstream os = open_out(path);
  os << "method,replicates,failures,mse_mean,mse_se,l2_mean,l2_se,"
        "fpr_mean,fpr_se,fnr_mean,fnr_se\n";
  for (const MethodSummary& s : report.methods) {
    os << s.method << ',' << s.ok_count << ',' << s.failed_count << ','
       << fmt3(s.mse_mean) << ',' << fmt3(s.mse_se) << ',' << fmt3(s.l2_mean)
       << ',' << fmt3(s.l2_se) << ',' << fmt3(s.fpr_mean) << ','
       << fmt3(s.fpr_se) << ',' << fmt3(s.fnr_mean) << ',' << fmt3(s.fnr_se)
       << '\n';
  }
}

std::string format_report_text(const MetricsReport& report) {
  std::string out = "scenario " + report.scenario + ", " +
                    std::to_string(report.replicates) + " replicates";
  if (report.edge_drop_fraction > 0.0)
    out += ", edge drop " + fmt3(report.edge_drop_fraction);
  out += "\n\n";

  size_t name_w = 6;
  for (const MethodSummary& s : report.methods)
    name_w = std::max(name_w, s.method.size());
  const int col_w = 9;
  auto pad_left = [&](const std::string& s) {
    std::string r(col_w > (int)s.size() ? col_w - s.size() : 1, ' ');
    return r + s;
  };

  std::string header(name_w, ' ');
  for (const char* h : {"mse", "l2", "fpr", "fnr"}) header += pad_left(h);
  out += header + "\n";
  for (const MethodSummary& s : report.methods) {
    std::string row = s.method;
    row.resize(name_w, ' ');
    for (double v : {s.mse_mean, s.l2_mean, s.fpr_mean, s.fnr_mean})
      row += pad_left(fmt3(v));
    out += row + "\n";
    std::string se(name_w, ' ');
    for (double v : {s.mse_se, s.l2_se, s.fpr_se, s.fnr_se})
      se += pad_left(fmt_se(v));
    out += se + "\n";
  }
  bool any_fail = false;
  for (const MethodSummary& s : report.methods)
    if (s.failed_count > 0) {
      if (!any_fail) out += "\n";
      any_fail = true;
      out += s.method + " failed in " + std::to_string(s.failed_count) + " of " +
             std::to_string((int)s.cells.size()) + " replicates\n";
    }
  return out;
}

void write_report_text(const MetricsReport& report, const std::string& path) {
  std::ofstream os = open_out(path);
  os << format_report_text(report);
}

void write_cells_csv(const MetricsReport& report, const std::string& path) {
  std::ofstream os = open_out(path);
  os << "method,replicate,ok,mse,l2,fpr,fnr,error\n";
  for (const MethodSummary& s : report.methods)
    for (const ReplicateCell& c : s.cells) {
      os << s.method << ',' << c.replicate << ',' << (c.ok ? 1 : 0) << ','
         << fmt_full(c.mse) << ',' << fmt_full(c.l2) << ',' << fmt_full(c.fpr)
         << ',' << fmt_full(c.fnr) << ','
         << (c.error.empty() ? std::string() : csv_quote(c.error)) << '\n';
    }
}

}  // namespace sil
