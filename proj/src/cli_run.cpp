#include "sil/cli_run.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "sil/eval.hpp"
#include "sil/io.hpp"

namespace sil {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::vector<std::string> default_roster() {
  return {"Lasso",        "Enet",         "SRIG",       "gLasso",
          "L2-gMCP",      "SIL-Lasso-IHM", "SIL-MCP-IHM", "SIL-LS-IHM",
          "sgLasso",      "L1-gMCP",      "SIL-Lasso-IHT", "SIL-MCP-IHT",
          "SIL-LS-IHT"};
}

namespace {

[[noreturn]] void bad(const std::string& ctx, const std::string& what) {
  throw std::runtime_error(ctx + ": " + what);
}

void check_keys(const json& o, const std::string& ctx,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : o.items()) {
    bool known = false;
    for (const char* k : allowed)
      if (item.key() == k) known = true;
    if (!known) bad(ctx, "unknown key '" + item.key() + "'");
  }
}

double get_num(const json& o, const char* key, const std::string& ctx,
               double fallback) {
  if (!o.contains(key)) return fallback;
  if (!o[key].is_number()) bad(ctx, std::string(key) + " must be a number");
  return o[key].get<double>();
}

int get_int(const json& o, const char* key, const std::string& ctx,
            int fallback) {
  if (!o.contains(key)) return fallback;
  if (!o[key].is_number_integer())
    bad(ctx, std::string(key) + " must be an integer");
  return o[key].get<int>();
}

bool get_bool(const json& o, const char* key, const std::string& ctx,
              bool fallback) {
  if (!o.contains(key)) return fallback;
  if (!o[key].is_boolean()) bad(ctx, std::string(key) + " must be a boolean");
  return o[key].get<bool>();
}

std::string get_str(const json& o, const char* key, const std::string& ctx,
                    const std::string& fallback) {
  if (!o.contains(key)) return fallback;
  if (!o[key].is_string()) bad(ctx, std::string(key) + " must be a string");
  return o[key].get<std::string>();
}

std::vector<double> get_num_list(const json& o, const char* key,
                                 const std::string& ctx,
                                 std::vector<double> fallback) {
  if (!o.contains(key)) return fallback;
  if (!o[key].is_array()) bad(ctx, std::string(key) + " must be an array");
  std::vector<double> out;
  for (const json& v : o[key]) {
    if (!v.is_number())
      bad(ctx, std::string(key) + " must contain only numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

Rho1 parse_rho1(const std::string& s) {
  if (s == "linear") return Rho1::Linear;
  if (s == "mcp") return Rho1::MCP;
  if (s == "logsum") return Rho1::LogSum;
  throw std::runtime_error("unknown rho1 '" + s +
                           "' (expected linear, mcp, or logsum)");
}

Rho2 parse_rho2(const std::string& s) {
  if (s == "frobenius") return Rho2::Frobenius;
  if (s == "l21") return Rho2::L21;
  if (s == "mixture") return Rho2::Mixture;
  throw std::runtime_error("unknown rho2 '" + s +
                           "' (expected frobenius, l21, or mixture)");
}

const char* rho1_name(Rho1 r) {
  switch (r) {
    case Rho1::Linear: return "linear";
    case Rho1::MCP: return "mcp";
    case Rho1::LogSum: return "logsum";
  }
  return "?";
}

const char* rho2_name(Rho2 r) {
  switch (r) {
    case Rho2::Frobenius: return "frobenius";
    case Rho2::L21: return "l21";
    case Rho2::Mixture: return "mixture";
  }
  return "?";
}

void parse_scenario_obj(const json& o, ScenarioConfig& sc) {
  const std::string ctx = "scenario";
  check_keys(o, ctx,
             {"type", "blocks", "block_size", "num_studies", "alpha", "p_ht",
              "sigma2", "n_train", "n_valid", "n_test"});
  sc.scenario = parse_scenario(get_str(o, "type", ctx, "ring"));
  sc.blocks = get_int(o, "blocks", ctx, sc.blocks);
  sc.block_size = get_int(o, "block_size", ctx, sc.block_size);
  sc.num_studies = get_int(o, "num_studies", ctx, sc.num_studies);
  sc.p_ht = get_num(o, "p_ht", ctx, sc.p_ht);
  sc.sigma2 = get_num(o, "sigma2", ctx, sc.sigma2);
  sc.n_train = get_int(o, "n_train", ctx, sc.n_train);
  sc.n_valid = get_int(o, "n_valid", ctx, sc.n_valid);
  sc.n_test = get_int(o, "n_test", ctx, sc.n_test);
  std::vector<double> a = get_num_list(o, "alpha", ctx, {});
  if (!a.empty()) {
    sc.alpha.resize((int)a.size());
    for (size_t i = 0; i < a.size(); ++i) sc.alpha((int)i) = a[i];
  }
}

void parse_grid_obj(const json& o, TuningGrid& g) {
  const std::string ctx = "grid";
  check_keys(o, ctx,
             {"reduced", "lambda", "num_lambda", "lambda_min_ratio", "eta",
              "num_eta", "lambda_ridge", "alpha"});
  if (get_bool(o, "reduced", ctx, false)) g = reduced_grid();
  g.lambda = get_num_list(o, "lambda", ctx, g.lambda);
  g.num_lambda = get_int(o, "num_lambda", ctx, g.num_lambda);
  g.lambda_min_ratio = get_num(o, "lambda_min_ratio", ctx, g.lambda_min_ratio);
  g.eta = get_num_list(o, "eta", ctx, g.eta);
  g.num_eta = get_int(o, "num_eta", ctx, g.num_eta);
  g.lambda_ridge = get_num_list(o, "lambda_ridge", ctx, g.lambda_ridge);
  g.alpha = get_num_list(o, "alpha", ctx, g.alpha);
}

void parse_fit_obj(const json& o, FitOptions& f) {
  const std::string ctx = "fit";
  check_keys(o, ctx,
             {"tol", "max_iter", "accelerated", "step_shrink", "initial_step"});
  f.tol = get_num(o, "tol", ctx, f.tol);
  f.max_iter = get_int(o, "max_iter", ctx, f.max_iter);
  f.accelerated = get_bool(o, "accelerated", ctx, f.accelerated);
  f.step_shrink = get_num(o, "step_shrink", ctx, f.step_shrink);
  f.initial_step = get_num(o, "initial_step", ctx, f.initial_step);
}

void parse_penalty_obj(const json& o, RunConfig& cfg) {
  const std::string ctx = "penalty";
  check_keys(o, ctx, {"rho1", "rho2", "lambda", "eta", "alpha", "lambda_ridge"});
  cfg.rho1 = get_str(o, "rho1", ctx, cfg.rho1);
  cfg.rho2 = get_str(o, "rho2", ctx, cfg.rho2);
  cfg.lambda = get_num(o, "lambda", ctx, cfg.lambda);
  cfg.eta = get_num(o, "eta", ctx, cfg.eta);
  cfg.alpha = get_num(o, "alpha", ctx, cfg.alpha);
  cfg.lambda_ridge = get_num(o, "lambda_ridge", ctx, cfg.lambda_ridge);
}

std::string utc_now() {
  std::time_t tt =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << text;
}

void write_run_log(const RunConfig& cfg, const std::string& started,
                   double seconds) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", seconds);
  write_text(cfg.out_dir + "/run.log",
             "command: " + cfg.command + "\nseed: " + std::to_string(cfg.seed) +
                 "\nthreads: " + std::to_string(cfg.threads) + "\nstarted: " +
                 started + "\nelapsed_seconds: " + buf + "\n");
}

Eigen::MatrixXd column(const std::vector<double>& v) {
  Eigen::MatrixXd m((int)v.size(), 1);
  for (size_t i = 0; i < v.size(); ++i) m((int)i, 0) = v[i];
  return m;
}

PredictorGraph resolve_graph(const std::string& dir, const LoadedStudy& train) {
  std::string gp = dir + "/graph.edges";
  if (fs::exists(gp)) return read_edge_list(gp, train.data.num_features());
  return train.graph;
}

json penalty_to_json(const PenaltyConfig& pc) {
  return json{{"rho1", rho1_name(pc.rho1)},   {"rho2", rho2_name(pc.rho2)},
              {"lambda", pc.lambda},          {"eta", pc.eta},
              {"alpha", pc.alpha},            {"lambda_ridge", pc.lambda_ridge}};
}

void cmd_fit(const RunConfig& cfg) {
  if (cfg.data_dir.empty()) throw std::runtime_error("fit needs a data directory");
  LoadedStudy ls = load_study(cfg.data_dir);
  MultiStudy work = ls.data;
  Standardizer std_;
  if (cfg.standardize) {
    std_ = Standardizer::fit(ls.data);
    work = std_.apply(ls.data);
  }
  NeighborhoodIndex nb = neighborhoods(ls.graph);
  std::vector<double> d;
  if (cfg.adaptive.value_or(false)) {
    Eigen::VectorXd dv = adaptive_weights(work);
    d.assign(dv.data(), dv.data() + dv.size());
  }
  PenaltyConfig pc;
  pc.rho1 = parse_rho1(cfg.rho1);
  pc.rho2 = parse_rho2(cfg.rho2);
  pc.lambda = cfg.lambda;
  pc.eta = cfg.eta;
  pc.alpha = cfg.alpha;
  pc.lambda_ridge = cfg.lambda_ridge;
  pc.weights = group_weights(nb, d);

  FitProblem prob{work, nb, pc};
  FitResult fit = fista_fit(prob, cfg.fit);
  if (cfg.standardize) std_.back_transform(nb, fit);

  write_matrix_csv(cfg.out_dir + "/coefficients.csv", fit.beta);
  write_matrix_csv(cfg.out_dir + "/intercepts.csv", column(fit.intercepts));
  json summary{{"penalty", penalty_to_json(pc)},
               {"objective", fit.objective},
               {"iterations", fit.iterations},
               {"converged", fit.converged},
               {"trace", fit.trace},
               {"step_sizes", fit.step_sizes}};
  write_text(cfg.out_dir + "/fit_summary.json", summary.dump(2) + "\n");
}

void cmd_tune(const RunConfig& cfg) {
  if (cfg.data_dir.empty())
    throw std::runtime_error("tune needs a data directory");
  if (cfg.methods.size() != 1)
    throw std::runtime_error("tune needs exactly one method");
  ModelSpec spec = make_preset(cfg.methods[0]);
  if (cfg.adaptive) spec.adaptive = *cfg.adaptive;

  LoadedStudy train = load_study(cfg.data_dir + "/train");
  LoadedStudy val = load_study(cfg.data_dir + "/validate");
  if (train.data.num_features() != val.data.num_features())
    throw std::runtime_error("train and validate feature counts differ");
  PredictorGraph graph = resolve_graph(cfg.data_dir, train);

  TuneOptions opts{cfg.standardize, cfg.fit, cfg.threads};
  TunedModel model =
      grid_search(spec, graph, train.data, val.data, cfg.grid, opts);

  write_matrix_csv(cfg.out_dir + "/coefficients.csv", model.beta);
  write_matrix_csv(cfg.out_dir + "/intercepts.csv", column(model.intercepts));

  std::ofstream table(cfg.out_dir + "/validation_table.csv");
  if (!table) throw std::runtime_error("cannot open validation_table.csv");
  table << "dataset,lambda,eta,lambda_ridge,alpha,val_error,nnz,ok,error\n";
  char buf[64];
  auto full = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (const GridPoint& g : model.table) {
    table << g.dataset << ',' << full(g.lambda) << ',' << full(g.eta) << ','
          << full(g.lambda_ridge) << ',' << full(g.alpha) << ','
          << full(g.val_error) << ',' << g.nnz << ',' << (g.ok ? 1 : 0) << ','
          << g.error << '\n';
  }

  json chosen = json::array();
  for (const PenaltyConfig& pc : model.chosen) chosen.push_back(penalty_to_json(pc));
  json best{{"method", model.spec.name},
            {"val_error", model.val_error},
            {"standardize", cfg.standardize},
            {"adaptive", spec.adaptive},
            {"chosen", chosen}};
  write_text(cfg.out_dir + "/best_config.json", best.dump(2) + "\n");
}

void cmd_simulate(const RunConfig& cfg) {
  ScenarioConfig sc = cfg.scenario;
  sc.seed = cfg.seed;
  SyntheticStudy study = sample_study(sc, 0);
  save_synthetic(cfg.out_dir, study);
}

void cmd_experiment(const RunConfig& cfg, bool sensitivity) {
  ScenarioConfig sc = cfg.scenario;
  sc.seed = cfg.seed;
  std::vector<std::string> roster =
      cfg.methods.empty() ? default_roster() : cfg.methods;
  ExperimentOptions opts;
  opts.grid = cfg.grid;
  opts.tune = TuneOptions{cfg.standardize, cfg.fit, 1};
  opts.threads = cfg.threads;
  MetricsReport report =
      sensitivity ? run_sensitivity(sc, roster, cfg.replicates, cfg.seed,
                                    cfg.edge_drop_fraction, opts)
                  : run_experiment(sc, roster, cfg.replicates, cfg.seed, opts);
  write_report_csv(report, cfg.out_dir + "/report.csv");
  write_report_text(report, cfg.out_dir + "/report.txt");
  write_cells_csv(report, cfg.out_dir + "/cells.csv");
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  if (!j.is_object())
    throw std::runtime_error(path + ": config must be a JSON object");

  const std::string ctx = "config";
  check_keys(j, ctx,
             {"command", "data", "out", "seed", "threads", "replicates",
              "edge_drop_fraction", "standardize", "adaptive", "method",
              "methods", "scenario", "grid", "fit", "penalty"});

  RunConfig cfg;
  cfg.command = get_str(j, "command", ctx, "");
  cfg.data_dir = get_str(j, "data", ctx, "");
  cfg.out_dir = get_str(j, "out", ctx, cfg.out_dir);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() || j["seed"].get<double>() < 0)
      bad(ctx, "seed must be a nonnegative integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  cfg.threads = get_int(j, "threads", ctx, cfg.threads);
  cfg.replicates = get_int(j, "replicates", ctx, cfg.replicates);
  cfg.edge_drop_fraction =
      get_num(j, "edge_drop_fraction", ctx, cfg.edge_drop_fraction);
  cfg.standardize = get_bool(j, "standardize", ctx, cfg.standardize);
  if (j.contains("adaptive")) cfg.adaptive = get_bool(j, "adaptive", ctx, false);
  if (j.contains("method") && j.contains("methods"))
    bad(ctx, "give either method or methods, not both");
  if (j.contains("method")) cfg.methods = {get_str(j, "method", ctx, "")};
  if (j.contains("methods")) {
    if (!j["methods"].is_array()) bad(ctx, "methods must be an array");
    for (const json& v : j["methods"]) {
      if (!v.is_string()) bad(ctx, "methods must contain only strings");
      cfg.methods.push_back(v.get<std::string>());
    }
  }
  if (j.contains("scenario")) {
    if (!j["scenario"].is_object()) bad(ctx, "scenario must be an object");
    parse_scenario_obj(j["scenario"], cfg.scenario);
  }
  if (j.contains("grid")) {
    if (!j["grid"].is_object()) bad(ctx, "grid must be an object");
    parse_grid_obj(j["grid"], cfg.grid);
  }
  if (j.contains("fit")) {
    if (!j["fit"].is_object()) bad(ctx, "fit must be an object");
    parse_fit_obj(j["fit"], cfg.fit);
  }
  if (j.contains("penalty")) {
    if (!j["penalty"].is_object()) bad(ctx, "penalty must be an object");
    parse_penalty_obj(j["penalty"], cfg);
  }
  return cfg;
}

int run_command(const RunConfig& cfg) {
  std::string started = utc_now();
  auto t0 = std::chrono::steady_clock::now();
  try {
    if (cfg.out_dir.empty()) throw std::runtime_error("empty output directory");
    fs::create_directories(cfg.out_dir);
    if (cfg.threads < 1) throw std::runtime_error("threads must be at least 1");

    if (cfg.command == "fit") {
      cmd_fit(cfg);
    } else if (cfg.command == "tune") {
      cmd_tune(cfg);
    } else if (cfg.command == "simulate") {
      cmd_simulate(cfg);
    } else if (cfg.command == "experiment") {
      cmd_experiment(cfg, false);
    } else if (cfg.command == "sensitivity") {
      cmd_experiment(cfg, true);
    } else {
      throw std::runtime_error(
          "unknown command '" + cfg.command +
          "' (expected fit, tune, simulate, experiment, or sensitivity)");
    }

    auto t1 = std::chrono::steady_clock::now();
    write_run_log(cfg, started, std::chrono::duration<double>(t1 - t0).count());
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    try {
      fs::create_directories(cfg.out_dir);
      write_text(cfg.out_dir + "/error.json",
                 json{{"error", e.what()}}.dump(2) + "\n");
    } catch (...) {
    }
    return 1;
  }
}

}  // namespace sil
