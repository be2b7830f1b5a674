#include <cstdio>
#include <cstdint>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "sil/cli_run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"graph-guided penalized regression across multiple datasets"};
  app.require_subcommand(1);

  std::string config_path, out, data, method;
  std::uint64_t seed = 0;
  int threads = 0, replicates = 0;
  double edge_drop = 0.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--data", data, "input data directory");
    sub->add_option("--seed", seed, "root seed");
    sub->add_option("--threads", threads, "worker threads");
    sub->add_option("--method", method, "method preset name");
    sub->add_option("--replicates", replicates, "number of replicates");
    sub->add_option("--edge-drop-fraction", edge_drop,
                    "fraction of graph edges to delete");
  };

  add_common(app.add_subcommand("fit", "fit one penalized model"));
  add_common(app.add_subcommand("tune", "grid search with validation scoring"));
  add_common(app.add_subcommand("simulate", "write one synthetic study"));
  add_common(app.add_subcommand("experiment", "replicate benchmark"));
  add_common(
      app.add_subcommand("sensitivity", "benchmark with a corrupted graph"));

  CLI11_PARSE(app, argc, argv);
  CLI::App* sub = app.get_subcommands().front();

  sil::RunConfig cfg;
  try {
    if (sub->count("--config")) cfg = sil::load_run_config(config_path);
    cfg.command = sub->get_name();
    if (sub->count("--out")) cfg.out_dir = out;
    if (sub->count("--data")) cfg.data_dir = data;
    if (sub->count("--seed")) cfg.seed = seed;
    if (sub->count("--threads")) cfg.threads = threads;
    if (sub->count("--method")) cfg.methods = {method};
    if (sub->count("--replicates")) cfg.replicates = replicates;
    if (sub->count("--edge-drop-fraction")) cfg.edge_drop_fraction = edge_drop;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return sil::run_command(cfg);
}
