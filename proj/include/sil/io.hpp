#pragma once

#include <Eigen/Dense>
#include <string>

#include "sil/graph.hpp"
#include "sil/simgen.hpp"
#include "sil/solver.hpp"

namespace sil {

// Headerless numeric text, one row per line, fields separated by commas
// and/or whitespace. Errors carry file and line.
Eigen::MatrixXd read_matrix_csv(const std::string& path);

// Full-precision round trip (%.17g, comma separated).
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);

struct LoadedStudy {
  MultiStudy data;
  bool has_graph = false;
  PredictorGraph graph = edgeless_graph(0);
};

// Reads X_1.csv/y_1.csv, X_2.csv/y_2.csv, ... until the next pair is
// missing, plus an optional graph.edges. Shape mismatches name both files.
LoadedStudy load_study(const std::string& dir);

// Writes X_m.csv and y_m.csv pairs, creating the directory as needed.
void save_multistudy(const std::string& dir, const MultiStudy& data);

// Lays out train/, validate/, test/ subdirectories plus graph.edges and
// beta_true.csv, in the format load_study reads back.
void save_synthetic(const std::string& dir, const SyntheticStudy& study);

}  // namespace sil
