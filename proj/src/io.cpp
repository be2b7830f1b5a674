#include "sil/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sil {

namespace fs = std::filesystem;

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    for (char& c : line)
      if (c == ',' || c == '\t' || c == '\r') c = ' ';
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) {
      char* end = nullptr;
      double v = std::strtod(tok.c_str(), &end);
      if (end != tok.c_str() + tok.size()) {
        std::ostringstream os;
        os << path << ":" << lineno << ": cannot parse '" << tok
           << "' as a number";
        throw std::runtime_error(os.str());
      }
      row.push_back(v);
    }
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size()) {
      std::ostringstream os;
      os << path << ":" << lineno << ": expected " << rows.front().size()
         << " columns, found " << row.size();
      throw std::runtime_error(os.str());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no numeric rows");

  Eigen::MatrixXd m((int)rows.size(), (int)rows.front().size());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  return m;
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  char buf[64];
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      if (j) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

LoadedStudy load_study(const std::string& dir) {
  if (!fs::is_directory(dir))
    throw std::runtime_error(dir + " is not a directory");

  LoadedStudy out;
  for (int m = 1;; ++m) {
    std::string xp = dir + "/X_" + std::to_string(m) + ".csv";
    std::string yp = dir + "/y_" + std::to_string(m) + ".csv";
    bool hx = fs::exists(xp), hy = fs::exists(yp);
    if (!hx && !hy) {
      if (m == 1)
        throw std::runtime_error("no datasets in " + dir +
                                 " (expected X_1.csv and y_1.csv)");
      break;
    }
    if (hx != hy)
      throw std::runtime_error("incomplete dataset " + std::to_string(m) +
                               ": need both " + xp + " and " + yp);
    Study s;
    s.x = read_matrix_csv(xp);
    Eigen::MatrixXd y = read_matrix_csv(yp);
    if (y.cols() != 1)
      throw std::runtime_error(yp + " must have one column, found " +
                               std::to_string(y.cols()));
    if (y.rows() != s.x.rows())
      throw std::runtime_error(xp + " has " + std::to_string(s.x.rows()) +
                               " rows but " + yp + " has " +
                               std::to_string(y.rows()));
    if (!out.data.studies.empty() &&
        s.x.cols() != out.data.studies.front().x.cols())
      throw std::runtime_error(
          xp + " has " + std::to_string(s.x.cols()) + " columns but X_1.csv has " +
          std::to_string(out.data.studies.front().x.cols()));
    s.y = y.col(0);
    out.data.studies.push_back(std::move(s));
  }
  out.data.validate();

  std::string gp = dir + "/graph.edges";
  int p = out.data.num_features();
  if (fs::exists(gp)) {
    out.has_graph = true;
    out.graph = read_edge_list(gp, p);
  } else {
    out.graph = edgeless_graph(p);
  }
  return out;
}

void save_multistudy(const std::string& dir, const MultiStudy& data) {
  data.validate();
  fs::create_directories(dir);
  for (int m = 0; m < data.num_studies(); ++m) {
    const Study& s = data.studies[m];
    write_matrix_csv(dir + "/X_" + std::to_string(m + 1) + ".csv", s.x);
    write_matrix_csv(dir + "/y_" + std::to_string(m + 1) + ".csv", s.y);
  }
}

void save_synthetic(const std::string& dir, const SyntheticStudy& study) {
  fs::create_directories(dir);
  save_multistudy(dir + "/train", study.train);
  save_multistudy(dir + "/validate", study.validate);
  save_multistudy(dir + "/test", study.test);
  write_edge_list(study.graph, dir + "/graph.edges");
  write_matrix_csv(dir + "/beta_true.csv", study.beta_true);
}

}  // namespace sil
