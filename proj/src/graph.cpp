#include "sil/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace sil {

PredictorGraph PredictorGraph::from_edge_list(
    int p, const std::vector<std::pair<int, int>>& pairs) {
  if (p < 0) throw std::invalid_argument("number of features must be nonnegative");
  std::set<std::pair<int, int>> uniq;
  for (const auto& [a, b] : pairs) {
    if (a < 1 || a > p || b < 1 || b > p) {
      std::ostringstream os;
      os << "edge (" << a << ", " << b << ") out of range [1, " << p << "]";
      throw std::invalid_argument(os.str());
    }
    if (a == b) {
      std::ostringstream os;
      os << "self-loop edge (" << a << ", " << b << ") not allowed";
      throw std::invalid_argument(os.str());
    }
    uniq.emplace(std::min(a, b) - 1, std::max(a, b) - 1);
  }
  return PredictorGraph(p, std::vector<std::pair<int, int>>(uniq.begin(), uniq.end()));
}

bool PredictorGraph::has_edge(int j, int k) const {
  if (j == k) return false;
  std::pair<int, int> e{std::min(j, k), std::max(j, k)};
  return std::binary_search(edges_.begin(), edges_.end(), e);
}

PredictorGraph edgeless_graph(int p) {
  return PredictorGraph::from_edge_list(p, {});
}

NeighborhoodIndex neighborhoods(const PredictorGraph& g) {
  const int p = g.num_features();
  NeighborhoodIndex nb;
  nb.groups.assign(p, {});
  for (int j = 0; j < p; ++j) nb.groups[j].push_back(j);
  for (const auto& [a, b] : g.edges()) {
    nb.groups[a].push_back(b);
    nb.groups[b].push_back(a);
  }
  nb.sizes.resize(p);
  nb.offsets.assign(p + 1, 0);
  for (int j = 0; j < p; ++j) {
    std::sort(nb.groups[j].begin(), nb.groups[j].end());
    nb.sizes[j] = static_cast<int>(nb.groups[j].size());
    nb.offsets[j + 1] = nb.offsets[j] + nb.sizes[j];
  }
  return nb;
}

double GroupWeights::max_tau() const {
  return *std::max_element(tau.begin(), tau.end());
}

GroupWeights group_weights(const NeighborhoodIndex& nb,
                           const std::vector<double>& d) {
  const int p = nb.num_groups();
  std::vector<double> dd = d;
  if (dd.empty()) dd.assign(p, 1.0);
  if (static_cast<int>(dd.size()) != p)
    throw std::invalid_argument("weight vector length must equal p");
  GroupWeights w;
  w.d = dd;
  w.tau.resize(p);
  for (int j = 0; j < p; ++j) {
    if (!(dd[j] > 0.0) || !std::isfinite(dd[j])) {
      std::ostringstream os;
      os << "weight d[" << j + 1 << "] = " << dd[j] << " must be positive and finite";
      throw std::invalid_argument(os.str());
    }
    w.tau[j] = std::sqrt(static_cast<double>(nb.sizes[j])) * dd[j];
  }
  return w;
}

PredictorGraph remove_edges_random(const PredictorGraph& g, double fraction,
                                   std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0))
    throw std::invalid_argument("edge removal fraction must be in [0, 1)");
  const auto& edges = g.edges();
  const std::size_t e = edges.size();
  const std::size_t k =
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(e)));
  if (k == 0) return g;

  // partial Fisher-Yates: the first k slots pick the removed edges
  std::vector<std::size_t> idx(e);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng = Rng::stream(seed, {0x65646765ULL});  // "edge"
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.below(e - i));
    std::swap(idx[i], idx[j]);
  }
  std::vector<bool> removed(e, false);
  for (std::size_t i = 0; i < k; ++i) removed[idx[i]] = true;

  std::vector<std::pair<int, int>> kept;
  kept.reserve(e - k);
  for (std::size_t i = 0; i < e; ++i)
    if (!removed[i]) kept.emplace_back(edges[i].first + 1, edges[i].second + 1);
  return PredictorGraph::from_edge_list(g.num_features(), kept);
}

PredictorGraph read_edge_list(const std::string& path, int p) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list file: " + path);
  std::vector<std::pair<int, int>> pairs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '#') continue;
    std::istringstream ls(line);
    int a = 0, b = 0;
    if (!(ls >> a >> b)) {
      std::ostringstream os;
      os << path << ":" << lineno << ": expected two integers, got '" << line << "'";
      throw std::runtime_error(os.str());
    }
    pairs.emplace_back(a, b);
  }
  return PredictorGraph::from_edge_list(p, pairs);
}

void write_edge_list(const PredictorGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write edge list file: " + path);
  for (const auto& [a, b] : g.edges()) out << a + 1 << " " << b + 1 << "\n";
}

}  // namespace sil
