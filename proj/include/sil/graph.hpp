#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sil/rng.hpp"

namespace sil {

// Undirected, unweighted graph on p features. Edges are stored as a sorted
// unique list of (lo, hi) pairs with 0-based internal indices; all external
// interfaces (files, error messages) speak 1-based indices. Immutable after
// construction, so it can be shared freely across concurrent fits.
class PredictorGraph {
 public:
  // pairs are 1-based, may contain duplicates and both orientations.
  // Throws std::invalid_argument on out-of-range indices or self-loops,
  // naming the offending pair.
  static PredictorGraph from_edge_list(
      int p, const std::vector<std::pair<int, int>>& pairs);

  int num_features() const { return p_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  // 0-based, lo < hi, sorted lexicographically.
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  bool has_edge(int j, int k) const;  // 0-based

  bool operator==(const PredictorGraph& other) const {
    return p_ == other.p_ && edges_ == other.edges_;
  }

 private:
  PredictorGraph(int p, std::vector<std::pair<int, int>> edges)
      : p_(p), edges_(std::move(edges)) {}

  int p_ = 0;
  std::vector<std::pair<int, int>> edges_;
};

// Graph with no edges (every group is a singleton).
PredictorGraph edgeless_graph(int p);

// Per-feature neighborhood groups: group j holds j plus its graph
// neighbors, sorted ascending (0-based). Carries the flat row offsets used
// by the solver's latent coefficient layout.
struct NeighborhoodIndex {
  std::vector<std::vector<int>> groups;  // p sorted index lists
  std::vector<int> sizes;                // sizes[j] = groups[j].size()
  std::vector<int> offsets;              // prefix sums; offsets[p] = total rows

  int num_groups() const { return static_cast<int>(groups.size()); }
  int total_rows() const { return offsets.back(); }
};

NeighborhoodIndex neighborhoods(const PredictorGraph& g);

// Group penalty weights tau_j = sqrt(a_j) * d_j.
struct GroupWeights {
  std::vector<double> tau;
  std::vector<double> d;

  double max_tau() const;
};

// d defaults to all ones when empty. Throws on nonpositive or nonfinite d.
GroupWeights group_weights(const NeighborhoodIndex& nb,
                           const std::vector<double>& d = {});

// Deletes round(fraction * |E|) uniformly chosen edges; deterministic per
// seed. fraction must be in [0, 1).
PredictorGraph remove_edges_random(const PredictorGraph& g, double fraction,
                                   std::uint64_t seed);

// Edge-list text file: one edge per line, two whitespace-separated 1-based
// indices; lines starting with '#' are ignored; duplicates tolerated.
PredictorGraph read_edge_list(const std::string& path, int p);
void write_edge_list(const PredictorGraph& g, const std::string& path);

}  // namespace sil
