#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "btltest/common.hpp"

namespace btltest {

struct DegreeStats {
  int d_min = 0;  // min off-diagonal degree (self-loop excluded)
  int d_max = 0;  // max degree including the self-loop
  double kappa = 0.0;
};

// Symmetric comparison-availability graph with explicit self-loops. The
// off-diagonal part is required to be connected; constructors reject inputs
// that violate this.
class ObservationGraph {
 public:
  static ObservationGraph from_adjacency(int n, std::vector<std::uint8_t> adjacency);

  int n() const { return n_; }
  bool has_edge(int i, int j) const { return adj_[static_cast<std::size_t>(i) * n_ + j] != 0; }
  const std::vector<int>& neighbors(int i) const { return neighbors_[i]; }
  int off_degree(int i) const { return static_cast<int>(neighbors_[i].size()); }

  // Ordered pairs (i, j), i != j, both orientations.
  std::vector<std::pair<int, int>> directed_edges() const;
  // One pair (i, j) with i < j per undirected edge.
  std::vector<std::pair<int, int>> undirected_edges() const;

  bool operator==(const ObservationGraph& other) const {
    return n_ == other.n_ && adj_ == other.adj_;
  }

 private:
  ObservationGraph(int n, std::vector<std::uint8_t> adjacency);
  int n_ = 0;
  std::vector<std::uint8_t> adj_;          // row-major, unit diagonal
  std::vector<std::vector<int>> neighbors_;  // off-diagonal only
};

ObservationGraph complete_graph(int n);

// n/2-regular circulant expander on n = 4m vertices: vertex i is adjacent to
// its n/4 cyclic neighbors on each side.
ObservationGraph circulant_expander(int n);

// One symmetric coin per unordered pair; retries with fresh sub-seeds when
// the sample comes out disconnected, then fails with the attempt count.
ObservationGraph erdos_renyi(int n, double p, std::uint64_t seed, int max_retries = 100);

DegreeStats degree_stats(const ObservationGraph& g);

// Exact combinatorial edge expansion min_S |E(S, S^c)| / min(|S|, |S^c|),
// brute force over bipartitions; only valid up to n = 22.
double edge_expansion_exact(const ObservationGraph& g);

// Second largest absolute eigenvalue of the off-diagonal adjacency matrix
// (dense eigensolve).
double adjacency_second_eigenvalue(const ObservationGraph& g);

// (d_tilde - lambda_2)/2 for d_tilde-regular graphs; the fallback pointed to
// by edge_expansion_exact's size-limit error.
double expansion_spectral_lower_bound(const ObservationGraph& g);

void write_edge_list(const ObservationGraph& g, std::ostream& os);
ObservationGraph read_edge_list(std::istream& is);

}  // namespace btltest
