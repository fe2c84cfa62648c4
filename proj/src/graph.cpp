#include "btltest/graph.hpp"

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "btltest/rng.hpp"

namespace btltest {

namespace {

bool off_diagonal_connected(int n, const std::vector<std::uint8_t>& adj) {
  std::vector<int> stack{0};
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(n), 0);
  seen[0] = 1;
  int visited = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int w = 0; w < n; ++w) {
      if (w != v && adj[static_cast<std::size_t>(v) * n + w] && !seen[w]) {
        seen[w] = 1;
        ++visited;
        stack.push_back(w);
      }
    }
  }
  return visited == n;
}

}  // namespace

ObservationGraph::ObservationGraph(int n, std::vector<std::uint8_t> adjacency)
    : n_(n), adj_(std::move(adjacency)), neighbors_(static_cast<std::size_t>(n)) {
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      if (i != j && adj_[static_cast<std::size_t>(i) * n_ + j]) neighbors_[i].push_back(j);
    }
  }
}

ObservationGraph ObservationGraph::from_adjacency(int n, std::vector<std::uint8_t> adjacency) {
  if (n < 2) throw InvalidSizeError("graph needs at least 2 vertices");
  if (adjacency.size() != static_cast<std::size_t>(n) * n)
    throw ValidationError("adjacency size does not match n");
  for (int i = 0; i < n; ++i) {
    if (!adjacency[static_cast<std::size_t>(i) * n + i])
      throw ValidationError("adjacency diagonal must be all ones (self-loops)");
    for (int j = 0; j < n; ++j) {
      if (adjacency[static_cast<std::size_t>(i) * n + j] !=
          adjacency[static_cast<std::size_t>(j) * n + i])
        throw ValidationError("adjacency must be symmetric");
    }
  }
  if (!off_diagonal_connected(n, adjacency))
    throw ConnectivityError("graph is disconnected", 1);
  return ObservationGraph(n, std::move(adjacency));
}

std::vector<std::pair<int, int>> ObservationGraph::directed_edges() const {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n_; ++i)
    for (int j : neighbors_[i]) edges.emplace_back(i, j);
  return edges;
}

std::vector<std::pair<int, int>> ObservationGraph::undirected_edges() const {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n_; ++i)
    for (int j : neighbors_[i])
      if (i < j) edges.emplace_back(i, j);
  return edges;
}

ObservationGraph complete_graph(int n) {
  if (n < 2) throw InvalidSizeError("complete_graph requires n >= 2");
  std::vector<std::uint8_t> adj(static_cast<std::size_t>(n) * n, 1);
  return ObservationGraph::from_adjacency(n, std::move(adj));
}

ObservationGraph circulant_expander(int n) {
  if (n < 4 || n % 4 != 0) throw InvalidSizeError("circulant_expander requires n divisible by 4");
  const int m = n / 4;
  std::vector<std::uint8_t> adj(static_cast<std::size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i) {
    adj[static_cast<std::size_t>(i) * n + i] = 1;
    for (int off = 1; off <= m; ++off) {
      int a = (i + off) % n;
      int b = (i - off + n) % n;
      adj[static_cast<std::size_t>(i) * n + a] = 1;
      adj[static_cast<std::size_t>(i) * n + b] = 1;
    }
  }
  return ObservationGraph::from_adjacency(n, std::move(adj));
}

ObservationGraph erdos_renyi(int n, double p, std::uint64_t seed, int max_retries) {
  if (n < 2) throw InvalidSizeError("erdos_renyi requires n >= 2");
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("erdos_renyi requires p in (0, 1]");
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(attempt)}));
    std::vector<std::uint8_t> adj(static_cast<std::size_t>(n) * n, 0);
    for (int i = 0; i < n; ++i) adj[static_cast<std::size_t>(i) * n + i] = 1;
    for (int i = 1; i < n; ++i) {
      for (int j = 0; j < i; ++j) {
        if (rng.bernoulli(p)) {
          adj[static_cast<std::size_t>(i) * n + j] = 1;
          adj[static_cast<std::size_t>(j) * n + i] = 1;
        }
      }
    }
    if (off_diagonal_connected(n, adj)) return ObservationGraph::from_adjacency(n, std::move(adj));
  }
  throw ConnectivityError("erdos_renyi: no connected sample within retry budget", max_retries);
}

DegreeStats degree_stats(const ObservationGraph& g) {
  DegreeStats s;
  s.d_min = g.n();
  s.d_max = 0;
  for (int i = 0; i < g.n(); ++i) {
    int off = g.off_degree(i);
    s.d_min = std::min(s.d_min, off);
    s.d_max = std::max(s.d_max, off + 1);  // self-loop counted, per the asymmetric definitions
  }
  s.kappa = static_cast<double>(s.d_max) / static_cast<double>(s.d_min);
  return s;
}

double edge_expansion_exact(const ObservationGraph& g) {
  const int n = g.n();
  if (n > 22)
    throw SizeLimitError(
        "edge_expansion_exact is limited to n <= 22; use expansion_spectral_lower_bound");
  std::vector<std::uint32_t> mask(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i)
    for (int j : g.neighbors(i)) mask[i] |= (1u << j);

  double best = std::numeric_limits<double>::infinity();
  const std::uint32_t full = (n == 32) ? ~0u : ((1u << n) - 1);
  // vertex n-1 pinned to the complement halves the enumeration
  const std::uint32_t top = 1u << (n - 1);
  for (std::uint32_t s = 1; s < top; ++s) {
    int cut = 0;
    int size = 0;
    std::uint32_t rest = s;
    while (rest) {
      int v = std::countr_zero(rest);
      rest &= rest - 1;
      ++size;
      cut += std::popcount(mask[v] & full & ~s);
    }
    double ratio = static_cast<double>(cut) / static_cast<double>(std::min(size, n - size));
    best = std::min(best, ratio);
  }
  return best;
}

double adjacency_second_eigenvalue(const ObservationGraph& g) {
  const int n = g.n();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j : g.neighbors(i)) a(i, j) = 1.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  double largest = 0.0, second = 0.0;
  for (int i = 0; i < n; ++i) {
    double v = std::abs(ev(i));
    if (v > largest) {
      second = largest;
      largest = v;
    } else if (v > second) {
      second = v;
    }
  }
  return second;
}

double expansion_spectral_lower_bound(const ObservationGraph& g) {
  const auto ds = degree_stats(g);
  if (ds.d_min != ds.d_max - 1)
    throw DomainError("expansion_spectral_lower_bound requires a regular graph");
  return (static_cast<double>(ds.d_min) - adjacency_second_eigenvalue(g)) / 2.0;
}

void write_edge_list(const ObservationGraph& g, std::ostream& os) {
  os << "n=" << g.n() << "\n";
  for (auto [i, j] : g.undirected_edges()) os << i << " " << j << "\n";
}

ObservationGraph read_edge_list(std::istream& is) {
  std::string header;
  if (!std::getline(is, header) || header.rfind("n=", 0) != 0)
    throw ParseError("edge list must start with an n=<count> header", 1);
  int n = 0;
  try {
    n = std::stoi(header.substr(2));
  } catch (const std::exception&) {
    throw ParseError("bad vertex count in edge list header", 1);
  }
  if (n < 2) throw InvalidSizeError("edge list declares fewer than 2 vertices");
  std::vector<std::uint8_t> adj(static_cast<std::size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i) adj[static_cast<std::size_t>(i) * n + i] = 1;
  std::string line;
  long lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    int i = -1, j = -1;
    if (!(ls >> i >> j) || i < 0 || j < 0 || i >= n || j >= n || i == j)
      throw ParseError("bad edge line", lineno);
    adj[static_cast<std::size_t>(i) * n + j] = 1;
    adj[static_cast<std::size_t>(j) * n + i] = 1;
  }
  return ObservationGraph::from_adjacency(n, std::move(adj));
}

}  // namespace btltest
