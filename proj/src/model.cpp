#include "btltest/model.hpp"

#include <cmath>

#include "btltest/rng.hpp"

namespace btltest {

PairwiseModel::PairwiseModel(ObservationGraph graph, Eigen::MatrixXd p)
    : graph_(std::move(graph)), p_(std::move(p)) {
  const int n = graph_.n();
  if (p_.rows() != n || p_.cols() != n) throw ValidationError("model matrix size mismatch");
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = p_(i, j);
      if (i == j) {
        if (v != 0.5) throw ValidationError("model diagonal must be 1/2");
      } else if (graph_.has_edge(i, j)) {
        if (!(v > 0.0 && v < 1.0))
          throw ValidationError("edge probabilities must lie in the open interval (0,1)");
      } else if (v != 0.0) {
        throw ValidationError("off-graph entries must be 0");
      }
    }
  }
}

ComparisonDataset::ComparisonDataset(ObservationGraph graph)
    : graph_(std::move(graph)),
      k_(Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>::Zero(graph_.n(), graph_.n())),
      z_(Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>::Zero(graph_.n(), graph_.n())) {
  names_.reserve(static_cast<std::size_t>(graph_.n()));
  for (int i = 0; i < graph_.n(); ++i) names_.push_back(std::to_string(i));
}

void ComparisonDataset::set_counts(int i, int j, long k, long z) {
  if (i == j || !graph_.has_edge(i, j))
    throw ValidationError("trials exist only for off-diagonal directed edges");
  if (z < 0 || k < 0 || z > k) throw ValidationError("need 0 <= z <= k");
  k_(i, j) = k;
  z_(i, j) = z;
}

bool ComparisonDataset::has_uniform_k() const {
  long k = -1;
  for (auto [i, j] : graph_.directed_edges()) {
    if (k < 0) k = k_(i, j);
    if (k_(i, j) != k) return false;
  }
  return true;
}

long ComparisonDataset::uniform_k() const {
  auto edges = graph_.directed_edges();
  return edges.empty() ? 0 : k_(edges.front().first, edges.front().second);
}

void ComparisonDataset::set_agent_names(std::vector<std::string> names) {
  if (names.size() != static_cast<std::size_t>(graph_.n()))
    throw ValidationError("agent name count must equal n");
  names_ = std::move(names);
}

PairwiseModel btl_model(const Eigen::VectorXd& alpha, const ObservationGraph& graph) {
  const int n = graph.n();
  if (alpha.size() != n) throw ValidationError("score vector length must equal n");
  for (int i = 0; i < n; ++i)
    if (!(alpha(i) > 0.0)) throw DomainError("btl_model requires strictly positive scores");
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    p(i, i) = 0.5;
    for (int j : graph.neighbors(i)) p(i, j) = alpha(j) / (alpha(i) + alpha(j));
  }
  return PairwiseModel(graph, std::move(p));
}

double dynamic_range(const PairwiseModel& model) {
  double delta = 1.0;
  for (auto [i, j] : model.graph().directed_edges()) {
    const double p = model.p(i, j);
    delta = std::min(delta, std::min(p / (1.0 - p), (1.0 - p) / p));
  }
  return delta;
}

PairwiseModel lower_bound_model(int n, double eta, const std::vector<int>& theta) {
  if (n < 2 || n % 2 != 0) throw InvalidSizeError("lower_bound_model requires even n");
  if (!(eta > 0.0 && eta < 0.5)) throw DomainError("lower_bound_model requires eta in (0, 1/2)");
  const int m = n / 2;
  if (theta.size() != static_cast<std::size_t>(m))
    throw ValidationError("theta must be a permutation of n/2 elements");
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(m), 0);
  for (int v : theta) {
    if (v < 0 || v >= m || seen[v]) throw ValidationError("theta is not a permutation");
    seen[v] = 1;
  }
  Eigen::MatrixXd p = Eigen::MatrixXd::Constant(n, n, 0.5);
  for (int r = 0; r < m; ++r) {
    p(r, m + theta[r]) += eta;        // top-right: 1/2 + eta Q
    p(m + theta[r], r) -= eta;        // bottom-left: 1/2 - eta Q^T
  }
  return PairwiseModel(complete_graph(n), std::move(p));
}

Eigen::VectorXd lower_bound_stationary(int n, double eta) {
  Eigen::VectorXd pi(n);
  const double x = (1.0 - 4.0 * eta / n) / n;
  const double y = (1.0 + 4.0 * eta / n) / n;
  pi.head(n / 2).setConstant(x);
  pi.tail(n / 2).setConstant(y);
  return pi;
}

double lower_bound_separation_squared(int n, double eta) {
  const double a = 1.0 - 2.0 / n;
  return 4.0 * eta * eta / n * a * a + 8.0 * eta * eta / (static_cast<double>(n) * n) * a;
}

PairwiseModel stability_model(int n) {
  if (n < 2 || n % 2 != 0) throw InvalidSizeError("stability_model requires even n");
  const double alpha = 0.01;
  const double eta = 4.0 * alpha * n;  // 0.04 n
  const double two_eta = 2.0 * eta;
  if (std::abs(two_eta - std::round(two_eta)) > 1e-9)
    throw DomainError("stability_model requires 0.08*n to be an integer");
  const int l = static_cast<int>(std::llround(std::ceil(two_eta)));
  const int m = n / 2;
  if (l >= m) throw DomainError("stability_model requires l = 2*eta < n/2");

  Eigen::MatrixXd p = Eigen::MatrixXd::Constant(n, n, 0.5);
  const double row1 = 0.5 + 2.0 * eta / n;
  const double row2 = 0.5 + (eta - alpha) / l;
  if (!(row2 < 1.0)) throw DomainError("stability_model parameters push p out of (0,1)");
  for (int j = m; j < n; ++j) {
    p(0, j) = row1;
    p(j, 0) = 1.0 - row1;
  }
  for (int j = n - l; j < n; ++j) {
    p(1, j) = row2;
    p(j, 1) = 1.0 - row2;
  }
  return PairwiseModel(complete_graph(n), std::move(p));
}

Eigen::VectorXd borda_counts(const PairwiseModel& model) {
  const int n = model.n();
  for (int i = 0; i < n; ++i)
    if (model.graph().off_degree(i) != n - 1)
      throw TopologyError("borda_counts requires a complete graph");
  Eigen::VectorXd tau(n);
  for (int i = 0; i < n; ++i) {
    KahanSum s;
    for (int j = 0; j < n; ++j) s.add(1.0 - model.p(i, j));  // diagonal 1/2 term included
    tau(i) = s.value();
  }
  return tau;
}

PairwiseModel uniform_model(const ObservationGraph& graph) {
  return btl_model(Eigen::VectorXd::Ones(graph.n()), graph);
}

PairwiseModel constant_margin_model(int n, double margin) {
  if (!(margin > 0.0 && margin < 0.5)) throw DomainError("margin must be in (0, 1/2)");
  Eigen::MatrixXd p = Eigen::MatrixXd::Constant(n, n, 0.5);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i > j) p(i, j) = 0.5 + margin;
      if (i < j) p(i, j) = 0.5 - margin;
    }
  }
  return PairwiseModel(complete_graph(n), std::move(p));
}

PairwiseModel cyclic_model(int n, double beta) {
  if (!(beta > 0.0 && beta < 0.5)) throw DomainError("beta must be in (0, 1/2)");
  const int forward = n / 2;  // == ceil((n-1)/2)
  Eigen::MatrixXd p = Eigen::MatrixXd::Constant(n, n, 0.5);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const int gap = ((j - i) % n + n) % n;
      p(i, j) = gap <= forward ? 0.5 + beta : 0.5 - beta;
    }
  }
  return PairwiseModel(complete_graph(n), std::move(p));
}

ComparisonDataset sample_dataset(const PairwiseModel& model, long k, std::uint64_t seed) {
  Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> km =
      Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>::Zero(model.n(), model.n());
  for (auto [i, j] : model.graph().directed_edges()) km(i, j) = k;
  return sample_dataset(model, km, seed);
}

ComparisonDataset sample_dataset(const PairwiseModel& model,
                                 const Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>& k,
                                 std::uint64_t seed) {
  if (k.rows() != model.n() || k.cols() != model.n())
    throw ValidationError("trial count matrix size mismatch");
  ComparisonDataset data(model.graph());
  for (auto [i, j] : model.graph().directed_edges()) {
    if (k(i, j) < 0) throw ValidationError("negative trial count");
    if (k(i, j) == 0) continue;
    Rng edge_rng(derive_seed(seed, {static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)}));
    const long z = edge_rng.binomial(k(i, j), model.p(i, j));
    data.set_counts(i, j, k(i, j), z);
  }
  return data;
}

}  // namespace btltest
