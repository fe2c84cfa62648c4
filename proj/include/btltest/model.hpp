#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "btltest/graph.hpp"

namespace btltest {

// Matrix of win probabilities on graph edges: P(i,j) = p_ij in (0,1) is the
// probability that j beats i in an "i vs j" comparison, 1/2 on the diagonal,
// 0 off-graph.
class PairwiseModel {
 public:
  PairwiseModel(ObservationGraph graph, Eigen::MatrixXd p);

  const ObservationGraph& graph() const { return graph_; }
  const Eigen::MatrixXd& matrix() const { return p_; }
  double p(int i, int j) const { return p_(i, j); }
  int n() const { return graph_.n(); }

 private:
  ObservationGraph graph_;
  Eigen::MatrixXd p_;
};

// Per-directed-edge outcome counts: k(i,j) trials of "i vs j", z(i,j) of them
// won by j. Trial order is irrelevant to every statistic, so the multiset of
// outcomes per bucket is stored as the (k, z) pair.
class ComparisonDataset {
 public:
  explicit ComparisonDataset(ObservationGraph graph);

  const ObservationGraph& graph() const { return graph_; }
  int n() const { return graph_.n(); }

  long k(int i, int j) const { return k_(i, j); }
  long z(int i, int j) const { return z_(i, j); }
  void set_counts(int i, int j, long k, long z);

  long total_observations() const { return k_.sum(); }
  bool has_uniform_k() const;
  long uniform_k() const;  // only meaningful when has_uniform_k()

  const std::vector<std::string>& agent_names() const { return names_; }
  void set_agent_names(std::vector<std::string> names);

 private:
  ObservationGraph graph_;
  Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> k_;
  Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> z_;
  std::vector<std::string> names_;
};

PairwiseModel btl_model(const Eigen::VectorXd& alpha, const ObservationGraph& graph);

// Largest delta in (0,1] with delta/(1+delta) <= p_ij <= 1/(1+delta) on all
// edges.
double dynamic_range(const PairwiseModel& model);

// Block-perturbed family from the minimax lower bound: complete graph, all
// blocks 1/2 except top-right 1/2 + eta*Q_theta and bottom-left
// 1/2 - eta*Q_theta^T (translated skew-symmetric by construction).
PairwiseModel lower_bound_model(int n, double eta, const std::vector<int>& theta);

// Closed-form stationary distribution of the lower-bound model's canonical
// chain: first half (1/n)(1 - 4 eta/n), second half (1/n)(1 + 4 eta/n).
Eigen::VectorXd lower_bound_stationary(int n, double eta);

// Direct evaluation of the squared separation of the lower-bound model:
// (4 eta^2/n)(1 - 2/n)^2 + (8 eta^2/n^2)(1 - 2/n).
double lower_bound_separation_squared(int n, double eta);

// Borda-inversion fixture with alpha = 0.01, eta = 0.04 n, l = 2 eta; valid
// when n is even, 2 eta is an integer, and l < n/2.
PairwiseModel stability_model(int n);

Eigen::VectorXd borda_counts(const PairwiseModel& model);

// Uniform all-1/2 model (the lower-bound family's H0).
PairwiseModel uniform_model(const ObservationGraph& graph);

// Complete-graph model with p_ij = 1/2 - margin for i < j (so lower-indexed
// agents win with probability 1/2 + margin); the H1 fixture of the threshold
// experiments.
PairwiseModel constant_margin_model(int n, double margin);

// Complete-graph circulant flow: p_ij = 1/2 + beta when (j - i) mod n lies in
// the forward half, 1/2 - beta otherwise. For odd n this is translated
// skew-symmetric and strongly non-reversible; its stationary distribution is
// uniform by symmetry.
PairwiseModel cyclic_model(int n, double beta);

ComparisonDataset sample_dataset(const PairwiseModel& model, long k, std::uint64_t seed);
ComparisonDataset sample_dataset(const PairwiseModel& model,
                                 const Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>& k,
                                 std::uint64_t seed);

}  // namespace btltest
