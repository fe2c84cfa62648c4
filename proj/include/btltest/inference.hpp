#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "btltest/spectral.hpp"

namespace btltest {

// Protocol knobs the paper leaves open, with its experimental defaults where
// it states them (q = 0.95, pools and shuffle reps of 200, n cycles per
// repetition).
struct TestConfig {
  double c_alpha_plus_gamma = 4.0;
  double q = 0.95;
  int model_pool = 200;
  int shuffle_reps = 200;
  int cycles_per_rep = -1;  // -1 means n
  int cycle_step_budget_factor = 50;
  double score_offset = 0.05;  // BTL pool scores: offset + U[0,1]
  double stationary_tol = 1e-10;
  long stationary_max_iter = 1'000'000;
};

enum class Decision { H0, H1 };

inline const char* to_string(Decision d) { return d == Decision::H1 ? "H1" : "H0"; }

struct TestReport {
  double statistic = 0.0;         // raw T
  double scaled_statistic = 0.0;  // n*k*T for uniform k, n*T otherwise
  std::string scale;              // "nk" or "n"
  std::optional<double> analytic_t;
  std::optional<double> gamma0;
  std::optional<double> gamma1;
  std::optional<double> gamma2;
  std::optional<Decision> decision_analytic;
  std::optional<Decision> decision_gamma0;
  std::optional<Decision> decision_gamma1;
  std::optional<Decision> decision_gamma2;
  // diagnostics
  Eigen::VectorXd pi_hat;
  double h_pi = 0.0;
  double sigma2 = 0.0;
  double eps_hat = 0.0;
  int n = 0;
  long k_min = 0;
  long k_max = 0;
  double k_mean = 0.0;
  std::vector<std::string> agents;

  void write_kv(std::ostream& os) const;
  static std::string csv_header();
  std::string csv_row() const;
};

struct EmpiricalChain {
  MarkovChain chain;
  StationaryDistribution pi_hat;
};

// Empirical canonical chain S_ij = Z_ij / (k_ij d); buckets with k_ij = 0
// contribute nothing and their mass stays on the diagonal.
EmpiricalChain empirical_chain(const ComparisonDataset& data,
                               std::optional<double> d_override = std::nullopt,
                               double tol = 1e-10, long max_iter = 1'000'000);

// The separation-distance statistic; edges with k_ij <= 1 are skipped
// entirely.
double test_statistic(const ComparisonDataset& data, const Eigen::VectorXd& pi_hat);

// n*k*T when the design is uniform in k, n*T otherwise.
struct ScaledStatistic {
  double value = 0.0;
  std::string scale;
};
ScaledStatistic scaled_statistic(const ComparisonDataset& data, double t);

// t = 4 sqrt(n d_max) ||pi||_inf^2 / k + (c_alpha + c_gamma) n ||pi||_inf^2 / k.
// Only defined for uniform k.
double analytic_threshold(int n, long k, int d_max, const Eigen::VectorXd& pi_hat,
                          const TestConfig& config);

inline Decision decide(double t, double threshold) {
  return t >= threshold ? Decision::H1 : Decision::H0;
}

// The m-th synthetic dataset of the BTL threshold pool: random scores
// offset + U[0,1], binomial outcomes on the given trial design. Shared
// between the quantile threshold and experiments that reuse the pool.
ComparisonDataset pool_dataset(const ObservationGraph& graph,
                               const Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>& k,
                               const TestConfig& config, std::uint64_t seed, int m);

// Empirical-quantile threshold: a pool of random BTL models on the same
// graph and trial design, q-quantile of their scaled statistics.
double quantile_threshold(const ObservationGraph& graph,
                          const Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>& k,
                          const TestConfig& config, std::uint64_t seed);

// Pools each unordered pair's outcomes and deals k_ij of them back at random,
// removing any orientation asymmetry while conserving winner counts.
ComparisonDataset skew_shuffle(const ComparisonDataset& data, std::uint64_t seed);

struct CycleShuffleResult {
  ComparisonDataset data;
  int cycles_completed = 0;
  int attempts_abandoned = 0;   // walk failed to close within the step budget
  int proposals_rejected = 0;   // cycle found but the balance filter declined
};

// Kolmogorov-loop shuffling: a random walk through won comparisons finds a
// loop, whose wins are then flipped to the reversed orientation. A
// Metropolis filter keeps the sweep exactly balanced on the null
// conditioned on per-agent win totals and per-bucket trial counts.
CycleShuffleResult cycle_shuffle(const ComparisonDataset& data, int n_cycles,
                                 std::uint64_t seed, int step_budget_factor = 50);

struct PermutationThresholds {
  double gamma1 = 0.0;  // skew-shuffle only
  double gamma2 = 0.0;  // skew shuffle followed by n cycle shuffles
};

PermutationThresholds permutation_threshold(const ComparisonDataset& data,
                                            const TestConfig& config, std::uint64_t seed);

enum class ThresholdKind { Analytic, Quantile, Permutation, All };

TestReport run_test(const ComparisonDataset& data, ThresholdKind kind, const TestConfig& config,
                    std::uint64_t seed);

}  // namespace btltest
