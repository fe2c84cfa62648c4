#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>

#include "btltest/model.hpp"

namespace btltest {

// Canonical row-stochastic chain S_ij = p_ij / d on edges, mass folded into
// the diagonal, at least half-lazy.
struct MarkovChain {
  Eigen::MatrixXd s;
  double d = 0.0;
  ObservationGraph graph;
};

struct StationaryDistribution {
  Eigen::VectorXd pi;
  double residual = 0.0;  // ||pi^T S - pi^T||_inf at return
};

struct SeparationResult {
  double d_frob = 0.0;  // ||Pi P + P Pi - P_E(1 pi^T)||_F
  double eps = 0.0;     // d_frob / (n ||pi||_inf)
};

struct ResidualDecomposition {
  double rev = 0.0;    // ||Pi P - P^T Pi||^2 in the pi^-1-weighted Frobenius norm
  double skew = 0.0;   // ||P + P^T - P_E(1 1^T)||^2 in the pi-weighted Frobenius norm
  double total = 0.0;  // ||Pi P + P Pi - P_E(1 pi^T)||^2, pi^-1-weighted
};

struct DtmSpectrum {
  double sigma2 = 0.0;         // second largest singular value of Pi^1/2 S Pi^-1/2
  double residual_norm = 0.0;  // ||R - sqrt(pi) sqrt(pi)^T||_2, equal up to numerics
};

struct BtlProjection {
  double d_frob = 0.0;      // min over bounded-condition BTL models of ||P - P_E(B)||_F
  Eigen::VectorXd scores;   // normalized minimizer
};

// Default d = 2 * d_max; overriding with a d too small to keep every
// diagonal entry >= 1/2 raises LazinessError.
MarkovChain canonical_markov(const PairwiseModel& model,
                             std::optional<double> d_override = std::nullopt);

// Left fixed point by power iteration from the uniform vector; the fixed
// point itself does not depend on d.
StationaryDistribution stationary(const MarkovChain& chain, double tol = 1e-12,
                                  long max_iter = 1'000'000);

double principal_ratio(const StationaryDistribution& pi);

DtmSpectrum dtm_sigma2(const MarkovChain& chain, const StationaryDistribution& pi);

// Exact bottleneck ratio of the DTM, brute force over subsets; n <= 22.
double dtm_edge_expansion(const MarkovChain& chain, const StationaryDistribution& pi);

// Lower bound delta / (d h (1+delta)) * phi_tilde(G), the fallback pointed to
// by dtm_edge_expansion's size-limit error.
double dtm_expansion_lower_bound(double delta, double d, double h_pi, double phi_graph);

SeparationResult separation(const PairwiseModel& model, const Eigen::VectorXd& pi);
ResidualDecomposition residual_decomposition(const PairwiseModel& model,
                                             const Eigen::VectorXd& pi);

// Multi-start local minimization of sum over edges of
// (p_ij - b_j/(b_i+b_j))^2 over positive scores with condition number at most
// 1/delta; log-parameterized with a penalty on the bound, the returned point
// projected to feasibility.
BtlProjection btl_distance(const PairwiseModel& model, double delta, int restarts,
                           std::uint64_t seed);

}  // namespace btltest
