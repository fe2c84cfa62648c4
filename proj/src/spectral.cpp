#include "btltest/spectral.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <vector>

#include "btltest/rng.hpp"

namespace btltest {

MarkovChain canonical_markov(const PairwiseModel& model, std::optional<double> d_override) {
  const int n = model.n();
  const auto ds = degree_stats(model.graph());
  const double d = d_override.value_or(2.0 * ds.d_max);
  if (!(d > 0.0)) throw DomainError("canonical_markov requires d > 0");
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    KahanSum row;
    for (int j : model.graph().neighbors(i)) {
      s(i, j) = model.p(i, j) / d;
      row.add(model.p(i, j));
    }
    s(i, i) = 1.0 - row.value() / d;
    if (s(i, i) < 0.5 - 1e-12)
      throw LazinessError("d too small to keep the canonical chain half-lazy");
  }
  return MarkovChain{std::move(s), d, model.graph()};
}

StationaryDistribution stationary(const MarkovChain& chain, double tol, long max_iter) {
  const int n = static_cast<int>(chain.s.rows());
  Eigen::VectorXd pi = Eigen::VectorXd::Constant(n, 1.0 / n);
  Eigen::VectorXd spi = chain.s.transpose() * pi;
  double residual = std::numeric_limits<double>::infinity();
  for (long it = 0; it < max_iter; ++it) {
    residual = (spi - pi).lpNorm<Eigen::Infinity>();
    if (residual <= tol) return {std::move(pi), residual};
    pi = spi / spi.sum();
    spi = chain.s.transpose() * pi;
  }
  throw ConvergenceError("stationary distribution did not converge", residual);
}

double principal_ratio(const StationaryDistribution& pi) {
  const double lo = pi.pi.minCoeff();
  if (!(lo > 0.0))
    throw DegenerateDistributionError("principal ratio undefined for a zero entry");
  return pi.pi.maxCoeff() / lo;
}

DtmSpectrum dtm_sigma2(const MarkovChain& chain, const StationaryDistribution& pi) {
  const int n = static_cast<int>(chain.s.rows());
  if (!(pi.pi.minCoeff() > 0.0))
    throw DegenerateDistributionError("DTM requires strictly positive pi");
  Eigen::VectorXd sqrt_pi = pi.pi.cwiseSqrt();
  Eigen::MatrixXd r =
      sqrt_pi.asDiagonal() * chain.s * sqrt_pi.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r);
  if (svd.info() != Eigen::Success) throw Error("SVD failed on the DTM");
  DtmSpectrum out;
  out.sigma2 = n >= 2 ? svd.singularValues()(1) : 0.0;
  Eigen::MatrixXd centered = r - sqrt_pi * sqrt_pi.transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd2(centered);
  out.residual_norm = svd2.singularValues()(0);
  return out;
}

double dtm_edge_expansion(const MarkovChain& chain, const StationaryDistribution& pi) {
  const int n = static_cast<int>(chain.s.rows());
  if (n > 22)
    throw SizeLimitError(
        "dtm_edge_expansion is limited to n <= 22; use dtm_expansion_lower_bound");
  if (!(pi.pi.minCoeff() > 0.0))
    throw DegenerateDistributionError("edge expansion requires strictly positive pi");
  // Weighted directed cut w_ij = pi_i S_ij; for stationary pi the flow out of
  // a set equals the flow in, so enumerating each bipartition once suffices.
  Eigen::MatrixXd w = pi.pi.asDiagonal() * chain.s;
  const double total_pi = pi.pi.sum();
  double best = std::numeric_limits<double>::infinity();
  const std::uint32_t top = 1u << (n - 1);  // vertex n-1 pinned to the complement
  for (std::uint32_t mask = 1; mask < top; ++mask) {
    double cut = 0.0;
    double pi_s = 0.0;
    for (int i = 0; i < n; ++i) {
      if (!(mask & (1u << i))) continue;
      pi_s += pi.pi(i);
      for (int j = 0; j < n; ++j) {
        if (i != j && !(mask & (1u << j))) cut += w(i, j);
      }
    }
    best = std::min(best, cut / std::min(pi_s, total_pi - pi_s));
  }
  return best;
}

double dtm_expansion_lower_bound(double delta, double d, double h_pi, double phi_graph) {
  return delta / (d * h_pi * (1.0 + delta)) * phi_graph;
}

SeparationResult separation(const PairwiseModel& model, const Eigen::VectorXd& pi) {
  if (!(pi.minCoeff() > 0.0))
    throw DegenerateDistributionError("separation requires strictly positive pi");
  KahanSum d2;
  for (auto [i, j] : model.graph().directed_edges()) {
    const double r = (pi(i) + pi(j)) * model.p(i, j) - pi(j);
    d2.add(r * r);
  }
  SeparationResult out;
  out.d_frob = std::sqrt(std::max(0.0, d2.value()));
  out.eps = out.d_frob / (model.n() * pi.lpNorm<Eigen::Infinity>());
  return out;
}

ResidualDecomposition residual_decomposition(const PairwiseModel& model,
                                             const Eigen::VectorXd& pi) {
  if (!(pi.minCoeff() > 0.0))
    throw DegenerateDistributionError("decomposition requires strictly positive pi");
  KahanSum rev, skew, total;
  for (auto [i, j] : model.graph().directed_edges()) {
    const double pij = model.p(i, j);
    const double pji = model.p(j, i);
    const double a = pi(i) * pij - pi(j) * pji;
    const double s = pij + pji - 1.0;
    const double t = (pi(i) + pi(j)) * pij - pi(j);
    rev.add(a * a / pi(j));
    skew.add(pi(j) * s * s);
    total.add(t * t / pi(j));
  }
  return {rev.value(), skew.value(), total.value()};
}

namespace {

// Objective, gradient, and penalty for the log-parameterized projection onto
// the bounded-condition BTL class.
struct ProjectionObjective {
  const PairwiseModel& model;
  double log_h;       // allowed spread of log-scores
  double mu = 1e4;    // penalty weight on spread violation

  double value(const Eigen::VectorXd& theta) const {
    KahanSum f;
    for (auto [i, j] : model.graph().directed_edges()) {
      const double sij = 1.0 / (1.0 + std::exp(theta(i) - theta(j)));
      const double r = model.p(i, j) - sij;
      f.add(r * r);
    }
    const double spread = theta.maxCoeff() - theta.minCoeff();
    const double v = std::max(0.0, spread - log_h);
    return f.value() + mu * v * v;
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(theta.size());
    for (auto [i, j] : model.graph().directed_edges()) {
      const double sij = 1.0 / (1.0 + std::exp(theta(i) - theta(j)));
      const double r = model.p(i, j) - sij;
      const double sp = sij * (1.0 - sij);
      // d sij / d theta_j = sp, d sij / d theta_i = -sp
      g(j) += -2.0 * r * sp;
      g(i) += 2.0 * r * sp;
    }
    const double spread = theta.maxCoeff() - theta.minCoeff();
    const double v = spread - log_h;
    if (v > 0.0) {
      int arg_max = 0, arg_min = 0;
      theta.maxCoeff(&arg_max);
      theta.minCoeff(&arg_min);
      g(arg_max) += 2.0 * mu * v;
      g(arg_min) -= 2.0 * mu * v;
    }
    return g;
  }
};

Eigen::VectorXd clamp_spread(Eigen::VectorXd theta, double log_h) {
  const double spread = theta.maxCoeff() - theta.minCoeff();
  if (spread <= log_h) return theta;
  const double mid = (theta.maxCoeff() + theta.minCoeff()) / 2.0;
  for (int i = 0; i < theta.size(); ++i)
    theta(i) = std::clamp(theta(i), mid - log_h / 2.0, mid + log_h / 2.0);
  return theta;
}

double raw_objective(const PairwiseModel& model, const Eigen::VectorXd& theta) {
  KahanSum f;
  for (auto [i, j] : model.graph().directed_edges()) {
    const double sij = 1.0 / (1.0 + std::exp(theta(i) - theta(j)));
    const double r = model.p(i, j) - sij;
    f.add(r * r);
  }
  return f.value();
}

}  // namespace

BtlProjection btl_distance(const PairwiseModel& model, double delta, int restarts,
                           std::uint64_t seed) {
  if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("btl_distance requires delta in (0, 1]");
  if (restarts < 1) throw DomainError("btl_distance requires at least one restart");
  const int n = model.n();
  const double log_h = std::log(1.0 / delta);
  ProjectionObjective obj{model, log_h};

  double best_value = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_theta;

  for (int r = 0; r < restarts; ++r) {
    Eigen::VectorXd theta(n);
    if (r == 0) {
      // stationary scores are the natural warm start (exact for BTL inputs)
      auto pi = stationary(canonical_markov(model), 1e-10, 200000);
      theta = pi.pi.array().log();
    } else {
      Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(r)}));
      for (int i = 0; i < n; ++i) theta(i) = rng.uniform(-log_h / 2.0, log_h / 2.0);
    }
    theta.array() -= theta.mean();

    double f = obj.value(theta);
    double step = 1.0;
    for (int it = 0; it < 20000; ++it) {
      Eigen::VectorXd g = obj.gradient(theta);
      const double gmax = g.lpNorm<Eigen::Infinity>();
      if (gmax < 1e-9) break;
      // Armijo backtracking
      bool moved = false;
      for (int bt = 0; bt < 60; ++bt) {
        Eigen::VectorXd cand = theta - step * g;
        cand.array() -= cand.mean();
        const double fc = obj.value(cand);
        if (fc <= f - 1e-4 * step * g.squaredNorm()) {
          theta = std::move(cand);
          f = fc;
          step = std::min(step * 2.0, 1e6);
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }

    Eigen::VectorXd feasible = clamp_spread(theta, log_h);
    const double raw = raw_objective(model, feasible);
    if (raw < best_value) {
      best_value = raw;
      best_theta = std::move(feasible);
    }
  }

  if (!std::isfinite(best_value))
    throw OptimizationError("btl_distance: no finite value after all restarts");
  Eigen::VectorXd scores = best_theta.array().exp();
  scores /= scores.sum();
  return {std::sqrt(std::max(0.0, best_value)), std::move(scores)};
}

}  // namespace btltest
