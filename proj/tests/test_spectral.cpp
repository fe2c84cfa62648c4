#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "btltest/rng.hpp"
#include "btltest/spectral.hpp"

using namespace btltest;

namespace {

// Linear-solve stationary oracle, independent of the power-iteration path:
// rows of S^T - I give the balance equations, the last row is replaced by the
// normalization.
Eigen::VectorXd stationary_dense_oracle(const Eigen::MatrixXd& s) {
  const int n = static_cast<int>(s.rows());
  Eigen::MatrixXd m = s.transpose() - Eigen::MatrixXd::Identity(n, n);
  m.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  return m.fullPivLu().solve(b);
}

PairwiseModel random_model(const ObservationGraph& g, double lo, double hi, Rng& rng) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(g.n(), g.n());
  for (int i = 0; i < g.n(); ++i) p(i, i) = 0.5;
  for (auto [i, j] : g.directed_edges()) p(i, j) = rng.uniform(lo, hi);
  return PairwiseModel(g, std::move(p));
}

Eigen::VectorXd random_positive_pi(int n, Rng& rng) {
  Eigen::VectorXd pi(n);
  for (int i = 0; i < n; ++i) pi(i) = rng.uniform(0.05, 1.0);
  pi /= pi.sum();
  return pi;
}

}  // namespace

TEST_SUITE_BEGIN("spectral");

TEST_CASE("canonical markov matrix") {
  Eigen::Vector2d a(1, 2);
  auto chain = canonical_markov(btl_model(a, complete_graph(2)));
  CHECK(chain.d == doctest::Approx(4.0));
  CHECK(chain.s(0, 1) == doctest::Approx(1.0 / 6.0));

  // uniform complete model with d = 2n: S = (3/4) I + (1/(4n)) 1 1^T
  const int n = 9;
  auto u = canonical_markov(uniform_model(complete_graph(n)), 2.0 * n);
  Eigen::MatrixXd expected =
      0.75 * Eigen::MatrixXd::Identity(n, n) + Eigen::MatrixXd::Constant(n, n, 1.0 / (4.0 * n));
  CHECK((u.s - expected).cwiseAbs().maxCoeff() <= 1e-14);

  Rng rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    auto m = random_model(complete_graph(6), 0.2, 0.8, rng);
    auto c = canonical_markov(m);
    for (int i = 0; i < 6; ++i) {
      CHECK(std::abs(c.s.row(i).sum() - 1.0) <= 1e-12);
      CHECK(c.s(i, i) >= 0.5 - 1e-12);
    }
  }

  // laziness violation: mean row probability above 1/2 at d = n
  Eigen::Vector3d spread(1, 5, 5);
  CHECK_THROWS_AS(canonical_markov(btl_model(spread, complete_graph(3)), 3.0), LazinessError);
}

TEST_CASE("stationary distribution") {
  SUBCASE("btl stationary is the normalized score vector") {
    Eigen::VectorXd alpha(5);
    alpha << 2, 1, 4, 0.5, 3;
    for (const auto& g : {complete_graph(5), erdos_renyi(5, 0.8, 2)}) {
      auto pi = stationary(canonical_markov(btl_model(alpha, g)));
      CHECK((pi.pi - alpha / alpha.sum()).lpNorm<Eigen::Infinity>() <= 1e-10);
    }
  }
  SUBCASE("cyclic symmetry gives the uniform distribution") {
    auto pi = stationary(canonical_markov(cyclic_model(3, 0.1)));
    CHECK((pi.pi - Eigen::VectorXd::Constant(3, 1.0 / 3.0)).lpNorm<Eigen::Infinity>() <= 1e-12);
  }
  SUBCASE("lower-bound closed form") {
    auto m = lower_bound_model(4, 0.25, {0, 1});
    auto pi = stationary(canonical_markov(m));
    CHECK(pi.pi(0) == doctest::Approx(0.1875).epsilon(1e-10));
    CHECK(pi.pi(1) == doctest::Approx(0.1875).epsilon(1e-10));
    CHECK(pi.pi(2) == doctest::Approx(0.3125).epsilon(1e-10));
    CHECK(pi.pi(3) == doctest::Approx(0.3125).epsilon(1e-10));
  }
  SUBCASE("agrees with the dense linear-solve oracle") {
    Rng rng(17);
    for (int rep = 0; rep < 10; ++rep) {
      auto m = random_model(complete_graph(7), 0.15, 0.85, rng);
      auto chain = canonical_markov(m);
      auto pi = stationary(chain);
      CHECK((pi.pi - stationary_dense_oracle(chain.s)).lpNorm<Eigen::Infinity>() <= 1e-9);
    }
  }
  SUBCASE("non-convergence carries the final residual") {
    Eigen::Vector3d alpha(1, 2, 3);  // non-uniform fixed point, unreachable tolerance
    auto chain = canonical_markov(btl_model(alpha, complete_graph(3)));
    try {
      stationary(chain, 1e-18, 3);
      FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
      CHECK(e.residual > 0.0);
    }
  }
  SUBCASE("fixed point does not depend on d") {
    auto cy = cyclic_model(3, 0.1);
    auto pi_n = stationary(canonical_markov(cy, 3.0)).pi;
    auto pi_2n = stationary(canonical_markov(cy, 6.0)).pi;
    CHECK((pi_n - pi_2n).lpNorm<Eigen::Infinity>() <= 1e-10);

    auto un = uniform_model(complete_graph(8));
    CHECK((stationary(canonical_markov(un, 8.0)).pi - stationary(canonical_markov(un, 16.0)).pi)
              .lpNorm<Eigen::Infinity>() <= 1e-10);

    Eigen::VectorXd alpha(4);
    alpha << 1, 2, 3, 4;
    auto bt = btl_model(alpha, complete_graph(4));
    CHECK((stationary(canonical_markov(bt, 8.0)).pi - stationary(canonical_markov(bt, 16.0)).pi)
              .lpNorm<Eigen::Infinity>() <= 1e-10);
  }
}

TEST_CASE("principal ratio") {
  auto u = stationary(canonical_markov(uniform_model(complete_graph(6))));
  CHECK(principal_ratio(u) == doctest::Approx(1.0));

  Eigen::Vector2d a(1, 3);
  auto pi = stationary(canonical_markov(btl_model(a, complete_graph(2))));
  CHECK(principal_ratio(pi) == doctest::Approx(3.0).epsilon(1e-9));

  // bounded by 1/delta^2 on complete graphs (small sample; acceptance runs 1000)
  Rng rng(23);
  const double delta = 0.2;
  for (int rep = 0; rep < 50; ++rep) {
    auto m = random_model(complete_graph(8), delta / (1 + delta), 1 / (1 + delta), rng);
    auto p = stationary(canonical_markov(m, 16.0));
    CHECK(principal_ratio(p) <= 1.0 / (delta * delta) + 1e-9);
  }

  StationaryDistribution degenerate{Eigen::Vector2d(1.0, 0.0), 0.0};
  CHECK_THROWS_AS(principal_ratio(degenerate), DegenerateDistributionError);
}

TEST_CASE("btl principal ratio equals the score condition number") {
  Rng rng(29);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 4 + static_cast<int>(rng.below(5));
    Eigen::VectorXd alpha(n);
    for (int i = 0; i < n; ++i) alpha(i) = rng.uniform(0.3, 3.0);
    auto pi = stationary(canonical_markov(btl_model(alpha, complete_graph(n))));
    CHECK(principal_ratio(pi) ==
          doctest::Approx(alpha.maxCoeff() / alpha.minCoeff()).epsilon(1e-8));
  }
}

TEST_CASE("dtm second singular value") {
  const int n = 8;
  auto chain = canonical_markov(uniform_model(complete_graph(n)), 2.0 * n);
  auto pi = stationary(chain);
  auto spec = dtm_sigma2(chain, pi);
  CHECK(spec.sigma2 == doctest::Approx(0.75).epsilon(1e-10));
  CHECK(spec.residual_norm == doctest::Approx(spec.sigma2).epsilon(1e-10));

  Rng rng(31);
  for (int rep = 0; rep < 10; ++rep) {
    auto m = random_model(complete_graph(7), 0.25, 0.75, rng);
    const double delta = dynamic_range(m);
    auto c = canonical_markov(m, 14.0);
    auto p = stationary(c);
    auto s = dtm_sigma2(c, p);
    CHECK(s.sigma2 <= 1.0 - delta / (4.0 * (1.0 + delta)) + 1e-12);
    CHECK(s.sigma2 == doctest::Approx(s.residual_norm).epsilon(1e-10));
    CHECK(s.sigma2 < 1.0);
  }
}

TEST_CASE("dtm edge expansion") {
  const int n = 4;
  auto chain = canonical_markov(uniform_model(complete_graph(n)), 2.0 * n);
  auto pi = stationary(chain);
  CHECK(dtm_edge_expansion(chain, pi) == doctest::Approx(1.0 / 8.0).epsilon(1e-12));

  Rng rng(37);
  for (int rep = 0; rep < 8; ++rep) {
    auto m = random_model(complete_graph(6), 0.3, 0.7, rng);
    const double delta = dynamic_range(m);
    auto c = canonical_markov(m, 12.0);
    auto p = stationary(c);
    const double phi = dtm_edge_expansion(c, p);
    CHECK(phi >= delta * delta * delta / (4.0 * (1.0 + delta)) - 1e-12);
    // Cheeger consistency
    CHECK(dtm_sigma2(c, p).sigma2 <= 1.0 - phi * phi / 4.0 + 1e-12);
  }

  auto big = canonical_markov(uniform_model(complete_graph(23)));
  auto bigpi = stationary(big);
  CHECK_THROWS_AS(dtm_edge_expansion(big, bigpi), SizeLimitError);
}

TEST_CASE("separation distance") {
  SUBCASE("zero on btl models") {
    Eigen::VectorXd alpha(6);
    alpha << 1, 2, 3, 1.5, 2.5, 0.7;
    auto m = btl_model(alpha, complete_graph(6));
    auto pi = stationary(canonical_markov(m), 1e-12);
    CHECK(separation(m, pi.pi).d_frob <= 1e-8);
  }
  SUBCASE("cyclic model closed form") {
    auto m = cyclic_model(3, 0.1);
    auto pi = stationary(canonical_markov(m));
    CHECK(separation(m, pi.pi).d_frob ==
          doctest::Approx(std::sqrt(6.0 / 225.0)).epsilon(1e-9));
  }
  SUBCASE("lower-bound closed form, direct evaluation") {
    auto m = lower_bound_model(4, 0.25, {0, 1});
    auto pi = stationary(canonical_markov(m));
    const auto sep = separation(m, pi.pi);
    CHECK(sep.d_frob * sep.d_frob ==
          doctest::Approx(lower_bound_separation_squared(4, 0.25)).epsilon(1e-12));
  }
}

TEST_CASE("weighted frobenius decomposition") {
  Rng rng(41);
  SUBCASE("btl models have vanishing components") {
    Eigen::VectorXd alpha(5);
    alpha << 1, 2, 0.5, 1.5, 3;
    auto m = btl_model(alpha, complete_graph(5));
    auto pi = stationary(canonical_markov(m), 1e-12).pi;
    auto rd = residual_decomposition(m, pi);
    CHECK(rd.rev <= 1e-16);
    CHECK(rd.skew <= 1e-16);
  }
  SUBCASE("cyclic model is purely a reversibility failure") {
    auto m = cyclic_model(3, 0.1);
    auto pi = stationary(canonical_markov(m)).pi;
    auto rd = residual_decomposition(m, pi);
    CHECK(rd.skew <= 1e-20);
    CHECK(rd.rev == doctest::Approx(rd.total).epsilon(1e-10));
  }
  SUBCASE("identity holds for arbitrary positive pi") {
    for (int rep = 0; rep < 100; ++rep) {
      const int n = 3 + static_cast<int>(rng.below(8));
      auto g = rep % 3 == 0 ? erdos_renyi(n, 0.7, 100 + rep) : complete_graph(n);
      auto m = random_model(g, 0.05, 0.95, rng);
      auto pi = random_positive_pi(n, rng);
      auto rd = residual_decomposition(m, pi);
      CHECK(std::abs(rd.total - rd.rev - rd.skew) <= 1e-10 * std::max(rd.total, 1e-30));
    }
  }
  SUBCASE("separation vanishes iff both components vanish") {
    for (int rep = 0; rep < 20; ++rep) {
      const int n = 4 + static_cast<int>(rng.below(4));
      auto m = random_model(complete_graph(n), 0.2, 0.8, rng);
      auto pi = stationary(canonical_markov(m), 1e-12).pi;
      auto rd = residual_decomposition(m, pi);
      auto sep = separation(m, pi);
      const bool sep_zero = sep.d_frob <= 1e-8;
      const bool comps_zero = rd.rev <= 1e-15 && rd.skew <= 1e-15;
      CHECK(sep_zero == comps_zero);
    }
  }
}

TEST_CASE("btl projection distance") {
  SUBCASE("btl input recovers itself") {
    Eigen::VectorXd alpha(4);
    alpha << 1, 2, 3, 4;
    auto m = btl_model(alpha, complete_graph(4));
    auto r = btl_distance(m, 0.2, 8, 1);
    CHECK(r.d_frob <= 1e-6);
  }
  SUBCASE("grid oracle on the 2-simplex") {
    Rng rng(43);
    for (int rep = 0; rep < 3; ++rep) {
      auto m = random_model(complete_graph(3), 0.25, 0.75, rng);
      auto r = btl_distance(m, 0.2, 20, 7);
      // brute force over normalized scores with step 0.005
      double best = std::numeric_limits<double>::infinity();
      const double step = 0.005;
      for (double x = step; x < 1.0; x += step) {
        for (double y = step; x + y < 1.0; y += step) {
          const double z = 1.0 - x - y;
          const double v[3] = {x, y, z};
          const double ratio = std::max({x, y, z}) / std::min({x, y, z});
          if (ratio > 1.0 / 0.2) continue;
          double f = 0.0;
          for (auto [i, j] : m.graph().directed_edges()) {
            const double pred = v[j] / (v[i] + v[j]);
            f += (m.p(i, j) - pred) * (m.p(i, j) - pred);
          }
          best = std::min(best, f);
        }
      }
      CHECK(std::abs(r.d_frob - std::sqrt(best)) <= 0.02 * std::sqrt(best));
    }
  }
}

TEST_SUITE_END();
