#include "btltest/inference.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

#include "btltest/rng.hpp"

namespace btltest {

EmpiricalChain empirical_chain(const ComparisonDataset& data, std::optional<double> d_override,
                               double tol, long max_iter) {
  const int n = data.n();
  const auto ds = degree_stats(data.graph());
  const double d = d_override.value_or(2.0 * ds.d_max);
  if (!(d > 0.0)) throw DomainError("empirical_chain requires d > 0");
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    KahanSum row;
    for (int j : data.graph().neighbors(i)) {
      if (data.k(i, j) > 0) {
        s(i, j) = static_cast<double>(data.z(i, j)) / (static_cast<double>(data.k(i, j)) * d);
        row.add(static_cast<double>(data.z(i, j)) / static_cast<double>(data.k(i, j)));
      }
    }
    s(i, i) = 1.0 - row.value() / d;
    if (s(i, i) < -1e-12)
      throw LazinessError("empirical chain diagonal went negative; d too small");
  }
  MarkovChain chain{std::move(s), d, data.graph()};
  auto pi = stationary(chain, tol, max_iter);
  return {std::move(chain), std::move(pi)};
}

double test_statistic(const ComparisonDataset& data, const Eigen::VectorXd& pi_hat) {
  KahanSum t;
  for (auto [i, j] : data.graph().directed_edges()) {
    const long k = data.k(i, j);
    if (k <= 1) continue;
    const double z = static_cast<double>(data.z(i, j));
    const double kd = static_cast<double>(k);
    const double sum_pi = pi_hat(i) + pi_hat(j);
    t.add(sum_pi * sum_pi * z * (z - 1.0) / (kd * (kd - 1.0)) + pi_hat(j) * pi_hat(j) -
          2.0 * pi_hat(j) * sum_pi * z / kd);
  }
  return t.value();
}

ScaledStatistic scaled_statistic(const ComparisonDataset& data, double t) {
  const double n = data.n();
  if (data.has_uniform_k() && data.uniform_k() >= 1)
    return {n * static_cast<double>(data.uniform_k()) * t, "nk"};
  return {n * t, "n"};
}

double analytic_threshold(int n, long k, int d_max, const Eigen::VectorXd& pi_hat,
                          const TestConfig& config) {
  if (k < 1) throw DomainError("analytic threshold requires k >= 1");
  const double pimax = pi_hat.lpNorm<Eigen::Infinity>();
  const double kd = static_cast<double>(k);
  return 4.0 * std::sqrt(static_cast<double>(n) * d_max) * pimax * pimax / kd +
         config.c_alpha_plus_gamma * n * pimax * pimax / kd;
}

ComparisonDataset pool_dataset(const ObservationGraph& graph,
                               const Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>& k,
                               const TestConfig& config, std::uint64_t seed, int m) {
  Rng rng(derive_seed(seed, {0, static_cast<std::uint64_t>(m)}));
  Eigen::VectorXd alpha(graph.n());
  for (int i = 0; i < graph.n(); ++i) alpha(i) = config.score_offset + rng.uniform01();
  auto model = btl_model(alpha, graph);
  return sample_dataset(model, k, derive_seed(seed, {1, static_cast<std::uint64_t>(m)}));
}

double quantile_threshold(const ObservationGraph& graph,
                          const Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>& k,
                          const TestConfig& config, std::uint64_t seed) {
  if (config.model_pool < 1) throw DomainError("model pool must be at least 1");
  std::vector<double> stats;
  stats.reserve(static_cast<std::size_t>(config.model_pool));
  for (int m = 0; m < config.model_pool; ++m) {
    auto data = pool_dataset(graph, k, config, seed, m);
    auto chain = empirical_chain(data, std::nullopt, config.stationary_tol,
                                 config.stationary_max_iter);
    const double t = test_statistic(data, chain.pi_hat.pi);
    stats.push_back(scaled_statistic(data, t).value);
  }
  return quantile(std::move(stats), config.q);
}

ComparisonDataset skew_shuffle(const ComparisonDataset& data, std::uint64_t seed) {
  ComparisonDataset out = data;
  for (auto [i, j] : data.graph().undirected_edges()) {
    const long kij = data.k(i, j);
    const long kji = data.k(j, i);
    const long total = kij + kji;
    if (total == 0) continue;
    // pooled wins by j across both orientations
    long wins_j = data.z(i, j) + (kji - data.z(j, i));
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)}));
    // deal kij outcomes back to orientation (i, j) without replacement
    long zij = 0;
    long remaining = total;
    long remaining_wins = wins_j;
    for (long m = 0; m < kij; ++m) {
      if (rng.below(static_cast<std::uint64_t>(remaining)) <
          static_cast<std::uint64_t>(remaining_wins)) {
        ++zij;
        --remaining_wins;
      }
      --remaining;
    }
    const long zji = kji - (wins_j - zij);  // remaining j-wins become losses for i in (j, i)
    out.set_counts(i, j, kij, zij);
    out.set_counts(j, i, kji, zji);
  }
  return out;
}

CycleShuffleResult cycle_shuffle(const ComparisonDataset& data, int n_cycles, std::uint64_t seed,
                                 int step_budget_factor) {
  if (n_cycles < 0) throw DomainError("cycle count must be nonnegative");
  const int n = data.n();
  CycleShuffleResult result{data, 0, 0, 0};
  if (data.total_observations() == 0) throw DomainError("cycle_shuffle needs a non-empty dataset");
  ComparisonDataset& work = result.data;

  // Per-row observation totals are fixed: a reversal flips outcome values in
  // place, it does not relocate observations. Moving observations across
  // buckets would let the per-bucket design counts diffuse, and the shuffle
  // distribution then no longer matches the null data law.
  std::vector<long> row_total(static_cast<std::size_t>(n), 0);
  for (auto [i, j] : data.graph().directed_edges()) row_total[i] += work.k(i, j);

  Rng rng(derive_seed(seed, {0x9c5eULL}));
  const long budget = static_cast<long>(step_budget_factor) * n;
  std::vector<std::pair<int, int>> path;
  std::map<std::pair<int, int>, long> delta;

  for (int c = 0; c < n_cycles; ++c) {
    path.clear();
    const int start = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    int cur = start;
    bool closed = false;
    bool repeated_edge = false;
    for (long step = 0; step < budget; ++step) {
      if (row_total[cur] <= 0) break;
      long r = static_cast<long>(rng.below(static_cast<std::uint64_t>(row_total[cur])));
      int chosen = -1;
      for (int j : work.graph().neighbors(cur)) {
        if (r < work.k(cur, j)) {
          chosen = j;
          break;
        }
        r -= work.k(cur, j);
      }
      if (chosen < 0) break;  // bookkeeping mismatch guard; cannot normally happen
      const bool win = rng.below(static_cast<std::uint64_t>(work.k(cur, chosen))) <
                       static_cast<std::uint64_t>(work.z(cur, chosen));
      if (!win) continue;  // the second agent lost; walk stays put
      for (auto [a, b] : path) {
        if (a == cur && b == chosen) {
          repeated_edge = true;
          break;
        }
      }
      if (repeated_edge) break;
      path.emplace_back(cur, chosen);
      cur = chosen;
      if (cur == start) {
        closed = true;
        break;
      }
    }
    if (!closed || repeated_edge) {
      ++result.attempts_abandoned;
      continue;
    }

    // Metropolis filter for the reversal. The walk finds a cycle with
    // probability proportional to the product of forward win counts; this
    // cancels against the bucket-uniform weight ratio except for a residual
    // loss-count factor, accumulated in log space together with the reverse
    // proposal.
    delta.clear();
    double log_r = 0.0;
    bool feasible = true;
    for (auto [a, b] : path) {
      const long zab = work.z(a, b) + delta[{a, b}];
      const long zba = work.z(b, a) + delta[{b, a}];
      const long kab = work.k(a, b);
      const long kba = work.k(b, a);
      if (zab < 1 || zba >= kba) {
        feasible = false;
        break;
      }
      // single-flip weight ratio of prod C(k, z)
      log_r += std::log(static_cast<double>(zab)) -
               std::log(static_cast<double>(kab - zab + 1)) +
               std::log(static_cast<double>(kba - zba)) -
               std::log(static_cast<double>(zba + 1));
      delta[{a, b}] -= 1;
      delta[{b, a}] += 1;
    }
    if (feasible) {
      for (auto [a, b] : path) {
        log_r -= std::log(static_cast<double>(work.z(a, b)));           // forward proposal
        log_r += std::log(static_cast<double>(work.z(b, a) + delta[{b, a}]));  // reverse proposal
      }
    }
    if (!feasible || (log_r < 0.0 && rng.uniform01() >= std::exp(log_r))) {
      ++result.proposals_rejected;
      continue;
    }
    for (auto [a, b] : path) {
      work.set_counts(a, b, work.k(a, b), work.z(a, b) - 1);
      work.set_counts(b, a, work.k(b, a), work.z(b, a) + 1);
    }
    ++result.cycles_completed;
  }
  return result;
}

PermutationThresholds permutation_threshold(const ComparisonDataset& data,
                                            const TestConfig& config, std::uint64_t seed) {
  if (config.shuffle_reps < 1) throw DomainError("need at least one shuffle repetition");
  const int cycles = config.cycles_per_rep < 0 ? data.n() : config.cycles_per_rep;
  std::vector<double> stats1, stats2;
  stats1.reserve(static_cast<std::size_t>(config.shuffle_reps));
  stats2.reserve(static_cast<std::size_t>(config.shuffle_reps));
  // One skew shuffle already samples uniformly from each pair's pooled
  // outcomes, so independent shuffles of the original data give gamma1.
  for (int r = 0; r < config.shuffle_reps; ++r) {
    auto d1 = skew_shuffle(data, derive_seed(seed, {1, static_cast<std::uint64_t>(r)}));
    auto chain = empirical_chain(d1, std::nullopt, config.stationary_tol,
                                 config.stationary_max_iter);
    stats1.push_back(scaled_statistic(d1, test_statistic(d1, chain.pi_hat.pi)).value);
  }
  // Cycle reversal only takes a local step, so gamma2 runs the combined
  // shuffle as a chain, recalculating the statistic after every sweep; the
  // recorded values sample the randomization distribution the sweeps mix
  // into.
  ComparisonDataset state = data;
  for (int r = 0; r < config.shuffle_reps; ++r) {
    const auto rep = static_cast<std::uint64_t>(r);
    auto skewed = skew_shuffle(state, derive_seed(seed, {2, rep}));
    auto shuffled = cycle_shuffle(skewed, cycles, derive_seed(seed, {3, rep}),
                                  config.cycle_step_budget_factor);
    state = std::move(shuffled.data);
    auto chain = empirical_chain(state, std::nullopt, config.stationary_tol,
                                 config.stationary_max_iter);
    stats2.push_back(scaled_statistic(state, test_statistic(state, chain.pi_hat.pi)).value);
  }
  return {quantile(std::move(stats1), config.q), quantile(std::move(stats2), config.q)};
}

namespace {

double plug_in_eps(const ComparisonDataset& data, const Eigen::VectorXd& pi_hat) {
  KahanSum d2;
  for (auto [i, j] : data.graph().directed_edges()) {
    if (data.k(i, j) < 1) continue;
    const double phat = static_cast<double>(data.z(i, j)) / static_cast<double>(data.k(i, j));
    const double r = (pi_hat(i) + pi_hat(j)) * phat - pi_hat(j);
    d2.add(r * r);
  }
  const double pimax = pi_hat.lpNorm<Eigen::Infinity>();
  if (!(pimax > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::sqrt(std::max(0.0, d2.value())) / (data.n() * pimax);
}

}  // namespace

TestReport run_test(const ComparisonDataset& data, ThresholdKind kind, const TestConfig& config,
                    std::uint64_t seed) {
  TestReport report;
  auto ec = empirical_chain(data, std::nullopt, config.stationary_tol,
                            config.stationary_max_iter);
  report.statistic = test_statistic(data, ec.pi_hat.pi);
  auto scaled = scaled_statistic(data, report.statistic);
  report.scaled_statistic = scaled.value;
  report.scale = scaled.scale;
  report.pi_hat = ec.pi_hat.pi;
  report.n = data.n();
  report.agents = data.agent_names();
  report.eps_hat = plug_in_eps(data, ec.pi_hat.pi);
  if (ec.pi_hat.pi.minCoeff() > 0.0) {
    report.h_pi = principal_ratio(ec.pi_hat);
    report.sigma2 = dtm_sigma2(ec.chain, ec.pi_hat).sigma2;
  } else {
    report.h_pi = std::numeric_limits<double>::quiet_NaN();
    report.sigma2 = std::numeric_limits<double>::quiet_NaN();
  }
  long kmin = std::numeric_limits<long>::max(), kmax = 0, ksum = 0, edges = 0;
  for (auto [i, j] : data.graph().directed_edges()) {
    kmin = std::min(kmin, data.k(i, j));
    kmax = std::max(kmax, data.k(i, j));
    ksum += data.k(i, j);
    ++edges;
  }
  report.k_min = edges ? kmin : 0;
  report.k_max = kmax;
  report.k_mean = edges ? static_cast<double>(ksum) / static_cast<double>(edges) : 0.0;

  const bool uniform = data.has_uniform_k();
  if (kind == ThresholdKind::Analytic || kind == ThresholdKind::All) {
    if (uniform && data.uniform_k() >= 1) {
      const auto ds = degree_stats(data.graph());
      report.analytic_t =
          analytic_threshold(data.n(), data.uniform_k(), ds.d_max, ec.pi_hat.pi, config);
      report.decision_analytic = decide(report.statistic, *report.analytic_t);
    } else if (kind == ThresholdKind::Analytic) {
      throw DomainError("analytic threshold requires uniform k; use a data-driven threshold");
    }
  }
  if (kind == ThresholdKind::Quantile || kind == ThresholdKind::All) {
    Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> km(data.n(), data.n());
    km.setZero();
    for (auto [i, j] : data.graph().directed_edges()) km(i, j) = data.k(i, j);
    report.gamma0 = quantile_threshold(data.graph(), km, config, derive_seed(seed, {100}));
    report.decision_gamma0 = decide(report.scaled_statistic, *report.gamma0);
  }
  if (kind == ThresholdKind::Permutation || kind == ThresholdKind::All) {
    auto pt = permutation_threshold(data, config, derive_seed(seed, {200}));
    report.gamma1 = pt.gamma1;
    report.gamma2 = pt.gamma2;
    report.decision_gamma1 = decide(report.scaled_statistic, pt.gamma1);
    report.decision_gamma2 = decide(report.scaled_statistic, pt.gamma2);
  }
  return report;
}

namespace {

void kv_line(std::ostream& os, const char* key, double v) { os << key << "=" << v << "\n"; }

}  // namespace

void TestReport::write_kv(std::ostream& os) const {
  os.precision(12);
  kv_line(os, "T", statistic);
  kv_line(os, "T_scaled", scaled_statistic);
  os << "scale=" << scale << "\n";
  if (analytic_t) kv_line(os, "threshold.analytic", *analytic_t);
  if (gamma0) kv_line(os, "threshold.gamma0", *gamma0);
  if (gamma1) kv_line(os, "threshold.gamma1", *gamma1);
  if (gamma2) kv_line(os, "threshold.gamma2", *gamma2);
  if (decision_analytic) os << "decision.analytic=" << to_string(*decision_analytic) << "\n";
  if (decision_gamma0) os << "decision.gamma0=" << to_string(*decision_gamma0) << "\n";
  if (decision_gamma1) os << "decision.gamma1=" << to_string(*decision_gamma1) << "\n";
  if (decision_gamma2) os << "decision.gamma2=" << to_string(*decision_gamma2) << "\n";
  kv_line(os, "diag.h_pi", h_pi);
  kv_line(os, "diag.sigma2", sigma2);
  kv_line(os, "diag.eps_hat", eps_hat);
  os << "diag.n=" << n << "\n";
  os << "diag.k_min=" << k_min << "\n";
  os << "diag.k_max=" << k_max << "\n";
  kv_line(os, "diag.k_mean", k_mean);
  for (std::size_t i = 0; i < agents.size(); ++i) os << "agent." << i << "=" << agents[i] << "\n";
  for (int i = 0; i < pi_hat.size(); ++i) os << "pi_hat." << i << "=" << pi_hat(i) << "\n";
}

std::string TestReport::csv_header() {
  return "n,k_min,k_max,k_mean,T,T_scaled,scale,analytic_t,gamma0,gamma1,gamma2,"
         "decision_analytic,decision_gamma0,decision_gamma1,decision_gamma2,h_pi,sigma2,eps_hat";
}

std::string TestReport::csv_row() const {
  std::ostringstream os;
  os.precision(12);
  auto opt = [&os](const std::optional<double>& v) {
    if (v) os << *v;
    os << ",";
  };
  auto optd = [&os](const std::optional<Decision>& v) {
    if (v) os << to_string(*v);
    os << ",";
  };
  os << n << "," << k_min << "," << k_max << "," << k_mean << "," << statistic << ","
     << scaled_statistic << "," << scale << ",";
  opt(analytic_t);
  opt(gamma0);
  opt(gamma1);
  opt(gamma2);
  optd(decision_analytic);
  optd(decision_gamma0);
  optd(decision_gamma1);
  optd(decision_gamma2);
  os << h_pi << "," << sigma2 << "," << eps_hat;
  return os.str();
}

}  // namespace btltest
