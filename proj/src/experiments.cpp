#include "btltest/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>

#include "btltest/rng.hpp"

namespace btltest {

namespace {

template <typename T>
std::vector<T> parse_list(const std::string& s) {
  std::vector<T> out;
  for (const auto& tok : split(s, ',')) {
    if (tok.empty()) continue;
    if constexpr (std::is_same_v<T, double>) {
      out.push_back(std::stod(tok));
    } else {
      out.push_back(static_cast<T>(std::stol(tok)));
    }
  }
  return out;
}

std::vector<int> permutation(int m, Rng& rng) {
  std::vector<int> p(static_cast<std::size_t>(m));
  std::iota(p.begin(), p.end(), 0);
  for (int i = m - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i + 1)));
    std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
  }
  return p;
}

Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> uniform_k_matrix(const ObservationGraph& g,
                                                                     long k) {
  Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> km =
      Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>::Zero(g.n(), g.n());
  for (auto [i, j] : g.directed_edges()) km(i, j) = k;
  return km;
}

// Restriction of a complete-graph model to an induced subgraph's edges.
PairwiseModel restrict_model(const PairwiseModel& full, const ObservationGraph& g) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(g.n(), g.n());
  for (int i = 0; i < g.n(); ++i) p(i, i) = 0.5;
  for (auto [i, j] : g.directed_edges()) p(i, j) = full.p(i, j);
  return PairwiseModel(g, std::move(p));
}

ObservationGraph family_graph(const std::string& family, int n, std::uint64_t seed) {
  if (family == "complete") return complete_graph(n);
  if (family == "erdos_renyi") {
    const double logn = std::log(static_cast<double>(n));
    const double p = std::min(1.0, logn * logn / n);  // np = log^2 n
    return erdos_renyi(n, p, seed);
  }
  throw DomainError("unknown graph family: " + family);
}

}  // namespace

ExperimentSpec ExperimentSpec::from_kv(const std::map<std::string, std::string>& kv) {
  ExperimentSpec spec;
  auto get = [&kv](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };
  if (auto v = get("experiment")) spec.kind = *v;
  if (spec.kind.empty()) throw ValidationError("experiment spec needs an experiment= key");
  if (auto v = get("n_list")) spec.n_list = parse_list<int>(*v);
  if (auto v = get("k_list")) spec.k_list = parse_list<long>(*v);
  if (auto v = get("eta_list")) spec.eta_list = parse_list<double>(*v);
  if (auto v = get("graph")) spec.graph_family = *v;
  if (auto v = get("replicates")) spec.replicates = std::stoi(*v);
  if (auto v = get("k")) spec.k = std::stol(*v);
  if (auto v = get("pool")) spec.pool = std::stoi(*v);
  if (auto v = get("reps")) spec.reps = std::stoi(*v);
  if (auto v = get("perm_models")) spec.perm_models = std::stoi(*v);
  if (auto v = get("h1_margin")) spec.h1_margin = std::stod(*v);
  if (auto v = get("q")) spec.q = std::stod(*v);
  if (auto v = get("model")) spec.model = *v;
  if (auto v = get("l2_n")) spec.l2_n = std::stoi(*v);
  if (auto v = get("data")) spec.data_path = *v;
  if (auto v = get("windows")) spec.windows = parse_list<int>(*v);
  if (auto v = get("top_m")) spec.top_m = std::stoi(*v);
  if (auto v = get("seed")) spec.seed = std::stoull(*v);
  if (auto v = get("out")) spec.out = *v;
  if (auto v = get("paper_scale"); v && (*v == "1" || *v == "true")) spec.apply_paper_scale();
  if (spec.replicates < 1) throw ValidationError("replicates must be >= 1");
  return spec;
}

void ExperimentSpec::apply_paper_scale() {
  if (kind == "minimax_grid") {
    n_list.clear();
    eta_list.clear();
    for (int i = 0; i < 12; ++i) {
      const double t = static_cast<double>(i) / 11.0;
      int n = static_cast<int>(std::lround(32.0 + t * (128.0 - 32.0)));
      n_list.push_back(n - n % 2);  // lower-bound family needs even n
      eta_list.push_back(0.16 + t * (0.32 - 0.16));
    }
    k = 12;
    replicates = 250;
  } else if (kind == "threshold_scaling") {
    n_list = {10, 25, 40, 55, 70, 85, 100};
    k_list = {12, 24, 36};
    pool = 200;
    reps = 200;
    perm_models = 200;
  }
}

RiskGrid minimax_grid(const ExperimentSpec& spec) {
  if (spec.n_list.empty() || spec.eta_list.empty())
    throw ValidationError("minimax_grid needs n_list and eta_list");
  RiskGrid grid;
  for (std::size_t ni = 0; ni < spec.n_list.size(); ++ni) {
    const int n = spec.n_list[ni];
    if (n % 2 != 0) throw InvalidSizeError("minimax_grid needs even n");
    const auto graph = complete_graph(n);
    const auto h0_model = uniform_model(graph);
    for (std::size_t ei = 0; ei < spec.eta_list.size(); ++ei) {
      const double eta = spec.eta_list[ei];
      RiskCell cell;
      cell.n = n;
      cell.eta = eta;
      cell.k = spec.k;
      cell.replicates = spec.replicates;
      const double threshold = eta * eta / n;
      KahanSum mean_nT;
      for (int r = 0; r < spec.replicates; ++r) {
        const auto tags = [&](std::uint64_t side) {
          return derive_seed(spec.seed, {ni, ei, static_cast<std::uint64_t>(r), side});
        };
        {
          auto data = sample_dataset(h0_model, spec.k, tags(0));
          auto ec = empirical_chain(data);
          if (test_statistic(data, ec.pi_hat.pi) >= threshold) ++cell.type1_count;
        }
        {
          Rng theta_rng(tags(1));
          auto model = lower_bound_model(n, eta, permutation(n / 2, theta_rng));
          auto data = sample_dataset(model, spec.k, tags(2));
          auto ec = empirical_chain(data);
          const double t = test_statistic(data, ec.pi_hat.pi);
          mean_nT.add(n * t);
          if (t < threshold) ++cell.type2_count;
        }
      }
      cell.mean_nT_h1 = mean_nT.value() / spec.replicates;
      grid.cells.push_back(cell);
    }
  }
  return grid;
}

void write_csv(const RiskGrid& grid, std::ostream& os) {
  os.precision(12);
  os << "n,eta,k,replicates,type1,type2,risk,mean_nT_h1\n";
  for (const auto& c : grid.cells) {
    os << c.n << "," << c.eta << "," << c.k << "," << c.replicates << "," << c.type1() << ","
       << c.type2() << "," << c.risk() << "," << c.mean_nT_h1 << "\n";
  }
}

std::vector<ThresholdRow> threshold_scaling(const ExperimentSpec& spec) {
  if (spec.n_list.empty() || spec.k_list.empty())
    throw ValidationError("threshold_scaling needs n_list and k_list");
  std::vector<std::string> families;
  if (spec.graph_family == "both") {
    families = {"complete", "erdos_renyi"};
  } else {
    families = {spec.graph_family};
  }
  TestConfig config;
  config.model_pool = spec.pool;
  config.shuffle_reps = spec.reps;
  config.q = spec.q;

  std::vector<ThresholdRow> rows;
  for (std::size_t fi = 0; fi < families.size(); ++fi) {
    for (std::size_t ni = 0; ni < spec.n_list.size(); ++ni) {
      const int n = spec.n_list[ni];
      // one graph draw per (family, n), shared across the k column
      const auto graph = family_graph(families[fi], n, derive_seed(spec.seed, {fi, ni, 90001}));
      for (std::size_t ki = 0; ki < spec.k_list.size(); ++ki) {
        const long k = spec.k_list[ki];
        const auto cell_seed = derive_seed(spec.seed, {fi, ni, ki});
        const auto km = uniform_k_matrix(graph, k);

        ThresholdRow row;
        row.family = families[fi];
        row.n = n;
        row.k = k;
        const auto pool_seed = derive_seed(cell_seed, {1});
        row.gamma0 = quantile_threshold(graph, km, config, pool_seed);

        // gamma1/gamma2: permutation protocol on the same pool datasets the
        // quantile threshold used, averaged over models
        KahanSum g1, g2;
        for (int m = 0; m < spec.perm_models; ++m) {
          auto data = pool_dataset(graph, km, config, pool_seed, m);
          auto pt = permutation_threshold(data, config,
                                          derive_seed(cell_seed, {4, static_cast<std::uint64_t>(m)}));
          g1.add(pt.gamma1);
          g2.add(pt.gamma2);
        }
        row.gamma1 = g1.value() / spec.perm_models;
        row.gamma2 = g2.value() / spec.perm_models;

        // statistic distribution under the constant-margin alternative
        auto h1_model = restrict_model(constant_margin_model(n, spec.h1_margin), graph);
        std::vector<double> h1_stats;
        h1_stats.reserve(static_cast<std::size_t>(spec.reps));
        for (int r = 0; r < spec.reps; ++r) {
          auto data = sample_dataset(h1_model, km,
                                     derive_seed(cell_seed, {5, static_cast<std::uint64_t>(r)}));
          auto ec = empirical_chain(data);
          h1_stats.push_back(scaled_statistic(data, test_statistic(data, ec.pi_hat.pi)).value);
        }
        row.h1_median = median(h1_stats);
        row.h1_q05 = quantile(h1_stats, 0.05);
        row.h1_q95 = quantile(h1_stats, 0.95);
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

void write_csv(const std::vector<ThresholdRow>& rows, std::ostream& os) {
  os.precision(12);
  os << "family,n,k,gamma0,gamma1,gamma2,h1_median,h1_q05,h1_q95\n";
  for (const auto& r : rows) {
    os << r.family << "," << r.n << "," << r.k << "," << r.gamma0 << "," << r.gamma1 << ","
       << r.gamma2 << "," << r.h1_median << "," << r.h1_q05 << "," << r.h1_q95 << "\n";
  }
}

std::vector<L2Row> l2_error_scaling(const ExperimentSpec& spec) {
  if (spec.k_list.empty()) throw ValidationError("l2_error needs k_list");
  const int n = spec.l2_n;
  const auto graph = complete_graph(n);

  std::vector<std::pair<std::string, PairwiseModel>> models;
  if (spec.model == "btl" || spec.model == "both") {
    Eigen::VectorXd alpha(n);
    for (int i = 0; i < n; ++i) alpha(i) = 1.0 + static_cast<double>(i) / (n - 1);
    models.emplace_back("btl", btl_model(alpha, graph));
  }
  if (spec.model == "cyclic" || spec.model == "both") {
    models.emplace_back("cyclic", cyclic_model(n, 0.1));
  }
  if (models.empty()) throw ValidationError("l2_error model must be btl, cyclic, or both");

  std::vector<L2Row> rows;
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const auto& [name, model] = models[mi];
    const auto pi_true = stationary(canonical_markov(model), 1e-12, 1'000'000).pi;
    for (std::size_t ki = 0; ki < spec.k_list.size(); ++ki) {
      const long k = spec.k_list[ki];
      KahanSum err;
      for (int r = 0; r < spec.replicates; ++r) {
        auto data = sample_dataset(model, k,
                                   derive_seed(spec.seed, {mi, ki, static_cast<std::uint64_t>(r)}));
        auto ec = empirical_chain(data);
        err.add((ec.pi_hat.pi - pi_true).norm());
      }
      rows.push_back({name, k, err.value() / spec.replicates});
    }
  }
  return rows;
}

void write_csv(const std::vector<L2Row>& rows, std::ostream& os) {
  os.precision(12);
  os << "model,k,mean_l2_error\n";
  for (const auto& r : rows) os << r.model << "," << r.k << "," << r.mean_error << "\n";
}

double l2_slope(const std::vector<L2Row>& rows, const std::string& model) {
  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    if (r.model != model) continue;
    xs.push_back(std::log(static_cast<double>(r.k)));
    ys.push_back(std::log(r.mean_error));
  }
  if (xs.size() < 2) throw DomainError("need at least two k values for a slope");
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    num += (xs[i] - mx) * (ys[i] - my);
    den += (xs[i] - mx) * (xs[i] - mx);
  }
  return num / den;
}

std::vector<StabilityRow> stability_decay(const std::vector<int>& n_list) {
  std::vector<StabilityRow> rows;
  for (int n : n_list) {
    StabilityRow row;
    row.n = n;
    try {
      auto model = stability_model(n);
      auto pi = stationary(canonical_markov(model), 1e-12, 1'000'000).pi;
      auto tau = borda_counts(model);
      auto sep = separation(model, pi);
      row.tau1 = tau(0);
      row.tau2 = tau(1);
      row.pi1 = pi(0);
      row.pi2 = pi(1);
      row.d_frob = sep.d_frob;
      row.eps = sep.eps;
      row.sqrt_n_eps = std::sqrt(static_cast<double>(n)) * sep.eps;
      const bool borda_prefers_1 = tau(0) > tau(1);
      const bool btl_prefers_1 = pi(0) > pi(1);
      row.orders_opposite = borda_prefers_1 != btl_prefers_1;
    } catch (const Error& e) {
      row.skipped = true;
      row.note = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_csv(const std::vector<StabilityRow>& rows, std::ostream& os) {
  os.precision(12);
  os << "n,skipped,note,tau1,tau2,pi1,pi2,D,eps,sqrt_n_eps,orders_opposite\n";
  for (const auto& r : rows) {
    os << r.n << "," << (r.skipped ? 1 : 0) << "," << r.note << "," << r.tau1 << "," << r.tau2
       << "," << r.pi1 << "," << r.pi2 << "," << r.d_frob << "," << r.eps << "," << r.sqrt_n_eps
       << "," << (r.orders_opposite ? 1 : 0) << "\n";
  }
}

bool stability_identity_holds(const PairwiseModel& model, const Eigen::VectorXd& pi, double tol) {
  const int n = model.n();
  // residual entries M_ik / (pi_i + pi_k) with M = Pi P + P Pi - 1 pi^T
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      if (i != k) f(i, k) = ((pi(i) + pi(k)) * model.p(i, k) - pi(k)) / (pi(i) + pi(k));
  auto tau = borda_counts(model);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double rhs = f.row(j).sum() - f.row(i).sum();
      const double lhs = tau(i) - tau(j);
      const bool pi_order = pi(i) >= pi(j);
      // skip knife-edge cases where the inequality is within tolerance of equality
      if (std::abs(lhs - rhs) <= tol) continue;
      if (pi_order != (lhs >= rhs)) return false;
    }
  }
  return true;
}

std::vector<WindowReport> real_data_run(const MatchLog& log, const ExperimentSpec& spec,
                                        const TestConfig& config) {
  if (log.records.empty()) throw ValidationError("empty match log");
  int max_year = std::numeric_limits<int>::min();
  for (const auto& rec : log.records) {
    if (!rec.date) throw ValidationError("real-data protocol requires dated matches");
    max_year = std::max(max_year, year_of(*rec.date));
  }
  std::vector<WindowReport> out;
  for (std::size_t wi = 0; wi < spec.windows.size(); ++wi) {
    const int t = spec.windows[wi];
    WindowReport wr;
    wr.window_years = t;
    wr.year_from = max_year - t + 1;
    MatchLog window;
    for (const auto& rec : log.records)
      if (year_of(*rec.date) >= wr.year_from) window.records.push_back(rec);
    if (window.records.empty()) {
      wr.skipped = true;
      wr.reason = "no matches in window";
      out.push_back(std::move(wr));
      continue;
    }
    // top-m teams by total match count; ties broken by first appearance
    std::vector<std::string> order;
    std::map<std::string, long> counts;
    for (const auto& rec : window.records) {
      for (const auto& team : {rec.home, rec.away}) {
        if (!counts.count(team)) order.push_back(team);
        ++counts[team];
      }
    }
    std::vector<std::pair<long, std::size_t>> ranked;
    for (std::size_t i = 0; i < order.size(); ++i) ranked.emplace_back(-counts[order[i]], i);
    std::sort(ranked.begin(), ranked.end());
    std::set<std::string> keep;
    for (std::size_t i = 0; i < ranked.size() && i < static_cast<std::size_t>(spec.top_m); ++i)
      keep.insert(order[ranked[i].second]);

    MatchLog filtered;
    for (const auto& rec : window.records)
      if (keep.count(rec.home) && keep.count(rec.away)) filtered.records.push_back(rec);

    // keep only pairs observed in both orientations
    std::map<std::pair<std::string, std::string>, long> oriented;
    for (const auto& rec : filtered.records) ++oriented[{rec.home, rec.away}];
    MatchLog mutual;
    for (const auto& rec : filtered.records)
      if (oriented.count({rec.away, rec.home})) mutual.records.push_back(rec);

    try {
      auto data = matches_to_dataset(mutual);
      if (data.n() < static_cast<int>(keep.size())) {
        wr.skipped = true;
        wr.reason = "teams dropped when restricting to mutually observed pairs";
        out.push_back(std::move(wr));
        continue;
      }
      wr.n_teams = data.n();
      wr.matches = data.total_observations();
      wr.report = run_test(data, ThresholdKind::All, config, derive_seed(spec.seed, {wi}));
    } catch (const Error& e) {
      wr.skipped = true;
      wr.reason = e.what();
    }
    out.push_back(std::move(wr));
  }
  return out;
}

void write_csv(const std::vector<WindowReport>& rows, std::ostream& os) {
  os.precision(12);
  os << "window_years,year_from,n,matches,skipped,reason," << TestReport::csv_header() << "\n";
  for (const auto& r : rows) {
    std::string reason = r.reason;
    std::replace(reason.begin(), reason.end(), ',', ';');
    os << r.window_years << "," << r.year_from << "," << r.n_teams << "," << r.matches << ","
       << (r.skipped ? 1 : 0) << "," << reason << ",";
    if (r.skipped) {
      os << std::string(17, ',') << "\n";  // pad to the report's column count
    } else {
      os << r.report.csv_row() << "\n";
    }
  }
}

void run_experiment(const ExperimentSpec& spec) {
  if (spec.out.empty()) throw ValidationError("experiment spec needs an out= path");
  std::ofstream os(spec.out);
  if (!os) throw Error("cannot open " + spec.out + " for writing");
  if (spec.kind == "minimax_grid") {
    write_csv(minimax_grid(spec), os);
  } else if (spec.kind == "threshold_scaling") {
    write_csv(threshold_scaling(spec), os);
  } else if (spec.kind == "l2_error") {
    write_csv(l2_error_scaling(spec), os);
  } else if (spec.kind == "stability_decay") {
    write_csv(stability_decay(spec.n_list), os);
  } else if (spec.kind == "real_data") {
    if (spec.data_path.empty()) throw ValidationError("real_data needs data=<path>");
    std::ifstream f(spec.data_path);
    if (!f) throw Error("cannot open " + spec.data_path);
    auto log = read_match_log(f, true);
    TestConfig config;
    config.model_pool = spec.pool;
    config.shuffle_reps = spec.reps;
    config.q = spec.q;
    write_csv(real_data_run(log, spec, config), os);
  } else {
    throw ValidationError("unknown experiment kind: " + spec.kind);
  }
}

}  // namespace btltest
