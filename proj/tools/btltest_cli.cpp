// Command-line surface: test / simulate / generate / diagnose.
// Exit codes: 0 = H0 retained, 2 = H1 declared, 1 = error.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "btltest/experiments.hpp"
#include "btltest/inference.hpp"
#include "btltest/io.hpp"
#include "btltest/rng.hpp"

namespace {

using namespace btltest;

ComparisonDataset load_from_arg(const std::string& path, bool drop_ties) {
  if (path == "-" || path.empty()) return load_dataset_auto(std::cin, drop_ties);
  return load_dataset_auto(path, drop_ties);
}

std::ostream& output_stream(const std::string& out, std::ofstream& file) {
  if (out.empty() || out == "-") return std::cout;
  file.open(out);
  if (!file) throw Error("cannot open " + out + " for writing");
  return file;
}

int cmd_test(const std::string& data_path, const std::string& threshold, std::uint64_t seed,
             TestConfig config, bool drop_ties, const std::string& out) {
  auto data = load_from_arg(data_path, drop_ties);
  ThresholdKind kind;
  if (threshold == "analytic") {
    kind = ThresholdKind::Analytic;
  } else if (threshold == "quantile") {
    kind = ThresholdKind::Quantile;
  } else if (threshold == "permutation") {
    kind = ThresholdKind::Permutation;
  } else if (threshold == "all") {
    kind = ThresholdKind::All;
  } else {
    throw DomainError("unknown threshold kind: " + threshold);
  }
  auto report = run_test(data, kind, config, seed);
  std::ofstream file;
  report.write_kv(output_stream(out, file));

  std::optional<Decision> decision;
  if (report.decision_gamma2) {
    decision = report.decision_gamma2;
  } else if (report.decision_gamma1) {
    decision = report.decision_gamma1;
  } else if (report.decision_gamma0) {
    decision = report.decision_gamma0;
  } else if (report.decision_analytic) {
    decision = report.decision_analytic;
  }
  return (decision && *decision == Decision::H1) ? 2 : 0;
}

int cmd_diagnose(const std::string& data_path, bool drop_ties, const std::string& out) {
  auto data = load_from_arg(data_path, drop_ties);
  auto ec = empirical_chain(data);
  auto ds = degree_stats(data.graph());
  std::ofstream file;
  auto& os = output_stream(out, file);
  os.precision(12);
  os << "n=" << data.n() << "\n";
  os << "d_min=" << ds.d_min << "\n";
  os << "d_max=" << ds.d_max << "\n";
  os << "kappa=" << ds.kappa << "\n";
  const bool positive = ec.pi_hat.pi.minCoeff() > 0.0;
  os << "h_pi=" << (positive ? principal_ratio(ec.pi_hat) : std::nan("")) << "\n";
  os << "sigma2=" << (positive ? dtm_sigma2(ec.chain, ec.pi_hat).sigma2 : std::nan("")) << "\n";
  {
    KahanSum d2;
    for (auto [i, j] : data.graph().directed_edges()) {
      if (data.k(i, j) < 1) continue;
      const double phat = static_cast<double>(data.z(i, j)) / static_cast<double>(data.k(i, j));
      const double r = (ec.pi_hat.pi(i) + ec.pi_hat.pi(j)) * phat - ec.pi_hat.pi(j);
      d2.add(r * r);
    }
    const double eps =
        std::sqrt(std::max(0.0, d2.value())) /
        (data.n() * ec.pi_hat.pi.lpNorm<Eigen::Infinity>());
    os << "eps_hat=" << eps << "\n";
  }
  os << "stationary_residual=" << ec.pi_hat.residual << "\n";
  const auto& names = data.agent_names();
  for (std::size_t i = 0; i < names.size(); ++i) os << "agent." << i << "=" << names[i] << "\n";
  for (int i = 0; i < ec.pi_hat.pi.size(); ++i)
    os << "pi_hat." << i << "=" << ec.pi_hat.pi(i) << "\n";
  return 0;
}

int cmd_generate(const std::string& family, int n, double eta, long k, std::uint64_t seed,
                 const std::string& alpha_csv, double margin, double beta,
                 const std::string& graph_kind, double p_edge, const std::string& out,
                 const std::string& model_out) {
  ObservationGraph graph = [&] {
    if (graph_kind == "complete") return complete_graph(n);
    if (graph_kind == "erdos_renyi") {
      double p = p_edge;
      if (p <= 0.0) {
        const double logn = std::log(static_cast<double>(n));
        p = std::min(1.0, logn * logn / n);
      }
      return erdos_renyi(n, p, derive_seed(seed, {0xe2}));
    }
    throw DomainError("unknown graph kind: " + graph_kind);
  }();

  std::optional<PairwiseModel> model;
  if (family == "btl") {
    Eigen::VectorXd alpha(n);
    if (!alpha_csv.empty()) {
      auto parts = split(alpha_csv, ',');
      if (parts.size() != static_cast<std::size_t>(n))
        throw ValidationError("--alpha length must equal --n");
      for (int i = 0; i < n; ++i) alpha(i) = std::stod(parts[static_cast<std::size_t>(i)]);
    } else {
      Rng rng(derive_seed(seed, {0xa1}));
      for (int i = 0; i < n; ++i) alpha(i) = 0.05 + rng.uniform01();
    }
    model = btl_model(alpha, graph);
  } else if (family == "uniform") {
    model = uniform_model(graph);
  } else if (family == "lower-bound") {
    Rng rng(derive_seed(seed, {0x17}));
    std::vector<int> theta(static_cast<std::size_t>(n / 2));
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = static_cast<int>(i);
    for (std::size_t i = theta.size(); i > 1; --i) {
      auto j = rng.below(i);
      std::swap(theta[i - 1], theta[j]);
    }
    model = lower_bound_model(n, eta, theta);
  } else if (family == "stability") {
    model = stability_model(n);
  } else if (family == "margin") {
    model = constant_margin_model(n, margin);
  } else if (family == "cyclic") {
    model = cyclic_model(n, beta);
  } else {
    throw DomainError("unknown model family: " + family);
  }

  if (!model_out.empty()) {
    std::ofstream mf(model_out);
    if (!mf) throw Error("cannot open " + model_out + " for writing");
    save_model_csv(*model, mf);
  }
  auto data = sample_dataset(*model, k, derive_seed(seed, {0xda}));
  std::ofstream file;
  save_aggregated(data, output_stream(out, file));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hypothesis tests for Bradley-Terry-Luce structure in pairwise comparison data"};
  app.require_subcommand(1);

  // test
  std::string data_path = "-";
  std::string threshold = "permutation";
  std::uint64_t seed = 0;
  TestConfig config;
  bool drop_ties = false;
  std::string out;
  auto* test_cmd = app.add_subcommand("test", "run the BTL hypothesis test on a dataset");
  test_cmd->add_option("data", data_path, "match or aggregated CSV ('-' for stdin)");
  test_cmd->add_option("--threshold", threshold, "analytic|quantile|permutation|all")
      ->default_val("permutation");
  test_cmd->add_option("--seed", seed, "random seed")->default_val(0);
  test_cmd->add_option("--q", config.q, "quantile level")->default_val(0.95);
  test_cmd->add_option("--pool", config.model_pool, "BTL model pool size")->default_val(200);
  test_cmd->add_option("--reps", config.shuffle_reps, "shuffle repetitions")->default_val(200);
  test_cmd->add_option("--cycles", config.cycles_per_rep, "cycle shuffles per repetition (-1 = n)")
      ->default_val(-1);
  test_cmd->add_option("--c-const", config.c_alpha_plus_gamma,
                       "c_alpha + c_gamma constant of the analytic threshold")
      ->default_val(4.0);
  test_cmd->add_flag("--drop-ties", drop_ties, "skip tie/draw rows instead of rejecting them");
  test_cmd->add_option("--out", out, "write the report here instead of stdout");

  // simulate
  std::string spec_path;
  bool paper_scale = false;
  auto* sim_cmd = app.add_subcommand("simulate", "run an experiment described by a key=value spec");
  sim_cmd->add_option("spec", spec_path, "experiment spec file")->required();
  sim_cmd->add_flag("--paper-scale", paper_scale, "use the original experiment grids");

  // generate
  std::string family, alpha_csv, graph_kind = "complete", model_out;
  int gen_n = 8;
  double gen_eta = 0.25, gen_margin = 0.22, gen_beta = 0.1, gen_p = 0.0;
  long gen_k = 12;
  auto* gen_cmd = app.add_subcommand("generate", "generate a synthetic model and dataset");
  gen_cmd->add_option("family", family, "btl|uniform|lower-bound|stability|margin|cyclic")
      ->required();
  gen_cmd->add_option("--n", gen_n, "number of agents")->default_val(8);
  gen_cmd->add_option("--eta", gen_eta, "lower-bound perturbation")->default_val(0.25);
  gen_cmd->add_option("--k", gen_k, "comparisons per directed pair")->default_val(12);
  gen_cmd->add_option("--seed", seed, "random seed")->default_val(0);
  gen_cmd->add_option("--alpha", alpha_csv, "explicit BTL scores, comma separated");
  gen_cmd->add_option("--margin", gen_margin, "margin of the constant-margin model")
      ->default_val(0.22);
  gen_cmd->add_option("--beta", gen_beta, "cyclic model perturbation")->default_val(0.1);
  gen_cmd->add_option("--graph", graph_kind, "complete|erdos_renyi")->default_val("complete");
  gen_cmd->add_option("--p", gen_p, "edge probability (erdos_renyi; default log^2 n / n)")
      ->default_val(0.0);
  gen_cmd->add_option("--out", out, "dataset CSV destination ('-' for stdout)");
  gen_cmd->add_option("--model-out", model_out, "also write the model matrix CSV here");

  // diagnose
  auto* diag_cmd = app.add_subcommand("diagnose", "spectral diagnostics for a dataset");
  diag_cmd->add_option("data", data_path, "match or aggregated CSV ('-' for stdin)");
  diag_cmd->add_flag("--drop-ties", drop_ties, "skip tie/draw rows");
  diag_cmd->add_option("--out", out, "write diagnostics here instead of stdout");
  diag_cmd->add_option("--seed", seed, "accepted for interface symmetry")->default_val(0);

  CLI11_PARSE(app, argc, argv);

  try {
    if (test_cmd->parsed()) return cmd_test(data_path, threshold, seed, config, drop_ties, out);
    if (sim_cmd->parsed()) {
      auto kv = read_kv_file(spec_path);
      auto spec = ExperimentSpec::from_kv(kv);
      if (paper_scale) spec.apply_paper_scale();
      run_experiment(spec);
      return 0;
    }
    if (gen_cmd->parsed())
      return cmd_generate(family, gen_n, gen_eta, gen_k, seed, alpha_csv, gen_margin, gen_beta,
                          graph_kind, gen_p, out, model_out);
    if (diag_cmd->parsed()) return cmd_diagnose(data_path, drop_ties, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
