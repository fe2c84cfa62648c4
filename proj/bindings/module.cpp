#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "btltest/experiments.hpp"
#include "btltest/inference.hpp"
#include "btltest/io.hpp"

namespace py = pybind11;
using namespace btltest;

PYBIND11_MODULE(_core, m) {
  m.doc() = "hypothesis testing for Bradley-Terry-Luce structure in pairwise comparison data";

  py::register_exception<Error>(m, "BtlError");

  py::class_<ObservationGraph>(m, "ObservationGraph")
      .def_property_readonly("n", &ObservationGraph::n)
      .def("has_edge", &ObservationGraph::has_edge)
      .def("directed_edges", &ObservationGraph::directed_edges)
      .def("undirected_edges", &ObservationGraph::undirected_edges)
      .def("to_edge_list", [](const ObservationGraph& g) {
        std::ostringstream os;
        write_edge_list(g, os);
        return os.str();
      });

  m.def("complete_graph", &complete_graph, py::arg("n"));
  m.def("circulant_expander", &circulant_expander, py::arg("n"));
  m.def("erdos_renyi", &erdos_renyi, py::arg("n"), py::arg("p"), py::arg("seed"),
        py::arg("max_retries") = 100);
  m.def("degree_stats", [](const ObservationGraph& g) {
    auto s = degree_stats(g);
    return py::make_tuple(s.d_min, s.d_max, s.kappa);
  });
  m.def("edge_expansion_exact", &edge_expansion_exact);
  m.def("adjacency_second_eigenvalue", &adjacency_second_eigenvalue);

  py::class_<PairwiseModel>(m, "PairwiseModel")
      .def_property_readonly("n", &PairwiseModel::n)
      .def_property_readonly("graph", &PairwiseModel::graph)
      .def_property_readonly("matrix", &PairwiseModel::matrix)
      .def("p", &PairwiseModel::p);

  py::class_<ComparisonDataset>(m, "ComparisonDataset")
      .def(py::init<ObservationGraph>())
      .def_property_readonly("n", &ComparisonDataset::n)
      .def_property_readonly("graph", &ComparisonDataset::graph)
      .def("k", &ComparisonDataset::k)
      .def("z", &ComparisonDataset::z)
      .def("set_counts", &ComparisonDataset::set_counts)
      .def("total_observations", &ComparisonDataset::total_observations)
      .def("agent_names", &ComparisonDataset::agent_names)
      .def("to_csv", [](const ComparisonDataset& d) {
        std::ostringstream os;
        save_aggregated(d, os);
        return os.str();
      });

  m.def("btl_model", &btl_model, py::arg("alpha"), py::arg("graph"));
  m.def("dynamic_range", &dynamic_range);
  m.def("lower_bound_model", &lower_bound_model, py::arg("n"), py::arg("eta"), py::arg("theta"));
  m.def("lower_bound_stationary", &lower_bound_stationary);
  m.def("lower_bound_separation_squared", &lower_bound_separation_squared);
  m.def("stability_model", &stability_model);
  m.def("borda_counts", &borda_counts);
  m.def("uniform_model", &uniform_model);
  m.def("constant_margin_model", &constant_margin_model);
  m.def("cyclic_model", &cyclic_model);
  m.def(
      "sample_dataset",
      [](const PairwiseModel& model, long k, std::uint64_t seed) {
        return sample_dataset(model, k, seed);
      },
      py::arg("model"), py::arg("k"), py::arg("seed"));

  py::class_<MarkovChain>(m, "MarkovChain")
      .def_readonly("s", &MarkovChain::s)
      .def_readonly("d", &MarkovChain::d);
  py::class_<StationaryDistribution>(m, "StationaryDistribution")
      .def_readonly("pi", &StationaryDistribution::pi)
      .def_readonly("residual", &StationaryDistribution::residual);

  m.def(
      "canonical_markov",
      [](const PairwiseModel& model, std::optional<double> d) { return canonical_markov(model, d); },
      py::arg("model"), py::arg("d_override") = std::nullopt);
  m.def("stationary", &stationary, py::arg("chain"), py::arg("tol") = 1e-12,
        py::arg("max_iter") = 1'000'000);
  m.def("principal_ratio", &principal_ratio);
  m.def("dtm_sigma2", [](const MarkovChain& chain, const StationaryDistribution& pi) {
    auto s = dtm_sigma2(chain, pi);
    return py::make_tuple(s.sigma2, s.residual_norm);
  });
  m.def("dtm_edge_expansion", &dtm_edge_expansion);
  m.def("separation", [](const PairwiseModel& model, const Eigen::VectorXd& pi) {
    auto s = separation(model, pi);
    return py::make_tuple(s.d_frob, s.eps);
  });
  m.def("residual_decomposition", [](const PairwiseModel& model, const Eigen::VectorXd& pi) {
    auto r = residual_decomposition(model, pi);
    return py::make_tuple(r.rev, r.skew, r.total);
  });
  m.def(
      "btl_distance",
      [](const PairwiseModel& model, double delta, int restarts, std::uint64_t seed) {
        auto r = btl_distance(model, delta, restarts, seed);
        return py::make_tuple(r.d_frob, r.scores);
      },
      py::arg("model"), py::arg("delta"), py::arg("restarts") = 20, py::arg("seed") = 0);

  py::class_<TestConfig>(m, "TestConfig")
      .def(py::init<>())
      .def_readwrite("c_alpha_plus_gamma", &TestConfig::c_alpha_plus_gamma)
      .def_readwrite("q", &TestConfig::q)
      .def_readwrite("model_pool", &TestConfig::model_pool)
      .def_readwrite("shuffle_reps", &TestConfig::shuffle_reps)
      .def_readwrite("cycles_per_rep", &TestConfig::cycles_per_rep);

  py::enum_<ThresholdKind>(m, "ThresholdKind")
      .value("Analytic", ThresholdKind::Analytic)
      .value("Quantile", ThresholdKind::Quantile)
      .value("Permutation", ThresholdKind::Permutation)
      .value("All", ThresholdKind::All);

  py::class_<TestReport>(m, "TestReport")
      .def_readonly("statistic", &TestReport::statistic)
      .def_readonly("scaled_statistic", &TestReport::scaled_statistic)
      .def_readonly("scale", &TestReport::scale)
      .def_readonly("gamma0", &TestReport::gamma0)
      .def_readonly("gamma1", &TestReport::gamma1)
      .def_readonly("gamma2", &TestReport::gamma2)
      .def_readonly("analytic_t", &TestReport::analytic_t)
      .def_readonly("pi_hat", &TestReport::pi_hat)
      .def_readonly("h_pi", &TestReport::h_pi)
      .def_readonly("sigma2", &TestReport::sigma2)
      .def_readonly("eps_hat", &TestReport::eps_hat)
      .def("h1_declared",
           [](const TestReport& r) {
             auto d = r.decision_gamma2 ? r.decision_gamma2
                      : r.decision_gamma1 ? r.decision_gamma1
                      : r.decision_gamma0 ? r.decision_gamma0
                                          : r.decision_analytic;
             return d && *d == Decision::H1;
           })
      .def("to_kv", [](const TestReport& r) {
        std::ostringstream os;
        r.write_kv(os);
        return os.str();
      });

  m.def(
      "empirical_chain",
      [](const ComparisonDataset& data, std::optional<double> d) {
        auto ec = empirical_chain(data, d);
        return py::make_tuple(ec.chain, ec.pi_hat);
      },
      py::arg("data"), py::arg("d_override") = std::nullopt);
  m.def("test_statistic", &test_statistic);
  m.def("analytic_threshold", &analytic_threshold);
  m.def("decide",
        [](double t, double threshold) { return decide(t, threshold) == Decision::H1 ? 1 : 0; });
  m.def("skew_shuffle", &skew_shuffle);
  m.def(
      "cycle_shuffle",
      [](const ComparisonDataset& data, int n_cycles, std::uint64_t seed) {
        auto r = cycle_shuffle(data, n_cycles, seed);
        return py::make_tuple(r.data, r.cycles_completed, r.attempts_abandoned,
                              r.proposals_rejected);
      },
      py::arg("data"), py::arg("n_cycles"), py::arg("seed"));
  m.def(
      "permutation_threshold",
      [](const ComparisonDataset& data, const TestConfig& config, std::uint64_t seed) {
        auto p = permutation_threshold(data, config, seed);
        return py::make_tuple(p.gamma1, p.gamma2);
      },
      py::arg("data"), py::arg("config"), py::arg("seed"));
  m.def("run_test", &run_test, py::arg("data"), py::arg("kind"), py::arg("config"),
        py::arg("seed"));

  m.def("load_aggregated_csv", [](const std::string& text) {
    std::istringstream is(text);
    return load_aggregated(is);
  });
  m.def("load_matches_csv", [](const std::string& text, bool drop_ties) {
    std::istringstream is(text);
    return load_matches(is, drop_ties);
  }, py::arg("text"), py::arg("drop_ties") = false);
}
