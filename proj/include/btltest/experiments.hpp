#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "btltest/inference.hpp"
#include "btltest/io.hpp"

namespace btltest {

// Grid/protocol description for the Monte-Carlo harness. Defaults are desk
// scale; paper_scale() switches the grids to the ones used for the original
// figures.
struct ExperimentSpec {
  std::string kind;  // minimax_grid | threshold_scaling | l2_error | stability_decay | real_data
  std::vector<int> n_list;
  std::vector<long> k_list;
  std::vector<double> eta_list;
  std::string graph_family = "complete";  // complete | erdos_renyi | both
  int replicates = 100;
  long k = 12;
  int pool = 200;
  int reps = 200;
  int perm_models = 20;
  double h1_margin = 0.22;
  double q = 0.95;
  std::string model = "both";  // l2_error: btl | cyclic | both
  int l2_n = 20;
  std::string data_path;
  std::vector<int> windows;
  int top_m = 8;
  std::uint64_t seed = 0;
  std::string out;

  static ExperimentSpec from_kv(const std::map<std::string, std::string>& kv);
  void apply_paper_scale();
};

struct RiskCell {
  int n = 0;
  double eta = 0.0;
  long k = 0;
  int replicates = 0;
  long type1_count = 0;
  long type2_count = 0;
  double type1() const { return static_cast<double>(type1_count) / replicates; }
  double type2() const { return static_cast<double>(type2_count) / replicates; }
  double risk() const { return type1() + type2(); }
  double mean_nT_h1 = 0.0;
};

struct RiskGrid {
  std::vector<RiskCell> cells;
};

RiskGrid minimax_grid(const ExperimentSpec& spec);
void write_csv(const RiskGrid& grid, std::ostream& os);

struct ThresholdRow {
  std::string family;
  int n = 0;
  long k = 0;
  double gamma0 = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double h1_median = 0.0;
  double h1_q05 = 0.0;
  double h1_q95 = 0.0;
};

std::vector<ThresholdRow> threshold_scaling(const ExperimentSpec& spec);
void write_csv(const std::vector<ThresholdRow>& rows, std::ostream& os);

struct L2Row {
  std::string model;
  long k = 0;
  double mean_error = 0.0;
};

std::vector<L2Row> l2_error_scaling(const ExperimentSpec& spec);
void write_csv(const std::vector<L2Row>& rows, std::ostream& os);
// Least-squares slope of log(mean error) against log(k) for one model kind.
double l2_slope(const std::vector<L2Row>& rows, const std::string& model);

struct StabilityRow {
  int n = 0;
  bool skipped = false;
  std::string note;
  double tau1 = 0.0;
  double tau2 = 0.0;
  double pi1 = 0.0;
  double pi2 = 0.0;
  double d_frob = 0.0;
  double eps = 0.0;
  double sqrt_n_eps = 0.0;
  bool orders_opposite = false;
};

std::vector<StabilityRow> stability_decay(const std::vector<int>& n_list);
void write_csv(const std::vector<StabilityRow>& rows, std::ostream& os);

// Prop-12 part-1 relation between BTL and Borda order, evaluated through the
// separation residual matrix; holds for any complete-graph model.
bool stability_identity_holds(const PairwiseModel& model, const Eigen::VectorXd& pi,
                              double tol = 1e-9);

struct WindowReport {
  int window_years = 0;
  int year_from = 0;
  int n_teams = 0;
  long matches = 0;
  bool skipped = false;
  std::string reason;
  TestReport report;
};

std::vector<WindowReport> real_data_run(const MatchLog& log, const ExperimentSpec& spec,
                                        const TestConfig& config);
void write_csv(const std::vector<WindowReport>& rows, std::ostream& os);

// Dispatches on spec.kind and writes the experiment CSV to spec.out.
void run_experiment(const ExperimentSpec& spec);

}  // namespace btltest
