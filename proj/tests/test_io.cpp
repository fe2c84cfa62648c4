#include <doctest.h>

#include <sstream>

#include "btltest/io.hpp"

using namespace btltest;

TEST_SUITE_BEGIN("cli_io");

TEST_CASE("match ingestion encodes home wins as zero") {
  std::istringstream csv(
      "date,home,away,winner\n"
      "2020-01-01,A,B,A\n"
      "2020-01-02,B,A,B\n");
  auto data = load_matches(csv);
  CHECK(data.n() == 2);
  CHECK(data.agent_names()[0] == "A");
  CHECK(data.k(0, 1) == 1);
  CHECK(data.k(1, 0) == 1);
  CHECK(data.z(0, 1) == 0);
  CHECK(data.z(1, 0) == 0);
}

TEST_CASE("match ingestion validates winners with line numbers") {
  std::istringstream csv(
      "date,home,away,winner\n"
      "2020-01-01,A,B,A\n"
      "2020-01-02,B,A,B\n"
      "2020-01-03,A,B,C\n");
  try {
    load_matches(csv);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 4);
  }
}

TEST_CASE("ties are rejected unless dropped") {
  std::istringstream csv(
      "home,away,winner\n"
      "A,B,A\n"
      "B,A,tie\n"
      "B,A,B\n");
  std::istringstream csv2(csv.str());
  CHECK_THROWS_AS(load_matches(csv), ParseError);
  auto data = load_matches(csv2, /*drop_ties=*/true);
  CHECK(data.total_observations() == 2);
}

TEST_CASE("ingestion is lossless for counts") {
  std::ostringstream csv;
  csv << "home,away,winner\n";
  int rows = 0;
  for (int r = 0; r < 9; ++r) {
    csv << "A,B," << (r % 2 ? "A" : "B") << "\n";
    csv << "B,A," << (r % 3 ? "B" : "A") << "\n";
    rows += 2;
  }
  std::istringstream in(csv.str());
  auto data = load_matches(in);
  CHECK(data.total_observations() == rows);
}

TEST_CASE("aggregated ingestion") {
  SUBCASE("basic row") {
    std::istringstream csv(
        "i,j,k,z\n"
        "A,B,10,7\n"
        "B,A,5,2\n");
    auto data = load_aggregated(csv);
    CHECK(data.k(0, 1) == 10);
    CHECK(data.z(0, 1) == 7);
  }
  SUBCASE("duplicate rows merge by summation") {
    std::istringstream csv(
        "i,j,k,z\n"
        "A,B,10,7\n"
        "A,B,4,1\n"
        "B,A,5,2\n");
    auto data = load_aggregated(csv);
    CHECK(data.k(0, 1) == 14);
    CHECK(data.z(0, 1) == 8);
  }
  SUBCASE("z > k rejected") {
    std::istringstream csv("i,j,k,z\nA,B,3,5\nB,A,1,0\n");
    CHECK_THROWS_AS(load_aggregated(csv), ParseError);
  }
  SUBCASE("missing reverse orientation rejected") {
    std::istringstream csv("i,j,k,z\nA,B,3,1\nB,C,2,1\nC,B,2,0\n");
    CHECK_THROWS_AS(load_aggregated(csv), ValidationError);
  }
}

TEST_CASE("aggregated round trip preserves counts") {
  std::istringstream csv(
      "i,j,k,z\n"
      "A,B,10,7\n"
      "B,A,5,2\n"
      "B,C,3,3\n"
      "C,B,3,0\n"
      "A,C,1,0\n"
      "C,A,2,1\n");
  auto data = load_aggregated(csv);
  std::stringstream out;
  save_aggregated(data, out);
  auto data2 = load_aggregated(out);
  REQUIRE(data2.n() == data.n());
  for (auto [i, j] : data.graph().directed_edges()) {
    CHECK(data2.k(i, j) == data.k(i, j));
    CHECK(data2.z(i, j) == data.z(i, j));
  }
}

TEST_CASE("dataset auto-detection") {
  std::istringstream agg("i,j,k,z\nA,B,3,1\nB,A,3,2\n");
  CHECK(load_dataset_auto(agg).k(0, 1) == 3);
  std::istringstream matches("home,away,winner\nA,B,B\nB,A,A\n");
  CHECK(load_dataset_auto(matches).z(0, 1) == 1);
}

TEST_CASE("model csv round trip") {
  auto m = cyclic_model(5, 0.2);
  std::stringstream ss;
  save_model_csv(m, ss);
  auto m2 = load_model_csv(ss);
  CHECK((m.matrix() - m2.matrix()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kv files") {
  std::istringstream kv(
      "# a comment\n"
      "alpha = 3\n"
      "beta=x y\n"
      "\n");
  auto map = read_kv_file(kv);
  CHECK(map.at("alpha") == "3");
  CHECK(map.at("beta") == "x y");
  std::istringstream bad("no equals sign\n");
  CHECK_THROWS_AS(read_kv_file(bad), ParseError);
}

TEST_CASE("year extraction") {
  CHECK(year_of("2017-05-01") == 2017);
  CHECK_THROWS_AS(year_of("xx"), ValidationError);
}

TEST_SUITE_END();
