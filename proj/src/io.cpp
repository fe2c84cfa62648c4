#include "btltest/io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace btltest {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

namespace {

std::string strip(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path);
  return f;
}

}  // namespace

int year_of(const std::string& iso_date) {
  if (iso_date.size() < 4) throw ValidationError("date too short for a year: " + iso_date);
  for (int i = 0; i < 4; ++i)
    if (!std::isdigit(static_cast<unsigned char>(iso_date[i])))
      throw ValidationError("date must start with a 4-digit year: " + iso_date);
  return std::stoi(iso_date.substr(0, 4));
}

MatchLog read_match_log(std::istream& is, bool drop_ties) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("empty match file", 1);
  auto header = split(strip(line), ',');
  for (auto& h : header) h = lower(strip(h));
  bool has_date = false;
  if (header.size() == 4 && header[0] == "date" && header[1] == "home" && header[2] == "away" &&
      header[3] == "winner") {
    has_date = true;
  } else if (header.size() == 3 && header[0] == "home" && header[1] == "away" &&
             header[2] == "winner") {
    has_date = false;
  } else {
    throw ParseError("expected header date,home,away,winner (date optional)", 1);
  }

  MatchLog log;
  long lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (strip(line).empty()) continue;
    auto fields = split(line, ',');
    if (fields.size() != header.size()) throw ParseError("wrong field count", lineno);
    MatchRecord rec;
    std::size_t base = 0;
    if (has_date) {
      rec.date = strip(fields[0]);
      base = 1;
    }
    rec.home = strip(fields[base]);
    rec.away = strip(fields[base + 1]);
    rec.winner = strip(fields[base + 2]);
    if (rec.home.empty() || rec.away.empty()) throw ParseError("empty team name", lineno);
    if (rec.home == rec.away) throw ParseError("home and away must differ", lineno);
    const std::string w = lower(rec.winner);
    if (w.empty() || w == "tie" || w == "draw") {
      if (drop_ties) continue;
      throw ParseError("tie/draw rows are rejected (pass --drop-ties to skip them)", lineno);
    }
    if (rec.winner != rec.home && rec.winner != rec.away)
      throw ParseError("winner '" + rec.winner + "' is neither home nor away", lineno);
    log.records.push_back(std::move(rec));
  }
  return log;
}

ComparisonDataset matches_to_dataset(const MatchLog& log) {
  std::map<std::string, int> index;
  std::vector<std::string> names;
  auto id_of = [&](const std::string& name) {
    auto it = index.find(name);
    if (it != index.end()) return it->second;
    const int id = static_cast<int>(names.size());
    index.emplace(name, id);
    names.push_back(name);
    return id;
  };
  struct Pair {
    long k = 0, z = 0;
  };
  std::map<std::pair<int, int>, Pair> buckets;
  for (const auto& rec : log.records) {
    const int h = id_of(rec.home);
    const int a = id_of(rec.away);
    auto& b = buckets[{h, a}];
    ++b.k;
    if (rec.winner == rec.away) ++b.z;  // Z=1 encodes a win by the second-listed agent
  }
  const int n = static_cast<int>(names.size());
  if (n < 2) throw ValidationError("match log mentions fewer than 2 agents");
  std::vector<std::uint8_t> adj(static_cast<std::size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i) adj[static_cast<std::size_t>(i) * n + i] = 1;
  for (const auto& [edge, b] : buckets) {
    adj[static_cast<std::size_t>(edge.first) * n + edge.second] = 1;
    adj[static_cast<std::size_t>(edge.second) * n + edge.first] = 1;
  }
  ComparisonDataset data(ObservationGraph::from_adjacency(n, std::move(adj)));
  data.set_agent_names(names);
  for (const auto& [edge, b] : buckets) data.set_counts(edge.first, edge.second, b.k, b.z);
  return data;
}

ComparisonDataset load_matches(std::istream& is, bool drop_ties) {
  return matches_to_dataset(read_match_log(is, drop_ties));
}

ComparisonDataset load_matches(const std::string& path, bool drop_ties) {
  auto f = open_or_throw(path);
  return load_matches(f, drop_ties);
}

ComparisonDataset load_aggregated(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("empty aggregated file", 1);
  auto header = split(strip(line), ',');
  for (auto& h : header) h = lower(strip(h));
  if (header != std::vector<std::string>{"i", "j", "k", "z"})
    throw ParseError("expected header i,j,k,z", 1);

  std::map<std::string, int> index;
  std::vector<std::string> names;
  auto id_of = [&](const std::string& name) {
    auto it = index.find(name);
    if (it != index.end()) return it->second;
    const int id = static_cast<int>(names.size());
    index.emplace(name, id);
    names.push_back(name);
    return id;
  };
  struct Pair {
    long k = 0, z = 0;
  };
  std::map<std::pair<int, int>, Pair> buckets;
  long lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (strip(line).empty()) continue;
    auto fields = split(line, ',');
    if (fields.size() != 4) throw ParseError("wrong field count", lineno);
    const std::string a = strip(fields[0]);
    const std::string b = strip(fields[1]);
    if (a.empty() || b.empty() || a == b) throw ParseError("bad agent pair", lineno);
    long k = 0, z = 0;
    try {
      k = std::stol(strip(fields[2]));
      z = std::stol(strip(fields[3]));
    } catch (const std::exception&) {
      throw ParseError("bad counts", lineno);
    }
    if (k < 0 || z < 0 || z > k) throw ParseError("need 0 <= z <= k", lineno);
    auto& bucket = buckets[{id_of(a), id_of(b)}];
    bucket.k += k;  // duplicate rows merge by summation
    bucket.z += z;
  }
  const int n = static_cast<int>(names.size());
  if (n < 2) throw ValidationError("aggregated file mentions fewer than 2 agents");
  for (const auto& [edge, b] : buckets) {
    if (!buckets.count({edge.second, edge.first}))
      throw ValidationError("pair " + names[edge.first] + "," + names[edge.second] +
                            " is missing its reverse orientation (edge set must be symmetric)");
  }
  std::vector<std::uint8_t> adj(static_cast<std::size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i) adj[static_cast<std::size_t>(i) * n + i] = 1;
  for (const auto& [edge, b] : buckets) {
    adj[static_cast<std::size_t>(edge.first) * n + edge.second] = 1;
    adj[static_cast<std::size_t>(edge.second) * n + edge.first] = 1;
  }
  ComparisonDataset data(ObservationGraph::from_adjacency(n, std::move(adj)));
  data.set_agent_names(names);
  for (const auto& [edge, b] : buckets) data.set_counts(edge.first, edge.second, b.k, b.z);
  return data;
}

ComparisonDataset load_aggregated(const std::string& path) {
  auto f = open_or_throw(path);
  return load_aggregated(f);
}

void save_aggregated(const ComparisonDataset& data, std::ostream& os) {
  os << "i,j,k,z\n";
  const auto& names = data.agent_names();
  for (auto [i, j] : data.graph().directed_edges()) {
    os << names[static_cast<std::size_t>(i)] << "," << names[static_cast<std::size_t>(j)] << ","
       << data.k(i, j) << "," << data.z(i, j) << "\n";
  }
}

ComparisonDataset load_dataset_auto(std::istream& is, bool drop_ties) {
  std::stringstream buffered;
  buffered << is.rdbuf();
  std::string first_line;
  {
    std::istringstream probe(buffered.str());
    std::getline(probe, first_line);
  }
  auto header = split(strip(first_line), ',');
  for (auto& h : header) h = lower(strip(h));
  buffered.seekg(0);
  if (!header.empty() && header[0] == "i") return load_aggregated(buffered);
  return load_matches(buffered, drop_ties);
}

ComparisonDataset load_dataset_auto(const std::string& path, bool drop_ties) {
  auto f = open_or_throw(path);
  return load_dataset_auto(f, drop_ties);
}

void save_model_csv(const PairwiseModel& model, std::ostream& os) {
  os.precision(17);
  os << model.n() << "\n";
  for (int i = 0; i < model.n(); ++i) {
    for (int j = 0; j < model.n(); ++j) {
      if (j) os << ",";
      os << model.p(i, j);
    }
    os << "\n";
  }
}

PairwiseModel load_model_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("empty model file", 1);
  int n = 0;
  try {
    n = std::stoi(strip(line));
  } catch (const std::exception&) {
    throw ParseError("first line must be the matrix size", 1);
  }
  if (n < 2) throw InvalidSizeError("model matrix smaller than 2x2");
  Eigen::MatrixXd p(n, n);
  for (int i = 0; i < n; ++i) {
    if (!std::getline(is, line)) throw ParseError("unexpected end of model file", i + 1);
    auto fields = split(strip(line), ',');
    if (fields.size() != static_cast<std::size_t>(n)) throw ParseError("wrong column count", i + 2);
    for (int j = 0; j < n; ++j) p(i, j) = std::stod(fields[static_cast<std::size_t>(j)]);
  }
  std::vector<std::uint8_t> adj(static_cast<std::size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      adj[static_cast<std::size_t>(i) * n + j] = (i == j || p(i, j) != 0.0) ? 1 : 0;
  return PairwiseModel(ObservationGraph::from_adjacency(n, std::move(adj)), std::move(p));
}

std::map<std::string, std::string> read_kv_file(std::istream& is) {
  std::map<std::string, std::string> out;
  std::string line;
  long lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto s = strip(line);
    if (s.empty() || s[0] == '#') continue;
    auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", lineno);
    out[strip(s.substr(0, eq))] = strip(s.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> read_kv_file(const std::string& path) {
  auto f = open_or_throw(path);
  return read_kv_file(f);
}

}  // namespace btltest
