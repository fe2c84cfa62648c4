#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "btltest/model.hpp"

namespace btltest {

struct MatchRecord {
  std::optional<std::string> date;  // ISO-8601 day
  std::string home;
  std::string away;
  std::string winner;  // must equal home or away
};

struct MatchLog {
  std::vector<MatchRecord> records;
};

// CSV with header date,home,away,winner (the date column may be absent).
// Tie rows (empty winner, "tie", or "draw") are rejected unless drop_ties.
MatchLog read_match_log(std::istream& is, bool drop_ties = false);

// One outcome per row appended to bucket (home, away): 1 iff the away team
// won. Edge present when either orientation has at least one match.
ComparisonDataset matches_to_dataset(const MatchLog& log);
ComparisonDataset load_matches(std::istream& is, bool drop_ties = false);
ComparisonDataset load_matches(const std::string& path, bool drop_ties = false);

// CSV with header i,j,k,z; duplicate (i, j) rows are summed; every pair must
// appear in both orientations.
ComparisonDataset load_aggregated(std::istream& is);
ComparisonDataset load_aggregated(const std::string& path);

void save_aggregated(const ComparisonDataset& data, std::ostream& os);

// Sniffs the header and dispatches to the match-log or aggregated reader.
ComparisonDataset load_dataset_auto(std::istream& is, bool drop_ties = false);
ComparisonDataset load_dataset_auto(const std::string& path, bool drop_ties = false);

// Dense model matrix, row-major, first line is n.
void save_model_csv(const PairwiseModel& model, std::ostream& os);
PairwiseModel load_model_csv(std::istream& is);

// Flat key=value config text; '#' starts a comment line.
std::map<std::string, std::string> read_kv_file(std::istream& is);
std::map<std::string, std::string> read_kv_file(const std::string& path);

std::vector<std::string> split(const std::string& s, char sep);
int year_of(const std::string& iso_date);

}  // namespace btltest
