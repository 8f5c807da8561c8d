#pragma once

#include <map>
#include <string>
#include <vector>

#include "plk/errors.hpp"

namespace plk {

enum class Direction { lower_is_better, higher_is_better };

struct MetricColumn {
  std::string name;
  Direction direction = Direction::lower_is_better;
  std::vector<double> values;  // aligned with MetricTable::model_ids
};

struct MetricTable {
  std::vector<std::string> model_ids;
  std::vector<MetricColumn> columns;

  const MetricColumn& column(const std::string& name) const;  // throws LookupError
};

// CSV with a direction suffix on each metric header, e.g.
//   model,abs-rel:lower,AP_BEV-mod:higher
//   PackNet-SfM,0.101,32.53
MetricTable parse_metric_table(const std::string& text);

struct Ranking {
  std::vector<std::string> ordered_ids;  // best first
  std::string metric;
  Direction direction = Direction::lower_is_better;
  bool had_ties = false;  // exact-value ties broken lexicographically
};

// Sorts model ids by the named column in its direction. Exact ties break
// lexicographically by id and are flagged.
Ranking rank_models(const MetricTable& table, const std::string& metric);

// Number of unordered pairs ranked oppositely by a and b (Kendall tau
// distance; equals arrow crossings in a two-column diagram with evenly
// spaced rows). Throws AlignmentError when the id sets differ.
int inversion_count(const Ranking& a, const Ranking& b);

struct ConcordancePair {
  std::string depth_metric;
  std::string detector;
  int inversions = 0;
  double normalized = 0.0;  // inversions / C(n,2)
  Ranking depth_ranking;
  Ranking det_ranking;
};

struct ConcordanceReport {
  std::vector<ConcordancePair> pairs;
  std::map<std::string, int> total_inversions;  // per depth metric
  std::string best_metric;                      // minimal total inversions
  // Groups of detectors whose rankings are identical permutations,
  // computed from the data rather than assumed.
  std::vector<std::vector<std::string>> identical_detector_rankings;
};

// Inversion counts for every (depth-metric column, detector column) pair.
// Each detector table contributes each of its columns; the detector key is
// the table name, suffixed with the column name when a table has several.
ConcordanceReport concordance_report(
    const MetricTable& depth_table,
    const std::vector<std::pair<std::string, MetricTable>>& detector_tables);

// Standalone SVG: two labeled columns with one arrow per model; arrow
// crossings equal inversion_count(a, b).
std::string render_diagram(const Ranking& a, const Ranking& b);

}  // namespace plk
