#include "plk/ranking.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_map>

namespace plk {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

const MetricColumn& MetricTable::column(const std::string& name) const {
  for (const auto& c : columns)
    if (c.name == name) return c;
  throw LookupError("unknown metric column: " + name);
}

MetricTable parse_metric_table(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  MetricTable table;
  bool header_done = false;
  std::size_t line_no = 0;
  std::set<std::string> seen_ids;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split(line, ',');
    if (!header_done) {
      if (cells.size() < 2)
        throw ParseError("metric table: header needs a model column and at least one metric");
      for (std::size_t i = 1; i < cells.size(); ++i) {
        const std::string cell = trim(cells[i]);
        const auto pos = cell.rfind(':');
        if (pos == std::string::npos)
          throw ParseError("metric table: header '" + cell +
                           "' is missing a :lower or :higher direction suffix");
        const std::string dir = cell.substr(pos + 1);
        MetricColumn col;
        col.name = cell.substr(0, pos);
        if (dir == "lower")
          col.direction = Direction::lower_is_better;
        else if (dir == "higher")
          col.direction = Direction::higher_is_better;
        else
          throw ParseError("metric table: unknown direction '" + dir + "' in header '" + cell +
                           "'");
        table.columns.push_back(std::move(col));
      }
      header_done = true;
      continue;
    }
    if (cells.size() != table.columns.size() + 1) {
      std::ostringstream msg;
      msg << "metric table line " << line_no << ": expected " << table.columns.size() + 1
          << " cells, got " << cells.size();
      throw ParseError(msg.str());
    }
    const std::string id = trim(cells[0]);
    if (!seen_ids.insert(id).second)
      throw ValidationError("metric table: duplicate model id '" + id + "'");
    table.model_ids.push_back(id);
    for (std::size_t i = 1; i < cells.size(); ++i) {
      try {
        std::size_t used = 0;
        const std::string cell = trim(cells[i]);
        const double v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        table.columns[i - 1].values.push_back(v);
      } catch (const std::exception&) {
        std::ostringstream msg;
        msg << "metric table line " << line_no << ": cannot parse value '" << trim(cells[i])
            << "'";
        throw ParseError(msg.str());
      }
    }
  }
  if (!header_done) throw ParseError("metric table: missing header line");
  return table;
}

Ranking rank_models(const MetricTable& table, const std::string& metric) {
  const MetricColumn& col = table.column(metric);
  std::vector<std::size_t> order(table.model_ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const bool lower = col.direction == Direction::lower_is_better;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (col.values[a] != col.values[b])
      return lower ? col.values[a] < col.values[b] : col.values[a] > col.values[b];
    return table.model_ids[a] < table.model_ids[b];
  });

  Ranking r;
  r.metric = metric;
  r.direction = col.direction;
  for (std::size_t i : order) r.ordered_ids.push_back(table.model_ids[i]);
  for (std::size_t i = 1; i < order.size(); ++i)
    if (col.values[order[i]] == col.values[order[i - 1]]) r.had_ties = true;
  return r;
}

int inversion_count(const Ranking& a, const Ranking& b) {
  std::unordered_map<std::string, std::size_t> pos_b;
  for (std::size_t i = 0; i < b.ordered_ids.size(); ++i) pos_b[b.ordered_ids[i]] = i;
  if (a.ordered_ids.size() != b.ordered_ids.size())
    throw AlignmentError("inversion_count: rankings cover different model counts");
  for (const auto& id : a.ordered_ids)
    if (!pos_b.count(id))
      throw AlignmentError("inversion_count: model '" + id + "' is missing from one ranking");

  int count = 0;
  const std::size_t n = a.ordered_ids.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (pos_b[a.ordered_ids[i]] > pos_b[a.ordered_ids[j]]) ++count;
  return count;
}

ConcordanceReport concordance_report(
    const MetricTable& depth_table,
    const std::vector<std::pair<std::string, MetricTable>>& detector_tables) {
  const std::set<std::string> depth_ids(depth_table.model_ids.begin(),
                                        depth_table.model_ids.end());
  for (const auto& [name, table] : detector_tables) {
    const std::set<std::string> ids(table.model_ids.begin(), table.model_ids.end());
    if (ids != depth_ids) {
      std::ostringstream msg;
      msg << "detector table '" << name << "' covers different model ids than the depth table:";
      for (const auto& id : depth_ids)
        if (!ids.count(id)) msg << " missing '" << id << "'";
      for (const auto& id : ids)
        if (!depth_ids.count(id)) msg << " extra '" << id << "'";
      throw AlignmentError(msg.str());
    }
  }

  const std::size_t n = depth_table.model_ids.size();
  const double n_pairs = n < 2 ? 1.0 : n * (n - 1) / 2.0;

  ConcordanceReport report;
  std::vector<std::pair<std::string, Ranking>> det_rankings;
  for (const auto& [name, table] : detector_tables) {
    for (const auto& col : table.columns) {
      const std::string key =
          table.columns.size() == 1 ? name : name + "/" + col.name;
      det_rankings.emplace_back(key, rank_models(table, col.name));
    }
  }

  for (const auto& depth_col : depth_table.columns) {
    const Ranking depth_rank = rank_models(depth_table, depth_col.name);
    int total = 0;
    for (const auto& [det_name, det_rank] : det_rankings) {
      ConcordancePair pair;
      pair.depth_metric = depth_col.name;
      pair.detector = det_name;
      pair.inversions = inversion_count(depth_rank, det_rank);
      pair.normalized = pair.inversions / n_pairs;
      pair.depth_ranking = depth_rank;
      pair.det_ranking = det_rank;
      total += pair.inversions;
      report.pairs.push_back(std::move(pair));
    }
    report.total_inversions[depth_col.name] = total;
  }

  // Best metric: minimal total inversions, column order breaking ties.
  int best = -1;
  for (const auto& col : depth_table.columns) {
    const int t = report.total_inversions[col.name];
    if (best < 0 || t < best) {
      best = t;
      report.best_metric = col.name;
    }
  }

  // Group detectors sharing an identical ranking permutation.
  std::vector<bool> grouped(det_rankings.size(), false);
  for (std::size_t i = 0; i < det_rankings.size(); ++i) {
    if (grouped[i]) continue;
    std::vector<std::string> group{det_rankings[i].first};
    for (std::size_t j = i + 1; j < det_rankings.size(); ++j) {
      if (!grouped[j] && det_rankings[j].second.ordered_ids == det_rankings[i].second.ordered_ids) {
        group.push_back(det_rankings[j].first);
        grouped[j] = true;
      }
    }
    if (group.size() > 1) report.identical_detector_rankings.push_back(std::move(group));
  }
  return report;
}

std::string render_diagram(const Ranking& a, const Ranking& b) {
  const int crossings = inversion_count(a, b);  // also validates alignment
  const std::size_t n = a.ordered_ids.size();

  const double row_h = 28.0;
  const double top = 48.0;
  const double label_w = 150.0;
  const double gap = 180.0;
  const double width = 2 * label_w + gap + 40.0;
  const double height = top + n * row_h + 20.0;
  const double x_left = 20.0 + label_w;       // right edge of the left labels
  const double x_right = x_left + gap;        // left edge of the right labels

  std::unordered_map<std::string, std::size_t> pos_b;
  for (std::size_t i = 0; i < b.ordered_ids.size(); ++i) pos_b[b.ordered_ids[i]] = i;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"13\">\n";
  svg << "  <text x=\"20\" y=\"22\" font-weight=\"bold\">" << a.metric << " vs " << b.metric
      << " (" << crossings << " crossings)</text>\n";
  for (std::size_t i = 0; i < n; ++i) {
    const double y = top + (i + 0.5) * row_h;
    svg << "  <text x=\"" << x_left - 6 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\">" << i + 1 << ". " << a.ordered_ids[i] << "</text>\n";
    svg << "  <text x=\"" << x_right + 6 << "\" y=\"" << y + 4 << "\">" << i + 1 << ". "
        << b.ordered_ids[i] << "</text>\n";
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double y1 = top + (i + 0.5) * row_h;
    const double y2 = top + (pos_b[a.ordered_ids[i]] + 0.5) * row_h;
    svg << "  <line x1=\"" << x_left << "\" y1=\"" << y1 << "\" x2=\"" << x_right << "\" y2=\""
        << y2 << "\" stroke=\"#33557f\" stroke-width=\"1.5\" marker-end=\"url(#arrow)\"/>\n";
  }
  svg << "  <defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" "
         "markerWidth=\"7\" markerHeight=\"7\" orient=\"auto-start-reverse\">"
         "<path d=\"M 0 0 L 10 5 L 0 10 z\" fill=\"#33557f\"/></marker></defs>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace plk
