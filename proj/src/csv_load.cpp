#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "bayes_epi/datagen.hpp"
#include "bayes_epi/error.hpp"

namespace bayes_epi {
namespace {

struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

// Comma-separated fields; double quotes may wrap a field and "" escapes a quote.
std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

RawTable read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path);
  RawTable t;
  std::string line;
  if (!std::getline(in, line)) throw ParseError(0, "", "missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  // UTF-8 byte order mark
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  t.header = split_line(line);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    ++row;
    auto cells = split_line(line);
    if (cells.size() != t.header.size()) {
      throw ParseError(row, "", "expected " + std::to_string(t.header.size()) + " cells, got " +
                                    std::to_string(cells.size()));
    }
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (cells[j].empty() || cells[j] == "NA") throw ParseError(row, t.header[j], "missing value");
    }
    t.rows.push_back(std::move(cells));
  }
  if (t.rows.empty()) throw ParseError(0, "", "no data rows");
  return t;
}

std::optional<double> parse_number(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::size_t column_index(const RawTable& t, const std::string& name) {
  auto it = std::find(t.header.begin(), t.header.end(), name);
  if (it == t.header.end()) {
    throw Error(ErrorCode::kInvalidConfig, "column '" + name + "' not found in header");
  }
  return static_cast<std::size_t>(it - t.header.begin());
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

Eigen::VectorXi code_binary(const RawTable& t, std::size_t col,
                            const std::optional<std::string>& positive_level) {
  std::set<std::string> levels;
  for (const auto& r : t.rows) levels.insert(r[col]);
  const std::string& name = t.header[col];
  if (levels.size() > 2) {
    throw Error(ErrorCode::kNonBinaryLabel, "column '" + name + "' has more than two levels");
  }
  std::string positive;
  if (positive_level) {
    positive = *positive_level;
  } else {
    static const std::map<std::string, std::string> kNegToPos = {
        {"0", "1"}, {"neg", "pos"}, {"no", "yes"}, {"false", "true"}, {"0.0", "1.0"}};
    for (const auto& level : levels) {
      const std::string l = lower(level);
      bool known = false;
      for (const auto& [neg, pos] : kNegToPos) {
        if (l == pos) positive = level;
        if (l == pos || l == neg) known = true;
      }
      if (!known) {
        throw Error(ErrorCode::kNonBinaryLabel,
                    "cannot code level '" + level + "' of column '" + name + "' as 0/1");
      }
    }
  }
  Eigen::VectorXi y(static_cast<Eigen::Index>(t.rows.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    y(static_cast<Eigen::Index>(i)) = t.rows[i][col] == positive ? 1 : 0;
  }
  return y;
}

// Numeric columns stay as-is; a column whose first cell is non-numeric is
// categorical and expands to treatment-coded dummies (first sorted level dropped).
void build_covariates(const RawTable& t, const std::vector<std::size_t>& skip, Eigen::MatrixXd& x,
                      std::vector<std::string>& names) {
  std::vector<Eigen::VectorXd> cols;
  const auto n = static_cast<Eigen::Index>(t.rows.size());
  for (std::size_t j = 0; j < t.header.size(); ++j) {
    if (std::find(skip.begin(), skip.end(), j) != skip.end()) continue;
    if (parse_number(t.rows[0][j])) {
      Eigen::VectorXd c(n);
      for (std::size_t i = 0; i < t.rows.size(); ++i) {
        auto v = parse_number(t.rows[i][j]);
        if (!v) throw ParseError(i + 1, t.header[j], "non-numeric cell '" + t.rows[i][j] + "'");
        c(static_cast<Eigen::Index>(i)) = *v;
      }
      cols.push_back(std::move(c));
      names.push_back(t.header[j]);
    } else {
      std::set<std::string> levels;
      for (const auto& r : t.rows) levels.insert(r[j]);
      for (auto it = std::next(levels.begin()); it != levels.end(); ++it) {
        Eigen::VectorXd c(n);
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
          c(static_cast<Eigen::Index>(i)) = t.rows[i][j] == *it ? 1.0 : 0.0;
        }
        cols.push_back(std::move(c));
        names.push_back(t.header[j] + *it);
      }
    }
  }
  x.resize(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) x.col(static_cast<Eigen::Index>(k)) = cols[k];
}

}  // namespace

LabeledDataset load_csv_binary(const std::string& path, const std::string& label_column,
                               const std::optional<std::string>& positive_level) {
  const RawTable t = read_table(path);
  const std::size_t label = column_index(t, label_column);
  LabeledDataset d;
  d.y = code_binary(t, label, positive_level);
  build_covariates(t, {label}, d.x, d.feature_names);
  return d;
}

SurvivalData load_csv_survival(const std::string& path, const std::string& time_column,
                               const std::string& event_column) {
  const RawTable t = read_table(path);
  const std::size_t tc = column_index(t, time_column);
  const std::size_t ec = column_index(t, event_column);
  SurvivalData d;
  const auto n = static_cast<Eigen::Index>(t.rows.size());
  d.time.resize(n);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    auto v = parse_number(t.rows[i][tc]);
    if (!v) throw ParseError(i + 1, time_column, "non-numeric time '" + t.rows[i][tc] + "'");
    if (*v < 0.0) throw ParseError(i + 1, time_column, "negative survival time");
    d.time(static_cast<Eigen::Index>(i)) = *v;
  }
  d.event = code_binary(t, ec, std::nullopt);
  build_covariates(t, {tc, ec}, d.x, d.feature_names);
  return d;
}

}  // namespace bayes_epi
