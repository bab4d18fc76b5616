#include "pcrnn/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "pcrnn/errors.hpp"

namespace pcrnn {

namespace {

std::vector<std::string> split_tsv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  if (!fields.empty() && !fields.back().empty() && fields.back().back() == '\r')
    fields.back().pop_back();
  return fields;
}

class TsvReader {
 public:
  TsvReader(const std::string& path, const std::vector<std::string>& columns) : in_(path) {
    if (!in_) throw SchemaError("ingest: cannot open " + path);
    std::string header;
    if (!std::getline(in_, header)) throw SchemaError("ingest: " + path + " is empty");
    const auto names = split_tsv(header);
    for (const std::string& want : columns) {
      const auto it = std::find(names.begin(), names.end(), want);
      if (it == names.end())
        throw SchemaError("ingest: missing column '" + want + "' in " + path);
      index_.push_back(static_cast<std::size_t>(it - names.begin()));
    }
  }

  // Fills `out` with the selected columns of the next data row.
  bool next(std::vector<std::string>& out) {
    std::string line;
    while (std::getline(in_, line)) {
      if (line.empty()) continue;
      const auto fields = split_tsv(line);
      out.clear();
      bool ok = true;
      for (std::size_t idx : index_) {
        if (idx >= fields.size()) {
          ok = false;
          break;
        }
        out.push_back(fields[idx]);
      }
      if (ok) return true;
    }
    return false;
  }

 private:
  std::ifstream in_;
  std::vector<std::size_t> index_;
};

std::optional<int> parse_int(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::size_t i = 0;
  bool neg = false;
  if (s[0] == '-' || s[0] == '+') {
    neg = s[0] == '-';
    i = 1;
    if (s.size() == 1) return std::nullopt;
  }
  long v = 0;
  for (; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
    v = v * 10 + (s[i] - '0');
    if (v > 1000000000L) return std::nullopt;
  }
  return static_cast<int>(neg ? -v : v);
}

struct CitingInfo {
  double day = 0.0;
  int main_cat = -1;
  int sub_cat = -1;
};

}  // namespace

std::optional<int> parse_date_days(const std::string& iso) {
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
  const auto year = parse_int(iso.substr(0, 4));
  const auto month = parse_int(iso.substr(5, 2));
  const auto day = parse_int(iso.substr(8, 2));
  if (!year || !month || !day) return std::nullopt;
  if (*month < 1 || *month > 12 || *day < 1 || *day > 31) return std::nullopt;
  // Civil-calendar day count (proleptic Gregorian).
  int y = *year;
  const unsigned m = static_cast<unsigned>(*month), d = static_cast<unsigned>(*day);
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<int>(doe) - 719468;
}

std::vector<PatentRecord> ingest_patentsview(const IngestPaths& paths, const ColumnConfig& col,
                                             int min_chain, int max_chain, IngestStats* stats) {
  IngestStats local;
  IngestStats& st = stats ? *stats : local;
  st = IngestStats{};

  // Grant day per patent.
  std::unordered_map<std::string, double> grant_day;
  {
    TsvReader reader(paths.patents, {col.patent, col.date});
    std::vector<std::string> row;
    while (reader.next(row)) {
      const auto days = parse_date_days(row[1]);
      if (!days) {
        ++st.skipped_bad_date;
        continue;
      }
      grant_day[row[0]] = static_cast<double>(*days);
    }
  }

  // Category pair per citing patent; ids outside the NBER ranges are treated
  // as unusable.
  std::unordered_map<std::string, std::pair<int, int>> category;
  {
    TsvReader reader(paths.categories, {col.category_patent, col.main_cat, col.sub_cat});
    std::vector<std::string> row;
    while (reader.next(row)) {
      const auto mc = parse_int(row[1]);
      const auto sc = parse_int(row[2]);
      if (!mc || !sc || *mc < 0 || *mc > 6 || *sc < 0 || *sc > 36) continue;
      category[row[0]] = {*mc, *sc};
    }
  }

  // Forward citations per target, and per citing patent for portfolio chains.
  struct RawEvent {
    double day;
    std::string citing;
    int main_cat, sub_cat;
  };
  std::map<std::string, std::vector<RawEvent>> forward;           // target -> events
  std::unordered_map<std::string, std::vector<std::pair<double, std::string>>> cited_by;
  {
    TsvReader reader(paths.citations, {col.citing, col.cited});
    std::vector<std::string> row;
    while (reader.next(row)) {
      ++st.citation_rows;
      const std::string& citing = row[0];
      const std::string& cited = row[1];
      const auto day_it = grant_day.find(citing);
      if (day_it == grant_day.end()) {
        ++st.skipped_bad_date;
        continue;
      }
      cited_by[cited].emplace_back(day_it->second, citing);
      const auto cat_it = category.find(citing);
      if (cat_it == category.end()) {
        ++st.skipped_no_category;
        continue;
      }
      forward[cited].push_back(
          {day_it->second, citing, cat_it->second.first, cat_it->second.second});
    }
  }

  // Portfolio owners.
  auto read_owners = [&](const std::string& path, const std::string& patent_col,
                         const std::string& owner_col) {
    std::unordered_map<std::string, std::vector<std::string>> owners_of;  // patent -> owners
    TsvReader reader(path, {patent_col, owner_col});
    std::vector<std::string> row;
    while (reader.next(row)) owners_of[row[0]].push_back(row[1]);
    return owners_of;
  };
  const auto assignees_of = read_owners(paths.assignees, col.assignee_patent, col.assignee);
  const auto inventors_of = read_owners(paths.inventors, col.inventor_patent, col.inventor);

  // Portfolio chain per owner: unique citing patents over every owned patent,
  // ordered by (day, citing id).
  auto portfolio_chains = [&](const std::unordered_map<std::string, std::vector<std::string>>&
                                  owners_of) {
    std::unordered_map<std::string, std::set<std::pair<double, std::string>>> chain;
    for (const auto& [patent, owners] : owners_of) {
      const auto it = cited_by.find(patent);
      if (it == cited_by.end()) continue;
      for (const std::string& owner : owners)
        chain[owner].insert(it->second.begin(), it->second.end());
    }
    std::unordered_map<std::string, std::vector<double>> times;
    for (auto& [owner, events] : chain) {
      std::unordered_set<std::string> seen;
      std::vector<double> ts;
      for (const auto& [day, citing] : events)
        if (seen.insert(citing).second) ts.push_back(day);
      times[owner] = std::move(ts);
    }
    return times;
  };
  const auto assignee_chain = portfolio_chains(assignees_of);
  const auto inventor_chain = portfolio_chains(inventors_of);

  auto longest_chain = [](const std::vector<std::string>& owners,
                          const std::unordered_map<std::string, std::vector<double>>& chains) {
    std::vector<double> best;
    std::string best_owner;
    std::vector<std::string> sorted = owners;
    std::sort(sorted.begin(), sorted.end());
    for (const std::string& owner : sorted) {
      const auto it = chains.find(owner);
      const std::size_t len = it == chains.end() ? 0 : it->second.size();
      if (best_owner.empty() || len > best.size()) {
        best_owner = owner;
        best = it == chains.end() ? std::vector<double>{} : it->second;
      }
    }
    return best;
  };

  std::vector<PatentRecord> records;
  for (auto& [target, events] : forward) {
    std::sort(events.begin(), events.end(), [](const RawEvent& a, const RawEvent& b) {
      return a.day != b.day ? a.day < b.day : a.citing < b.citing;
    });
    PatentRecord r;
    r.patent_id = target;
    std::unordered_set<std::string> seen;
    for (const RawEvent& e : events) {
      if (!seen.insert(e.citing).second) {
        ++st.duplicate_citations;
        continue;
      }
      r.events.push_back({e.day, e.main_cat, e.sub_cat});
    }
    const int len = static_cast<int>(r.events.size());
    if (len < min_chain) {
      ++st.chains_dropped_short;
      continue;
    }
    if (len > max_chain) {
      ++st.chains_dropped_long;
      continue;
    }
    if (const auto it = assignees_of.find(target); it != assignees_of.end())
      r.assignee_events = longest_chain(it->second, assignee_chain);
    if (const auto it = inventors_of.find(target); it != inventors_of.end())
      r.inventor_events = longest_chain(it->second, inventor_chain);
    ++st.targets_kept;
    records.push_back(std::move(r));
  }
  // std::map iteration already gives patent-id order; keep it explicit.
  std::sort(records.begin(), records.end(),
            [](const PatentRecord& a, const PatentRecord& b) { return a.patent_id < b.patent_id; });
  return records;
}

}  // namespace pcrnn
