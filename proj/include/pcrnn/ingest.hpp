#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pcrnn/data.hpp"

namespace pcrnn {

// Header names of the columns we read from each tab-separated bulk file.
// Defaults follow the PatentsView download naming.
struct ColumnConfig {
  std::string citing = "patent_id";
  std::string cited = "citation_id";
  std::string patent = "patent_id";
  std::string date = "date";
  std::string assignee_patent = "patent_id";
  std::string assignee = "assignee_id";
  std::string inventor_patent = "patent_id";
  std::string inventor = "inventor_id";
  std::string category_patent = "patent_id";
  std::string main_cat = "category_id";
  std::string sub_cat = "subcategory_id";
};

struct IngestPaths {
  std::string citations;
  std::string patents;
  std::string assignees;
  std::string inventors;
  std::string categories;
};

struct IngestStats {
  long citation_rows = 0;
  long skipped_bad_date = 0;       // rows whose grant date failed to parse
  long skipped_no_category = 0;    // citing patents without usable categories
  long duplicate_citations = 0;    // same citing patent repeated for a target
  long chains_dropped_short = 0;
  long chains_dropped_long = 0;
  long targets_kept = 0;
};

// "YYYY-MM-DD" -> days since 1970-01-01; nullopt when unparseable.
std::optional<int> parse_date_days(const std::string& iso);

// Builds one record per target patent whose forward-citation chain falls
// inside [min_chain, max_chain]:
//   - events: grant day + NBER main/sub category of each citing patent,
//     time-sorted, ties broken by citing patent id, one event per citing
//     patent;
//   - assignee/inventor chains: citation days over the whole portfolio of the
//     longest-chain assignee (inventor) of the target.
// Records come back sorted by patent id, so repeated runs over the same
// files produce identical output.
std::vector<PatentRecord> ingest_patentsview(const IngestPaths& paths, const ColumnConfig& columns,
                                             int min_chain = kMinChain, int max_chain = kMaxChain,
                                             IngestStats* stats = nullptr);

}  // namespace pcrnn
