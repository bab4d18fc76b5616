#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "pcrnn/data.hpp"
#include "pcrnn/hawkes.hpp"
#include "pcrnn/ingest.hpp"

using namespace pcrnn;

namespace {

const std::string kFixtureDir = std::string(PCRNN_SOURCE_DIR) + "/tests/fixtures/patentsview";

IngestPaths fixture_paths(const std::string& dir = kFixtureDir) {
  return {dir + "/citations.tsv", dir + "/patents.tsv", dir + "/assignees.tsv",
          dir + "/inventors.tsv", dir + "/categories.tsv"};
}

PatentRecord simple_record(int len) {
  PatentRecord r;
  r.patent_id = "R";
  for (int k = 0; k < len; ++k) r.events.push_back({100.0 + 10.0 * k, k % 7, k % 37});
  return r;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return all;
}

}  // namespace

TEST_CASE("normalization maps the fitted span onto [0, 1] and round-trips") {
  std::vector<PatentRecord> recs{simple_record(5)};  // times 100..140
  auto norm = fit_normalization(recs);
  CHECK(norm.apply(100.0) == 0.0);
  CHECK(norm.apply(140.0) == 1.0);
  CHECK(norm.apply(150.0) > 1.0);   // out-of-span values are not clipped
  CHECK(norm.apply(90.0) < 0.0);
  CHECK(norm.invert(norm.apply(123.0)) == doctest::Approx(123.0).epsilon(1e-9));

  std::vector<PatentRecord> flat{PatentRecord{"F", {{7.0, 0, 0}, {7.0, 1, 1}}, {}, {}}};
  CHECK_THROWS_AS(fit_normalization(flat), NumericError);
}

TEST_CASE("example construction applies the aux cutoff rule") {
  PatentRecord r = simple_record(6);  // events at 100,110,...,150
  r.assignee_events = {95.0, 105.0, 119.9, 120.0, 125.0};
  r.inventor_events = {};
  Normalization norm{100.0, 150.0};
  auto ex = make_example(r, 3, 2, norm);  // window ends at t=120
  // Strictly-before cutoff: 120.0 itself is excluded.
  REQUIRE(ex.assignee_events.size() == 3);
  CHECK(ex.assignee_events[2] == doctest::Approx(norm.apply(119.9)).epsilon(1e-12));
  CHECK(ex.inventor_events.empty());
  CHECK(ex.n == 3);
  CHECK(ex.horizon == 2);
  CHECK(ex.gap(0) == 0.0);
  CHECK(ex.target_gap(0) == doctest::Approx(10.0 / 50.0).epsilon(1e-12));

  // Aux chains keep only the most recent 200 positions.
  PatentRecord big = simple_record(25);
  for (int i = 0; i < 500; ++i) big.assignee_events.push_back(i * 0.1);
  auto ex2 = make_example(big, 20, 5, Normalization{0.0, 340.0});
  CHECK(ex2.assignee_events.size() == 200);

  CHECK_THROWS_AS(make_example(r, 6, 1, norm), ContractError);  // n + l too long
  CHECK_THROWS_AS(make_example(r, 0, 1, norm), ContractError);
  PatentRecord unsorted = simple_record(6);
  std::swap(unsorted.events[1], unsorted.events[2]);
  CHECK_THROWS_AS(make_example(unsorted, 3, 2, norm), OrderingError);
}

TEST_CASE("observation counts") {
  CHECK(observation_count(20, 0.1) == 2);
  CHECK(observation_count(20, 0.8) == 16);
  CHECK(observation_count(3, 0.1) == 1);  // floors to zero, clamped to one
  CHECK_THROWS_AS(observation_count(20, 0.0), ContractError);
  CHECK_THROWS_AS(observation_count(20, 1.0), ContractError);
}

TEST_CASE("sequence file round trip preserves records") {
  HawkesParams p{0.6, 1.2, 2.0, 22.0};
  Rng rng(7);
  auto records = simulate_dataset(p, 5, rng);
  const auto path = std::filesystem::temp_directory_path() / "pcrnn_seq_test.jsonl";
  save_sequence_file(path.string(), records);
  auto loaded = load_sequence_file(path.string());
  REQUIRE(loaded.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(loaded[i].patent_id == records[i].patent_id);
    REQUIRE(loaded[i].events.size() == records[i].events.size());
    for (std::size_t k = 0; k < records[i].events.size(); ++k) {
      CHECK(loaded[i].events[k].t == records[i].events[k].t);
      CHECK(loaded[i].events[k].main_cat == records[i].events[k].main_cat);
      CHECK(loaded[i].events[k].sub_cat == records[i].events[k].sub_cat);
    }
    CHECK(loaded[i].assignee_events == records[i].assignee_events);
    CHECK(loaded[i].inventor_events == records[i].inventor_events);
  }
  std::filesystem::remove(path);

  CHECK_THROWS_AS(load_sequence_file("/nonexistent/nope.jsonl"), SchemaError);
}

TEST_CASE("split matches the 12000/3000 ratio and is seed-stable") {
  std::vector<PatentRecord> records;
  for (int i = 0; i < 15000; ++i) {
    PatentRecord r;
    r.patent_id = "P" + std::to_string(i);
    records.push_back(std::move(r));
  }
  Rng rng(5);
  auto split = split_records(records, 0.8, rng);
  CHECK(split.train.size() == 12000);
  CHECK(split.test.size() == 3000);

  Rng rng2(5);
  auto split2 = split_records(records, 0.8, rng2);
  for (std::size_t i = 0; i < 100; ++i)
    CHECK(split.train[i].patent_id == split2.train[i].patent_id);

  CHECK_THROWS_AS(split_records(records, 1.0, rng), ContractError);
}

TEST_CASE("batches pad with masks that cover exactly the real positions") {
  Normalization norm{0.0, 400.0};
  std::vector<TrainingExample> examples;
  for (int len : {24, 30, 27}) {
    auto rec = simple_record(len);
    rec.assignee_events = {10.0, 20.0, 30.0};
    examples.push_back(make_example(rec, len / 2, len - len / 2, norm));
  }
  Rng rng(3);
  auto batches = make_batches(examples, 3, rng);
  REQUIRE(batches.size() == 1);
  const Batch& b = batches[0];
  REQUIRE(b.members.size() == 3);
  for (std::size_t i = 0; i < b.members.size(); ++i) {
    const auto& m = b.members[i];
    long obs = 0, tgt = 0, aux = 0;
    for (auto v : b.obs_mask[i]) obs += v;
    for (auto v : b.target_mask[i]) tgt += v;
    for (auto v : b.mask_a[i]) aux += v;
    CHECK(obs == m.n);
    CHECK(tgt == m.horizon);
    CHECK(aux == static_cast<long>(m.assignee_events.size()));
    // Every padded (masked-off) position holds the neutral filler.
    for (std::size_t k = 0; k < b.obs_mask[i].size(); ++k)
      if (!b.obs_mask[i][k]) {
        CHECK(b.obs_gaps[i][k] == 0.0);
        CHECK(b.obs_main[i][k] == -1);
      }
    // Unmasked values equal the member's own data.
    for (int k = 0; k < m.n; ++k) CHECK(b.obs_gaps[i][k] == m.gap(k));
  }

  Rng rng2(3);
  auto batches2 = make_batches(examples, 3, rng2);
  CHECK(batches2[0].members[0].patent_id == batches[0].members[0].patent_id);
  CHECK_THROWS_AS(make_batches(examples, 0, rng), ContractError);
}

TEST_CASE("date parsing") {
  CHECK(parse_date_days("1970-01-01") == 0);
  CHECK(parse_date_days("1970-01-02") == 1);
  CHECK(parse_date_days("1990-01-01") == 7305);
  CHECK(!parse_date_days("not-a-date"));
  CHECK(!parse_date_days("1990-13-01"));
  CHECK(!parse_date_days("19900101"));
}

TEST_CASE("ingestion of the bundled fixture") {
  IngestStats stats;
  auto records = ingest_patentsview(fixture_paths(), ColumnConfig{}, kMinChain, kMaxChain, &stats);

  REQUIRE(records.size() == 5);
  CHECK(records[0].patent_id == "T001");
  CHECK(records[1].patent_id == "T003");
  CHECK(records[2].patent_id == "T004");
  CHECK(records[3].patent_id == "T005");
  CHECK(records[4].patent_id == "T006");

  CHECK(records[0].events.size() == 25);  // duplicate citing row collapsed
  CHECK(records[1].events.size() == 30);
  CHECK(records[2].events.size() == 20);  // boundary length kept
  CHECK(records[3].events.size() == 22);
  CHECK(records[4].events.size() == 21);

  for (const auto& r : records) {
    CHECK(r.events.size() >= static_cast<std::size_t>(kMinChain));
    CHECK(r.events.size() <= static_cast<std::size_t>(kMaxChain));
    for (std::size_t k = 0; k < r.events.size(); ++k) {
      CHECK(r.events[k].main_cat >= 0);
      CHECK(r.events[k].main_cat <= 6);
      CHECK(r.events[k].sub_cat >= 0);
      CHECK(r.events[k].sub_cat <= 36);
      if (k > 0) CHECK(r.events[k].t >= r.events[k - 1].t);
    }
  }

  // Multi-assignee target uses the longest portfolio chain (A1: 30 + 19).
  CHECK(records[1].assignee_events.size() == 49);
  CHECK(records[1].inventor_events.size() == 46);
  // Target with no assignee rows gets an empty chain.
  CHECK(records[4].assignee_events.empty());

  CHECK(stats.targets_kept == 5);
  CHECK(stats.duplicate_citations == 1);
  CHECK(stats.skipped_no_category == 1);
  CHECK(stats.skipped_bad_date >= 1);
  CHECK(stats.chains_dropped_short == 5);  // T002 and the four aux-only patents
  CHECK(stats.chains_dropped_long == 0);
}

TEST_CASE("ingestion is idempotent") {
  auto a = ingest_patentsview(fixture_paths(), ColumnConfig{});
  auto b = ingest_patentsview(fixture_paths(), ColumnConfig{});
  const auto t1 = std::filesystem::temp_directory_path() / "pcrnn_ingest_a.jsonl";
  const auto t2 = std::filesystem::temp_directory_path() / "pcrnn_ingest_b.jsonl";
  save_sequence_file(t1.string(), a);
  save_sequence_file(t2.string(), b);
  CHECK(file_digest(t1.string()) == file_digest(t2.string()));
  std::filesystem::remove(t1);
  std::filesystem::remove(t2);
}

TEST_CASE("ingestion drops chains above the upper bound") {
  const auto dir = std::filesystem::temp_directory_path() / "pcrnn_long_chain";
  std::filesystem::create_directories(dir);
  {
    std::ofstream cits(dir / "citations.tsv"), pats(dir / "patents.tsv"),
        asgn(dir / "assignees.tsv"), invs(dir / "inventors.tsv"), cats(dir / "categories.tsv");
    cits << "patent_id\tcitation_id\n";
    pats << "patent_id\tdate\n";
    asgn << "patent_id\tassignee_id\n";
    invs << "patent_id\tinventor_id\n";
    cats << "patent_id\tcategory_id\tsubcategory_id\n";
    pats << "BIG\t1989-01-01\n";
    for (int k = 0; k < 201; ++k) {
      cits << "C" << k << "\tBIG\n";
      pats << "C" << k << "\t" << (1990 + k / 300) << "-01-" << (1 + k % 28 < 10 ? "0" : "")
           << 1 + k % 28 << "\n";
      cats << "C" << k << "\t0\t0\n";
    }
  }
  IngestStats stats;
  auto records =
      ingest_patentsview(fixture_paths(dir.string()), ColumnConfig{}, kMinChain, kMaxChain, &stats);
  CHECK(records.empty());
  CHECK(stats.chains_dropped_long == 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("missing columns are named in the error") {
  const auto dir = std::filesystem::temp_directory_path() / "pcrnn_bad_header";
  std::filesystem::create_directories(dir);
  {
    std::ofstream cits(dir / "citations.tsv"), pats(dir / "patents.tsv"),
        asgn(dir / "assignees.tsv"), invs(dir / "inventors.tsv"), cats(dir / "categories.tsv");
    cits << "patent_id\tcitation_id\n";
    pats << "patent_id\tgranted\n";  // wrong name for the date column
    asgn << "patent_id\tassignee_id\n";
    invs << "patent_id\tinventor_id\n";
    cats << "patent_id\tcategory_id\tsubcategory_id\n";
  }
  CHECK_THROWS_WITH_AS(ingest_patentsview(fixture_paths(dir.string()), ColumnConfig{}),
                       doctest::Contains("date"), SchemaError);
  std::filesystem::remove_all(dir);
}
