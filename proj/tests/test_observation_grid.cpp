#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <string>

#include "sslab/errors.hpp"
#include "sslab/observation_grid.hpp"

using namespace sslab;

namespace {

ObservationGrid sample_grid(int rows, bool with_std_error, bool with_replicates) {
  ObservationGrid grid;
  for (int i = 0; i < rows; ++i) {
    GridRow row;
    row.n = 100 + 37 * i;
    row.L = 10.0 + 0.1 * i + 1e-13 * i;  // exercise round-tripping of awkward values
    row.err = 1.0 / (1.0 + i) + 1e-17;
    if (with_std_error) row.std_error = 0.001 * (i + 1);
    if (with_replicates) row.replicates = 50 + i;
    grid.rows.push_back(row);
  }
  return grid;
}

}  // namespace

TEST_CASE("csv text round-trips byte for byte") {
  const ObservationGrid grid = sample_grid(30, true, true);
  const std::string text = grid_to_csv(grid);
  const ObservationGrid parsed = grid_from_csv(text);
  CHECK(parsed.rows.size() == 30);
  CHECK(grid_to_csv(parsed) == text);
  for (std::size_t i = 0; i < parsed.rows.size(); ++i) {
    CHECK(parsed.rows[i].n == grid.rows[i].n);
    CHECK(parsed.rows[i].L == grid.rows[i].L);
    CHECK(parsed.rows[i].err == grid.rows[i].err);
    CHECK(*parsed.rows[i].std_error == *grid.rows[i].std_error);
    CHECK(*parsed.rows[i].replicates == *grid.rows[i].replicates);
  }
}

TEST_CASE("optional columns appear only when present") {
  CHECK(grid_to_csv(sample_grid(2, false, false)).find("stderr") == std::string::npos);
  CHECK(grid_to_csv(sample_grid(2, true, false)).find("n,L,err,stderr\n") != std::string::npos);
  CHECK(grid_to_csv(sample_grid(2, false, true)).find("n,L,err,replicates\n") !=
        std::string::npos);
  CHECK(grid_to_csv(sample_grid(2, true, true)).find("n,L,err,stderr,replicates\n") !=
        std::string::npos);

  const ObservationGrid bare = grid_from_csv("n,L,err\n8,3,0.5\n");
  CHECK_FALSE(bare.rows[0].std_error.has_value());
  CHECK_FALSE(bare.rows[0].replicates.has_value());

  const ObservationGrid reps_only = grid_from_csv("n,L,err,replicates\n8,3,0.5,40\n");
  CHECK(*reps_only.rows[0].replicates == 40);
  CHECK_FALSE(reps_only.rows[0].std_error.has_value());

  ObservationGrid mixed = sample_grid(3, true, false);
  mixed.rows[1].std_error.reset();
  CHECK_THROWS_AS(grid_to_csv(mixed), DomainError);
}

TEST_CASE("an empty data section loads as zero rows") {
  const ObservationGrid grid = grid_from_csv("n,L,err\n");
  CHECK(grid.rows.empty());
}

TEST_CASE("comments and blank lines are skipped") {
  const std::string text =
      "# produced by a tool\n"
      "n,L,err\n"
      "\n"
      "# mid-file comment\n"
      "12,7,0.25\n";
  const ObservationGrid grid = grid_from_csv(text);
  CHECK(grid.rows.size() == 1);
  CHECK(grid.rows[0].n == 12);
}

TEST_CASE("malformed rows report their line number") {
  const std::string text = "n,L,err\n10,5,0.5\n12,abc,0.3\n";
  try {
    grid_from_csv(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }

  CHECK_THROWS_AS(grid_from_csv("n,L,err\n10,5\n"), ParseError);
  CHECK_THROWS_AS(grid_from_csv("x,y,z\n1,2,3\n"), ParseError);
  CHECK_THROWS_AS(grid_from_csv(""), ParseError);
  CHECK_THROWS_AS(grid_from_csv("n,L,err,bogus\n1,2,3,4\n"), ParseError);
}

TEST_CASE("duplicate cells are rejected") {
  CHECK_THROWS_AS(grid_from_csv("n,L,err\n10,5,0.5\n10,5,0.6\n"), DuplicateCell);
  // Same n with different L is fine.
  CHECK_NOTHROW(grid_from_csv("n,L,err\n10,5,0.5\n10,6,0.6\n"));
}

TEST_CASE("file round trip preserves bytes") {
  const ObservationGrid grid = sample_grid(8, true, true);
  const std::string path = "test_grid_roundtrip.csv";
  store_grid(grid, path, "unit test");
  const ObservationGrid loaded = load_grid(path);
  CHECK(grid_to_csv(loaded) == grid_to_csv(grid));
  std::remove(path.c_str());

  CHECK_THROWS_AS(load_grid("does_not_exist.csv"), ParseError);
}
