#pragma once

// (n, L, error) measurement grids and their CSV form. Lines starting with '#'
// are comments; numbers round-trip exactly (shortest representation).

#include <optional>
#include <string>
#include <vector>

namespace sslab {

struct GridRow {
  long long n = 0;
  double L = 0.0;
  double err = 0.0;
  std::optional<double> std_error;
  std::optional<long long> replicates;
};

struct ObservationGrid {
  std::vector<GridRow> rows;

  bool has_std_error() const;
  bool has_replicates() const;
  std::size_t distinct_n() const;
  std::size_t distinct_L() const;

  // Finiteness, positivity, and no duplicate (n, L) cells.
  void check() const;
};

ObservationGrid grid_from_csv(const std::string& text);
std::string grid_to_csv(const ObservationGrid& grid, const std::string& comment = "");

ObservationGrid load_grid(const std::string& path);
void store_grid(const ObservationGrid& grid, const std::string& path,
                const std::string& comment = "");

}  // namespace sslab
