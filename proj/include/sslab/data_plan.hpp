#pragma once

// Data-preparation plans: stratified subsets of an item catalog and
// rank-to-level randomized compression assignments under a byte budget.
// "Level" is an abstract monotone compression knob; each item carries a size
// model mapping level to bytes (a table over integer levels, interpolated
// linearly, or s0 * 2^(-decay * level)).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sslab {

struct CatalogItem {
  std::string id;
  std::optional<std::string> class_label;

  bool synthetic = false;
  std::vector<double> level_bytes;  // table form, bytes at levels 0..K
  double s0 = 0.0;                  // synthetic form
  double decay = 1.0;

  double size_at(double level) const;
};

struct ItemCatalog {
  std::vector<CatalogItem> items;

  void check() const;  // ids unique and non-empty, size models monotone
};

ItemCatalog catalog_from_csv(const std::string& text);
ItemCatalog load_catalog(const std::string& path);

// Per-class counts by largest remainder so the total matches
// round(fraction * item count); members are drawn without replacement.
// Returned ids preserve catalog order.
std::vector<std::string> stratified_subset(const ItemCatalog& catalog, double fraction,
                                           std::uint64_t seed);

struct PlanAssignment {
  std::string id;
  double level = 0.0;
  double bytes = 0.0;
};

struct CompressionPlan {
  std::vector<PlanAssignment> assignments;
  double total_bytes = 0.0;
  double target_bytes = 0.0;
  double level_min = 0.0;
  double level_max = 0.0;
};

// Rank i of k maps to level_min + i/(k-1) * (level_max - level_min).
std::vector<double> rank_levels(std::size_t k, double level_min, double level_max);

// Random permutation -> linear rank-to-level map; level_max is bisected up
// from level_min0 until the subset fits the budget (within 1%), then
// level_min is raised once level_max hits the cap.
CompressionPlan randomized_levels(const ItemCatalog& catalog,
                                  const std::vector<std::string>& subset, double budget_bytes,
                                  double level_min0, double level_max_cap, std::uint64_t seed);

std::string plan_to_csv(const CompressionPlan& plan, const std::string& comment = "");
void store_plan(const CompressionPlan& plan, const std::string& path,
                const std::string& comment = "");

}  // namespace sslab
