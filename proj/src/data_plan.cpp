#include "sslab/data_plan.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <system_error>

#include "sslab/errors.hpp"
#include "sslab/rng.hpp"

namespace sslab {

namespace {

std::string format_double(double value) {
  char buffer[40];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

double parse_double(const std::string& field, int line) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    std::ostringstream msg;
    msg << "line " << line << ": expected a number, got '" << field << "'";
    throw ParseError(msg.str());
  }
  return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

double CatalogItem::size_at(double level) const {
  if (synthetic) return s0 * std::exp2(-decay * level);
  if (level_bytes.empty()) throw DomainError("item '" + id + "' has no size model");
  if (level <= 0.0) return level_bytes.front();
  const double last = static_cast<double>(level_bytes.size() - 1);
  if (level >= last) return level_bytes.back();
  const std::size_t lower = static_cast<std::size_t>(std::floor(level));
  const double t = level - static_cast<double>(lower);
  return level_bytes[lower] + t * (level_bytes[lower + 1] - level_bytes[lower]);
}

void ItemCatalog::check() const {
  std::set<std::string> ids;
  for (const auto& item : items) {
    if (item.id.empty()) throw DomainError("catalog item with empty id");
    if (!ids.insert(item.id).second) throw DomainError("duplicate catalog id '" + item.id + "'");
    if (item.synthetic) {
      if (!(item.s0 > 0.0)) throw DomainError("item '" + item.id + "': s0 must be > 0");
      if (!(item.decay >= 0.0)) throw DomainError("item '" + item.id + "': decay must be >= 0");
    } else {
      if (item.level_bytes.empty())
        throw DomainError("item '" + item.id + "' has no size model");
      for (std::size_t k = 0; k + 1 < item.level_bytes.size(); ++k)
        if (item.level_bytes[k + 1] > item.level_bytes[k])
          throw DomainError("item '" + item.id + "': size must be non-increasing in level");
      for (double bytes : item.level_bytes)
        if (!(bytes >= 0.0) || !std::isfinite(bytes))
          throw DomainError("item '" + item.id + "': invalid byte size");
    }
  }
}

ItemCatalog catalog_from_csv(const std::string& text) {
  std::istringstream stream(text);
  std::string line;
  int line_number = 0;
  bool header_seen = false;
  bool synthetic = false;
  std::size_t level_columns = 0;
  ItemCatalog catalog;

  while (std::getline(stream, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;

    const std::vector<std::string> fields = split_csv_line(line);
    if (!header_seen) {
      if (fields.size() >= 2 && fields[0] == "id" && fields[1] == "class") {
        if (fields.size() == 4 && fields[2] == "s0" && fields[3] == "decay") {
          synthetic = true;
        } else if (fields.size() >= 3) {
          for (std::size_t k = 2; k < fields.size(); ++k) {
            std::ostringstream expected;
            expected << "level_" << (k - 2) << "_bytes";
            if (fields[k] != expected.str()) {
              std::ostringstream msg;
              msg << "line " << line_number << ": expected column '" << expected.str()
                  << "', got '" << fields[k] << "'";
              throw ParseError(msg.str());
            }
          }
          level_columns = fields.size() - 2;
        } else {
          throw ParseError("catalog header must be id,class,s0,decay or id,class,level_0_bytes,...");
        }
        header_seen = true;
        continue;
      }
      throw ParseError("catalog header must start with id,class");
    }

    const std::size_t expected = 2 + (synthetic ? 2 : level_columns);
    if (fields.size() != expected) {
      std::ostringstream msg;
      msg << "line " << line_number << ": expected " << expected << " fields, got "
          << fields.size();
      throw ParseError(msg.str());
    }
    CatalogItem item;
    item.id = fields[0];
    if (!fields[1].empty()) item.class_label = fields[1];
    item.synthetic = synthetic;
    if (synthetic) {
      item.s0 = parse_double(fields[2], line_number);
      item.decay = parse_double(fields[3], line_number);
    } else {
      item.level_bytes.reserve(level_columns);
      for (std::size_t k = 2; k < fields.size(); ++k)
        item.level_bytes.push_back(parse_double(fields[k], line_number));
    }
    catalog.items.push_back(std::move(item));
  }
  if (!header_seen) throw ParseError("missing catalog header");
  catalog.check();
  return catalog;
}

ItemCatalog load_catalog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open catalog file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return catalog_from_csv(buffer.str());
}

std::vector<std::string> stratified_subset(const ItemCatalog& catalog, double fraction,
                                           std::uint64_t seed) {
  catalog.check();
  if (!(fraction > 0.0 && fraction <= 1.0)) throw DomainError("fraction must lie in (0, 1]");
  if (catalog.items.empty()) throw DomainError("catalog is empty");

  // Class order is lexicographic so the result does not depend on row order.
  std::map<std::string, std::vector<std::size_t>> classes;
  for (std::size_t i = 0; i < catalog.items.size(); ++i) {
    const auto& item = catalog.items[i];
    if (!item.class_label) throw MissingLabels("item '" + item.id + "' has no class label");
    classes[*item.class_label].push_back(i);
  }

  const long long target_total =
      std::llround(fraction * static_cast<double>(catalog.items.size()));

  struct ClassQuota {
    std::string name;
    std::vector<std::size_t> members;
    long long count = 0;
    double remainder = 0.0;
  };
  std::vector<ClassQuota> quotas;
  quotas.reserve(classes.size());
  long long assigned = 0;
  for (auto& [name, members] : classes) {
    ClassQuota quota;
    quota.name = name;
    quota.members = std::move(members);
    const double exact = fraction * static_cast<double>(quota.members.size());
    quota.count = static_cast<long long>(std::floor(exact));
    quota.remainder = exact - static_cast<double>(quota.count);
    assigned += quota.count;
    quotas.push_back(std::move(quota));
  }

  long long remaining = target_total - assigned;
  std::vector<std::size_t> order(quotas.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (quotas[a].remainder != quotas[b].remainder)
      return quotas[a].remainder > quotas[b].remainder;
    return quotas[a].name < quotas[b].name;
  });
  for (std::size_t i = 0; i < order.size() && remaining > 0; ++i) {
    ClassQuota& quota = quotas[order[i]];
    if (quota.count < static_cast<long long>(quota.members.size())) {
      ++quota.count;
      --remaining;
    }
  }

  // Members are shuffled per class; items enter sorted by id so the draw does
  // not depend on catalog order either.
  std::set<std::size_t> chosen;
  for (std::size_t c = 0; c < quotas.size(); ++c) {
    ClassQuota& quota = quotas[c];
    std::sort(quota.members.begin(), quota.members.end(), [&](std::size_t a, std::size_t b) {
      return catalog.items[a].id < catalog.items[b].id;
    });
    StreamRng rng = StreamRng::keyed(seed, static_cast<std::uint64_t>(StreamTag::subset_shuffle),
                                     static_cast<std::uint64_t>(c));
    for (std::size_t i = quota.members.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
      std::swap(quota.members[i - 1], quota.members[j]);
    }
    for (long long k = 0; k < quota.count; ++k) chosen.insert(quota.members[static_cast<std::size_t>(k)]);
  }

  std::vector<std::string> ids;
  ids.reserve(chosen.size());
  for (std::size_t i = 0; i < catalog.items.size(); ++i)
    if (chosen.count(i)) ids.push_back(catalog.items[i].id);
  return ids;
}

std::vector<double> rank_levels(std::size_t k, double level_min, double level_max) {
  if (k < 2) throw DegenerateSubset("rank mapping needs at least 2 items");
  std::vector<double> levels(k);
  for (std::size_t i = 0; i < k; ++i)
    levels[i] = level_min + static_cast<double>(i) / static_cast<double>(k - 1) *
                                (level_max - level_min);
  return levels;
}

CompressionPlan randomized_levels(const ItemCatalog& catalog,
                                  const std::vector<std::string>& subset, double budget_bytes,
                                  double level_min0, double level_max_cap, std::uint64_t seed) {
  catalog.check();
  if (subset.size() < 2) throw DegenerateSubset("need at least 2 items to spread levels");
  if (!(budget_bytes > 0.0)) throw DomainError("budget must be > 0");
  if (!(level_min0 <= level_max_cap)) throw DomainError("level_min0 must not exceed the cap");

  std::map<std::string, const CatalogItem*> by_id;
  for (const auto& item : catalog.items) by_id[item.id] = &item;
  std::vector<const CatalogItem*> items;
  items.reserve(subset.size());
  for (const auto& id : subset) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw DomainError("unknown item id '" + id + "'");
    items.push_back(it->second);
  }

  // Random order; ties in the draw fall back to id order so ranks are stable.
  const std::size_t k = items.size();
  StreamRng rng = StreamRng::keyed(seed, static_cast<std::uint64_t>(StreamTag::plan_permutation));
  std::vector<std::uint64_t> keys(k);
  for (auto& key : keys) key = rng.next_u64();
  std::vector<std::size_t> rank_of_item(k);
  {
    std::vector<std::size_t> order(k);
    for (std::size_t i = 0; i < k; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (keys[a] != keys[b]) return keys[a] < keys[b];
      return items[a]->id < items[b]->id;
    });
    for (std::size_t rank = 0; rank < k; ++rank) rank_of_item[order[rank]] = rank;
  }

  const auto total_at = [&](double level_min, double level_max) {
    const std::vector<double> levels = rank_levels(k, level_min, level_max);
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) total += items[i]->size_at(levels[rank_of_item[i]]);
    return total;
  };

  constexpr double kTolerance = 0.01;
  const auto within = [&](double total) {
    return std::abs(total - budget_bytes) <= kTolerance * budget_bytes;
  };

  double level_min = level_min0;
  double level_max = level_min0;
  double total = total_at(level_min, level_max);

  if (total > budget_bytes) {
    // Phase 1: raise level_max toward the cap.
    double lo = level_min0, hi = level_max_cap;
    const double at_cap = total_at(level_min0, level_max_cap);
    if (at_cap > budget_bytes && !within(at_cap)) {
      // Phase 2: level_max pinned at the cap, raise level_min.
      const double all_cap = total_at(level_max_cap, level_max_cap);
      if (all_cap > budget_bytes && !within(all_cap))
        throw BudgetInfeasible("budget below the fully compressed subset size");
      level_max = level_max_cap;
      double lo2 = level_min0, hi2 = level_max_cap;
      for (int step = 0; step < 60; ++step) {
        level_min = 0.5 * (lo2 + hi2);
        total = total_at(level_min, level_max);
        if (within(total)) break;
        if (total > budget_bytes)
          lo2 = level_min;
        else
          hi2 = level_min;
      }
    } else {
      for (int step = 0; step < 60; ++step) {
        level_max = 0.5 * (lo + hi);
        total = total_at(level_min, level_max);
        if (within(total)) break;
        if (total > budget_bytes)
          lo = level_max;
        else
          hi = level_max;
      }
    }
    if (!within(total)) throw BracketFailure("level search did not reach the budget tolerance");
  }
  // else: the whole subset already fits at the least compressed level.

  CompressionPlan plan;
  plan.target_bytes = budget_bytes;
  plan.level_min = level_min;
  plan.level_max = level_max;
  const std::vector<double> levels = rank_levels(k, level_min, level_max);
  plan.assignments.reserve(k);
  plan.total_bytes = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    PlanAssignment assignment;
    assignment.id = items[i]->id;
    assignment.level = levels[rank_of_item[i]];
    assignment.bytes = items[i]->size_at(assignment.level);
    plan.total_bytes += assignment.bytes;
    plan.assignments.push_back(std::move(assignment));
  }
  return plan;
}

std::string plan_to_csv(const CompressionPlan& plan, const std::string& comment) {
  std::ostringstream out;
  if (!comment.empty()) out << "# " << comment << "\n";
  out << "id,level,bytes\n";
  for (const auto& assignment : plan.assignments)
    out << assignment.id << ',' << format_double(assignment.level) << ','
        << format_double(assignment.bytes) << "\n";
  return out.str();
}

void store_plan(const CompressionPlan& plan, const std::string& path,
                const std::string& comment) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ParseError("cannot open plan file for writing: " + path);
  out << plan_to_csv(plan, comment);
  if (!out) throw ParseError("failed writing plan file: " + path);
}

}  // namespace sslab
