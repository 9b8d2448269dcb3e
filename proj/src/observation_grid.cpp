#include "sslab/observation_grid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include "sslab/errors.hpp"

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

long long parse_integer(const std::string& field, int line) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    std::ostringstream msg;
    msg << "line " << line << ": expected an integer, got '" << field << "'";
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

bool ObservationGrid::has_std_error() const {
  return !rows.empty() && std::all_of(rows.begin(), rows.end(),
                                      [](const GridRow& r) { return r.std_error.has_value(); });
}

bool ObservationGrid::has_replicates() const {
  return !rows.empty() && std::all_of(rows.begin(), rows.end(),
                                      [](const GridRow& r) { return r.replicates.has_value(); });
}

std::size_t ObservationGrid::distinct_n() const {
  std::set<long long> values;
  for (const auto& row : rows) values.insert(row.n);
  return values.size();
}

std::size_t ObservationGrid::distinct_L() const {
  std::set<double> values;
  for (const auto& row : rows) values.insert(row.L);
  return values.size();
}

void ObservationGrid::check() const {
  std::set<std::pair<long long, double>> seen;
  for (const auto& row : rows) {
    if (row.n < 1) throw DomainError("grid row has n < 1");
    if (!(row.L > 0.0) || !std::isfinite(row.L)) throw DomainError("grid row has non-positive L");
    if (!(row.err >= 0.0) || !std::isfinite(row.err))
      throw DomainError("grid row has invalid err");
    if (row.std_error && (!(*row.std_error >= 0.0) || !std::isfinite(*row.std_error)))
      throw DomainError("grid row has invalid stderr");
    if (row.replicates && *row.replicates < 1) throw DomainError("grid row has invalid replicates");
    if (!seen.insert({row.n, row.L}).second) {
      std::ostringstream msg;
      msg << "duplicate grid cell (n=" << row.n << ", L=" << format_double(row.L) << ")";
      throw DuplicateCell(msg.str());
    }
  }
}

ObservationGrid grid_from_csv(const std::string& text) {
  std::istringstream stream(text);
  std::string line;
  int line_number = 0;

  bool with_std_error = false;
  bool with_replicates = false;
  bool header_seen = false;
  ObservationGrid grid;

  while (std::getline(stream, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;

    if (!header_seen) {
      const std::vector<std::string> header = split_csv_line(line);
      const bool base = header.size() >= 3 && header[0] == "n" && header[1] == "L" &&
                        header[2] == "err";
      std::size_t next = 3;
      if (base && next < header.size() && header[next] == "stderr") {
        with_std_error = true;
        ++next;
      }
      if (base && next < header.size() && header[next] == "replicates") {
        with_replicates = true;
        ++next;
      }
      if (!base || next != header.size()) {
        std::ostringstream msg;
        msg << "line " << line_number << ": expected header n,L,err[,stderr][,replicates]";
        throw ParseError(msg.str());
      }
      header_seen = true;
      continue;
    }

    const std::vector<std::string> fields = split_csv_line(line);
    const std::size_t expected = 3 + (with_std_error ? 1 : 0) + (with_replicates ? 1 : 0);
    if (fields.size() != expected) {
      std::ostringstream msg;
      msg << "line " << line_number << ": expected " << expected << " fields, got "
          << fields.size();
      throw ParseError(msg.str());
    }
    GridRow row;
    row.n = parse_integer(fields[0], line_number);
    row.L = parse_double(fields[1], line_number);
    row.err = parse_double(fields[2], line_number);
    std::size_t next = 3;
    if (with_std_error) row.std_error = parse_double(fields[next++], line_number);
    if (with_replicates) row.replicates = parse_integer(fields[next++], line_number);
    grid.rows.push_back(row);
  }
  if (!header_seen) throw ParseError("missing CSV header n,L,err[,stderr][,replicates]");
  grid.check();
  return grid;
}

std::string grid_to_csv(const ObservationGrid& grid, const std::string& comment) {
  grid.check();
  const bool with_std_error = grid.has_std_error();
  const bool with_replicates = grid.has_replicates();
  for (const auto& row : grid.rows) {
    if (row.std_error.has_value() != with_std_error ||
        row.replicates.has_value() != with_replicates)
      throw DomainError("grid rows disagree on optional columns");
  }

  std::ostringstream out;
  if (!comment.empty()) out << "# " << comment << "\n";
  out << "n,L,err";
  if (with_std_error) out << ",stderr";
  if (with_replicates) out << ",replicates";
  out << "\n";
  for (const auto& row : grid.rows) {
    out << row.n << ',' << format_double(row.L) << ',' << format_double(row.err);
    if (with_std_error) out << ',' << format_double(*row.std_error);
    if (with_replicates) out << ',' << *row.replicates;
    out << "\n";
  }
  return out.str();
}

ObservationGrid load_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open grid file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return grid_from_csv(buffer.str());
}

void store_grid(const ObservationGrid& grid, const std::string& path, const std::string& comment) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ParseError("cannot open grid file for writing: " + path);
  out << grid_to_csv(grid, comment);
  if (!out) throw ParseError("failed writing grid file: " + path);
}

}  // namespace sslab
