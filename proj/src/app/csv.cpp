#include "d2dstore/app/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "d2dstore/app/config.hpp"

namespace d2dstore::app {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

void Table::add(std::vector<std::string> row) {
  if (row.size() != header.size()) throw std::logic_error("row width does not match the header");
  rows.push_back(std::move(row));
}

namespace {

void write_cell(std::ostream& os, const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) {
    os << cell;
    return;
  }
  os << '"';
  for (char c : cell) {
    if (c == '"') os << '"';
    os << c;
  }
  os << '"';
}

void write_row(std::ostream& os, const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i > 0) os << ',';
    write_cell(os, row[i]);
  }
  os << '\n';
}

// Reads one record; returns false at end of input.
bool read_row(std::istream& is, std::vector<std::string>& row) {
  row.clear();
  if (is.peek() == std::char_traits<char>::eof()) return false;
  std::string cell;
  bool quoted = false;
  char c;
  while (is.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (is.peek() == '"') {
          cell += static_cast<char>(is.get());
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(cell));
      cell.clear();
    } else if (c == '\n') {
      break;
    } else {
      cell += c;
    }
  }
  row.push_back(std::move(cell));
  return true;
}

}  // namespace

void write_csv(std::ostream& os, const Table& t) {
  write_row(os, t.header);
  for (const auto& r : t.rows) write_row(os, r);
}

Table read_csv(std::istream& is) {
  Table t;
  if (!read_row(is, t.header)) return t;
  std::vector<std::string> row;
  while (read_row(is, row)) t.add(row);
  return t;
}

void check_writable(const std::filesystem::path& path, bool force) {
  if (!force && std::filesystem::exists(path)) {
    throw ConfigError("refusing to overwrite '" + path.string() + "' (use --force)");
  }
}

void write_csv_file(const std::filesystem::path& path, const Table& t, bool force) {
  check_writable(path, force);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
  write_csv(os, t);
}

}  // namespace d2dstore::app
