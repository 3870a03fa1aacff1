#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace d2dstore::app {

// 12 significant digits; nan and inf spelled out.
std::string format_number(double x);

// A CSV table held as the exact cell text that is written, so that reading a
// written table back gives an identical table.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
  bool operator==(const Table&) const = default;
};

void write_csv(std::ostream& os, const Table& t);
Table read_csv(std::istream& is);

// Refuses to replace an existing file unless force is set.
void check_writable(const std::filesystem::path& path, bool force);
void write_csv_file(const std::filesystem::path& path, const Table& t, bool force);

}  // namespace d2dstore::app
