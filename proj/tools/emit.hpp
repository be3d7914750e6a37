#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace cli {

struct Null {};
using Cell = std::variant<Null, bool, int64_t, uint64_t, double, std::string>;

// 17 significant digits, scientific, locale-independent; "inf", "-inf", "nan".
std::string format_double(double v);

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

struct Report {
  std::string command;
  std::vector<Table> tables;
};

// CSV: one header + rows per table, tables separated by a blank line.
void write_csv(std::ostream& out, const Report& report);
// {"command": ..., "<table name>": [{column: value, ...}, ...], ...}
void write_json(std::ostream& out, const Report& report);

}  // namespace cli
