#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "affine/linalg.hpp"

namespace affine {

enum class Format { Table, Csv, Json };

/// Empty cells (std::monostate) render as "-" in tables, as empty CSV fields
/// and as JSON null. Non-finite doubles render the same way.
using Cell = std::variant<std::monostate, std::string, double, long long, bool, std::vector<double>>;

Cell cell(const Vec& v);
Cell cell(double x);

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

struct Report {
  std::string command;
  std::vector<std::pair<std::string, Cell>> meta;
  std::vector<Table> tables;
  std::vector<std::pair<std::string, Cell>> summary;
  int exit_code = 0;
};

/// Tables, meta and summary in the requested format. In CSV mode the body
/// holds the tables only; see render_summary.
std::string render(const Report& r, Format f);
/// "key: value" lines for meta and summary, used next to CSV output.
std::string render_summary(const Report& r);

}  // namespace affine
