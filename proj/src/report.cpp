#include "affine/report.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <json.hpp>

namespace affine {

Cell cell(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }
Cell cell(double x) { return std::isfinite(x) ? Cell(x) : Cell(); }

void Table::add(std::vector<Cell> row) { rows.push_back(std::move(row)); }

namespace {

std::string number(double x, bool precise) {
  if (!std::isfinite(x)) return {};
  return precise ? fmt::format("{:.12e}", x) : fmt::format("{:.4e}", x);
}

std::string text(const Cell& c, bool precise, const char* sep) {
  struct Visitor {
    bool precise;
    const char* sep;
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(double x) const { return number(x, precise); }
    std::string operator()(long long x) const { return std::to_string(x); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(const std::vector<double>& v) const {
      std::string out = precise ? "" : "(";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += sep;
        out += precise ? number(v[i], true) : fmt::format("{:.6g}", v[i]);
      }
      return precise ? out : out + ")";
    }
  };
  return std::visit(Visitor{precise, sep}, c);
}

nlohmann::ordered_json to_json(const Cell& c) {
  struct Visitor {
    nlohmann::ordered_json operator()(std::monostate) const { return nullptr; }
    nlohmann::ordered_json operator()(const std::string& s) const { return s; }
    nlohmann::ordered_json operator()(double x) const {
      return std::isfinite(x) ? nlohmann::ordered_json(x) : nlohmann::ordered_json(nullptr);
    }
    nlohmann::ordered_json operator()(long long x) const { return x; }
    nlohmann::ordered_json operator()(bool b) const { return b; }
    nlohmann::ordered_json operator()(const std::vector<double>& v) const {
      auto arr = nlohmann::ordered_json::array();
      for (double x : v) arr.push_back(std::isfinite(x) ? nlohmann::ordered_json(x) : nlohmann::ordered_json(nullptr));
      return arr;
    }
  };
  return std::visit(Visitor{}, c);
}

std::string csv_field(std::string s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string render_table(const Table& t) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back(t.columns);
  for (const auto& row : t.rows) {
    std::vector<std::string> r;
    for (const auto& c : row) {
      std::string s = text(c, false, ", ");
      r.push_back(s.empty() ? "-" : s);
    }
    cells.push_back(std::move(r));
  }
  std::vector<std::size_t> width(t.columns.size(), 0);
  for (const auto& r : cells)
    for (std::size_t i = 0; i < r.size() && i < width.size(); ++i) width[i] = std::max(width[i], r[i].size());
  std::string out = "[" + t.name + "]\n";
  for (std::size_t k = 0; k < cells.size(); ++k) {
    std::string line;
    for (std::size_t i = 0; i < cells[k].size() && i < width.size(); ++i) {
      if (i) line += "  ";
      line += fmt::format("{:<{}}", cells[k][i], width[i]);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
    if (k == 0) {
      std::size_t total = 0;
      for (std::size_t w : width) total += w;
      out += std::string(total + 2 * (width.empty() ? 0 : width.size() - 1), '-') + "\n";
    }
  }
  return out;
}

std::string render_pairs(const std::vector<std::pair<std::string, Cell>>& pairs) {
  std::string out;
  for (const auto& [k, v] : pairs) {
    const std::string s = text(v, false, ", ");
    out += k + ": " + (s.empty() ? "-" : s) + "\n";
  }
  return out;
}

}  // namespace

std::string render_summary(const Report& r) { return render_pairs(r.meta) + render_pairs(r.summary); }

std::string render(const Report& r, Format f) {
  switch (f) {
    case Format::Table: {
      std::string out = r.command + "\n" + render_pairs(r.meta);
      for (const auto& t : r.tables) out += "\n" + render_table(t);
      if (!r.summary.empty()) out += "\n" + render_pairs(r.summary);
      return out;
    }
    case Format::Csv: {
      std::string out;
      for (std::size_t k = 0; k < r.tables.size(); ++k) {
        const Table& t = r.tables[k];
        if (k) out += "\n";
        if (r.tables.size() > 1) out += "# " + t.name + "\n";
        std::string header;
        for (std::size_t i = 0; i < t.columns.size(); ++i) header += (i ? "," : "") + csv_field(t.columns[i]);
        out += header + "\n";
        for (const auto& row : t.rows) {
          std::string line;
          for (std::size_t i = 0; i < row.size(); ++i) line += (i ? "," : "") + csv_field(text(row[i], true, " "));
          out += line + "\n";
        }
      }
      return out;
    }
    case Format::Json: {
      nlohmann::ordered_json j;
      j["command"] = r.command;
      auto meta = nlohmann::ordered_json::object();
      for (const auto& [k, v] : r.meta) meta[k] = to_json(v);
      j["meta"] = meta;
      auto tables = nlohmann::ordered_json::object();
      for (const auto& t : r.tables) {
        auto rows = nlohmann::ordered_json::array();
        for (const auto& row : t.rows) {
          nlohmann::ordered_json o = nlohmann::ordered_json::object();
          for (std::size_t i = 0; i < row.size() && i < t.columns.size(); ++i) o[t.columns[i]] = to_json(row[i]);
          rows.push_back(o);
        }
        tables[t.name] = rows;
      }
      j["tables"] = tables;
      auto summary = nlohmann::ordered_json::object();
      for (const auto& [k, v] : r.summary) summary[k] = to_json(v);
      j["summary"] = summary;
      j["exit_code"] = r.exit_code;
      return j.dump(2) + "\n";
    }
  }
  return {};
}

}  // namespace affine
