#include "dpsb/harness/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "dpsb/evaluation.hpp"
#include "dpsb/harness/pipeline.hpp"

namespace dpsb::bench {

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path);
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (line.back() == ',') fields.push_back("");
    if (first) {
      table.header = std::move(fields);
      first = false;
    } else {
      table.rows.push_back(std::move(fields));
    }
  }
  return table;
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    out << table.header[i] << (i + 1 < table.header.size() ? "," : "");
  }
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << row[i] << (i + 1 < row.size() ? "," : "");
    }
    out << "\n";
  }
}

std::string render_table(const CsvTable& table) {
  std::vector<std::size_t> width(table.header.size(), 0);
  for (std::size_t i = 0; i < table.header.size(); ++i) width[i] = table.header[i].size();
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size() && i < width.size(); ++i) {
      width[i] = std::max(width[i], row[i].size());
    }
  }
  std::ostringstream out;
  const auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < width.size(); ++i) {
      const std::string& cell = i < row.size() ? row[i] : std::string();
      out << cell << std::string(width[i] - cell.size() + 2, ' ');
    }
    out << "\n";
  };
  emit(table.header);
  std::vector<std::string> rule;
  for (const auto w : width) rule.push_back(std::string(w, '-'));
  emit(rule);
  for (const auto& row : table.rows) emit(row);
  return out.str();
}

namespace {

std::string format_number(double v, const char* fmt = "%.3f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

struct GapCell {
  std::vector<double> values;  // indexed by item order of appearance
  std::map<int, double> by_item;
};

}  // namespace

void Pipeline::report() {
  const auto gaps_path = reports_dir() / "gaps.csv";
  const auto coverage_path = reports_dir() / "coverage.csv";
  const CsvTable gaps = read_csv(gaps_path.string());
  const CsvTable coverage = read_csv(coverage_path.string());

  // key: operator | law | method | denoiser
  std::map<std::array<std::string, 4>, GapCell> cells;
  for (const auto& row : gaps.rows) {
    if (row.size() < 6) continue;
    GapCell& cell = cells[{row[0], row[1], row[2], row[3]}];
    const double value = std::stod(row[5]);
    cell.values.push_back(value);
    cell.by_item[std::stoi(row[4])] = value;
  }

  CsvTable gap_table;
  gap_table.header = {"operator", "law", "method", "denoiser", "mean", "std", "n"};
  for (const auto& [key, cell] : cells) {
    const double n = static_cast<double>(cell.values.size());
    double mean = 0.0;
    for (const double v : cell.values) mean += v;
    mean /= n;
    double var = 0.0;
    for (const double v : cell.values) var += (v - mean) * (v - mean);
    var = n > 1 ? var / (n - 1) : 0.0;
    gap_table.rows.push_back({key[0], key[1], key[2], key[3], format_number(mean, "%.2f"),
                              format_number(std::sqrt(var), "%.2f"),
                              std::to_string(cell.values.size())});
  }
  write_csv((reports_dir() / "gap_table.csv").string(), gap_table);
  {
    std::ofstream out(reports_dir() / "gap_table.txt", std::ios::trunc);
    out << render_table(gap_table);
  }

  // Oracle-vs-external deltas with a signed-rank test, produced only when the
  // same method was run under both denoisers. Missing pairs stay absent.
  CsvTable delta_table;
  delta_table.header = {"operator", "law",        "method", "mean_delta",
                        "std_delta", "p_wilcoxon", "significant"};
  for (const auto& [key, cell] : cells) {
    if (key[3] != "external") continue;
    const auto oracle_it = cells.find({key[0], key[1], key[2], "oracle"});
    if (oracle_it == cells.end()) continue;
    std::vector<double> deltas;
    for (const auto& [item, value] : oracle_it->second.by_item) {
      const auto other = cell.by_item.find(item);
      if (other != cell.by_item.end()) deltas.push_back(value - other->second);
    }
    if (deltas.empty()) continue;
    double mean = 0.0;
    for (const double v : deltas) mean += v;
    mean /= static_cast<double>(deltas.size());
    double var = 0.0;
    for (const double v : deltas) var += (v - mean) * (v - mean);
    var = deltas.size() > 1 ? var / static_cast<double>(deltas.size() - 1) : 0.0;
    const auto test = eval::wilcoxon_signed_rank(deltas);
    delta_table.rows.push_back({key[0], key[1], key[2], format_number(mean, "%.2f"),
                                format_number(std::sqrt(var), "%.2f"),
                                format_number(test.p_two_sided, "%.4f"),
                                test.p_two_sided < 0.05 ? "*" : ""});
  }
  write_csv((reports_dir() / "delta_table.csv").string(), delta_table);
  {
    std::ofstream out(reports_dir() / "delta_table.txt", std::ios::trunc);
    out << render_table(delta_table);
  }

  CsvTable coverage_table;
  coverage_table.header = coverage.header;
  coverage_table.rows = coverage.rows;
  for (auto& row : coverage_table.rows) {
    if (row.size() >= 6) row[5] = format_number(std::stod(row[5]), "%.2f");
  }
  write_csv((reports_dir() / "coverage_table.csv").string(), coverage_table);
  {
    std::ofstream out(reports_dir() / "coverage_table.txt", std::ios::trunc);
    out << render_table(coverage_table);
  }
}

}  // namespace dpsb::bench
