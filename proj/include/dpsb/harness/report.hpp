#pragma once

#include <map>
#include <string>
#include <vector>

namespace dpsb::bench {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);

// Plain-text rendering with aligned columns.
std::string render_table(const CsvTable& table);

}  // namespace dpsb::bench
