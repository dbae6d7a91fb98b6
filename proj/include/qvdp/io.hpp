#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qvdp/tomography.hpp"

namespace qvdp {

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

// Shortest text that reads back to the same double.
std::string fmt_double(double v);

// CSV with leading "# key: value" metadata lines.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}
  void meta(const std::string& key, const std::string& value) { meta_.emplace_back(key, value); }
  void meta(const std::string& key, double value) { meta_.emplace_back(key, fmt_double(value)); }
  void row(const std::vector<double>& values);
  void row_text(const std::vector<std::string>& cells);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;
  void write(const std::string& path) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::pair<std::string, std::string>> meta_;
  std::vector<std::vector<std::string>> rows_;
};

// Long format: axis1, axis2, value (re, im for complex grids). Axis ranges and
// units go in the header.
void write_grid(const std::string& path, const Grid2D& g, const std::string& units1,
                const std::string& units2);

void write_text(const std::string& path, const std::string& text);
void ensure_dir(const std::string& path);

}  // namespace qvdp
