#include "qvdp/io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace qvdp {

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fmt_double(double v) {
  if (v == 0.0) return "0";  // folds -0
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void CsvTable::row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  for (double v : values) cells.push_back(fmt_double(v));
  row_text(cells);
}

void CsvTable::row_text(const std::vector<std::string>& cells) {
  if (cells.size() != columns_.size())
    throw Error(ErrorKind::InvalidArgument, "CSV row width does not match the header");
  rows_.push_back(cells);
}

std::string CsvTable::str() const {
  std::ostringstream o;
  for (const auto& [k, v] : meta_) o << "# " << k << ": " << v << "\n";
  for (std::size_t i = 0; i < columns_.size(); ++i) o << (i ? "," : "") << columns_[i];
  o << "\n";
  for (const auto& r : rows_) {
    for (std::size_t i = 0; i < r.size(); ++i) o << (i ? "," : "") << r[i];
    o << "\n";
  }
  return o.str();
}

void CsvTable::write(const std::string& path) const { write_text(path, str()); }

void write_grid(const std::string& path, const Grid2D& g, const std::string& units1,
                const std::string& units2) {
  std::vector<std::string> cols{g.label1, g.label2};
  if (g.complex_valued) {
    cols.push_back(g.quantity + "_re");
    cols.push_back(g.quantity + "_im");
  } else {
    cols.push_back(g.quantity);
  }
  CsvTable t(cols);
  t.meta("quantity", g.quantity);
  t.meta(g.label1 + "_range", fmt_double(g.axis1.min) + " .. " + fmt_double(g.axis1.max) + " (" +
                                  std::to_string(g.axis1.points) + " points, " + units1 + ")");
  t.meta(g.label2 + "_range", fmt_double(g.axis2.min) + " .. " + fmt_double(g.axis2.max) + " (" +
                                  std::to_string(g.axis2.points) + " points, " + units2 + ")");
  for (const auto& [k, v] : g.meta) t.meta(k, v);
  for (const auto& w : g.warnings) t.meta("warning", w);
  for (int i = 0; i < g.axis1.points; ++i)
    for (int j = 0; j < g.axis2.points; ++j) {
      if (g.complex_valued)
        t.row({g.axis1.at(i), g.axis2.at(j), g.values(i, j).real(), g.values(i, j).imag()});
      else
        t.row({g.axis1.at(i), g.axis2.at(j), g.values(i, j).real()});
    }
  t.write(path);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

void ensure_dir(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + path + ": " + ec.message());
}

}  // namespace qvdp
