#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace pointpe {

std::uint64_t fnv1a64(std::string_view bytes);
std::string hash_hex(std::uint64_t h);

/// %.17g — round-trips doubles exactly and is locale-independent.
std::string format_double(double v);
/// Fixed-point with the given precision.
std::string format_fixed(double v, int precision);

/// Writes content to path via a temp file + rename so readers never observe
/// partial output.
void atomic_write(const std::filesystem::path& path, std::string_view content);

/// Deterministic CSV assembly: '#' comment lines (config hash, schema notes),
/// a header row, then data rows. No timestamps anywhere, so identical configs
/// produce byte-identical files.
class CsvWriter {
 public:
  void comment(std::string_view text);
  void header(const std::vector<std::string>& columns);
  void row(const std::vector<std::string>& cells);
  std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> comments_;
  std::string header_;
  std::vector<std::string> rows_;
};

/// Minimal static line plot, enough to eyeball sweep outputs.
class LinePlot {
 public:
  LinePlot(std::string title, std::string x_label, std::string y_label);
  void add_series(std::string name, std::vector<double> xs, std::vector<double> ys);
  std::string render_svg(int width = 640, int height = 420) const;
  void write_svg(const std::filesystem::path& path, int width = 640, int height = 420) const;

 private:
  struct Series {
    std::string name;
    std::vector<double> xs, ys;
  };
  std::string title_, x_label_, y_label_;
  std::vector<Series> series_;
};

}  // namespace pointpe
