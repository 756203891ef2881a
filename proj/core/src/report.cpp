#include "pointpe/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pointpe {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_fixed(double v, int precision) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

void atomic_write(const std::filesystem::path& path, std::string_view content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void CsvWriter::comment(std::string_view text) {
  comments_.push_back("# " + std::string(text));
}

void CsvWriter::header(const std::vector<std::string>& columns) {
  header_.clear();
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) header_ += ',';
    header_ += columns[i];
  }
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  rows_.push_back(std::move(line));
}

std::string CsvWriter::str() const {
  std::string out;
  for (const auto& c : comments_) {
    out += c;
    out += '\n';
  }
  if (!header_.empty()) {
    out += header_;
    out += '\n';
  }
  for (const auto& r : rows_) {
    out += r;
    out += '\n';
  }
  return out;
}

void CsvWriter::write(const std::filesystem::path& path) const {
  atomic_write(path, str());
}

LinePlot::LinePlot(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

void LinePlot::add_series(std::string name, std::vector<double> xs, std::vector<double> ys) {
  if (xs.size() != ys.size())
    throw std::invalid_argument("LinePlot: series length mismatch");
  series_.push_back({std::move(name), std::move(xs), std::move(ys)});
}

std::string LinePlot::render_svg(int width, int height) const {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b"};
  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (const auto& s : series_) {
    for (const double x : s.xs) {
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
    }
    for (const double y : s.ys) {
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  if (series_.empty() || !(x_max > x_min)) {
    x_min = 0;
    x_max = 1;
  }
  if (!(y_max > y_min)) {
    y_min -= 1;
    y_max += 1;
  }

  const double ml = 60, mr = 20, mt = 34, mb = 44;
  const double pw = width - ml - mr, ph = height - mt - mb;
  const auto px = [&](double x) { return ml + pw * (x - x_min) / (x_max - x_min); };
  const auto py = [&](double y) { return mt + ph * (1.0 - (y - y_min) / (y_max - y_min)); };

  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='"
      << height << "' font-family='sans-serif' font-size='12'>\n";
  svg << "<rect width='100%' height='100%' fill='white'/>\n";
  svg << "<text x='" << width / 2 << "' y='18' text-anchor='middle' font-size='14'>"
      << title_ << "</text>\n";
  svg << "<rect x='" << ml << "' y='" << mt << "' width='" << pw << "' height='" << ph
      << "' fill='none' stroke='#888'/>\n";
  // Axis labels and min/max ticks are enough for a diagnostic plot.
  svg << "<text x='" << ml + pw / 2 << "' y='" << height - 8
      << "' text-anchor='middle'>" << x_label_ << "</text>\n";
  svg << "<text x='14' y='" << mt + ph / 2 << "' text-anchor='middle' transform='rotate(-90 14 "
      << mt + ph / 2 << ")'>" << y_label_ << "</text>\n";
  svg << "<text x='" << ml << "' y='" << height - mb + 16 << "' text-anchor='middle'>"
      << format_fixed(x_min, 3) << "</text>\n";
  svg << "<text x='" << ml + pw << "' y='" << height - mb + 16 << "' text-anchor='middle'>"
      << format_fixed(x_max, 3) << "</text>\n";
  svg << "<text x='" << ml - 6 << "' y='" << py(y_min) + 4 << "' text-anchor='end'>"
      << format_fixed(y_min, 3) << "</text>\n";
  svg << "<text x='" << ml - 6 << "' y='" << py(y_max) + 4 << "' text-anchor='end'>"
      << format_fixed(y_max, 3) << "</text>\n";

  for (std::size_t s = 0; s < series_.size(); ++s) {
    const auto& srs = series_[s];
    svg << "<polyline fill='none' stroke='" << kColors[s % 6] << "' stroke-width='1.5' points='";
    for (std::size_t i = 0; i < srs.xs.size(); ++i)
      svg << px(srs.xs[i]) << ',' << py(srs.ys[i]) << ' ';
    svg << "'/>\n";
    svg << "<text x='" << ml + 8 << "' y='" << mt + 16 + 14 * static_cast<double>(s)
        << "' fill='" << kColors[s % 6] << "'>" << srs.name << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void LinePlot::write_svg(const std::filesystem::path& path, int width, int height) const {
  atomic_write(path, render_svg(width, height));
}

}  // namespace pointpe
