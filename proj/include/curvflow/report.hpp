#pragma once

#include <string>
#include <vector>

namespace curvflow::report {

// Fixed, locale-independent float formatting; identical inputs give
// identical bytes.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  void add_row(const std::vector<double>& vals);
  void add_row(std::vector<std::string> cells);
  std::string to_string() const;  // RFC-4180-style, CRLF-free, header mandatory
};

void write_file(const std::string& path, const std::string& content);

struct Series {
  std::string label;
  std::vector<double> x, y;
};

// Self-contained SVG line chart (inline styling, no external assets).
std::string svg_chart(const std::string& title, const std::vector<Series>& series,
                      int width = 720, int height = 420);

// Create directory (recursively); throws on failure.
void ensure_dir(const std::string& path);

}  // namespace curvflow::report
