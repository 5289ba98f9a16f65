#include "curvflow/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace curvflow::report {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void CsvTable::add_row(const std::vector<double>& vals) {
  std::vector<std::string> cells;
  cells.reserve(vals.size());
  for (double v : vals) cells.push_back(format_double(v));
  rows.push_back(std::move(cells));
}

void CsvTable::add_row(std::vector<std::string> cells) {
  rows.push_back(std::move(cells));
}

std::string CsvTable::to_string() const {
  std::ostringstream os;
  auto emit = [&](const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) os << ",";
      const std::string& c = cells[i];
      if (c.find_first_of(",\"\n") != std::string::npos) {
        os << '"';
        for (char ch : c) {
          if (ch == '"') os << "\"\"";
          else os << ch;
        }
        os << '"';
      } else {
        os << c;
      }
    }
    os << "\n";
  };
  emit(header);
  for (const auto& r : rows) emit(r);
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

void ensure_dir(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw std::runtime_error("cannot create directory " + path);
}

std::string svg_chart(const std::string& title, const std::vector<Series>& series,
                      int width, int height) {
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series)
    for (size_t i = 0; i < s.x.size(); ++i) {
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (xmin > xmax) {
    xmin = 0;
    xmax = 1;
  }
  if (ymin > ymax) {
    ymin = 0;
    ymax = 1;
  }
  if (xmax - xmin < 1e-300) xmax = xmin + 1;
  if (ymax - ymin < 1e-300) ymax = ymin + 1;
  const double ml = 70, mr = 20, mt = 40, mb = 45;
  const double pw = width - ml - mr, ph = height - mt - mb;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return mt + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };

  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height
     << "\">\n";
  os << "<style>text{font-family:monospace;font-size:12px;fill:#222}"
        ".axis{stroke:#444;stroke-width:1}.grid{stroke:#ddd;stroke-width:0.5}"
        "polyline{fill:none;stroke-width:1.5}</style>\n";
  os << "<text x=\"" << ml << "\" y=\"20\">" << title << "</text>\n";
  os << "<line class=\"axis\" x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\""
     << ml + pw << "\" y2=\"" << mt + ph << "\"/>\n";
  os << "<line class=\"axis\" x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
     << "\" y2=\"" << mt + ph << "\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = xmin + (xmax - xmin) * i / 4.0;
    const double fy = ymin + (ymax - ymin) * i / 4.0;
    os << "<line class=\"grid\" x1=\"" << px(fx) << "\" y1=\"" << mt << "\" x2=\""
       << px(fx) << "\" y2=\"" << mt + ph << "\"/>\n";
    os << "<text x=\"" << px(fx) - 15 << "\" y=\"" << mt + ph + 16 << "\">"
       << format_double(fx).substr(0, 8) << "</text>\n";
    os << "<text x=\"4\" y=\"" << py(fy) + 4 << "\">" << format_double(fy).substr(0, 8)
       << "</text>\n";
  }
  int ci = 0;
  for (const auto& s : series) {
    os << "<polyline style=\"stroke:" << colors[ci % 4] << "\" points=\"";
    for (size_t i = 0; i < s.x.size(); ++i)
      os << px(s.x[i]) << "," << py(s.y[i]) << " ";
    os << "\"/>\n";
    os << "<text x=\"" << ml + pw - 180 << "\" y=\"" << mt + 14 + 14 * ci
       << "\" style=\"fill:" << colors[ci % 4] << "\">" << s.label << "</text>\n";
    ++ci;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace curvflow::report
