#include "currents/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "currents/error.hpp"

namespace currents::report {
namespace {

constexpr const char* kHeader = "lambda,gamma,rank_d,r,epsilon,errors,error_rate,total,cv_error,lambda_mode,status";

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace

std::string format_percent(std::size_t errors, std::size_t total) {
  const double pct = total == 0 ? 0.0 : 100.0 * static_cast<double>(errors) / static_cast<double>(total);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f%%", pct);
  return buf;
}

std::string format_cv_error(std::size_t errors, std::size_t total) {
  return std::to_string(errors) + " (" + format_percent(errors, total) + ")";
}

std::string table_csv(const std::vector<TableRow>& rows, const io::Metadata& meta) {
  std::ostringstream os;
  for (const auto& [k, v] : meta) os << "# " << k << ": " << v << '\n';
  os << kHeader << '\n';
  for (const auto& row : rows) {
    os << io::format_double(row.lambda) << ',' << io::format_double(row.gamma) << ',' << row.rank_d << ',' << row.r
       << ',' << io::format_double(row.epsilon) << ',';
    if (row.ok())
      os << row.errors << ',' << format_percent(row.errors, row.total) << ',' << row.total << ','
         << format_cv_error(row.errors, row.total);
    else
      os << ",," << row.total << ',';
    os << ',' << row.lambda_mode << ',' << csv_escape(row.status) << '\n';
  }
  return os.str();
}

std::vector<TableRow> read_table_csv(const std::filesystem::path& path, io::Metadata* meta) {
  std::istringstream in(io::read_file(path));
  std::vector<TableRow> rows;
  std::string line;
  bool header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (meta) {
        const auto colon = line.find(':');
        if (colon != std::string::npos) {
          auto key = line.substr(1, colon - 1);
          auto val = line.substr(colon + 1);
          key.erase(0, key.find_first_not_of(' '));
          val.erase(0, val.find_first_not_of(' '));
          meta->emplace_back(key, val);
        }
      }
      continue;
    }
    if (!header) {
      if (line != kHeader) throw IoError(path.string() + ": not a cross-validation table (unexpected header)");
      header = true;
      continue;
    }
    const auto f = split_csv(line);
    if (f.size() != 11) throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected 11 columns");
    try {
      TableRow row;
      row.lambda = io::parse_double(f[0]);
      row.gamma = io::parse_double(f[1]);
      row.rank_d = static_cast<int>(io::parse_double(f[2]));
      row.r = static_cast<int>(io::parse_double(f[3]));
      row.epsilon = io::parse_double(f[4]);
      row.total = static_cast<std::size_t>(io::parse_double(f[7]));
      row.lambda_mode = f[9];
      row.status = f[10];
      if (row.ok()) row.errors = static_cast<std::size_t>(io::parse_double(f[5]));
      rows.push_back(row);
    } catch (const InvalidInput& e) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!header) throw IoError(path.string() + ": empty cross-validation table");
  return rows;
}

std::string table_svg(const std::vector<TableRow>& rows, const std::string& title) {
  const int bar_w = 36;
  const int gap = 14;
  const int left = 60;
  const int top = 40;
  const int plot_h = 220;
  const int width = left + static_cast<int>(rows.size()) * (bar_w + gap) + 40;
  const int height = top + plot_h + 90;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<text x=\"" << left << "\" y=\"20\" font-size=\"14\">" << xml_escape(title) << "</text>\n";
  for (int pct = 0; pct <= 100; pct += 25) {
    const int y = top + plot_h - plot_h * pct / 100;
    os << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << width - 20 << "\" y2=\"" << y
       << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << left - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << pct << "%</text>\n";
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    const int x = left + gap / 2 + static_cast<int>(i) * (bar_w + gap);
    const double rate = row.ok() && row.total ? static_cast<double>(row.errors) / static_cast<double>(row.total) : 0.0;
    const int h = static_cast<int>(rate * plot_h + 0.5);
    const std::string label = row.ok() ? format_percent(row.errors, row.total) : "error";
    os << "<rect x=\"" << x << "\" y=\"" << top + plot_h - h << "\" width=\"" << bar_w << "\" height=\"" << h
       << "\" fill=\"" << (row.ok() ? "#4c78a8" : "#e45756") << "\"/>\n";
    os << "<text x=\"" << x + bar_w / 2 << "\" y=\"" << top + plot_h - h - 4 << "\" text-anchor=\"middle\">"
       << xml_escape(label) << "</text>\n";
    os << "<text x=\"" << x + bar_w / 2 << "\" y=\"" << top + plot_h + 16
       << "\" text-anchor=\"middle\">&#955;=" << short_number(row.lambda) << "</text>\n";
    os << "<text x=\"" << x + bar_w / 2 << "\" y=\"" << top + plot_h + 30
       << "\" text-anchor=\"middle\">&#947;=" << short_number(row.gamma) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace currents::report
