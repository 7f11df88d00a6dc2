#pragma once

// Report assembly (JSON), CSV plot data and minimal SVG line plots.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "melnikov/checks.hpp"
#include "melnikov/error.hpp"
#include "melnikov/io.hpp"

namespace melnikov::report {

inline constexpr const char* kToolVersion = "0.1.0";

inline nlohmann::json to_json(const checks::Check& c) {
  nlohmann::json j{{"id", c.id},
                   {"measured", c.measured},
                   {"tolerance", c.tolerance},
                   {"compare", c.compare == checks::Compare::below ? "below" : "above"},
                   {"passed", c.passed}};
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

/// Criterion record without wall-clock data, so reports stay reproducible.
inline nlohmann::json to_json(const checks::CriterionResult& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  nlohmann::json info = nlohmann::json::object();
  for (const auto& i : r.info) info[i.id] = i.value;
  nlohmann::json j{{"index", r.index},
                   {"title", r.title},
                   {"checks", checks},
                   {"info", info},
                   {"passed", r.checks_passed()},
                   {"runtime_limit_s", r.runtime_limit_s}};
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

/// Checks grouped under named sections plus free-form result data.
class Report {
 public:
  explicit Report(std::string kind, nlohmann::json scenario) : kind_(std::move(kind)), scenario_(std::move(scenario)) {}

  void add_check(const std::string& section, checks::Check c) { sections_[section].push_back(std::move(c)); }
  void add_criterion(const checks::CriterionResult& r) {
    criteria_.push_back(report::to_json(r));
    ok_ = ok_ && r.checks_passed();
    timing_["criterion_" + std::to_string(r.index)] = r.runtime_s;
  }
  nlohmann::json& data() { return data_; }
  nlohmann::json& calibration() { return calibration_; }
  void add_timing(const std::string& name, double seconds) { timing_[name] = seconds; }
  void add_file(const std::string& name) { files_.push_back(name); }

  bool passed() const {
    if (!ok_) return false;
    for (const auto& [_, list] : sections_)
      for (const auto& c : list)
        if (!c.passed) return false;
    return true;
  }

  nlohmann::json to_json() const {
    nlohmann::json checks = nlohmann::json::object();
    nlohmann::json tolerances = nlohmann::json::object();
    for (const auto& [name, list] : sections_) {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& c : list) {
        arr.push_back(report::to_json(c));
        tolerances[name + "." + c.id] = c.tolerance;
      }
      checks[name] = arr;
    }
    for (const auto& cr : criteria_)
      for (const auto& c : cr["checks"])
        tolerances["criterion_" + std::to_string(cr["index"].get<int>()) + "." + c["id"].get<std::string>()] =
            c["tolerance"];
    nlohmann::json j{{"tool", "melnikov-lab"},
                     {"version", kToolVersion},
                     {"kind", kind_},
                     {"scenario", scenario_},
                     {"status", passed() ? "pass" : "fail"},
                     {"checks", checks},
                     {"tolerances", tolerances},
                     {"files", files_}};
    if (!criteria_.empty()) j["criteria"] = criteria_;
    if (!calibration_.is_null()) j["calibration"] = calibration_;
    if (!data_.is_null()) j["results"] = data_;
    return j;
  }

  /// report.json plus timing.json next to it.
  void write(const std::filesystem::path& dir) const {
    io::write_text_atomic(dir / "report.json", to_json().dump(2) + "\n");
    nlohmann::json t = nlohmann::json::object();
    for (const auto& [k, v] : timing_) t[k] = v;
    io::write_text_atomic(dir / "timing.json", t.dump(2) + "\n");
  }

 private:
  std::string kind_;
  nlohmann::json scenario_;
  std::map<std::string, std::vector<checks::Check>> sections_;
  std::vector<nlohmann::json> criteria_;
  nlohmann::json data_;
  nlohmann::json calibration_;
  std::map<std::string, double> timing_;
  std::vector<std::string> files_;
  bool ok_ = true;
};

// ----------------------------------------------------------------- SVG

struct Series {
  std::string name;
  std::vector<double> values;
};

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  return colors[i % 8];
}

}  // namespace detail

/// Line plot of ys against x; non-finite points break the polyline.
inline std::string svg_line_plot(const std::string& title, const Series& x, const std::vector<Series>& ys) {
  const double w = 720, h = 420, ml = 70, mr = 150, mt = 40, mb = 50;
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (double v : x.values)
    if (std::isfinite(v)) xmin = std::min(xmin, v), xmax = std::max(xmax, v);
  for (const auto& s : ys)
    for (double v : s.values)
      if (std::isfinite(v)) ymin = std::min(ymin, v), ymax = std::max(ymax, v);
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  if (!(ymax > ymin)) ymax = ymin + 1.0;
  auto px = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * (w - ml - mr); };
  auto py = [&](double v) { return h - mb - (v - ymin) / (ymax - ymin) * (h - mt - mb); };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
     << title << "</text>\n";
  os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << w - ml - mr << "\" height=\"" << h - mt - mb
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 4.0;
    const double yv = ymin + (ymax - ymin) * i / 4.0;
    os << "<text x=\"" << px(xv) << "\" y=\"" << h - mb + 18 << "\" text-anchor=\"middle\" font-size=\"11\">"
       << detail::fmt(xv) << "</text>\n";
    os << "<text x=\"" << ml - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
       << detail::fmt(yv) << "</text>\n";
  }
  os << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 10 << "\" text-anchor=\"middle\" font-size=\"12\">"
     << x.name << "</text>\n";
  for (std::size_t s = 0; s < ys.size(); ++s) {
    std::ostringstream pts;
    auto flush = [&] {
      if (!pts.str().empty())
        os << "<polyline fill=\"none\" stroke-width=\"1.4\" stroke=\"" << detail::palette(s) << "\" points=\""
           << pts.str() << "\"/>\n";
      pts.str("");
    };
    for (std::size_t i = 0; i < std::min(x.values.size(), ys[s].values.size()); ++i) {
      const double xv = x.values[i], yv = ys[s].values[i];
      if (!std::isfinite(xv) || !std::isfinite(yv)) {
        flush();
        continue;
      }
      pts << px(xv) << ',' << py(yv) << ' ';
    }
    flush();
    os << "<text x=\"" << w - mr + 10 << "\" y=\"" << mt + 16 * (s + 1) << "\" font-size=\"12\" fill=\""
       << detail::palette(s) << "\">" << ys[s].name << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

/// CSV with one column per series (first series is the abscissa) and an
/// optional SVG of the remaining columns against the first.
inline void emit_plot_data(const std::vector<Series>& series, const std::filesystem::path& csv_path, bool svg = false,
                           const std::string& title = {}) {
  if (series.empty() || series.front().values.empty()) throw InvalidArgument("emit_plot_data: empty series");
  const std::size_t n = series.front().values.size();
  std::vector<std::string> cols;
  for (const auto& s : series) {
    if (s.values.size() != n) throw InvalidArgument("emit_plot_data: series lengths differ");
    cols.push_back(s.name);
  }
  io::CsvTable t(cols);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row;
    for (const auto& s : series) row.push_back(s.values[i]);
    t.add_row(row);
  }
  t.write(csv_path);
  if (svg && series.size() > 1) {
    auto svg_path = csv_path;
    svg_path.replace_extension(".svg");
    io::write_text_atomic(svg_path, svg_line_plot(title.empty() ? csv_path.stem().string() : title, series.front(),
                                                  {series.begin() + 1, series.end()}));
  }
}

/// Stacked traces u(x, t_i) + i * offset.
inline std::string svg_waterfall(const std::string& title, const std::vector<double>& x,
                                 const std::vector<std::pair<double, std::vector<double>>>& traces, double offset) {
  std::vector<Series> ys;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    Series s{"t=" + detail::fmt(traces[i].first), traces[i].second};
    for (double& v : s.values) v += offset * static_cast<double>(i);
    ys.push_back(std::move(s));
  }
  return svg_line_plot(title, {"x", x}, ys);
}

}  // namespace melnikov::report
