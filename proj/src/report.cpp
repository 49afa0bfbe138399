#include "ctlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ctlab/error.hpp"

namespace ctlab {

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// JSON has no inf or nan; they become strings so nothing is silently nulled.
Json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string sanitize(const std::string& name) {
  std::string out;
  for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out.empty() ? "scenario" : out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) fail(ErrorCode::io, "failed writing " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) fail(ErrorCode::io, "cannot create directory " + dir.string());
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

ReportFormats ReportFormats::parse(const std::string& list) {
  ReportFormats f{false, false, false};
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "json")
      f.json = true;
    else if (item == "csv")
      f.csv = true;
    else if (item == "svg")
      f.svg = true;
    else if (!item.empty())
      fail(ErrorCode::validation, "unknown output format '" + item + "' (expected json, csv, svg)");
  }
  require(f.json || f.csv || f.svg, ErrorCode::validation, "no output format selected");
  return f;
}

Json report_json(const RunReport& r) {
  Json j;
  j["scenario"] = r.scenario;
  j["valid"] = r.valid;
  j["config"] = r.config;
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back(Json{{"estimator", row.estimator}, {"params", row.params}, {"value", number(row.value)}, {"diag", row.diag}});
  j["results"] = rows;
  Json errors = Json::array();
  for (const auto& e : r.errors) errors.push_back(Json{{"estimator", e.estimator}, {"message", e.message}});
  j["errors"] = errors;
  Json asserts = Json::array();
  for (const auto& a : r.assertions) {
    Json x{{"name", a.name}, {"value", number(a.value)}};
    x["min"] = a.min ? number(*a.min) : Json();
    x["max"] = a.max ? number(*a.max) : Json();
    x["pass"] = a.pass;
    asserts.push_back(x);
  }
  j["assertions"] = asserts;
  j["diagnostics"] = r.diagnostics;
  Json plots = Json::array();
  for (const auto& p : r.plots) {
    Json x{{"name", p.name}, {"t", p.series.times}};
    Json values = Json::array();
    for (double v : p.series.values) values.push_back(number(v));
    x["value"] = values;
    if (p.fit) x["fit"] = Json{{"exponent", number(p.fit->exponent)}, {"intercept", number(p.fit->intercept)},
                               {"t_min", p.fit->t_min}, {"t_max", p.fit->t_max}};
    plots.push_back(x);
  }
  j["series"] = plots;
  return j;
}

std::string report_csv(const RunReport& r, bool header) {
  std::string out;
  if (header) out += std::string(kCsvHeader) + "\r\n";
  for (const auto& row : r.rows) {
    out += csv_field(r.scenario) + ',' + csv_field(row.estimator) + ',' + csv_field(row.params.dump()) + ',' +
           csv_field(g17(row.value)) + ',' + csv_field(row.diag.dump()) + "\r\n";
  }
  return out;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false, field_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && field.empty()) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      record.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(record));
      record.clear();
      field_started = false;
    } else {
      field += c;
      field_started = true;
    }
  }
  require(!quoted, ErrorCode::invalid_input, "unterminated quoted CSV field");
  if (field_started || !field.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

std::string plot_svg(const PlotSeries& p) {
  constexpr double W = 640, H = 420, left = 70, right = 20, top = 40, bottom = 50;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < p.series.size(); ++i) {
    const double t = p.series.times[i], v = p.series.values[i];
    if (t > 0.0 && v > 0.0 && std::isfinite(v)) pts.emplace_back(std::log10(t), std::log10(v));
  }
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << ' ' << H << "\">\n";
  o << "<title>" << xml_escape(p.name) << "</title>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
    << xml_escape(p.name) << "</text>\n";
  if (pts.empty()) {
    o << "<text x=\"" << W / 2 << "\" y=\"" << H / 2 << "\" text-anchor=\"middle\">no positive samples</text>\n</svg>\n";
    return o.str();
  }
  double x0 = pts.front().first, x1 = x0, y0 = pts.front().second, y1 = y0;
  for (const auto& [x, y] : pts) {
    x0 = std::min(x0, x), x1 = std::max(x1, x);
    y0 = std::min(y0, y), y1 = std::max(y1, y);
  }
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * (W - left - right); };
  auto sy = [&](double y) { return H - bottom - (y - y0) / (y1 - y0) * (H - top - bottom); };
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << W - left - right << "\" height=\""
    << H - top - bottom << "\" fill=\"none\" stroke=\"#444\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">log10 t ["
    << g17(x0).substr(0, 6) << ", " << g17(x1).substr(0, 6) << "]</text>\n";
  o << "<text x=\"16\" y=\"" << H / 2 << "\" transform=\"rotate(-90 16 " << H / 2
    << ")\" text-anchor=\"middle\" font-size=\"12\">log10 value [" << g17(y0).substr(0, 6) << ", "
    << g17(y1).substr(0, 6) << "]</text>\n";
  o << "<polyline class=\"data\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
  for (const auto& [x, y] : pts) o << sx(x) << ',' << sy(y) << ' ';
  o << "\"/>\n";
  if (p.fit) {
    // value = exp(intercept) t^exponent, drawn over the fit window.
    const double a = std::log10(std::max(p.fit->t_min, 1e-300)), b = std::log10(std::max(p.fit->t_max, 1e-300));
    auto fy = [&](double lx) { return (p.fit->intercept + p.fit->exponent * lx * std::log(10.0)) / std::log(10.0); };
    o << "<line class=\"fit\" stroke=\"#d62728\" stroke-dasharray=\"6 3\" x1=\"" << sx(a) << "\" y1=\"" << sy(fy(a))
      << "\" x2=\"" << sx(b) << "\" y2=\"" << sy(fy(b)) << "\"/>\n";
    o << "<text x=\"" << W - right - 4 << "\" y=\"" << top + 16 << "\" text-anchor=\"end\" font-size=\"12\">slope "
      << g17(p.fit->exponent).substr(0, 8) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::vector<std::string> emit_report(const RunReport& r, const std::string& dir, const ReportFormats& formats) {
  const std::filesystem::path base(dir);
  ensure_dir(base);
  const std::string stem = sanitize(r.scenario);
  std::vector<std::string> written;
  if (formats.json) {
    const auto path = base / (stem + ".json");
    write_file(path, report_json(r).dump(2) + "\n");
    written.push_back(path.string());
  }
  if (formats.csv) {
    const auto path = base / (stem + ".csv");
    write_file(path, report_csv(r));
    written.push_back(path.string());
  }
  if (formats.svg) {
    for (std::size_t k = 0; k < r.plots.size(); ++k) {
      const auto path = base / (stem + "_plot" + std::to_string(k) + ".svg");
      write_file(path, plot_svg(r.plots[k]));
      written.push_back(path.string());
    }
  }
  return written;
}

std::vector<std::string> export_trace(const PropagatorTrace& trace, const std::string& dir, const Json& config) {
  const std::filesystem::path base(dir);
  ensure_dir(base);
  std::vector<std::string> written;
  Json snapshots = Json::array();
  for (std::size_t k = 0; k < trace.fields.size(); ++k) {
    const ScalarField& f = trace.fields[k];
    const Grid& g = f.grid();
    std::string text = "x,y,z,re,im\n";
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Vec3 x = g.point(i);
      text += g17(x[0]) + ',' + g17(x[1]) + ',' + g17(x[2]) + ',' + g17(f[i].real()) + ',' + g17(f[i].imag()) + '\n';
    }
    const std::string name = "snapshot_" + std::to_string(k) + ".csv";
    write_file(base / name, text);
    written.push_back((base / name).string());
    snapshots.push_back(name);
  }
  Json diag = Json::array();
  for (const auto& d : trace.diagnostics)
    diag.push_back(Json{{"time", d.time}, {"l2_norm", d.l2_norm}, {"boundary_mass", d.boundary_mass}});
  Json manifest{{"times", trace.times}, {"files", snapshots}, {"diagnostics", diag}, {"flags", trace.flags},
                {"valid", trace.valid}, {"max_norm_drift", trace.max_norm_drift}, {"config", config}};
  write_file(base / "manifest.json", manifest.dump(2) + "\n");
  written.push_back((base / "manifest.json").string());
  return written;
}

}  // namespace ctlab
