#pragma once

// Report emission: JSON summary, fixed-column CSV, log-log SVG plots, and
// per-snapshot trace export.

#include <string>
#include <vector>

#include "ctlab/scenario.hpp"

namespace ctlab {

struct ReportFormats {
  bool json = true;
  bool csv = true;
  bool svg = true;

  /// "json,csv,svg" (any subset, any order). Throws Error(validation) on unknown names.
  static ReportFormats parse(const std::string& list);
};

Json report_json(const RunReport& r);

inline constexpr const char* kCsvHeader = "scenario,estimator,param_json,value,diag_json";

/// Header plus one line per row, values printed with %.17g.
std::string report_csv(const RunReport& r, bool header = true);

/// RFC 4180 records (quoted fields may hold commas, quotes and newlines).
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

/// Log-log plot of the series; with a fit, exactly one element of class "fit".
std::string plot_svg(const PlotSeries& p);

/// Writes <dir>/<scenario>.json, <scenario>.csv and <scenario>_plot<k>.svg.
/// Returns the paths written. Throws Error(io) when the directory is unusable.
std::vector<std::string> emit_report(const RunReport& r, const std::string& dir, const ReportFormats& formats);

/// One CSV per stored snapshot (x, y, z, re, im) plus manifest.json with
/// times, norms, diagnostics, flags and the supplied config echo.
std::vector<std::string> export_trace(const PropagatorTrace& trace, const std::string& dir, const Json& config);

}  // namespace ctlab
