#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "ctlab/error.hpp"
#include "ctlab/report.hpp"

using namespace ctlab;
namespace fs = std::filesystem;

namespace {

RunReport sample_report() {
  RunReport r;
  r.scenario = "sample";
  r.config = Json{{"name", "sample"}};
  r.rows.push_back({"strichartz", Json{{"p", 2}, {"q", 6}}, 1.2345678901234567, Json{{"note", "a, \"quoted\"\nline"}}});
  r.rows.push_back({"decay", Json::object(), -1.5e-300, Json::object()});
  r.rows.push_back({"kato_jensen", Json::object(), std::numeric_limits<double>::infinity(), Json::object()});
  PlotSeries p;
  p.name = "decay";
  for (int i = 1; i <= 20; ++i) {
    p.series.times.push_back(i);
    p.series.values.push_back(1.0 / (i * std::sqrt(i)));
  }
  DecayFit f;
  f.exponent = -1.5;
  f.t_min = 2;
  f.t_max = 20;
  p.fit = f;
  r.plots.push_back(p);
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("CSV round trip keeps every field and every bit of the value") {
  const RunReport r = sample_report();
  const std::string csv = report_csv(r);
  CHECK(csv.rfind(std::string(kCsvHeader) + "\r\n", 0) == 0);
  const auto records = parse_csv(csv);
  REQUIRE(records.size() == 4);
  CHECK(records[0] == std::vector<std::string>{"scenario", "estimator", "param_json", "value", "diag_json"});
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& rec = records[i + 1];
    REQUIRE(rec.size() == 5);
    CHECK(rec[0] == "sample");
    CHECK(rec[1] == r.rows[i].estimator);
    CHECK(Json::parse(rec[2]) == r.rows[i].params);
    CHECK(Json::parse(rec[4]) == r.rows[i].diag);
    if (std::isfinite(r.rows[i].value)) CHECK(std::stod(rec[3]) == r.rows[i].value);
  }
  CHECK(records[3][3] == "inf");
}

TEST_CASE("an empty estimator list gives a header-only CSV and a diagnostics-only JSON") {
  RunReport r;
  r.scenario = "empty";
  r.diagnostics["boundary_mass"] = 1e-9;
  CHECK(report_csv(r) == std::string(kCsvHeader) + "\r\n");
  const Json j = report_json(r);
  CHECK(j["results"].empty());
  CHECK(j["diagnostics"]["boundary_mass"] == 1e-9);
  CHECK(j["valid"] == true);
}

TEST_CASE("non-finite values are written as strings in JSON") {
  const Json j = report_json(sample_report());
  CHECK(j["results"][2]["value"] == "inf");
  CHECK(j["results"][0]["value"] == 1.2345678901234567);
  // Serializable without exceptions.
  CHECK_FALSE(j.dump().empty());
}

TEST_CASE("SVG plot carries exactly one fit element when a fit exists") {
  PlotSeries p = sample_report().plots.front();
  const std::string svg = plot_svg(p);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(count(svg, "class=\"fit\"") == 1);
  p.fit.reset();
  CHECK(count(plot_svg(p), "class=\"fit\"") == 0);
}

TEST_CASE("emit_report writes the requested formats") {
  const fs::path dir = fs::path(CTLAB_TEST_TMP) / "report_emit";
  fs::remove_all(dir);
  const auto paths = emit_report(sample_report(), dir.string(), ReportFormats::parse("csv,json,svg"));
  CHECK(paths.size() == 3);
  CHECK(fs::exists(dir / "sample.json"));
  CHECK(fs::exists(dir / "sample.csv"));
  CHECK(fs::exists(dir / "sample_plot0.svg"));
  CHECK(Json::parse(slurp(dir / "sample.json"))["scenario"] == "sample");
  fs::remove_all(dir);
  const auto only_csv = emit_report(sample_report(), dir.string(), ReportFormats::parse("csv"));
  CHECK(only_csv.size() == 1);
  CHECK_FALSE(fs::exists(dir / "sample.json"));
  CHECK_THROWS_AS(ReportFormats::parse("csv,xml"), Error);
}

TEST_CASE("emit_report fails with an io error on an unusable directory") {
  const fs::path file = fs::path(CTLAB_TEST_TMP) / "not_a_dir";
  fs::create_directories(file.parent_path());
  std::ofstream(file) << "x";
  try {
    (void)emit_report(sample_report(), (file / "sub").string(), ReportFormats{});
    FAIL("expected an io error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io);
  }
}

TEST_CASE("trace export writes one CSV per snapshot and a manifest") {
  const fs::path dir = fs::path(CTLAB_TEST_TMP) / "trace_export";
  fs::remove_all(dir);
  Grid g(1, 16, 4.0);
  StepperConfig c;
  c.dt = 0.1;
  c.snapshot_every = 5;
  c.boundary_mass_guard = 1.0;
  const PropagatorTrace tr = propagate({}, gaussian_packet(g, {0.0, 0.0, 0.0}, 1.0, {0.0, 0.0, 0.0}), 0.0, 1.0, c);
  const auto paths = export_trace(tr, dir.string(), Json{{"name", "t"}});
  CHECK(paths.size() == tr.times.size() + 1);
  const Json manifest = Json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["times"].size() == tr.times.size());
  const auto rows = parse_csv(slurp(dir / "snapshot_0.csv"));
  CHECK(rows.size() == g.size() + 1);
}
