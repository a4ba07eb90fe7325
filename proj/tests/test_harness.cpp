#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "doctest.h"
#include "pmelab/config.hpp"
#include "pmelab/errors.hpp"
#include "pmelab/experiment.hpp"
#include "pmelab/field_io.hpp"
#include "pmelab/svg.hpp"

using namespace pmelab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pmelab_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Tags balance and every tag closes; enough to catch broken emitters.
bool well_formed(const std::string& xml) {
  std::vector<std::string> stack;
  const std::regex tag(R"(<(/?)([A-Za-z][\w:-]*)([^>]*?)(/?)>)");
  for (auto it = std::sregex_iterator(xml.begin(), xml.end(), tag); it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    if (m[4].length()) continue;
    if (m[1].length()) {
      if (stack.empty() || stack.back() != m[2].str()) return false;
      stack.pop_back();
    } else {
      stack.push_back(m[2].str());
    }
  }
  return stack.empty() && xml.rfind("<?xml", 0) == 0;
}

std::string config_error_text(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("config: defaults round-trip") {
  const RunConfig a = parse_config("hole.kind = disk\n");
  const std::string norm = normalize_config(a);
  const RunConfig b = parse_config(norm);
  CHECK(normalize_config(b) == norm);
  CHECK(config_hash(a) == config_hash(b));
  CHECK(a.m == 2.0);
  CHECK(a.safety == 0.9);
  // every key is present in the normalized text
  for (const auto& k : config_keys()) CHECK(norm.find(k + " = ") != std::string::npos);
}

TEST_CASE("config: comments, spacing and hash sensitivity") {
  const RunConfig a = parse_config("# comment\n  solver.m=3   # trailing\n\nhole.kind = disk\n");
  CHECK(a.m == 3.0);
  const RunConfig b = parse_config("hole.kind = disk\nsolver.m = 3.0\n");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(parse_config("hole.kind = disk\nsolver.m = 3.5\n")));
}

TEST_CASE("config: errors name the line and field") {
  const std::string unknown = config_error_text("solver.mm = 2\n");
  CHECK(unknown.find("solver.mm") != std::string::npos);
  CHECK(unknown.find("unknown key") != std::string::npos);
  CHECK(unknown.find("line 1") != std::string::npos);

  CHECK(config_error_text("solver.m = 0.5\n").find("m > 1 required") != std::string::npos);
  CHECK(config_error_text("hole.kind = disk\nsolver.m = two\n").find("line 2") != std::string::npos);
  CHECK(config_error_text("solver.m = 2\nsolver.m = 3\n").find("duplicate") != std::string::npos);
  CHECK(config_error_text("hole.kind = disk\nsolver.t_start = 10\nsolver.t_end = 5\n").find("solver.t_end") !=
        std::string::npos);
  CHECK(config_error_text("hole.kind = square\n").find("hole.kind") != std::string::npos);
  CHECK(config_error_text("no equals sign\n").find("line 1") != std::string::npos);

  // several bad lines reported together
  const std::string many = config_error_text("solver.mm = 2\nsolver.q = 1\n");
  CHECK(many.find("solver.mm") != std::string::npos);
  CHECK(many.find("solver.q") != std::string::npos);
}

TEST_CASE("config: key=value parameter files") {
  const auto kv = read_key_values("eta = 1.5\n# note\nT=1e6\n");
  REQUIRE(kv.size() == 2);
  CHECK(kv[0].first == "eta");
  CHECK(kv[1].second == "1e6");
}

TEST_CASE("field files round-trip bit for bit") {
  const auto dir = scratch("pmef");
  FieldFile f{"u", 123.25, "radial n=3 r_in=1 r_out=2 edges=abc", {0.0, 1.0 / 3.0, -2.5e-300, 7.0}};
  write_field((dir / "a.pmef").string(), f);
  const auto g = read_field((dir / "a.pmef").string());
  CHECK(g.kind == f.kind);
  CHECK(g.time == f.time);
  CHECK(g.descriptor == f.descriptor);
  CHECK(g.values == f.values);

  std::ofstream((dir / "bad.pmef").string()) << "not a field";
  CHECK_THROWS_AS(read_field((dir / "bad.pmef").string()), IoError);
  CHECK_THROWS_AS(read_field((dir / "missing.pmef").string()), IoError);
}

TEST_CASE("csv writer: 17 digits, LF, header") {
  const auto dir = scratch("csv");
  const std::string path = (dir / "a.csv").string();
  {
    CsvWriter w(path, {"t", "value"});
    w.row({0.1, 1.0 / 3.0});
  }
  const std::string text = read_text_file(path);
  CHECK(text.find('\r') == std::string::npos);
  CHECK(text.rfind("t,value\n", 0) == 0);
  CHECK(text.find("0.33333333333333331") != std::string::npos);
  const auto t = read_csv(path);
  CHECK(t.rows.size() == 1);
  CHECK(t.rows[0][t.column("value")] == 1.0 / 3.0);
  CHECK_THROWS(t.column("nope"));
}

TEST_CASE("svg: too few points") {
  PlotSpec spec;
  spec.series.push_back({"one", {1.0}, {2.0}});
  try {
    render_svg(spec);
    FAIL("expected an error");
  } catch (const SeriesError& e) {
    CHECK(std::string(e.what()).find("need >= 2 points") != std::string::npos);
  }
  PlotSpec empty;
  CHECK_THROWS_AS(render_svg(empty), SeriesError);
}

TEST_CASE("svg: constant series draws a horizontal line at y = 1") {
  PlotSpec spec;
  spec.title = "ratio";
  spec.series.push_back({"ratio", {1, 2, 3, 4}, {1, 1, 1, 1}});
  const std::string svg = render_svg(spec);
  CHECK(well_formed(svg));
  const PlotFrame fr = plot_frame(spec);
  std::ostringstream want;
  want.setf(std::ios::fixed);
  want.precision(2);
  want << fr.py(1.0);
  // every vertex of the path sits on the same pixel row
  const std::regex path(R"(<path d="([^"]*)\")");
  std::smatch m;
  REQUIRE(std::regex_search(svg, m, path));
  const std::string d = m[1].str();
  const std::regex vertex(R"([ML][\d.]+ ([\d.]+))");
  std::size_t n = 0;
  for (auto it = std::sregex_iterator(d.begin(), d.end(), vertex); it != std::sregex_iterator(); ++it, ++n) {
    CHECK((*it)[1].str() == want.str());
  }
  CHECK(n == 4);
}

TEST_CASE("svg: special characters are escaped") {
  PlotSpec spec;
  spec.title = "a < b & c";
  spec.series.push_back({"s", {1, 2}, {0, 1}});
  const std::string svg = render_svg(spec);
  CHECK(svg.find("a &lt; b &amp; c") != std::string::npos);
  CHECK(well_formed(svg));
}

TEST_CASE("summary text round-trip") {
  RunSummary s;
  s.config_hash = "00ff";
  s.tool_version = kToolVersion;
  s.wall_time = 1.5;
  s.criteria["conservation"] = "pass";
  s.criteria["far_field"] = "fail";
  s.files = {"config.txt", "run_record.csv"};
  const RunSummary t = RunSummary::from_text(s.to_text());
  CHECK(t.config_hash == s.config_hash);
  CHECK(t.criteria == s.criteria);
  CHECK(t.files == s.files);
  CHECK_FALSE(t.all_pass());
}

TEST_CASE("experiment: degenerate time interval") {
  const auto dir = scratch("degenerate");
  const RunConfig cfg = parse_config("hole.kind = disk\nsolver.t_start = 100\nsolver.t_end = 100\n");
  const RunSummary s = run_experiment(cfg, dir.string());
  CHECK(s.degenerate);
  CHECK(s.series_length == 0);
  CHECK_FALSE(s.cached);
  CHECK(fs::exists(fs::path(s.directory) / "summary.txt"));
}

TEST_CASE("experiment: end to end, outputs, determinism and caching") {
  const auto root = scratch("experiment");
  const std::string text =
      "hole.kind = disk\nsolver.t_end = 1000\nasymptotics.trend_from = 10\ncomparison.T = 100\n"
      "comparison.sample_nt = 30\ncomparison.sample_nr = 30\n";
  const RunConfig cfg = parse_config(text);
  const RunSummary s = run_experiment(cfg, (root / "a").string());
  CHECK_FALSE(s.cached);
  CHECK_FALSE(s.degenerate);
  const fs::path dir = s.directory;
  for (const char* f : {"run_record.csv", "mass_ratio.csv", "support_ratio.csv", "errors.csv", "compact_limit.csv",
                        "scaled_profile.csv"}) {
    CAPTURE(f);
    CHECK(fs::exists(dir / f));
    CHECK(std::find(s.files.begin(), s.files.end(), f) != s.files.end());
  }
  std::size_t svgs = 0;
  for (const auto& f : s.files) {
    CHECK(fs::file_size(dir / f) > 0);
    if (fs::path(f).extension() == ".svg") {
      ++svgs;
      CHECK(well_formed(read_text_file((dir / f).string())));
    }
  }
  CHECK(svgs == 4);
  CHECK(s.criteria.at("conservation") == "pass");
  const auto rr = read_csv((dir / "run_record.csv").string());
  for (const char* col : {"t", "mass", "weighted_moment", "zeta_minus", "zeta_plus", "sup_u"}) CHECK_NOTHROW(rr.column(col));

  const RunSummary again = run_experiment(cfg, (root / "a").string());
  CHECK(again.cached);
  CHECK(again.criteria == s.criteria);

  // a fresh directory reproduces identical CSV bytes
  const RunSummary other = run_experiment(cfg, (root / "b").string());
  CHECK_FALSE(other.cached);
  for (const auto& f : s.files) {
    if (fs::path(f).extension() != ".csv") continue;
    CAPTURE(f);
    CHECK(read_text_file((dir / f).string()) == read_text_file((fs::path(other.directory) / f).string()));
  }

  // damaging a manifest file forces a recompute
  fs::remove(dir / "errors.csv");
  CHECK_FALSE(run_experiment(cfg, (root / "a").string()).cached);
}
