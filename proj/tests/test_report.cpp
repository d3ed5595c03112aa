#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "forge/evalsuite.hpp"
#include "forge/report.hpp"

using namespace forge;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path dir =
      fs::temp_directory_path() / ("forge_test_" + name + "_" + std::to_string(getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

std::size_t count_substr(const std::string& hay, const std::string& needle) {
  std::size_t count = 0;
  for (std::size_t pos = hay.find(needle); pos != std::string::npos;
       pos = hay.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

evalsuite::MetricReport make_report(const std::string& method,
                                    const std::string& corpus, double da, double qe,
                                    double rouge, double ed, double laj) {
  evalsuite::MetricReport r;
  r.method_tag = method;
  r.corpus_tag = corpus;
  r.da = da;
  r.qe = qe;
  r.rouge = rouge;
  r.ed = ed;
  r.laj = laj;
  r.composite = evalsuite::composite(da, qe, rouge, ed, laj);
  r.n = 20;
  return r;
}

}  // namespace

TEST_SUITE("report") {
  TEST_CASE("chart draws one bar per method and metric") {
    const auto dir = temp_dir("report_chart");
    const std::vector<evalsuite::MetricReport> reports{
        make_report("base", "petci", 42.89, 37.09, 8.04, 50.76, 1.79),
        make_report("grpo", "petci", 46.08, 48.92, 5.28, 44.16, 1.95),
    };
    const auto path = dir / "chart.svg";
    report::render_corpus_chart(reports, path);
    const auto svg = read_file(path);
    CHECK(svg.find("<svg") != std::string::npos);
    // 5 metric clusters x 2 methods + 2 legend swatches + 1 background
    CHECK(count_substr(svg, "<rect") == 13);
    // LAJ is plotted x20 and labelled with the scaled value
    CHECK(svg.find("LAJ x20") != std::string::npos);
    CHECK(svg.find("35.8") != std::string::npos);   // 1.79 * 20
    CHECK(svg.find("39.0") != std::string::npos);   // 1.95 * 20
    CHECK(svg.find("petci") != std::string::npos);
  }

  TEST_CASE("chart rejects mixed corpora and empty input") {
    const auto dir = temp_dir("report_chart_bad");
    const std::vector<evalsuite::MetricReport> mixed{
        make_report("base", "petci", 1, 1, 1, 1, 1),
        make_report("base", "hindi", 1, 1, 1, 1, 1),
    };
    CHECK_THROWS_AS(report::render_corpus_chart(mixed, dir / "x.svg"),
                    report::ReportError);
    CHECK_THROWS_AS(report::render_corpus_chart({}, dir / "y.svg"),
                    report::ReportError);
  }

  TEST_CASE("render_report writes a table, deltas, and one chart per corpus") {
    const auto dir = temp_dir("report_full");
    const std::vector<evalsuite::MetricReport> reports{
        make_report("base", "petci", 42.89, 37.09, 8.04, 50.76, 1.79),
        make_report("grpo", "petci", 46.08, 48.92, 5.28, 44.16, 1.95),
        make_report("base", "hindi", 30.0, 31.0, 32.0, 33.0, 2.0),
    };
    const auto paths = report::render_report(reports, dir);
    REQUIRE(paths.size() == 3);
    CHECK(paths[0].filename() == "report.md");
    CHECK(fs::exists(paths[1]));
    CHECK(fs::exists(paths[2]));

    const auto md = read_file(paths[0]);
    CHECK(md.find("# idiom-forge evaluation report") != std::string::npos);
    CHECK(md.find("## Corpus: petci") != std::string::npos);
    CHECK(md.find("## Corpus: hindi") != std::string::npos);
    CHECK(md.find("| base |") != std::string::npos);
    CHECK(md.find("34.916") != std::string::npos);  // composite, 3 decimals
    CHECK(md.find("36.688") != std::string::npos);
    // deltas vs the default baseline (first method per corpus)
    CHECK(md.find("Composite deltas vs baseline `base`") != std::string::npos);
    CHECK(md.find("| base | 0.000 |") != std::string::npos);
    CHECK(md.find("| grpo | 1.772 |") != std::string::npos);
    CHECK(md.find("chart_petci.svg") != std::string::npos);
    CHECK(md.find("chart_hindi.svg") != std::string::npos);
  }

  TEST_CASE("render_report honors an explicit baseline") {
    const auto dir = temp_dir("report_baseline");
    const std::vector<evalsuite::MetricReport> reports{
        make_report("base", "petci", 42.89, 37.09, 8.04, 50.76, 1.79),
        make_report("grpo", "petci", 46.08, 48.92, 5.28, 44.16, 1.95),
    };
    const auto paths = report::render_report(reports, dir, std::string("grpo"));
    const auto md = read_file(paths[0]);
    CHECK(md.find("Composite deltas vs baseline `grpo`") != std::string::npos);
    CHECK(md.find("| base | -1.772 |") != std::string::npos);
    CHECK(md.find("| grpo | 0.000 |") != std::string::npos);

    CHECK_THROWS_WITH_AS(
        (void)report::render_report(reports, dir, std::string("missing-method")),
        doctest::Contains("baseline method 'missing-method' not found"),
        report::ReportError);
  }

  TEST_CASE("render_report rejects duplicate methods within a corpus") {
    const auto dir = temp_dir("report_dup");
    const std::vector<evalsuite::MetricReport> reports{
        make_report("base", "petci", 1, 1, 1, 1, 1),
        make_report("base", "petci", 2, 2, 2, 2, 2),
    };
    CHECK_THROWS_WITH_AS((void)report::render_report(reports, dir),
                         doctest::Contains("duplicate"), report::ReportError);
  }

  TEST_CASE("report rendering is byte-reproducible") {
    const std::vector<evalsuite::MetricReport> reports{
        make_report("base", "petci", 42.89, 37.09, 8.04, 50.76, 1.79),
        make_report("grpo", "petci", 46.08, 48.92, 5.28, 44.16, 1.95),
    };
    const auto dir_a = temp_dir("report_repro_a");
    const auto dir_b = temp_dir("report_repro_b");
    const auto paths_a = report::render_report(reports, dir_a);
    const auto paths_b = report::render_report(reports, dir_b);
    REQUIRE(paths_a.size() == paths_b.size());
    for (std::size_t i = 0; i < paths_a.size(); ++i) {
      CHECK(read_file(paths_a[i]) == read_file(paths_b[i]));
    }
  }
}
