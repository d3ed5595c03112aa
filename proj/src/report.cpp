#include "forge/report.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>

namespace forge::report {

namespace {

std::string fmt(double v, int prec) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

std::string sanitize_filename(std::string_view tag) {
  std::string out;
  out.reserve(tag.size());
  for (char c : tag) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
    out.push_back(ok ? c : '_');
  }
  return out.empty() ? std::string("corpus") : out;
}

constexpr std::array<std::string_view, 6> kPalette = {
    "#4c78a8", "#f58518", "#54a24b", "#e45756", "#72b7b2", "#b279a2"};

constexpr std::array<std::string_view, 5> kMetricLabels = {"DA", "QE", "ROUGE",
                                                           "ED", "LAJ x20"};

std::array<double, 5> chart_values(const evalsuite::MetricReport& r) {
  return {r.da, r.qe, r.rouge, r.ed, 20.0 * r.laj};
}

}  // namespace

void render_corpus_chart(std::span<const evalsuite::MetricReport> reports,
                         const std::filesystem::path& path) {
  if (reports.empty()) throw ReportError("no reports to chart");
  for (const auto& r : reports) {
    if (r.corpus_tag != reports.front().corpus_tag) {
      throw ReportError("chart for corpus '" + reports.front().corpus_tag +
                        "' also received reports for '" + r.corpus_tag + "'");
    }
  }

  const int methods = static_cast<int>(reports.size());
  const double bar_w = 28.0;
  const double bar_gap = 4.0;
  const double cluster_gap = 40.0;
  const double cluster_w = methods * bar_w + (methods - 1) * bar_gap;
  const double left = 50.0, top = 48.0, plot_h = 220.0, bottom = 40.0;
  const double plot_w = 5 * cluster_w + 4 * cluster_gap;
  const double legend_w = 170.0;
  const double width = left + plot_w + 16.0 + legend_w;
  const double height = top + plot_h + bottom;
  const double base_y = top + plot_h;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ReportError("cannot open " + path.string() + " for writing");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width, 0)
      << "\" height=\"" << fmt(height, 0) << "\" font-family=\"sans-serif\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << fmt(left, 1) << "\" y=\"20\" font-size=\"14\">Corpus: "
      << reports.front().corpus_tag << "</text>\n";

  // y axis with gridlines every 20 points
  for (int tick = 0; tick <= 100; tick += 20) {
    const double y = base_y - plot_h * tick / 100.0;
    out << "<line x1=\"" << fmt(left, 1) << "\" y1=\"" << fmt(y, 1) << "\" x2=\""
        << fmt(left + plot_w, 1) << "\" y2=\"" << fmt(y, 1)
        << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << fmt(left - 8.0, 1) << "\" y=\"" << fmt(y + 4.0, 1)
        << "\" font-size=\"10\" text-anchor=\"end\">" << tick << "</text>\n";
  }

  for (std::size_t mi = 0; mi < kMetricLabels.size(); ++mi) {
    const double cluster_x = left + mi * (cluster_w + cluster_gap);
    for (int vi = 0; vi < methods; ++vi) {
      const double value = chart_values(reports[vi])[mi];
      const double shown = std::clamp(value, 0.0, 100.0);
      const double h = plot_h * shown / 100.0;
      const double x = cluster_x + vi * (bar_w + bar_gap);
      out << "<rect x=\"" << fmt(x, 1) << "\" y=\"" << fmt(base_y - h, 1)
          << "\" width=\"" << fmt(bar_w, 1) << "\" height=\"" << fmt(h, 1)
          << "\" fill=\"" << kPalette[vi % kPalette.size()] << "\"/>\n";
      out << "<text x=\"" << fmt(x + bar_w / 2.0, 1) << "\" y=\""
          << fmt(base_y - h - 4.0, 1)
          << "\" font-size=\"9\" text-anchor=\"middle\">" << fmt(value, 1)
          << "</text>\n";
    }
    out << "<text x=\"" << fmt(cluster_x + cluster_w / 2.0, 1) << "\" y=\""
        << fmt(base_y + 16.0, 1) << "\" font-size=\"11\" text-anchor=\"middle\">"
        << kMetricLabels[mi] << "</text>\n";
  }

  // legend, one row per method
  const double legend_x = left + plot_w + 16.0;
  for (int vi = 0; vi < methods; ++vi) {
    const double y = top + vi * 18.0;
    out << "<rect x=\"" << fmt(legend_x, 1) << "\" y=\"" << fmt(y, 1)
        << "\" width=\"12\" height=\"12\" fill=\""
        << kPalette[vi % kPalette.size()] << "\"/>\n";
    out << "<text x=\"" << fmt(legend_x + 18.0, 1) << "\" y=\"" << fmt(y + 10.0, 1)
        << "\" font-size=\"11\">" << reports[vi].method_tag << "</text>\n";
  }

  out << "</svg>\n";
  if (!out) throw ReportError("failed writing " + path.string());
}

std::vector<std::filesystem::path> render_report(
    std::span<const evalsuite::MetricReport> reports,
    const std::filesystem::path& out_dir,
    const std::optional<std::string>& baseline) {
  if (reports.empty()) throw ReportError("no reports to render");

  // Group by corpus tag, keeping first-appearance order.
  std::vector<std::pair<std::string, std::vector<evalsuite::MetricReport>>> groups;
  for (const auto& r : reports) {
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const auto& g) { return g.first == r.corpus_tag; });
    if (it == groups.end()) {
      groups.emplace_back(r.corpus_tag, std::vector<evalsuite::MetricReport>{});
      it = groups.end() - 1;
    }
    for (const auto& seen : it->second) {
      if (seen.method_tag == r.method_tag) {
        throw ReportError("duplicate method '" + r.method_tag + "' for corpus '" +
                          r.corpus_tag + "'");
      }
    }
    it->second.push_back(r);
  }

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path md_path = out_dir / "report.md";
  std::ofstream md(md_path, std::ios::binary);
  if (!md) throw ReportError("cannot open " + md_path.string() + " for writing");
  std::vector<std::filesystem::path> written{md_path};

  md << "# idiom-forge evaluation report\n";
  for (const auto& [corpus_tag, group] : groups) {
    const evalsuite::MetricReport* base = &group.front();
    if (baseline) {
      auto it = std::find_if(group.begin(), group.end(), [&](const auto& r) {
        return r.method_tag == *baseline;
      });
      if (it == group.end()) {
        throw ReportError("baseline method '" + *baseline +
                          "' not found for corpus '" + corpus_tag + "'");
      }
      base = &*it;
    }

    md << "\n## Corpus: " << corpus_tag << "\n\n";
    md << "| Method | DA | QE | ROUGE | ED | LAJ | Composite | N |\n";
    md << "|---|---:|---:|---:|---:|---:|---:|---:|\n";
    for (const auto& r : group) {
      md << "| " << r.method_tag << " | " << fmt(r.da, 2) << " | " << fmt(r.qe, 2)
         << " | " << fmt(r.rouge, 2) << " | " << fmt(r.ed, 2) << " | "
         << fmt(r.laj, 2) << " | " << fmt(r.composite, 3) << " | " << r.n
         << " |\n";
    }

    md << "\nComposite deltas vs baseline `" << base->method_tag << "`:\n\n";
    md << "| Method | Delta composite |\n";
    md << "|---|---:|\n";
    for (const auto& r : group) {
      md << "| " << r.method_tag << " | "
         << fmt(evalsuite::compare_methods(r, *base), 3) << " |\n";
    }

    const std::string chart_name = "chart_" + sanitize_filename(corpus_tag) + ".svg";
    md << "\n![metrics for " << corpus_tag << "](" << chart_name << ")\n";
    const std::filesystem::path chart_path = out_dir / chart_name;
    render_corpus_chart(group, chart_path);
    written.push_back(chart_path);
  }
  md << "\nNotes: ROUGE is " << evalsuite::kRougeVariant
     << "; ED is 100 x max(0, cosine similarity); LAJ is rated 1-5 and scaled "
        "x20 inside composites and charts.\n";
  if (!md) throw ReportError("failed writing " + md_path.string());
  return written;
}

}  // namespace forge::report
