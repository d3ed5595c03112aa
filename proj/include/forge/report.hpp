#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "forge/evalsuite.hpp"

namespace forge::report {

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One grouped bar chart for a single corpus: five metric clusters (LAJ shown
// x20 so everything shares the 0-100 axis), one bar per method.
void render_corpus_chart(std::span<const evalsuite::MetricReport> reports,
                         const std::filesystem::path& path);

// Writes report.md (metric table + composite deltas per corpus) and one SVG
// chart per corpus into out_dir. Reports are grouped by corpus_tag; deltas
// are taken against `baseline` (default: the first method of each corpus).
// Returns the written file paths, report.md first.
std::vector<std::filesystem::path> render_report(
    std::span<const evalsuite::MetricReport> reports,
    const std::filesystem::path& out_dir,
    const std::optional<std::string>& baseline = std::nullopt);

}  // namespace forge::report
