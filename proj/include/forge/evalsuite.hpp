#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "forge/backends.hpp"

namespace forge::evalsuite {

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One prediction to grade against its reference.
struct TranslationRecord {
  std::string pair_id;
  std::string source_text;
  std::string prediction;
  std::string reference;
  std::string method_tag;

  bool operator==(const TranslationRecord&) const = default;
};

// Corpus-level means; laj stays on its native 1-5 scale and is scaled by 20
// only inside the composite.
struct MetricReport {
  std::string method_tag;
  std::string corpus_tag;
  double da = 0.0;      // [0,100]
  double qe = 0.0;      // [0,100]
  double rouge = 0.0;   // [0,100]
  double ed = 0.0;      // [0,100]
  double laj = 0.0;     // [1,5]
  double composite = 0.0;
  std::size_t n = 0;

  bool operator==(const MetricReport&) const = default;
};

struct RecordMetrics {
  std::string pair_id;
  double da = 0.0;
  double qe = 0.0;
  double rouge = 0.0;
  double ed = 0.0;
  int laj = 1;

  bool operator==(const RecordMetrics&) const = default;
};

struct CorpusEvaluation {
  MetricReport report;
  std::vector<RecordMetrics> records;

  bool operator==(const CorpusEvaluation&) const = default;
};

// Reported ROUGE variant, recorded in the report file.
inline constexpr std::string_view kRougeVariant = "rouge-l-f1";

// ROUGE-L F-measure (beta=1) x 100 over lowercased whitespace tokens.
double rouge_score(std::string_view prediction, std::string_view reference);

// 100 * max(0, cosine similarity) between the two embeddings.
double embedding_score(std::string_view prediction, std::string_view reference,
                       backends::Embedder& embedder);

double da_score(const TranslationRecord& record, backends::Scorer& ref_based);
double qe_score(const TranslationRecord& record, backends::Scorer& ref_free);
int laj_score(const TranslationRecord& record, backends::Judge& judge);

// p = (DA + QE + ROUGE + ED + 20*LAJ) / 5; any missing metric is an error.
double composite(std::optional<double> da, std::optional<double> qe,
                 std::optional<double> rouge, std::optional<double> ed,
                 std::optional<double> laj);
double composite(const MetricReport& report);

// a.composite - b.composite; reports must grade the same corpus.
double compare_methods(const MetricReport& a, const MetricReport& b);

// Validates every record up front (error lists the failing ids), runs all
// five metrics with batched backend calls, and aggregates by arithmetic mean.
CorpusEvaluation evaluate_corpus(std::span<const TranslationRecord> records,
                                 backends::BackendSet& backends,
                                 std::string_view corpus_tag);

// Report file: {"records": [per-record rows], "report": {means + composite}}.
void save_report(const std::filesystem::path& path, const CorpusEvaluation& eval);
CorpusEvaluation load_report(const std::filesystem::path& path);

}  // namespace forge::evalsuite
