#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace forge::corpus {

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Split { train, test, unassigned };

std::string_view split_name(Split s);
Split split_from_name(std::string_view name);

// One idiom with its English reference translation.
struct IdiomPair {
  std::string id;
  std::string source_text;
  std::string reference_translation;
  std::optional<std::string> literal_gloss;
  std::string language;  // BCP-47-style code: "zh", "hi", ...
  Split split = Split::unassigned;

  bool operator==(const IdiomPair&) const = default;
};

bool is_valid_language_tag(std::string_view tag);

// Human-readable name for prompt templates ("zh" -> "Chinese").
std::string language_display_name(std::string_view code);

struct CorpusSplit {
  std::vector<IdiomPair> train;
  std::vector<IdiomPair> test;
  std::int64_t seed = 0;
  std::string provenance;

  bool operator==(const CorpusSplit&) const = default;
  std::size_t size() const { return train.size() + test.size(); }
};

// A raw input row as read from a two-column file; arity is checked by the
// cleaners, not the reader.
struct RawRow {
  std::vector<std::string> fields;
  std::size_t line_no = 0;
};

// Collects one human-readable line per rejected row.
struct RejectLog {
  std::vector<std::string> lines;
  void add(std::size_t line_no, std::string_view reason);
};

// Reads a UTF-8 tab-separated file, one row per line. Blank lines are
// skipped; field counts are left for the cleaners to judge.
std::vector<RawRow> read_tsv(const std::filesystem::path& path);

// PETCI-style cleaning: trim, drop rows with empty/whitespace/missing-marker
// fields or wrong arity. Keeps input order; assigns ids zh-000001...
std::vector<IdiomPair> clean_petci(std::span<const RawRow> rows,
                                   RejectLog* log = nullptr);

// Hindi cleaning: NFC + trim, then exact-duplicate removal keeping the first
// occurrence, plus the same empty/marker filtering. Ids hi-000001...
std::vector<IdiomPair> clean_hindi(std::span<const RawRow> rows,
                                   RejectLog* log = nullptr);

// PETCI-style cleaning for generic parallel rows (e.g. Opus subtitles) with a
// caller-chosen language tag; ids <language>-000001...
std::vector<IdiomPair> clean_opus(std::span<const RawRow> rows,
                                  std::string_view language,
                                  RejectLog* log = nullptr);

// Deterministic split: sort by id, seeded shuffle, prefix/suffix cut.
// train_count may be 0 (everything lands in test).
CorpusSplit split_corpus(std::span<const IdiomPair> pairs, std::size_t train_count,
                         std::int64_t seed);

// Deterministic sample of n pairs without replacement (input order is the
// starting permutation; no id sort).
std::vector<IdiomPair> sample_subset(std::span<const IdiomPair> pairs, std::size_t n,
                                     std::int64_t seed);

// Line-delimited UTF-8 records; see README for the schema. Round-trips
// field-for-field, including seed and provenance.
void save_corpus(const CorpusSplit& split, const std::filesystem::path& path);
CorpusSplit load_corpus(const std::filesystem::path& path);

}  // namespace forge::corpus
