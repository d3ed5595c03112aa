#include "forge/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "forge/text.hpp"

namespace forge::corpus {

using nlohmann::json;

std::string_view split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::test: return "test";
    default: return "unassigned";
  }
}

Split split_from_name(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "test") return Split::test;
  if (name == "unassigned") return Split::unassigned;
  throw CorpusError("unknown split name: " + std::string(name));
}

bool is_valid_language_tag(std::string_view tag) {
  std::size_t pos = 0;
  bool first = true;
  while (true) {
    const std::size_t next = tag.find('-', pos);
    const std::string_view sub =
        tag.substr(pos, next == std::string_view::npos ? std::string_view::npos
                                                       : next - pos);
    if (sub.empty() || sub.size() > 8) return false;
    if (first && sub.size() < 2) return false;
    for (char c : sub) {
      const bool alpha = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
      const bool digit = c >= '0' && c <= '9';
      if (first ? !alpha : !(alpha || digit)) return false;
    }
    if (next == std::string_view::npos) return true;
    first = false;
    pos = next + 1;
  }
}

std::string language_display_name(std::string_view code) {
  if (code == "zh") return "Chinese";
  if (code == "hi") return "Hindi";
  if (code == "en") return "English";
  if (code == "es") return "Spanish";
  return std::string(code);
}

void RejectLog::add(std::size_t line_no, std::string_view reason) {
  lines.push_back("line " + std::to_string(line_no) + ": " + std::string(reason));
}

namespace {

bool is_missing_marker(std::string_view trimmed) {
  static const char* kMarkers[] = {"na", "n/a", "null", "-"};
  if (trimmed.empty()) return true;
  const std::string lower = text::ascii_lower(trimmed);
  for (const char* m : kMarkers) {
    if (lower == m) return true;
  }
  return false;
}

std::string make_id(std::string_view prefix, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*s-%06zu", static_cast<int>(prefix.size()),
                prefix.data(), index);
  return std::string(buf);
}

struct CleanedRow {
  std::string source;
  std::string target;
  std::size_t line_no;
};

// Shared per-row validation: NFC, trim, arity and missing-marker checks.
std::vector<CleanedRow> clean_rows(std::span<const RawRow> rows, RejectLog* log) {
  std::vector<CleanedRow> out;
  out.reserve(rows.size());
  for (const RawRow& row : rows) {
    if (row.fields.size() != 2) {
      if (log) {
        log->add(row.line_no, "expected 2 fields, got " +
                                  std::to_string(row.fields.size()));
      }
      continue;
    }
    std::string src = text::trim(text::nfc(row.fields[0]));
    std::string tgt = text::trim(text::nfc(row.fields[1]));
    if (is_missing_marker(src)) {
      if (log) log->add(row.line_no, "source empty or marked missing");
      continue;
    }
    if (is_missing_marker(tgt)) {
      if (log) log->add(row.line_no, "target empty or marked missing");
      continue;
    }
    out.push_back({std::move(src), std::move(tgt), row.line_no});
  }
  return out;
}

std::uint64_t next_bounded(std::mt19937_64& rng, std::uint64_t bound) {
  // Plain modulo: the tiny bias is irrelevant, the fixed mapping is what
  // makes splits reproducible across platforms.
  return rng() % bound;
}

}  // namespace

std::vector<IdiomPair> clean_petci(std::span<const RawRow> rows, RejectLog* log) {
  std::vector<IdiomPair> pairs;
  std::size_t index = 0;
  for (CleanedRow& row : clean_rows(rows, log)) {
    IdiomPair p;
    p.id = make_id("zh", ++index);
    p.source_text = std::move(row.source);
    p.reference_translation = std::move(row.target);
    p.language = "zh";
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<IdiomPair> clean_hindi(std::span<const RawRow> rows, RejectLog* log) {
  std::vector<IdiomPair> pairs;
  std::unordered_map<std::string, std::size_t> seen;  // "src\x1Ftgt" -> line_no
  std::size_t index = 0;
  for (CleanedRow& row : clean_rows(rows, log)) {
    std::string key = row.source + '\x1F' + row.target;
    auto [it, inserted] = seen.emplace(std::move(key), row.line_no);
    if (!inserted) {
      if (log) {
        log->add(row.line_no, "duplicate of line " + std::to_string(it->second));
      }
      continue;
    }
    IdiomPair p;
    p.id = make_id("hi", ++index);
    p.source_text = std::move(row.source);
    p.reference_translation = std::move(row.target);
    p.language = "hi";
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<IdiomPair> clean_opus(std::span<const RawRow> rows,
                                  std::string_view language, RejectLog* log) {
  if (!is_valid_language_tag(language)) {
    throw CorpusError("invalid language tag '" + std::string(language) + "'");
  }
  std::vector<IdiomPair> pairs;
  std::size_t index = 0;
  for (CleanedRow& row : clean_rows(rows, log)) {
    IdiomPair p;
    p.id = make_id(language, ++index);
    p.source_text = std::move(row.source);
    p.reference_translation = std::move(row.target);
    p.language = std::string(language);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<RawRow> read_tsv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot open " + path.string());
  std::vector<RawRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    RawRow row;
    row.line_no = lineno;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      if (tab == std::string::npos) {
        row.fields.push_back(line.substr(start));
        break;
      }
      row.fields.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

CorpusSplit split_corpus(std::span<const IdiomPair> pairs, std::size_t train_count,
                         std::int64_t seed) {
  if (train_count > pairs.size()) {
    throw CorpusError("train_count " + std::to_string(train_count) +
                      " exceeds corpus size " + std::to_string(pairs.size()));
  }
  std::vector<IdiomPair> shuffled(pairs.begin(), pairs.end());
  // Sorting by id first makes the split independent of input row order.
  std::sort(shuffled.begin(), shuffled.end(),
            [](const IdiomPair& a, const IdiomPair& b) { return a.id < b.id; });
  std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
  for (std::size_t i = shuffled.size(); i > 1; --i) {
    std::swap(shuffled[i - 1], shuffled[next_bounded(rng, i)]);
  }

  CorpusSplit out;
  out.seed = seed;
  out.train.assign(shuffled.begin(),
                   shuffled.begin() + static_cast<std::ptrdiff_t>(train_count));
  out.test.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(train_count),
                  shuffled.end());
  for (IdiomPair& p : out.train) p.split = Split::train;
  for (IdiomPair& p : out.test) p.split = Split::test;
  return out;
}

std::vector<IdiomPair> sample_subset(std::span<const IdiomPair> pairs, std::size_t n,
                                     std::int64_t seed) {
  if (n > pairs.size()) {
    throw CorpusError("sample size " + std::to_string(n) + " exceeds corpus size " +
                      std::to_string(pairs.size()));
  }
  std::vector<IdiomPair> shuffled(pairs.begin(), pairs.end());
  std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + next_bounded(rng, shuffled.size() - i);
    std::swap(shuffled[i], shuffled[j]);
  }
  shuffled.resize(n);
  return shuffled;
}

namespace {

void validate_pair(const IdiomPair& p, const std::string& where) {
  if (p.id.empty()) throw CorpusError(where + ": empty id");
  if (text::is_blank(p.source_text)) throw CorpusError(where + ": empty source_text");
  if (text::is_blank(p.reference_translation)) {
    throw CorpusError(where + ": empty reference_translation");
  }
  if (!is_valid_language_tag(p.language)) {
    throw CorpusError(where + ": invalid language tag '" + p.language + "'");
  }
}

json pair_to_json(const IdiomPair& p) {
  json j;
  j["id"] = p.id;
  j["source_text"] = p.source_text;
  j["reference_translation"] = p.reference_translation;
  if (p.literal_gloss) j["literal_gloss"] = *p.literal_gloss;
  j["language"] = p.language;
  j["split"] = std::string(split_name(p.split));
  return j;
}

IdiomPair pair_from_json(const json& j, const std::string& where) {
  IdiomPair p;
  try {
    p.id = j.at("id").get<std::string>();
    p.source_text = j.at("source_text").get<std::string>();
    p.reference_translation = j.at("reference_translation").get<std::string>();
    if (j.contains("literal_gloss")) {
      p.literal_gloss = j.at("literal_gloss").get<std::string>();
    }
    p.language = j.at("language").get<std::string>();
    p.split = split_from_name(j.at("split").get<std::string>());
  } catch (const json::exception& e) {
    throw CorpusError(where + ": " + e.what());
  }
  validate_pair(p, where);
  return p;
}

}  // namespace

void save_corpus(const CorpusSplit& split, const std::filesystem::path& path) {
  std::unordered_set<std::string> ids;
  for (const auto* part : {&split.train, &split.test}) {
    for (const IdiomPair& p : *part) {
      validate_pair(p, "save_corpus");
      if (!ids.insert(p.id).second) {
        throw CorpusError("save_corpus: duplicate id '" + p.id + "'");
      }
    }
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw CorpusError("cannot open for writing: " + path.string());
  json meta;
  meta["type"] = "meta";
  meta["seed"] = split.seed;
  meta["provenance"] = split.provenance;
  out << meta.dump() << '\n';
  for (const auto* part : {&split.train, &split.test}) {
    for (const IdiomPair& p : *part) {
      out << pair_to_json(p).dump() << '\n';
    }
  }
  if (!out.flush()) throw CorpusError("write failed: " + path.string());
}

CorpusSplit load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot open corpus file: " + path.string());

  CorpusSplit out;
  std::string line;
  std::size_t line_no = 0;
  std::unordered_set<std::string> ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw CorpusError(where + ": malformed record");
    }
    if (line_no == 1 && j.value("type", "") == "meta") {
      out.seed = j.value("seed", std::int64_t{0});
      out.provenance = j.value("provenance", "");
      continue;
    }
    IdiomPair p = pair_from_json(j, where);
    if (!ids.insert(p.id).second) {
      throw CorpusError(where + ": duplicate id '" + p.id + "'");
    }
    switch (p.split) {
      case Split::train: out.train.push_back(std::move(p)); break;
      case Split::test: out.test.push_back(std::move(p)); break;
      default:
        throw CorpusError(where + ": record has unassigned split");
    }
  }
  return out;
}

}  // namespace forge::corpus
