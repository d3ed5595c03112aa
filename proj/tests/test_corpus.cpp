#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <unistd.h>

#include "forge/corpus.hpp"

using namespace forge;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path dir =
      fs::temp_directory_path() / ("forge_test_" + name + "_" + std::to_string(getpid()));
  fs::create_directories(dir);
  return dir;
}

corpus::RawRow row(std::size_t line_no, std::vector<std::string> fields) {
  corpus::RawRow r;
  r.fields = std::move(fields);
  r.line_no = line_no;
  return r;
}

std::vector<corpus::IdiomPair> make_pairs(std::size_t n, const std::string& prefix) {
  std::vector<corpus::IdiomPair> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    corpus::IdiomPair p;
    char buf[16];
    std::snprintf(buf, sizeof buf, "%06zu", i + 1);
    p.id = prefix + "-" + buf;
    p.source_text = "src " + std::to_string(i);
    p.reference_translation = "tgt " + std::to_string(i);
    p.language = "zh";
    pairs.push_back(std::move(p));
  }
  return pairs;
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("clean_petci trims fields and keeps survivor order") {
    const std::vector<corpus::RawRow> rows{
        row(1, {" 一箭双雕 ", " kill two birds with one stone "})};
    const auto pairs = corpus::clean_petci(rows);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].source_text == "一箭双雕");
    CHECK(pairs[0].reference_translation == "kill two birds with one stone");
    CHECK(pairs[0].language == "zh");
    CHECK(pairs[0].id == "zh-000001");
  }

  TEST_CASE("clean_petci drops the hand-counted bad rows from a 10-row fixture") {
    std::vector<corpus::RawRow> rows;
    rows.push_back(row(1, {"画蛇添足", "to gild the lily"}));
    rows.push_back(row(2, {"", "some translation"}));         // empty source
    rows.push_back(row(3, {"对牛弹琴", "   "}));  // blank target
    rows.push_back(row(4, {"亡羊补牢", "N/A"}));  // missing marker
    for (int i = 5; i <= 10; ++i) {
      rows.push_back(row(static_cast<std::size_t>(i),
                         {"idiom " + std::to_string(i), "gloss " + std::to_string(i)}));
    }
    corpus::RejectLog log;
    const auto pairs = corpus::clean_petci(rows, &log);
    CHECK(pairs.size() == 7);
    CHECK(log.lines.size() == 3);
    CHECK(pairs[0].id == "zh-000001");
    CHECK(pairs[6].id == "zh-000007");
  }

  TEST_CASE("clean_petci rejects wrong-arity rows with a logged reason") {
    const std::vector<corpus::RawRow> rows{row(1, {"only one field"}),
                                           row(2, {"a", "b", "c"}),
                                           row(3, {"ok", "fine"})};
    corpus::RejectLog log;
    const auto pairs = corpus::clean_petci(rows, &log);
    CHECK(pairs.size() == 1);
    REQUIRE(log.lines.size() == 2);
    CHECK(log.lines[0].find("expected 2 fields, got 1") != std::string::npos);
    CHECK(log.lines[1].find("expected 2 fields, got 3") != std::string::npos);
  }

  TEST_CASE("missing markers are matched case-insensitively after trimming") {
    const std::vector<corpus::RawRow> rows{
        row(1, {" na ", "x"}), row(2, {"x", "N/A"}),   row(3, {"null", "x"}),
        row(4, {"x", " - "}), row(5, {"keep", "kept"})};
    const auto pairs = corpus::clean_petci(rows);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].source_text == "keep");
  }

  TEST_CASE("clean_hindi removes duplicates keeping the first occurrence") {
    std::vector<corpus::RawRow> rows;
    rows.push_back(row(1, {"दाल A", "something fishy"}));
    rows.push_back(row(2, {"vB", "translation B"}));
    rows.push_back(row(3, {"दाल A", "something fishy"}));  // dup of 1
    rows.push_back(row(4, {"vC", "translation C"}));
    rows.push_back(row(5, {"vE", ""}));                    // empty target
    rows.push_back(row(6, {"vB  ", "translation B  "}));   // dup of 2 after trim
    for (int i = 7; i <= 12; ++i) {
      rows.push_back(row(static_cast<std::size_t>(i),
                         {"hi " + std::to_string(i), "en " + std::to_string(i)}));
    }
    corpus::RejectLog log;
    const auto pairs = corpus::clean_hindi(rows, &log);
    CHECK(pairs.size() == 9);
    CHECK(pairs[0].language == "hi");
    CHECK(pairs[0].id == "hi-000001");
    bool found_dup_reason = false;
    for (const auto& line : log.lines) {
      if (line.find("duplicate of line") != std::string::npos) found_dup_reason = true;
    }
    CHECK(found_dup_reason);
  }

  TEST_CASE("clean_hindi dedupes across NFC-equivalent spellings") {
    // composed U+00E9 vs decomposed e + U+0301
    const std::vector<corpus::RawRow> rows{row(1, {"café", "t"}),
                                           row(2, {"café", "t"})};
    const auto pairs = corpus::clean_hindi(rows);
    CHECK(pairs.size() == 1);
  }

  TEST_CASE("clean_opus uses the caller's language tag") {
    const std::vector<corpus::RawRow> rows{row(1, {"src", "tgt"})};
    const auto pairs = corpus::clean_opus(rows, "es");
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].language == "es");
    CHECK(pairs[0].id == "es-000001");
    CHECK_THROWS_AS((void)corpus::clean_opus(rows, "99"), corpus::CorpusError);
  }

  TEST_CASE("cleaners are idempotent and never emit empty fields") {
    std::mt19937_64 rng(21);
    const std::vector<std::string> cell_pool{
        "word",  "two words", " padded ", "", "   ", "NA", "n/a", "null", "-",
        "é", "é",  "中文", "x\ty"};
    for (int iter = 0; iter < 100; ++iter) {
      std::vector<corpus::RawRow> rows;
      const std::size_t n = 1 + rng() % 20;
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::string> fields;
        const std::size_t arity = 1 + rng() % 3;
        for (std::size_t f = 0; f < arity; ++f) {
          fields.push_back(cell_pool[rng() % cell_pool.size()]);
        }
        rows.push_back(row(i + 1, std::move(fields)));
      }
      for (bool hindi : {false, true}) {
        const auto first = hindi ? corpus::clean_hindi(rows) : corpus::clean_petci(rows);
        std::vector<corpus::RawRow> again;
        for (std::size_t i = 0; i < first.size(); ++i) {
          again.push_back(row(i + 1, {first[i].source_text,
                                      first[i].reference_translation}));
        }
        const auto second = hindi ? corpus::clean_hindi(again) : corpus::clean_petci(again);
        REQUIRE(second.size() == first.size());
        for (std::size_t i = 0; i < first.size(); ++i) {
          CHECK(second[i].source_text == first[i].source_text);
          CHECK(second[i].reference_translation == first[i].reference_translation);
          CHECK_FALSE(first[i].source_text.empty());
          CHECK_FALSE(first[i].reference_translation.empty());
        }
      }
    }
  }

  TEST_CASE("split_corpus partitions with the requested sizes") {
    const auto pairs = make_pairs(1000, "hi");
    const auto split = corpus::split_corpus(pairs, 800, 3);
    CHECK(split.train.size() == 800);
    CHECK(split.test.size() == 200);
    std::set<std::string> ids;
    for (const auto& p : split.train) {
      CHECK(p.split == corpus::Split::train);
      ids.insert(p.id);
    }
    for (const auto& p : split.test) {
      CHECK(p.split == corpus::Split::test);
      ids.insert(p.id);
    }
    CHECK(ids.size() == 1000);  // every id exactly once
  }

  TEST_CASE("split_corpus edge cases") {
    const auto pairs = make_pairs(5, "zh");
    const auto all_train = corpus::split_corpus(pairs, 5, 1);
    CHECK(all_train.train.size() == 5);
    CHECK(all_train.test.empty());
    CHECK_THROWS_WITH_AS((void)corpus::split_corpus(pairs, 6, 1),
                         doctest::Contains("train_count 6 exceeds corpus size 5"),
                         corpus::CorpusError);
  }

  TEST_CASE("split_corpus is deterministic and input-order independent") {
    std::mt19937_64 rng(33);
    for (int iter = 0; iter < 100; ++iter) {
      const std::size_t n = 1 + rng() % 30;
      auto pairs = make_pairs(n, "zh");
      const std::size_t train = rng() % (n + 1);
      const auto seed = static_cast<std::int64_t>(rng());
      const auto a = corpus::split_corpus(pairs, train, seed);
      const auto b = corpus::split_corpus(pairs, train, seed);
      CHECK(a == b);
      std::shuffle(pairs.begin(), pairs.end(), rng);
      const auto c = corpus::split_corpus(pairs, train, seed);
      CHECK(a == c);  // id sort makes row order irrelevant
    }
  }

  TEST_CASE("sample_subset samples without replacement deterministically") {
    const auto pairs = make_pairs(50, "zh");
    const auto a = corpus::sample_subset(pairs, 10, 5);
    const auto b = corpus::sample_subset(pairs, 10, 5);
    CHECK(a == b);
    CHECK(a.size() == 10);
    std::set<std::string> ids;
    for (const auto& p : a) ids.insert(p.id);
    CHECK(ids.size() == 10);

    const auto everything = corpus::sample_subset(pairs, 50, 9);
    std::set<std::string> all_ids;
    for (const auto& p : everything) all_ids.insert(p.id);
    CHECK(all_ids.size() == 50);

    CHECK_THROWS_AS((void)corpus::sample_subset(pairs, 51, 1), corpus::CorpusError);
  }

  TEST_CASE("save/load round-trips the full corpus") {
    const auto dir = temp_dir("corpus_rt");
    auto pairs = make_pairs(12, "zh");
    pairs[3].literal_gloss = "a literal gloss";
    pairs[7].literal_gloss = "another one";
    auto split = corpus::split_corpus(pairs, 8, 17);
    split.provenance = "petci:fixture.tsv";
    const auto path = dir / "corpus.jsonl";
    corpus::save_corpus(split, path);
    const auto loaded = corpus::load_corpus(path);
    CHECK(loaded == split);

    corpus::CorpusSplit empty;
    const auto empty_path = dir / "empty.jsonl";
    corpus::save_corpus(empty, empty_path);
    CHECK(corpus::load_corpus(empty_path) == empty);
  }

  TEST_CASE("load_corpus reports the offending line") {
    const auto dir = temp_dir("corpus_bad");
    const auto path = dir / "bad.jsonl";
    auto split = corpus::split_corpus(make_pairs(6, "zh"), 3, 1);
    corpus::save_corpus(split, path);
    // corrupt physical line 5 (meta line + 3 records precede it)
    std::ifstream in(path);
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    in.close();
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < content.size()) {
      const auto nl = content.find('\n', pos);
      lines.push_back(content.substr(pos, nl - pos));
      pos = nl + 1;
    }
    REQUIRE(lines.size() == 7);
    lines[4] = "{not json";
    std::ofstream out(path, std::ios::binary);
    for (const auto& l : lines) out << l << '\n';
    out.close();
    CHECK_THROWS_WITH_AS((void)corpus::load_corpus(path), doctest::Contains(":5"),
                         corpus::CorpusError);
  }

  TEST_CASE("save_corpus refuses invalid pairs") {
    const auto dir = temp_dir("corpus_invalid");
    corpus::CorpusSplit split;
    corpus::IdiomPair p;
    p.id = "zh-000001";
    p.source_text = "x";
    p.reference_translation = "   ";  // blank
    p.language = "zh";
    p.split = corpus::Split::train;
    split.train.push_back(p);
    CHECK_THROWS_AS(corpus::save_corpus(split, dir / "x.jsonl"), corpus::CorpusError);
  }

  TEST_CASE("read_tsv splits on tabs and keeps line numbers") {
    const auto dir = temp_dir("corpus_tsv");
    const auto path = dir / "rows.tsv";
    std::ofstream out(path, std::ios::binary);
    out << "a\tb\n\nc\td\te\nf\n";
    out.close();
    const auto rows = corpus::read_tsv(path);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].fields == std::vector<std::string>{"a", "b"});
    CHECK(rows[0].line_no == 1);
    CHECK(rows[1].fields == std::vector<std::string>{"c", "d", "e"});
    CHECK(rows[1].line_no == 3);
    CHECK(rows[2].fields == std::vector<std::string>{"f"});
    CHECK_THROWS_AS((void)corpus::read_tsv(dir / "missing.tsv"), corpus::CorpusError);
  }

  TEST_CASE("language display names") {
    CHECK(corpus::language_display_name("zh") == "Chinese");
    CHECK(corpus::language_display_name("hi") == "Hindi");
    CHECK(corpus::language_display_name("en") == "English");
    CHECK(corpus::language_display_name("xx") == "xx");
  }
}
