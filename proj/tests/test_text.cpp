#include <doctest.h>

#include "forge/text.hpp"

using namespace forge;

TEST_SUITE("text") {
  TEST_CASE("fnv1a64 matches the published test vectors") {
    CHECK(text::fnv1a64("") == 14695981039346656037ULL);
    CHECK(text::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(text::fnv1a64("foobar") == 0x85944171f73967e8ULL);
    CHECK(text::fnv1a64_hex("a") == "af63dc4c8601ec8c");
    CHECK(text::fnv1a64_hex("") == "cbf29ce484222325");
  }

  TEST_CASE("trim strips unicode whitespace on both ends") {
    CHECK(text::trim("  hello  ") == "hello");
    CHECK(text::trim(" héllo ") == "héllo");
    CHECK(text::trim("　 x 　") == "x");
    CHECK(text::trim("\t\r\n") == "");
    CHECK(text::trim("") == "");
    CHECK(text::trim("﻿bom") == "bom");
    CHECK(text::trim_right("a \n") == "a");
    CHECK(text::trim_right("  a") == "  a");
  }

  TEST_CASE("is_blank covers whitespace-only and empty strings") {
    CHECK(text::is_blank(""));
    CHECK(text::is_blank(" \t 　"));
    CHECK(text::is_blank("﻿"));
    CHECK_FALSE(text::is_blank(" x "));
  }

  TEST_CASE("tokenize_lower splits on unicode whitespace and lowercases ascii") {
    CHECK(text::tokenize_lower("The CAT  sat") ==
          std::vector<std::string>{"the", "cat", "sat"});
    CHECK(text::tokenize_lower("a　b\nc") ==
          std::vector<std::string>{"a", "b", "c"});
    CHECK(text::tokenize_lower("   ") == std::vector<std::string>{});
    // Non-ASCII bytes are left alone so tokenization is locale-independent.
    CHECK(text::tokenize_lower("ÄB é") ==
          std::vector<std::string>{"Äb", "é"});
  }

  TEST_CASE("token_f1 hand values") {
    CHECK(text::token_f1("the cat sat", "the cat sat") == doctest::Approx(1.0));
    CHECK(text::token_f1("aaa bbb", "ccc ddd") == doctest::Approx(0.0));
    CHECK(text::token_f1("a b c d", "a b") == doctest::Approx(2.0 * 2 / 6));
    CHECK(text::token_f1("kill two birds", "kill birds") == doctest::Approx(0.8));
    // multiset semantics: the duplicated token only matches once
    CHECK(text::token_f1("a a b", "a") == doctest::Approx(0.5));
    CHECK(text::token_f1("", "") == doctest::Approx(1.0));
    CHECK(text::token_f1("a", "") == doctest::Approx(0.0));
    CHECK(text::token_f1("The Cat", "the cat") == doctest::Approx(1.0));
  }

  TEST_CASE("nfc composes combining sequences") {
    // e + COMBINING ACUTE ACCENT -> U+00E9
    CHECK(text::nfc("é") == "é");
    CHECK(text::nfc("é") == "é");
    CHECK(text::nfc("") == "");
    CHECK(text::nfc("plain ascii") == "plain ascii");
    // idempotence on a Devanagari sample
    const std::string hi = "क़";  // KA + NUKTA -> QA
    CHECK(text::nfc(text::nfc(hi)) == text::nfc(hi));
  }

  TEST_CASE("ascii_lower leaves non-ascii bytes untouched") {
    CHECK(text::ascii_lower("ABC xyz") == "abc xyz");
    CHECK(text::ascii_lower("ÄB") == "Äb");
  }
}
