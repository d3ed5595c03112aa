#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "forge/backends.hpp"
#include "forge/corpus.hpp"

namespace forge::prompts {

class PromptError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Stage { explanation, literal, final_translation };

std::string_view stage_name(Stage s);  // "explanation" / "literal" / "final"

// The three stage templates, byte-identical to the versioned assets under
// assets/prompts/. Placeholders: {lang}, {idiom}, {explanation}, {literal}.
inline constexpr std::string_view kExplanationTemplate =
    "Explain the meaning of the following {lang} idiom in English.\n"
    "- Audience: educated readers; be concise (<= 2 sentences).\n"
    "- Do not translate word-by-word; provide the **idiomatic sense**.\n"
    "\n"
    "Idiom: {idiom}\n";

inline constexpr std::string_view kLiteralTemplate =
    "Provide a **literal, word-by-word** English translation for the following "
    "{lang} idiom.\n"
    "- Keep it terse and faithful to each component.\n"
    "- No commentary, just the literal gloss.\n"
    "\n"
    "Idiom: {idiom}\n";

inline constexpr std::string_view kFinalTemplate =
    "Produce a **natural English idiomatic translation** given:\n"
    "(1) An idiom explanation (idiomatic meaning) and\n"
    "(2) A literal word-by-word gloss.\n"
    "\n"
    "Rules:\n"
    "- Output a single short English phrase/sentence that a native speaker "
    "would actually say.\n"
    "- Prefer clarity and naturalness over literalness.\n"
    "- No extra commentary.\n"
    "\n"
    "Idiom: {idiom}\n"
    "Explanation: {explanation}\n"
    "Literal: {literal}\n"
    "Result:\n";

std::string_view stage_template(Stage s);
std::string template_digest(Stage s);  // FNV-1a 64 hex of the template bytes

// Per-stage completion budgets; the templates all demand short outputs.
inline constexpr int kExplanationMaxTokens = 128;
inline constexpr int kLiteralMaxTokens = 96;
inline constexpr int kFinalMaxTokens = 64;

// Prompt builders substitute placeholders and reject empty inputs and any
// placeholder left unresolved.
std::string build_explanation_prompt(std::string_view idiom,
                                     std::string_view language_name);
std::string build_literal_prompt(std::string_view idiom,
                                 std::string_view language_name);
std::string build_final_prompt(std::string_view idiom, std::string_view explanation,
                               std::string_view literal);

struct PromptTrace {
  std::string pair_id;
  std::string idiom;
  std::string language;  // corpus language code; prompts use the display name
  std::string explanation;
  std::string literal;
  std::string final_translation;
  std::vector<std::string> stage_prompts;  // rendered prompts, stages 1-3

  bool operator==(const PromptTrace&) const = default;
};

// Runs the three stages in order, threading the explanation and literal into
// the final prompt. Stage failures raise PromptError naming the stage; a
// trace is only returned when all three outputs are non-empty.
PromptTrace run_pipeline(const corpus::IdiomPair& pair,
                         backends::Generator& generator,
                         double temperature = 0.3);

std::vector<PromptTrace> run_pipeline_batch(std::span<const corpus::IdiomPair> pairs,
                                            backends::Generator& generator,
                                            double temperature = 0.3);

// Line-delimited full PromptTrace records.
void save_traces(const std::filesystem::path& path,
                 std::span<const PromptTrace> traces);
std::vector<PromptTrace> load_traces(const std::filesystem::path& path);

}  // namespace forge::prompts
