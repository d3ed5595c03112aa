#include "forge/prompts.hpp"

#include <json.hpp>

#include <array>
#include <fstream>

#include "forge/text.hpp"

namespace forge::prompts {

using nlohmann::json;

std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::explanation: return "explanation";
    case Stage::literal: return "literal";
    case Stage::final_translation: return "final";
  }
  throw PromptError("unknown stage");
}

std::string_view stage_template(Stage s) {
  switch (s) {
    case Stage::explanation: return kExplanationTemplate;
    case Stage::literal: return kLiteralTemplate;
    case Stage::final_translation: return kFinalTemplate;
  }
  throw PromptError("unknown stage");
}

std::string template_digest(Stage s) { return text::fnv1a64_hex(stage_template(s)); }

namespace {

constexpr std::array<std::string_view, 4> kPlaceholders = {
    "{lang}", "{idiom}", "{explanation}", "{literal}"};

std::string substitute(std::string_view tmpl, std::string_view needle,
                       std::string_view value) {
  std::string out(tmpl);
  std::size_t pos = 0;
  while ((pos = out.find(needle, pos)) != std::string::npos) {
    out.replace(pos, needle.size(), value);
    pos += value.size();
  }
  return out;
}

void check_resolved(const std::string& prompt) {
  for (std::string_view p : kPlaceholders) {
    if (prompt.find(p) != std::string::npos) {
      throw PromptError("unresolved placeholder " + std::string(p) +
                        " in rendered prompt");
    }
  }
}

void require_nonempty(std::string_view value, std::string_view field) {
  if (value.empty()) {
    throw PromptError(std::string(field) + " must be non-empty");
  }
}

/// Drops a leading "Result:" echo (models sometimes repeat the cue line).
std::string strip_result_echo(std::string s) {
  std::size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\n' || s[i] == '\r')) {
    ++i;
  }
  constexpr std::string_view cue = "Result:";
  if (s.compare(i, cue.size(), cue) == 0) {
    i += cue.size();
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    return s.substr(i);
  }
  return s;
}

}  // namespace

std::string build_explanation_prompt(std::string_view idiom,
                                     std::string_view language_name) {
  require_nonempty(idiom, "idiom");
  require_nonempty(language_name, "language name");
  std::string prompt = substitute(kExplanationTemplate, "{lang}", language_name);
  prompt = substitute(prompt, "{idiom}", idiom);
  check_resolved(prompt);
  return prompt;
}

std::string build_literal_prompt(std::string_view idiom,
                                 std::string_view language_name) {
  require_nonempty(idiom, "idiom");
  require_nonempty(language_name, "language name");
  std::string prompt = substitute(kLiteralTemplate, "{lang}", language_name);
  prompt = substitute(prompt, "{idiom}", idiom);
  check_resolved(prompt);
  return prompt;
}

std::string build_final_prompt(std::string_view idiom, std::string_view explanation,
                               std::string_view literal) {
  require_nonempty(idiom, "idiom");
  require_nonempty(explanation, "explanation");
  require_nonempty(literal, "literal");
  std::string prompt = substitute(kFinalTemplate, "{idiom}", idiom);
  prompt = substitute(prompt, "{explanation}", explanation);
  prompt = substitute(prompt, "{literal}", literal);
  check_resolved(prompt);
  return prompt;
}

namespace {

std::string run_stage(backends::Generator& generator, Stage stage,
                      const std::string& pair_id, const std::string& prompt,
                      double temperature, int max_tokens) {
  std::string raw;
  try {
    raw = backends::generate(generator, prompt, temperature, max_tokens);
  } catch (const backends::BackendError& e) {
    throw PromptError("stage '" + std::string(stage_name(stage)) +
                      "' failed for pair '" + pair_id + "': " + e.what());
  }
  std::string out = text::trim_right(raw);
  if (stage == Stage::final_translation) out = strip_result_echo(std::move(out));
  if (out.empty()) {
    throw PromptError("stage '" + std::string(stage_name(stage)) +
                      "' produced empty output for pair '" + pair_id + "'");
  }
  return out;
}

}  // namespace

PromptTrace run_pipeline(const corpus::IdiomPair& pair,
                         backends::Generator& generator, double temperature) {
  require_nonempty(pair.source_text, "pair.source_text");
  const std::string language_name = corpus::language_display_name(pair.language);

  PromptTrace trace;
  trace.pair_id = pair.id;
  trace.idiom = pair.source_text;
  trace.language = pair.language;

  trace.stage_prompts.push_back(
      build_explanation_prompt(pair.source_text, language_name));
  trace.explanation = run_stage(generator, Stage::explanation, pair.id,
                                trace.stage_prompts[0], temperature,
                                kExplanationMaxTokens);

  trace.stage_prompts.push_back(build_literal_prompt(pair.source_text, language_name));
  trace.literal = run_stage(generator, Stage::literal, pair.id,
                            trace.stage_prompts[1], temperature, kLiteralMaxTokens);

  trace.stage_prompts.push_back(
      build_final_prompt(pair.source_text, trace.explanation, trace.literal));
  trace.final_translation =
      run_stage(generator, Stage::final_translation, pair.id, trace.stage_prompts[2],
                temperature, kFinalMaxTokens);
  return trace;
}

std::vector<PromptTrace> run_pipeline_batch(std::span<const corpus::IdiomPair> pairs,
                                            backends::Generator& generator,
                                            double temperature) {
  std::vector<PromptTrace> traces;
  traces.reserve(pairs.size());
  for (const corpus::IdiomPair& pair : pairs) {
    traces.push_back(run_pipeline(pair, generator, temperature));
  }
  return traces;
}

void save_traces(const std::filesystem::path& path,
                 std::span<const PromptTrace> traces) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PromptError("cannot open " + path.string() + " for writing");
  for (const PromptTrace& t : traces) {
    json j;
    j["pair_id"] = t.pair_id;
    j["idiom"] = t.idiom;
    j["language"] = t.language;
    j["explanation"] = t.explanation;
    j["literal"] = t.literal;
    j["final_translation"] = t.final_translation;
    j["stage_prompts"] = t.stage_prompts;
    out << j.dump() << '\n';
  }
  if (!out) throw PromptError("failed writing " + path.string());
}

std::vector<PromptTrace> load_traces(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PromptError("cannot open " + path.string());
  std::vector<PromptTrace> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw PromptError(where + ": malformed JSON record");
    }
    try {
      PromptTrace t;
      t.pair_id = j.at("pair_id").get<std::string>();
      t.idiom = j.at("idiom").get<std::string>();
      t.language = j.at("language").get<std::string>();
      t.explanation = j.at("explanation").get<std::string>();
      t.literal = j.at("literal").get<std::string>();
      t.final_translation = j.at("final_translation").get<std::string>();
      t.stage_prompts = j.at("stage_prompts").get<std::vector<std::string>>();
      if (t.stage_prompts.size() != 3) {
        throw PromptError(where + ": expected 3 stage prompts, got " +
                          std::to_string(t.stage_prompts.size()));
      }
      out.push_back(std::move(t));
    } catch (const json::exception& e) {
      throw PromptError(where + ": " + e.what());
    }
  }
  return out;
}

}  // namespace forge::prompts
