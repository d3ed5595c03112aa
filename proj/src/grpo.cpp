#include "forge/grpo.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "forge/text.hpp"
#include "forge/vecops.hpp"

namespace forge::grpo {

using nlohmann::json;

namespace {

constexpr int kSamplingMaxTokens = 256;

std::string replace_all(std::string text, std::string_view needle,
                        std::string_view value) {
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    text.replace(pos, needle.size(), value);
    pos += value.size();
  }
  return text;
}

std::string generator_digest(backends::Generator& generator, int g,
                             double temperature) {
  char temp_buf[32];
  std::snprintf(temp_buf, sizeof temp_buf, "%.6g", temperature);
  std::string canonical;
  canonical += "model=" + generator.model_id();
  canonical += "\x1F";
  canonical += "template=" + text::fnv1a64_hex(kTranslationPromptTemplate);
  canonical += "\x1F";
  canonical += "temperature=";
  canonical += temp_buf;
  canonical += "\x1F";
  canonical += "group_size=" + std::to_string(g);
  canonical += "\x1F";
  canonical += "max_tokens=" + std::to_string(kSamplingMaxTokens);
  return text::fnv1a64_hex(canonical);
}

}  // namespace

std::string build_translation_prompt(const corpus::IdiomPair& pair) {
  std::string prompt = replace_all(std::string(kTranslationPromptTemplate),
                                   "{language}",
                                   corpus::language_display_name(pair.language));
  return replace_all(std::move(prompt), "{idiom}", pair.source_text);
}

CandidateGroup sample_group(const corpus::IdiomPair& pair, int g,
                            backends::Generator& generator, double temperature) {
  if (g < 2) {
    throw GrpoError("group size must be at least 2, got " + std::to_string(g));
  }
  CandidateGroup group;
  group.prompt_id = pair.id;
  group.prompt = build_translation_prompt(pair);

  std::vector<backends::GenerationRequest> requests(
      static_cast<std::size_t>(g),
      backends::GenerationRequest{group.prompt, temperature, kSamplingMaxTokens});
  try {
    group.completions = generator.generate_batch(requests);
  } catch (const backends::BackendError& e) {
    throw GrpoError("generation failed for group '" + pair.id + "': " + e.what());
  }
  if (group.completions.size() != static_cast<std::size_t>(g)) {
    throw GrpoError("generator returned " + std::to_string(group.completions.size()) +
                    " completions for group '" + pair.id + "', expected " +
                    std::to_string(g));
  }
  return group;
}

std::vector<double> normalize_advantages(std::span<const double> rewards) {
  if (rewards.size() < 2) {
    throw GrpoError("advantage normalization needs at least 2 rewards, got " +
                    std::to_string(rewards.size()));
  }
  const bool all_equal = std::all_of(rewards.begin(), rewards.end(),
                                     [&](double r) { return r == rewards.front(); });
  if (all_equal) return std::vector<double>(rewards.size(), 0.0);

  const auto stats = vecops::population_mean_std(rewards);
  std::vector<double> advantages(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    advantages[i] = (rewards[i] - stats.mean) / (stats.stddev + kAdvantageEpsilon);
  }
  return advantages;
}

TrainingBatch build_training_batch(const corpus::CorpusSplit& split,
                                   rewards::Variant variant, int g,
                                   backends::Generator& generator,
                                   backends::Scorer& scorer, double temperature,
                                   int epoch_plan) {
  if (split.train.empty()) throw GrpoError("train split is empty");
  if (g < 2) {
    throw GrpoError("group size must be at least 2, got " + std::to_string(g));
  }
  if (epoch_plan < 1) {
    throw GrpoError("epoch_plan must be at least 1, got " + std::to_string(epoch_plan));
  }

  // Pre-flight field checks across the whole split so nothing is generated
  // for a batch that cannot be scored.
  const bool needs_literal = variant == rewards::Variant::qe_negative ||
                             variant == rewards::Variant::qe_constrained;
  const bool needs_ref = variant == rewards::Variant::qe_da;
  std::string offenders;
  for (const corpus::IdiomPair& pair : split.train) {
    const bool bad = (needs_literal && (!pair.literal_gloss || pair.literal_gloss->empty())) ||
                     (needs_ref && pair.reference_translation.empty());
    if (bad) {
      if (!offenders.empty()) offenders += ", ";
      offenders += pair.id;
    }
  }
  if (!offenders.empty()) {
    throw GrpoError("variant '" + std::string(rewards::variant_name(variant)) +
                    "' requires " + (needs_literal ? "literal_gloss" : "reference_translation") +
                    " missing for: " + offenders);
  }

  TrainingBatch batch;
  batch.variant = variant;
  batch.epoch_plan = epoch_plan;
  batch.generator_config_digest = generator_digest(generator, g, temperature);
  batch.groups.reserve(split.train.size());
  for (const corpus::IdiomPair& pair : split.train) {
    batch.groups.push_back(sample_group(pair, g, generator, temperature));
  }

  // Score every completion of every group in one batched call.
  std::vector<rewards::RewardInputs> inputs;
  inputs.reserve(split.train.size() * static_cast<std::size_t>(g));
  for (std::size_t gi = 0; gi < batch.groups.size(); ++gi) {
    const corpus::IdiomPair& pair = split.train[gi];
    const CandidateGroup& group = batch.groups[gi];
    for (std::size_t k = 0; k < group.completions.size(); ++k) {
      rewards::RewardInputs in;
      in.sample_id = pair.id + "#" + std::to_string(k);
      in.idiom = pair.source_text;
      in.literal = pair.literal_gloss;
      in.mt = group.completions[k];
      in.ref = pair.reference_translation;
      inputs.push_back(std::move(in));
    }
  }
  const auto breakdowns = rewards::compute_rewards(inputs, variant, scorer);

  std::size_t cursor = 0;
  for (CandidateGroup& group : batch.groups) {
    group.rewards.reserve(group.completions.size());
    for (std::size_t k = 0; k < group.completions.size(); ++k) {
      group.rewards.push_back(breakdowns[cursor++].reward);
    }
    group.advantages = normalize_advantages(group.rewards);
  }
  return batch;
}

void export_batch(const TrainingBatch& batch, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw GrpoError("cannot open " + path.string() + " for writing");
  json meta;
  meta["type"] = "meta";
  meta["variant"] = rewards::variant_name(batch.variant);
  meta["epoch_plan"] = batch.epoch_plan;
  meta["generator_config_digest"] = batch.generator_config_digest;
  out << meta.dump() << '\n';
  for (const CandidateGroup& group : batch.groups) {
    json j;
    j["prompt_id"] = group.prompt_id;
    j["prompt"] = group.prompt;
    j["completions"] = group.completions;
    j["rewards"] = group.rewards;
    j["advantages"] = group.advantages;
    j["variant"] = rewards::variant_name(batch.variant);
    out << j.dump() << '\n';
  }
  if (!out) throw GrpoError("failed writing " + path.string());
}

TrainingBatch load_batch(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GrpoError("cannot open " + path.string());
  TrainingBatch batch;
  std::string line;
  std::size_t lineno = 0;
  bool saw_meta = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw GrpoError(where + ": malformed JSON record");
    }
    try {
      if (!saw_meta) {
        if (!j.contains("type") || j["type"] != "meta") {
          throw GrpoError(where + ": batch file must start with a meta record");
        }
        batch.variant = rewards::variant_from_name(j.at("variant").get<std::string>());
        batch.epoch_plan = j.at("epoch_plan").get<int>();
        batch.generator_config_digest =
            j.at("generator_config_digest").get<std::string>();
        if (batch.epoch_plan < 1) throw GrpoError(where + ": epoch_plan must be >= 1");
        saw_meta = true;
        continue;
      }
      CandidateGroup group;
      group.prompt_id = j.at("prompt_id").get<std::string>();
      group.prompt = j.at("prompt").get<std::string>();
      group.completions = j.at("completions").get<std::vector<std::string>>();
      group.rewards = j.at("rewards").get<std::vector<double>>();
      group.advantages = j.at("advantages").get<std::vector<double>>();
      const auto variant = rewards::variant_from_name(j.at("variant").get<std::string>());
      if (variant != batch.variant) {
        throw GrpoError(where + ": group variant disagrees with batch meta");
      }
      if (group.completions.size() != group.rewards.size() ||
          group.rewards.size() != group.advantages.size() ||
          group.completions.size() < 2) {
        throw GrpoError(where + ": completions/rewards/advantages sizes disagree");
      }
      batch.groups.push_back(std::move(group));
    } catch (const json::exception& e) {
      throw GrpoError(where + ": " + e.what());
    }
  }
  if (!saw_meta) throw GrpoError(path.string() + ": missing meta record");
  return batch;
}

void export_sft_dataset(const corpus::CorpusSplit& split,
                        const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw GrpoError("cannot open " + path.string() + " for writing");
  for (const corpus::IdiomPair& pair : split.train) {
    json j;
    j["prompt_id"] = pair.id;
    j["prompt"] = build_translation_prompt(pair);
    j["reference_translation"] = pair.reference_translation;
    out << j.dump() << '\n';
  }
  if (!out) throw GrpoError("failed writing " + path.string());
}

std::vector<SftRecord> load_sft_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GrpoError("cannot open " + path.string());
  std::vector<SftRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw GrpoError(where + ": malformed JSON record");
    }
    try {
      SftRecord rec;
      rec.prompt_id = j.at("prompt_id").get<std::string>();
      rec.prompt = j.at("prompt").get<std::string>();
      rec.reference_translation = j.at("reference_translation").get<std::string>();
      out.push_back(std::move(rec));
    } catch (const json::exception& e) {
      throw GrpoError(where + ": " + e.what());
    }
  }
  return out;
}

}  // namespace forge::grpo
