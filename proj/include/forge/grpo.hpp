#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "forge/backends.hpp"
#include "forge/corpus.hpp"
#include "forge/rewards.hpp"

namespace forge::grpo {

class GrpoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kDefaultGroupSize = 4;
inline constexpr int kDefaultEpochPlan = 5;
inline constexpr double kDefaultTemperature = 0.3;
inline constexpr double kAdvantageEpsilon = 1e-8;

// Single-instruction template used to sample completion groups; shipped as a
// versioned asset (assets/prompts/translate_v1.txt).
inline constexpr std::string_view kTranslationPromptTemplate =
    "Translate the following {language} idiom into natural English: {idiom}";

std::string build_translation_prompt(const corpus::IdiomPair& pair);

// One prompt with G completions in sampling order plus their rewards and
// group-relative advantages. rewards/advantages are empty until attached.
struct CandidateGroup {
  std::string prompt_id;
  std::string prompt;
  std::vector<std::string> completions;
  std::vector<double> rewards;
  std::vector<double> advantages;

  bool operator==(const CandidateGroup&) const = default;
};

struct TrainingBatch {
  std::vector<CandidateGroup> groups;
  rewards::Variant variant = rewards::Variant::qe_positive;
  int epoch_plan = kDefaultEpochPlan;
  std::string generator_config_digest;

  bool operator==(const TrainingBatch&) const = default;
};

struct SftRecord {
  std::string prompt_id;
  std::string prompt;
  std::string reference_translation;

  bool operator==(const SftRecord&) const = default;
};

// Draws g completions for one pair. Partial groups are never produced: any
// generation failure raises a group-level error.
CandidateGroup sample_group(const corpus::IdiomPair& pair, int g,
                            backends::Generator& generator,
                            double temperature = kDefaultTemperature);

// advantage_i = (r_i - mean) / (population_std + 1e-8); all-equal rewards map
// to exact zeros.
std::vector<double> normalize_advantages(std::span<const double> rewards);

// One CandidateGroup per train pair: sample, score with the rewards module
// (one batched call across all completions), normalize per group. Validates
// variant field requirements for every pair before any generation starts.
TrainingBatch build_training_batch(const corpus::CorpusSplit& split,
                                   rewards::Variant variant, int g,
                                   backends::Generator& generator,
                                   backends::Scorer& scorer,
                                   double temperature = kDefaultTemperature,
                                   int epoch_plan = kDefaultEpochPlan);

// Batch file: a meta line {type, variant, epoch_plan, generator_config_digest}
// followed by {prompt_id, prompt, completions[], rewards[], advantages[],
// variant} per group.
void export_batch(const TrainingBatch& batch, const std::filesystem::path& path);
TrainingBatch load_batch(const std::filesystem::path& path);

// SFT file: {prompt_id, prompt, reference_translation} per train pair.
void export_sft_dataset(const corpus::CorpusSplit& split,
                        const std::filesystem::path& path);
std::vector<SftRecord> load_sft_dataset(const std::filesystem::path& path);

}  // namespace forge::grpo
