#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "forge/backends.hpp"

namespace forge::rewards {

class RewardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Variant { qe_positive, qe_negative, qe_constrained, qe_da };

std::string_view variant_name(Variant v);
// Accepts both long ("qe_positive") and CLI ("positive") spellings.
Variant variant_from_name(std::string_view name);

// One scoring sample. `idiom` is the source-language text, `mt` the candidate
// English translation. `literal` is required for the negative/constrained
// variants, `ref` for the DA variant.
struct RewardInputs {
  std::string sample_id;
  std::string idiom;
  std::optional<std::string> literal;
  std::string mt;
  std::optional<std::string> ref;
};

// Per-sample result. positive_score / negative_score are the raw [0,1] QE
// components actually used by the variant; reward combines them:
//   qe_positive     reward =  positive_score
//   qe_negative     reward = -negative_score
//   qe_constrained  reward =  positive_score - negative_score
//   qe_da           reward =  reference-based score (no components)
struct RewardBreakdown {
  std::string sample_id;
  Variant variant = Variant::qe_positive;
  std::optional<double> positive_score;
  std::optional<double> negative_score;
  double reward = 0.0;
};

// Single-sample reward functions. The scorer must be reference-free for the
// first three and reference-based for qe_da.
RewardBreakdown qe_positive(backends::Scorer& scorer, std::string_view idiom,
                            std::string_view mt);
RewardBreakdown qe_negative(backends::Scorer& scorer, std::string_view literal,
                            std::string_view mt);
RewardBreakdown qe_constrained(backends::Scorer& scorer, std::string_view idiom,
                               std::string_view literal, std::string_view mt);
RewardBreakdown qe_da(backends::Scorer& scorer, std::string_view idiom,
                      std::string_view mt, std::string_view ref);

// Batched driver: validates every sample up front (error names the first
// offending sample id and the missing field), then scores with as few
// score_batch calls as possible, preserving input order.
std::vector<RewardBreakdown> compute_rewards(std::span<const RewardInputs> samples,
                                             Variant variant,
                                             backends::Scorer& scorer);

// Line-delimited JSON: {sample_id, variant, positive_score?, negative_score?, reward}.
void save_rewards(const std::filesystem::path& path,
                  std::span<const RewardBreakdown> rewards);
std::vector<RewardBreakdown> load_rewards(const std::filesystem::path& path);

}  // namespace forge::rewards
