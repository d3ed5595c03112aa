#include "forge/rewards.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

namespace forge::rewards {

using nlohmann::json;

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::qe_positive: return "qe_positive";
    case Variant::qe_negative: return "qe_negative";
    case Variant::qe_constrained: return "qe_constrained";
    case Variant::qe_da: return "qe_da";
  }
  throw RewardError("unknown reward variant");
}

Variant variant_from_name(std::string_view name) {
  if (name == "qe_positive" || name == "positive") return Variant::qe_positive;
  if (name == "qe_negative" || name == "negative") return Variant::qe_negative;
  if (name == "qe_constrained" || name == "constrained") return Variant::qe_constrained;
  if (name == "qe_da" || name == "da") return Variant::qe_da;
  throw RewardError("unknown reward variant '" + std::string(name) +
                    "' (expected positive, negative, constrained, or da)");
}

namespace {

void require_nonempty(std::string_view value, std::string_view field) {
  if (value.empty()) {
    throw RewardError(std::string(field) + " must be non-empty");
  }
}

}  // namespace

RewardBreakdown qe_positive(backends::Scorer& scorer, std::string_view idiom,
                            std::string_view mt) {
  require_nonempty(idiom, "idiom");
  require_nonempty(mt, "mt");
  RewardBreakdown b;
  b.variant = Variant::qe_positive;
  b.positive_score = backends::score_reference_free(scorer, idiom, mt);
  b.reward = *b.positive_score;
  return b;
}

RewardBreakdown qe_negative(backends::Scorer& scorer, std::string_view literal,
                            std::string_view mt) {
  require_nonempty(literal, "literal");
  require_nonempty(mt, "mt");
  RewardBreakdown b;
  b.variant = Variant::qe_negative;
  b.negative_score = backends::score_reference_free(scorer, literal, mt);
  b.reward = -*b.negative_score;
  return b;
}

RewardBreakdown qe_constrained(backends::Scorer& scorer, std::string_view idiom,
                               std::string_view literal, std::string_view mt) {
  require_nonempty(idiom, "idiom");
  require_nonempty(literal, "literal");
  require_nonempty(mt, "mt");
  RewardBreakdown b;
  b.variant = Variant::qe_constrained;
  b.positive_score = backends::score_reference_free(scorer, idiom, mt);
  b.negative_score = backends::score_reference_free(scorer, literal, mt);
  b.reward = *b.positive_score - *b.negative_score;
  return b;
}

RewardBreakdown qe_da(backends::Scorer& scorer, std::string_view idiom,
                      std::string_view mt, std::string_view ref) {
  require_nonempty(idiom, "idiom");
  require_nonempty(mt, "mt");
  require_nonempty(ref, "ref");
  RewardBreakdown b;
  b.variant = Variant::qe_da;
  b.reward = backends::score_reference_based(scorer, idiom, mt, ref);
  return b;
}

std::vector<RewardBreakdown> compute_rewards(std::span<const RewardInputs> samples,
                                             Variant variant,
                                             backends::Scorer& scorer) {
  const bool needs_literal =
      variant == Variant::qe_negative || variant == Variant::qe_constrained;
  const bool needs_ref = variant == Variant::qe_da;

  // Validate everything before any backend call so a bad sample never leaves
  // a half-scored batch behind.
  for (const RewardInputs& s : samples) {
    const std::string label = "sample '" + s.sample_id + "'";
    if (s.sample_id.empty()) throw RewardError("sample with empty sample_id");
    if (s.idiom.empty()) throw RewardError(label + " has empty idiom");
    if (s.mt.empty()) throw RewardError(label + " has empty mt");
    if (needs_literal && (!s.literal || s.literal->empty())) {
      throw RewardError(label + " missing literal gloss required for variant '" +
                        std::string(variant_name(variant)) + "'");
    }
    if (needs_ref && (!s.ref || s.ref->empty())) {
      throw RewardError(label + " missing reference translation required for variant '" +
                        std::string(variant_name(variant)) + "'");
    }
  }

  // One request per component, assembled into a single batch. For the
  // constrained variant the batch holds the positive requests followed by the
  // negative ones.
  std::vector<backends::ScorerRequest> requests;
  const bool has_positive =
      variant == Variant::qe_positive || variant == Variant::qe_constrained;
  const bool has_negative = needs_literal;
  if (has_positive || variant == Variant::qe_da) {
    for (const RewardInputs& s : samples) {
      backends::ScorerRequest r;
      r.source = s.idiom;
      r.translation = s.mt;
      if (variant == Variant::qe_da) r.reference = *s.ref;
      requests.push_back(std::move(r));
    }
  }
  if (has_negative) {
    for (const RewardInputs& s : samples) {
      requests.push_back({*s.literal, s.mt, std::nullopt});
    }
  }

  std::vector<double> scores;
  try {
    scores = scorer.score_batch(requests);
  } catch (const backends::BackendError& e) {
    const std::string first = samples.empty() ? "" : samples.front().sample_id;
    throw RewardError("scoring failed for batch starting at sample '" + first +
                      "': " + e.what());
  }
  if (scores.size() != requests.size()) {
    throw RewardError("scorer returned " + std::to_string(scores.size()) +
                      " scores for " + std::to_string(requests.size()) + " requests");
  }

  std::vector<RewardBreakdown> out;
  out.reserve(samples.size());
  const std::size_t n = samples.size();
  for (std::size_t i = 0; i < n; ++i) {
    RewardBreakdown b;
    b.sample_id = samples[i].sample_id;
    b.variant = variant;
    switch (variant) {
      case Variant::qe_positive:
        b.positive_score = scores[i];
        b.reward = scores[i];
        break;
      case Variant::qe_negative:
        b.negative_score = scores[i];
        b.reward = -scores[i];
        break;
      case Variant::qe_constrained:
        b.positive_score = scores[i];
        b.negative_score = scores[n + i];
        b.reward = scores[i] - scores[n + i];
        break;
      case Variant::qe_da:
        b.reward = scores[i];
        break;
    }
    out.push_back(std::move(b));
  }
  return out;
}

void save_rewards(const std::filesystem::path& path,
                  std::span<const RewardBreakdown> rewards) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RewardError("cannot open " + path.string() + " for writing");
  for (const RewardBreakdown& b : rewards) {
    json j;
    j["sample_id"] = b.sample_id;
    j["variant"] = variant_name(b.variant);
    if (b.positive_score) j["positive_score"] = *b.positive_score;
    if (b.negative_score) j["negative_score"] = *b.negative_score;
    j["reward"] = b.reward;
    out << j.dump() << '\n';
  }
  if (!out) throw RewardError("failed writing " + path.string());
}

std::vector<RewardBreakdown> load_rewards(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RewardError("cannot open " + path.string());
  std::vector<RewardBreakdown> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw RewardError(where + ": malformed JSON record");
    }
    try {
      RewardBreakdown b;
      b.sample_id = j.at("sample_id").get<std::string>();
      b.variant = variant_from_name(j.at("variant").get<std::string>());
      if (j.contains("positive_score")) b.positive_score = j["positive_score"].get<double>();
      if (j.contains("negative_score")) b.negative_score = j["negative_score"].get<double>();
      b.reward = j.at("reward").get<double>();
      out.push_back(std::move(b));
    } catch (const json::exception& e) {
      throw RewardError(where + ": " + e.what());
    }
  }
  return out;
}

}  // namespace forge::rewards
