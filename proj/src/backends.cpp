#include "forge/backends.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "forge/text.hpp"
#include "forge/vecops.hpp"

namespace forge::backends {

using nlohmann::json;

std::string_view kind_name(Kind kind) {
  switch (kind) {
    case Kind::ref_free_scorer: return "ref_free_scorer";
    case Kind::ref_based_scorer: return "ref_based_scorer";
    case Kind::embedder: return "embedder";
    case Kind::generator: return "generator";
    case Kind::judge: return "judge";
  }
  return "unknown";
}

Kind kind_from_name(std::string_view name) {
  for (Kind k : {Kind::ref_free_scorer, Kind::ref_based_scorer, Kind::embedder,
                 Kind::generator, Kind::judge}) {
    if (kind_name(k) == name) return k;
  }
  throw BackendError("unknown backend kind: " + std::string(name));
}

namespace {

void require_nonblank(std::string_view value, std::string_view what) {
  if (text::is_blank(value)) {
    throw BackendError("empty " + std::string(what));
  }
}

void validate_request(const ScorerRequest& r) {
  require_nonblank(r.source, "source text");
  require_nonblank(r.translation, "translation text");
  if (r.reference) require_nonblank(*r.reference, "reference text");
}

}  // namespace

double score_reference_free(Scorer& scorer, std::string_view source,
                            std::string_view translation) {
  ScorerRequest r{std::string(source), std::string(translation), std::nullopt};
  validate_request(r);
  return scorer.score_batch({&r, 1}).at(0);
}

double score_reference_based(Scorer& scorer, std::string_view source,
                             std::string_view translation,
                             std::string_view reference) {
  ScorerRequest r{std::string(source), std::string(translation),
                  std::string(reference)};
  validate_request(r);
  return scorer.score_batch({&r, 1}).at(0);
}

std::vector<double> embed(Embedder& embedder, std::string_view text_in) {
  require_nonblank(text_in, "embedding input");
  std::string owned(text_in);
  return embedder.embed_batch({&owned, 1}).at(0);
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw BackendError("cosine_similarity: dimension mismatch " +
                       std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  const double na = vecops::dot(a, a);
  const double nb = vecops::dot(b, b);
  if (na == 0.0 || nb == 0.0) {
    throw BackendError("cosine_similarity: zero vector");
  }
  const double cos = vecops::dot(a, b) / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(cos, -1.0, 1.0);
}

std::string generate(Generator& generator, std::string_view prompt,
                     double temperature, int max_tokens) {
  require_nonblank(prompt, "prompt");
  if (temperature < 0) throw BackendError("temperature must be >= 0");
  if (max_tokens < 1) throw BackendError("max_tokens must be >= 1");
  GenerationRequest r{std::string(prompt), temperature, max_tokens};
  return generator.generate_batch({&r, 1}).at(0);
}

int judge(Judge& j, std::string_view prediction, std::string_view reference) {
  require_nonblank(prediction, "prediction");
  require_nonblank(reference, "reference");
  JudgeRequest r{std::string(prediction), std::string(reference)};
  return j.judge_batch({&r, 1}).at(0);
}

const std::string_view kJudgeRubricTemplateV1 =
    "Rate the semantic equivalence of a candidate translation against a\n"
    "reference translation on a 1-5 scale:\n"
    "5 = same meaning, 4 = minor differences, 3 = partial overlap,\n"
    "2 = mostly different, 1 = unrelated.\n"
    "\n"
    "Candidate: {prediction}\n"
    "Reference: {reference}\n"
    "\n"
    "Answer with the bare integer rating as the final line.\n";

std::string build_judge_prompt(std::string_view prediction,
                               std::string_view reference) {
  require_nonblank(prediction, "prediction");
  require_nonblank(reference, "reference");
  std::string out(kJudgeRubricTemplateV1);
  const auto replace_one = [&out](std::string_view tag, std::string_view value) {
    const std::size_t pos = out.find(tag);
    if (pos != std::string::npos) out.replace(pos, tag.size(), value);
  };
  replace_one("{prediction}", prediction);
  replace_one("{reference}", reference);
  return out;
}

// ---------------------------------------------------------------------------
// Stubs
// ---------------------------------------------------------------------------

std::vector<double> StubScorer::score_batch(std::span<const ScorerRequest> requests) {
  std::vector<double> out;
  out.reserve(requests.size());
  for (const ScorerRequest& r : requests) {
    validate_request(r);
    const double f1 = r.reference ? text::token_f1(r.translation, *r.reference)
                                  : text::token_f1(r.source, r.translation);
    out.push_back(std::clamp(f1, 0.0, 1.0));
  }
  return out;
}

std::vector<std::vector<double>> StubEmbedder::embed_batch(
    std::span<const std::string> texts) {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const std::string& t : texts) {
    require_nonblank(t, "embedding input");
    std::vector<double> v(kDim, 0.0);
    for (const std::string& token : text::tokenize_lower(t)) {
      v[text::fnv1a64(token) % kDim] += 1.0;
    }
    out.push_back(std::move(v));
  }
  return out;
}

namespace {

std::string last_nonempty_line(std::string_view s) {
  std::string last;
  std::string cur;
  for (char c : s) {
    if (c == '\n') {
      if (!text::is_blank(cur)) last = cur;
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!text::is_blank(cur)) last = cur;
  return text::trim(last);
}

std::string idiom_field(std::string_view prompt) {
  // Last "Idiom:" line wins; templates place it after the instructions.
  std::string found;
  std::istringstream in{std::string(prompt)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("Idiom:", 0) == 0) {
      found = text::trim(line.substr(6));
    }
  }
  return found;
}

}  // namespace

std::vector<std::string> StubGenerator::generate_batch(
    std::span<const GenerationRequest> requests) {
  std::vector<std::string> out;
  out.reserve(requests.size());
  for (const GenerationRequest& r : requests) {
    require_nonblank(r.prompt, "prompt");
    const std::string idiom = idiom_field(r.prompt);
    if (r.prompt.find("provide the **idiomatic sense**") != std::string::npos) {
      out.push_back("EXPLANATION(" + idiom + ")");
    } else if (r.prompt.find("just the literal gloss") != std::string::npos) {
      out.push_back("LITERAL(" + idiom + ")");
    } else if (r.prompt.find("**natural English idiomatic translation**") !=
               std::string::npos) {
      out.push_back("TRANSLATION(" + idiom + ")");
    } else {
      out.push_back(last_nonempty_line(r.prompt));
    }
  }
  return out;
}

std::vector<int> StubJudge::judge_batch(std::span<const JudgeRequest> requests) {
  std::vector<int> out;
  out.reserve(requests.size());
  for (const JudgeRequest& r : requests) {
    require_nonblank(r.prediction, "prediction");
    require_nonblank(r.reference, "reference");
    const double f1 = text::token_f1(r.prediction, r.reference);
    int band = 1 + static_cast<int>(f1 / 0.2);
    out.push_back(std::clamp(band, 1, 5));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cache
// ---------------------------------------------------------------------------

DiskCache::DiskCache(std::filesystem::path dir) {
  std::filesystem::create_directories(dir);
  file_ = dir / "cache.jsonl";
  std::ifstream in(file_, std::ios::binary);
  std::string line;
  while (in && std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) continue;  // tolerate torn writes
    entries_[j.value("key", "")] = j.value("value", "");
  }
}

std::optional<std::string> DiskCache::get(const std::string& key) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void DiskCache::put(const std::string& key, const std::string& value) {
  std::lock_guard<std::mutex> lock(mu_);
  entries_[key] = value;
  std::ofstream out(file_, std::ios::binary | std::ios::app);
  json j;
  j["key"] = key;
  j["value"] = value;
  out << j.dump() << '\n';
}

std::size_t DiskCache::entry_count() {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_.size();
}

std::string scorer_request_digest(const ScorerRequest& request) {
  // Leading arity tag keeps ref-free and ref-based requests from colliding.
  std::string canonical = request.reference ? "3" : "2";
  canonical += '\x1F';
  canonical += request.source;
  canonical += '\x1F';
  canonical += request.translation;
  if (request.reference) {
    canonical += '\x1F';
    canonical += *request.reference;
  }
  return text::fnv1a64_hex(canonical);
}

std::string cache_key(Kind kind, std::string_view model_id,
                      std::string_view digest) {
  std::string key(kind_name(kind));
  key += '/';
  key += model_id;
  key += '/';
  key += digest;
  return key;
}

CachingScorer::CachingScorer(std::unique_ptr<Scorer> inner,
                             std::shared_ptr<DiskCache> cache, Kind kind)
    : inner_(std::move(inner)), cache_(std::move(cache)), kind_(kind) {}

std::vector<double> CachingScorer::score_batch(
    std::span<const ScorerRequest> requests) {
  std::vector<double> out(requests.size(), 0.0);
  std::vector<std::string> keys(requests.size());
  // digest -> indices awaiting that value; duplicates collapse to one call.
  std::map<std::string, std::vector<std::size_t>> misses;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    keys[i] = cache_key(kind_, inner_->model_id(),
                        scorer_request_digest(requests[i]));
    if (auto hit = cache_->get(keys[i])) {
      out[i] = json::parse(*hit).get<double>();
    } else {
      misses[keys[i]].push_back(i);
    }
  }
  if (misses.empty()) return out;

  std::vector<ScorerRequest> pending;
  pending.reserve(misses.size());
  for (const auto& [key, indices] : misses) {
    pending.push_back(requests[indices.front()]);
  }
  const std::vector<double> scores = inner_->score_batch(pending);
  std::size_t k = 0;
  for (const auto& [key, indices] : misses) {
    const double s = scores.at(k++);
    cache_->put(key, json(s).dump());
    for (std::size_t i : indices) out[i] = s;
  }
  return out;
}

CachingEmbedder::CachingEmbedder(std::unique_ptr<Embedder> inner,
                                 std::shared_ptr<DiskCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

std::vector<std::vector<double>> CachingEmbedder::embed_batch(
    std::span<const std::string> texts) {
  std::vector<std::vector<double>> out(texts.size());
  std::map<std::string, std::vector<std::size_t>> misses;
  std::vector<std::string> keys(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    keys[i] = cache_key(Kind::embedder, inner_->model_id(),
                        text::fnv1a64_hex(texts[i]));
    if (auto hit = cache_->get(keys[i])) {
      out[i] = json::parse(*hit).get<std::vector<double>>();
    } else {
      misses[keys[i]].push_back(i);
    }
  }
  if (misses.empty()) return out;

  std::vector<std::string> pending;
  for (const auto& [key, indices] : misses) pending.push_back(texts[indices.front()]);
  const auto vectors = inner_->embed_batch(pending);
  std::size_t k = 0;
  for (const auto& [key, indices] : misses) {
    const auto& v = vectors.at(k++);
    cache_->put(key, json(v).dump());
    for (std::size_t i : indices) out[i] = v;
  }
  return out;
}

CachingJudge::CachingJudge(std::unique_ptr<Judge> inner,
                           std::shared_ptr<DiskCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

std::vector<int> CachingJudge::judge_batch(std::span<const JudgeRequest> requests) {
  std::vector<int> out(requests.size(), 0);
  std::map<std::string, std::vector<std::size_t>> misses;
  std::vector<std::string> keys(requests.size());
  for (std::size_t i = 0; i < requests.size(); ++i) {
    std::string canonical = requests[i].prediction;
    canonical += '\x1F';
    canonical += requests[i].reference;
    keys[i] = cache_key(Kind::judge, inner_->model_id(),
                        text::fnv1a64_hex(canonical));
    if (auto hit = cache_->get(keys[i])) {
      out[i] = json::parse(*hit).get<int>();
    } else {
      misses[keys[i]].push_back(i);
    }
  }
  if (misses.empty()) return out;

  std::vector<JudgeRequest> pending;
  for (const auto& [key, indices] : misses) pending.push_back(requests[indices.front()]);
  const auto ratings = inner_->judge_batch(pending);
  std::size_t k = 0;
  for (const auto& [key, indices] : misses) {
    const int r = ratings.at(k++);
    cache_->put(key, json(r).dump());
    for (std::size_t i : indices) out[i] = r;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

BackendsConfig parse_backends_config(std::string_view content) {
  BackendsConfig config;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = text::trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw BackendError("config line " + std::to_string(line_no) +
                         ": expected key = value");
    }
    const std::string key = text::trim(line.substr(0, eq));
    const std::string value = text::trim(line.substr(eq + 1));
    if (key == "cache_dir") {
      config.cache_dir = value;
      continue;
    }
    const std::size_t dot = key.find('.');
    if (dot == std::string::npos) {
      throw BackendError("config line " + std::to_string(line_no) +
                         ": unknown key '" + key + "'");
    }
    const Kind kind = kind_from_name(key.substr(0, dot));
    const std::string field = key.substr(dot + 1);
    BackendConfig& bc = config.per_kind[kind];
    bc.kind = kind;
    if (field == "endpoint") {
      bc.endpoint = value;
    } else if (field == "model") {
      bc.model_id = value;
    } else if (field == "batch_size") {
      bc.batch_size = std::stoi(value);
      if (bc.batch_size < 1) throw BackendError("batch_size must be >= 1");
    } else if (field == "timeout_ms") {
      bc.timeout = std::chrono::milliseconds(std::stol(value));
      if (bc.timeout.count() <= 0) throw BackendError("timeout_ms must be > 0");
    } else if (field == "max_retries") {
      bc.max_retries = std::stoi(value);
      if (bc.max_retries < 0) throw BackendError("max_retries must be >= 0");
    } else if (field == "cache") {
      bc.cache_enabled = (value == "on" || value == "true" || value == "1");
    } else {
      throw BackendError("config line " + std::to_string(line_no) +
                         ": unknown field '" + field + "'");
    }
  }
  return config;
}

BackendsConfig load_backends_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BackendError("cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_backends_config(buf.str());
}

BackendSet make_stub_backends(const std::optional<std::filesystem::path>& cache_dir) {
  BackendSet set;
  set.generator = std::make_unique<StubGenerator>();
  if (cache_dir) {
    set.cache = std::make_shared<DiskCache>(*cache_dir);
    set.ref_free = std::make_unique<CachingScorer>(std::make_unique<StubScorer>(),
                                                   set.cache,
                                                   Kind::ref_free_scorer);
    set.ref_based = std::make_unique<CachingScorer>(std::make_unique<StubScorer>(),
                                                    set.cache,
                                                    Kind::ref_based_scorer);
    set.embedder = std::make_unique<CachingEmbedder>(std::make_unique<StubEmbedder>(),
                                                     set.cache);
    set.judge = std::make_unique<CachingJudge>(std::make_unique<StubJudge>(),
                                               set.cache);
  } else {
    set.ref_free = std::make_unique<StubScorer>();
    set.ref_based = std::make_unique<StubScorer>();
    set.embedder = std::make_unique<StubEmbedder>();
    set.judge = std::make_unique<StubJudge>();
  }
  return set;
}

BackendSet make_live_backends(const BackendsConfig& config) {
  const auto need = [&config](Kind kind) -> const BackendConfig& {
    auto it = config.per_kind.find(kind);
    if (it == config.per_kind.end()) {
      throw BackendError("config missing backend kind '" +
                         std::string(kind_name(kind)) + "'");
    }
    if (it->second.endpoint.empty()) {
      throw BackendError("backend '" + std::string(kind_name(kind)) +
                         "' has no endpoint");
    }
    return it->second;
  };

  BackendSet set;
  const BackendConfig& rf = need(Kind::ref_free_scorer);
  const BackendConfig& rb = need(Kind::ref_based_scorer);
  const BackendConfig& em = need(Kind::embedder);
  const BackendConfig& ge = need(Kind::generator);
  const BackendConfig& ju = need(Kind::judge);

  const bool any_cache = rf.cache_enabled || rb.cache_enabled || em.cache_enabled ||
                         ju.cache_enabled;
  if (any_cache && config.cache_dir) {
    set.cache = std::make_shared<DiskCache>(*config.cache_dir);
  }

  auto ref_free = make_remote_scorer(rf);
  auto ref_based = make_remote_scorer(rb);
  auto embedder = make_remote_embedder(em);
  auto judge_client = make_remote_judge(ju);
  set.generator = make_remote_generator(ge);

  if (set.cache && rf.cache_enabled) {
    set.ref_free = std::make_unique<CachingScorer>(std::move(ref_free), set.cache,
                                                   Kind::ref_free_scorer);
  } else {
    set.ref_free = std::move(ref_free);
  }
  if (set.cache && rb.cache_enabled) {
    set.ref_based = std::make_unique<CachingScorer>(std::move(ref_based), set.cache,
                                                    Kind::ref_based_scorer);
  } else {
    set.ref_based = std::move(ref_based);
  }
  if (set.cache && em.cache_enabled) {
    set.embedder = std::make_unique<CachingEmbedder>(std::move(embedder), set.cache);
  } else {
    set.embedder = std::move(embedder);
  }
  if (set.cache && ju.cache_enabled) {
    set.judge = std::make_unique<CachingJudge>(std::move(judge_client), set.cache);
  } else {
    set.judge = std::move(judge_client);
  }
  return set;
}

}  // namespace forge::backends
