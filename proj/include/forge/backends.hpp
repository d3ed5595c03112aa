#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace forge::backends {

class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Kind { ref_free_scorer, ref_based_scorer, embedder, generator, judge };

std::string_view kind_name(Kind kind);
Kind kind_from_name(std::string_view name);

struct BackendConfig {
  Kind kind = Kind::ref_free_scorer;
  std::string endpoint;  // base URL for remote backends, e.g. http://host:8000
  std::string model_id;
  int batch_size = 16;
  std::chrono::milliseconds timeout{30000};
  int max_retries = 3;
  bool cache_enabled = false;
};

// ---------------------------------------------------------------------------
// Client interfaces
// ---------------------------------------------------------------------------

struct ScorerRequest {
  std::string source;
  std::string translation;
  std::optional<std::string> reference;  // present iff reference-based scoring
};

// MTQE-style scorer; outputs lie in [0,1]. One implementation serves both
// reference-free and reference-based requests (the reference field decides).
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual std::string model_id() const = 0;
  virtual std::vector<double> score_batch(std::span<const ScorerRequest> requests) = 0;
};

double score_reference_free(Scorer& scorer, std::string_view source,
                            std::string_view translation);
double score_reference_based(Scorer& scorer, std::string_view source,
                             std::string_view translation, std::string_view reference);

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::string model_id() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual std::vector<std::vector<double>> embed_batch(
      std::span<const std::string> texts) = 0;
};

std::vector<double> embed(Embedder& embedder, std::string_view text);

// Throws on dimension mismatch or a zero vector; result clamped to [-1,1].
double cosine_similarity(std::span<const double> a, std::span<const double> b);

struct GenerationRequest {
  std::string prompt;
  double temperature = 0.3;
  int max_tokens = 256;
};

class Generator {
 public:
  virtual ~Generator() = default;
  virtual std::string model_id() const = 0;
  virtual std::vector<std::string> generate_batch(
      std::span<const GenerationRequest> requests) = 0;
};

std::string generate(Generator& generator, std::string_view prompt,
                     double temperature = 0.3, int max_tokens = 256);

struct JudgeRequest {
  std::string prediction;
  std::string reference;
};

// Semantic-equivalence rating on a 1-5 scale.
class Judge {
 public:
  virtual ~Judge() = default;
  virtual std::string model_id() const = 0;
  virtual std::vector<int> judge_batch(std::span<const JudgeRequest> requests) = 0;
};

int judge(Judge& j, std::string_view prediction, std::string_view reference);

// Rubric prompt sent by remote judge clients (versioned template asset).
extern const std::string_view kJudgeRubricTemplateV1;
std::string build_judge_prompt(std::string_view prediction, std::string_view reference);

// ---------------------------------------------------------------------------
// Deterministic offline stubs
// ---------------------------------------------------------------------------

// Token-F1 scorer: reference-free requests score F1(source, translation),
// reference-based requests score F1(translation, reference).
class StubScorer final : public Scorer {
 public:
  std::string model_id() const override { return "stub-token-f1"; }
  std::vector<double> score_batch(std::span<const ScorerRequest> requests) override;
};

// 256-dimension hashed bag-of-tokens counts (FNV-1a 64 mod 256).
class StubEmbedder final : public Embedder {
 public:
  static constexpr std::size_t kDim = 256;
  std::string model_id() const override { return "stub-hashed-bow"; }
  std::size_t dimension() const override { return kDim; }
  std::vector<std::vector<double>> embed_batch(
      std::span<const std::string> texts) override;
};

// Recognizes the three pipeline prompt templates by sentinel substrings and
// answers EXPLANATION(idiom) / LITERAL(idiom) / TRANSLATION(idiom); any other
// prompt echoes its last non-empty line.
class StubGenerator final : public Generator {
 public:
  std::string model_id() const override { return "stub-generator"; }
  std::vector<std::string> generate_batch(
      std::span<const GenerationRequest> requests) override;
};

// Maps token-F1 to bands: [0,.2)->1 [.2,.4)->2 [.4,.6)->3 [.6,.8)->4 [.8,1]->5.
class StubJudge final : public Judge {
 public:
  std::string model_id() const override { return "stub-judge"; }
  std::vector<int> judge_batch(std::span<const JudgeRequest> requests) override;
};

// ---------------------------------------------------------------------------
// On-disk cache and caching decorators
// ---------------------------------------------------------------------------

// Append-only key-value store under one directory. Values are JSON strings;
// concurrent writers of identical keys are benign (values are deterministic
// functions of the key).
class DiskCache {
 public:
  explicit DiskCache(std::filesystem::path dir);
  std::optional<std::string> get(const std::string& key);
  void put(const std::string& key, const std::string& value);
  std::size_t entry_count();

 private:
  std::filesystem::path file_;
  std::mutex mu_;
  std::unordered_map<std::string, std::string> entries_;
};

// Cache key: "<kind>/<model>/<fnv1a64 of canonical request>".
std::string scorer_request_digest(const ScorerRequest& request);
std::string cache_key(Kind kind, std::string_view model_id, std::string_view digest);

class CachingScorer final : public Scorer {
 public:
  CachingScorer(std::unique_ptr<Scorer> inner, std::shared_ptr<DiskCache> cache,
                Kind kind);
  std::string model_id() const override { return inner_->model_id(); }
  std::vector<double> score_batch(std::span<const ScorerRequest> requests) override;

 private:
  std::unique_ptr<Scorer> inner_;
  std::shared_ptr<DiskCache> cache_;
  Kind kind_;
};

class CachingEmbedder final : public Embedder {
 public:
  CachingEmbedder(std::unique_ptr<Embedder> inner, std::shared_ptr<DiskCache> cache);
  std::string model_id() const override { return inner_->model_id(); }
  std::size_t dimension() const override { return inner_->dimension(); }
  std::vector<std::vector<double>> embed_batch(
      std::span<const std::string> texts) override;

 private:
  std::unique_ptr<Embedder> inner_;
  std::shared_ptr<DiskCache> cache_;
};

class CachingJudge final : public Judge {
 public:
  CachingJudge(std::unique_ptr<Judge> inner, std::shared_ptr<DiskCache> cache);
  std::string model_id() const override { return inner_->model_id(); }
  std::vector<int> judge_batch(std::span<const JudgeRequest> requests) override;

 private:
  std::unique_ptr<Judge> inner_;
  std::shared_ptr<DiskCache> cache_;
};

// ---------------------------------------------------------------------------
// Configuration and assembly
// ---------------------------------------------------------------------------

// Flat key-value config: "<kind>.<field> = <value>" lines plus an optional
// global "cache_dir". '#' starts a comment.
struct BackendsConfig {
  std::map<Kind, BackendConfig> per_kind;
  std::optional<std::filesystem::path> cache_dir;
};

BackendsConfig parse_backends_config(std::string_view content);
BackendsConfig load_backends_config(const std::filesystem::path& path);

struct BackendSet {
  std::unique_ptr<Scorer> ref_free;
  std::unique_ptr<Scorer> ref_based;
  std::unique_ptr<Embedder> embedder;
  std::unique_ptr<Generator> generator;
  std::unique_ptr<Judge> judge;
  std::shared_ptr<DiskCache> cache;  // may be null
};

BackendSet make_stub_backends(
    const std::optional<std::filesystem::path>& cache_dir = std::nullopt);

// Remote HTTP backends per the config; defined in remote_backends.cpp.
BackendSet make_live_backends(const BackendsConfig& config);

std::unique_ptr<Scorer> make_remote_scorer(const BackendConfig& config);
std::unique_ptr<Embedder> make_remote_embedder(const BackendConfig& config);
std::unique_ptr<Generator> make_remote_generator(const BackendConfig& config);
std::unique_ptr<Judge> make_remote_judge(const BackendConfig& config);

}  // namespace forge::backends
