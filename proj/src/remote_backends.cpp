// HTTP clients for the remote backend protocol. Each call POSTs a batched
// JSON body and expects a JSON reply; see README for the wire format.

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <iostream>
#include <thread>

#include "forge/backends.hpp"
#include "forge/text.hpp"

namespace forge::backends {

using nlohmann::json;

namespace {

class HttpClientBase {
 protected:
  explicit HttpClientBase(BackendConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) {
      throw BackendError("remote backend '" + std::string(kind_name(config_.kind)) +
                         "' requires an endpoint");
    }
  }

  // POST with exponential backoff; throws BackendError after max_retries.
  json post_json(const std::string& path, const json& body) const {
    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
      if (attempt > 0) {
        const auto delay = std::chrono::milliseconds(100) * (1 << (attempt - 1));
        std::this_thread::sleep_for(delay);
      }
      httplib::Client client(config_.endpoint);
      const auto secs =
          std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
      client.set_connection_timeout(std::max<time_t>(1, secs.count()), 0);
      client.set_read_timeout(std::max<time_t>(1, secs.count()), 0);
      auto res = client.Post(path, body.dump(), "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status != 200) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      json reply = json::parse(res->body, nullptr, false);
      if (reply.is_discarded()) {
        last_error = "malformed JSON reply";
        continue;
      }
      return reply;
    }
    throw BackendError(std::string(kind_name(config_.kind)) + " backend at " +
                       config_.endpoint + path + " failed after " +
                       std::to_string(config_.max_retries + 1) +
                       " attempts: " + last_error);
  }

  BackendConfig config_;
};

double clamp_score(double raw, const std::string& model) {
  if (raw < 0.0 || raw > 1.0) {
    std::cerr << "warning: " << model << " returned out-of-range score " << raw
              << ", clamping\n";
  }
  return std::clamp(raw, 0.0, 1.0);
}

class RemoteScorer final : public Scorer, HttpClientBase {
 public:
  explicit RemoteScorer(BackendConfig config) : HttpClientBase(std::move(config)) {}

  std::string model_id() const override { return config_.model_id; }

  std::vector<double> score_batch(std::span<const ScorerRequest> requests) override {
    std::vector<double> out;
    out.reserve(requests.size());
    for (std::size_t off = 0; off < requests.size();
         off += static_cast<std::size_t>(config_.batch_size)) {
      const std::size_t end = std::min(
          requests.size(), off + static_cast<std::size_t>(config_.batch_size));
      json items = json::array();
      for (std::size_t i = off; i < end; ++i) {
        json item;
        item["source"] = requests[i].source;
        item["translation"] = requests[i].translation;
        if (requests[i].reference) item["reference"] = *requests[i].reference;
        items.push_back(std::move(item));
      }
      json body;
      body["kind"] = config_.kind == Kind::ref_based_scorer ? "ref_based" : "ref_free";
      body["model"] = config_.model_id;
      body["items"] = std::move(items);
      json reply = post_json("/v1/score", body);
      if (!reply.contains("scores") || !reply["scores"].is_array() ||
          reply["scores"].size() != end - off) {
        throw BackendError("scorer reply missing 'scores' for batch of " +
                           std::to_string(end - off));
      }
      for (const auto& s : reply["scores"]) {
        out.push_back(clamp_score(s.get<double>(), config_.model_id));
      }
    }
    return out;
  }
};

class RemoteEmbedder final : public Embedder, HttpClientBase {
 public:
  explicit RemoteEmbedder(BackendConfig config) : HttpClientBase(std::move(config)) {}

  std::string model_id() const override { return config_.model_id; }
  std::size_t dimension() const override { return dimension_; }

  std::vector<std::vector<double>> embed_batch(
      std::span<const std::string> texts) override {
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (std::size_t off = 0; off < texts.size();
         off += static_cast<std::size_t>(config_.batch_size)) {
      const std::size_t end =
          std::min(texts.size(), off + static_cast<std::size_t>(config_.batch_size));
      json body;
      body["model"] = config_.model_id;
      body["items"] = std::vector<std::string>(texts.begin() + off, texts.begin() + end);
      json reply = post_json("/v1/embed", body);
      if (!reply.contains("vectors") || reply["vectors"].size() != end - off) {
        throw BackendError("embedder reply missing 'vectors'");
      }
      for (const auto& v : reply["vectors"]) {
        auto vec = v.get<std::vector<double>>();
        if (dimension_ == 0) dimension_ = vec.size();
        if (vec.size() != dimension_) {
          throw BackendError("embedder returned inconsistent dimensions");
        }
        out.push_back(std::move(vec));
      }
    }
    return out;
  }

 private:
  std::size_t dimension_ = 0;
};

class RemoteGenerator final : public Generator, HttpClientBase {
 public:
  explicit RemoteGenerator(BackendConfig config) : HttpClientBase(std::move(config)) {}

  std::string model_id() const override { return config_.model_id; }

  std::vector<std::string> generate_batch(
      std::span<const GenerationRequest> requests) override {
    std::vector<std::string> out;
    out.reserve(requests.size());
    for (std::size_t off = 0; off < requests.size();
         off += static_cast<std::size_t>(config_.batch_size)) {
      const std::size_t end = std::min(
          requests.size(), off + static_cast<std::size_t>(config_.batch_size));
      json items = json::array();
      for (std::size_t i = off; i < end; ++i) {
        json item;
        item["prompt"] = requests[i].prompt;
        item["temperature"] = requests[i].temperature;
        item["max_tokens"] = requests[i].max_tokens;
        items.push_back(std::move(item));
      }
      json body;
      body["model"] = config_.model_id;
      body["items"] = std::move(items);
      json reply = post_json("/v1/generate", body);
      if (!reply.contains("completions") || reply["completions"].size() != end - off) {
        throw BackendError("generator reply missing 'completions'");
      }
      for (const auto& c : reply["completions"]) out.push_back(c.get<std::string>());
    }
    return out;
  }
};

// Sends the rendered rubric prompt; expects raw model text back and parses
// the final line as a bare integer. One re-ask on unparseable output.
class RemoteJudge final : public Judge, HttpClientBase {
 public:
  explicit RemoteJudge(BackendConfig config) : HttpClientBase(std::move(config)) {}

  std::string model_id() const override { return config_.model_id; }

  std::vector<int> judge_batch(std::span<const JudgeRequest> requests) override {
    std::vector<int> out;
    out.reserve(requests.size());
    for (const JudgeRequest& r : requests) {
      json body;
      body["model"] = config_.model_id;
      body["prompt"] = build_judge_prompt(r.prediction, r.reference);
      int rating = 0;
      bool ok = false;
      for (int attempt = 0; attempt < 2 && !ok; ++attempt) {
        json reply = post_json("/v1/judge", body);
        if (!reply.contains("text")) {
          throw BackendError("judge reply missing 'text'");
        }
        ok = parse_rating(reply["text"].get<std::string>(), rating);
      }
      if (!ok) {
        throw BackendError("judge output unparseable for prediction '" +
                           r.prediction + "'");
      }
      out.push_back(rating);
    }
    return out;
  }

 private:
  static bool parse_rating(const std::string& reply_text, int& rating) {
    std::string last;
    std::string cur;
    for (char c : reply_text + "\n") {
      if (c == '\n') {
        if (!text::is_blank(cur)) last = text::trim(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    if (last.size() != 1 || last[0] < '1' || last[0] > '5') return false;
    rating = last[0] - '0';
    return true;
  }
};

}  // namespace

std::unique_ptr<Scorer> make_remote_scorer(const BackendConfig& config) {
  return std::make_unique<RemoteScorer>(config);
}

std::unique_ptr<Embedder> make_remote_embedder(const BackendConfig& config) {
  return std::make_unique<RemoteEmbedder>(config);
}

std::unique_ptr<Generator> make_remote_generator(const BackendConfig& config) {
  return std::make_unique<RemoteGenerator>(config);
}

std::unique_ptr<Judge> make_remote_judge(const BackendConfig& config) {
  return std::make_unique<RemoteJudge>(config);
}

}  // namespace forge::backends
