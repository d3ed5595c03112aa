#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <unistd.h>

#include "forge/backends.hpp"
#include "forge/grpo.hpp"

using namespace forge;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path dir =
      fs::temp_directory_path() / ("forge_test_" + name + "_" + std::to_string(getpid()));
  fs::create_directories(dir);
  return dir;
}

corpus::IdiomPair make_pair(const std::string& id, const std::string& source,
                            const std::string& reference) {
  corpus::IdiomPair p;
  p.id = id;
  p.source_text = source;
  p.reference_translation = reference;
  p.language = "zh";
  p.split = corpus::Split::train;
  return p;
}

corpus::CorpusSplit make_split(std::size_t n) {
  corpus::CorpusSplit split;
  for (std::size_t i = 0; i < n; ++i) {
    auto p = make_pair("zh-" + std::to_string(100000 + i), "词 " + std::to_string(i),
                       "phrase " + std::to_string(i));
    p.literal_gloss = "word " + std::to_string(i);
    split.train.push_back(std::move(p));
  }
  split.seed = 1;
  split.provenance = "test";
  return split;
}

// Emits a distinct completion for every request; makes group rewards spread.
class NonceGenerator final : public backends::Generator {
 public:
  std::string model_id() const override { return "nonce"; }
  std::vector<std::string> generate_batch(
      std::span<const backends::GenerationRequest> requests) override {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < requests.size(); ++i) {
      out.push_back("completion " + std::to_string(counter_++) + " alpha beta");
    }
    return out;
  }

 private:
  std::size_t counter_ = 0;
};

class ThrowingGenerator final : public backends::Generator {
 public:
  std::string model_id() const override { return "throwing"; }
  std::vector<std::string> generate_batch(
      std::span<const backends::GenerationRequest>) override {
    throw backends::BackendError("synthetic outage");
  }
};

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double pop_std_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace

TEST_SUITE("grpo") {
  TEST_CASE("defaults match the training recipe") {
    CHECK(grpo::kDefaultGroupSize == 4);
    CHECK(grpo::kDefaultEpochPlan == 5);
    CHECK(grpo::kDefaultTemperature == 0.3);
  }

  TEST_CASE("build_translation_prompt renders the template") {
    const auto pair = make_pair("zh-000001", "一石二鸟", "kill two birds");
    CHECK(grpo::build_translation_prompt(pair) ==
          "Translate the following Chinese idiom into natural English: 一石二鸟");
  }

  TEST_CASE("normalize_advantages hand case") {
    const std::vector<double> rewards{0.2, 0.4, 0.6, 0.8};
    const auto adv = grpo::normalize_advantages(rewards);
    REQUIRE(adv.size() == 4);
    CHECK(adv[0] == doctest::Approx(-1.3416).epsilon(1e-4));
    CHECK(adv[1] == doctest::Approx(-0.4472).epsilon(1e-4));
    CHECK(adv[2] == doctest::Approx(0.4472).epsilon(1e-4));
    CHECK(adv[3] == doctest::Approx(1.3416).epsilon(1e-4));
  }

  TEST_CASE("normalize_advantages maps equal rewards to exact zeros") {
    CHECK(grpo::normalize_advantages(std::vector<double>{1.0, 1.0, 1.0, 1.0}) ==
          std::vector<double>{0.0, 0.0, 0.0, 0.0});
    CHECK(grpo::normalize_advantages(std::vector<double>{-0.3, -0.3}) ==
          std::vector<double>{0.0, 0.0});
    CHECK_THROWS_WITH_AS((void)grpo::normalize_advantages(std::vector<double>{1.0}),
                         doctest::Contains("at least 2"), grpo::GrpoError);
  }

  TEST_CASE("normalized advantages are centered, scaled, and order-preserving") {
    // Rewards drawn from the grid {k/10} so any non-constant vector has a
    // population std far above the 1e-8 epsilon.
    std::mt19937_64 rng(11);
    for (int iter = 0; iter < 1000; ++iter) {
      std::vector<double> rewards(4);
      for (auto& r : rewards) r = static_cast<double>(rng() % 10) / 10.0;
      const auto adv = grpo::normalize_advantages(rewards);

      CHECK(std::abs(mean_of(adv)) <= 1e-9);
      const bool constant =
          std::all_of(rewards.begin(), rewards.end(),
                      [&](double r) { return r == rewards.front(); });
      if (constant) {
        CHECK(adv == std::vector<double>(4, 0.0));
      } else {
        CHECK(std::abs(pop_std_of(adv) - 1.0) <= 1e-6);

        // affine reward transforms with positive scale leave advantages intact
        const double a = 0.1 + (static_cast<double>(rng() % 1000) / 1000.0) * 9.9;
        const double b = -5.0 + (static_cast<double>(rng() % 1000) / 1000.0) * 10.0;
        std::vector<double> scaled(4);
        for (int i = 0; i < 4; ++i) scaled[i] = a * rewards[i] + b;
        const auto adv2 = grpo::normalize_advantages(scaled);
        for (int i = 0; i < 4; ++i) CHECK(std::abs(adv2[i] - adv[i]) <= 1e-6);
      }

      // ranking by advantage equals ranking by reward
      std::vector<std::size_t> by_reward(4), by_adv(4);
      std::iota(by_reward.begin(), by_reward.end(), 0);
      by_adv = by_reward;
      std::stable_sort(by_reward.begin(), by_reward.end(),
                       [&](std::size_t i, std::size_t j) { return rewards[i] < rewards[j]; });
      std::stable_sort(by_adv.begin(), by_adv.end(),
                       [&](std::size_t i, std::size_t j) { return adv[i] < adv[j]; });
      CHECK(by_reward == by_adv);
    }
  }

  TEST_CASE("sample_group draws g completions for one prompt") {
    backends::StubGenerator generator;
    const auto pair = make_pair("zh-000007", "纸上谈兵", "armchair strategist");
    const auto group = grpo::sample_group(pair, 4, generator);
    CHECK(group.prompt_id == "zh-000007");
    CHECK(group.prompt == grpo::build_translation_prompt(pair));
    REQUIRE(group.completions.size() == 4);
    for (const auto& c : group.completions) {
      CHECK(c == group.completions.front());  // stub is deterministic
    }
    CHECK(group.rewards.empty());
    CHECK(group.advantages.empty());

    CHECK_THROWS_WITH_AS((void)grpo::sample_group(pair, 1, generator),
                         doctest::Contains("at least 2"), grpo::GrpoError);

    ThrowingGenerator bad;
    CHECK_THROWS_WITH_AS((void)grpo::sample_group(pair, 4, bad),
                         doctest::Contains("zh-000007"), grpo::GrpoError);
  }

  TEST_CASE("build_training_batch scores and normalizes every group") {
    const auto split = make_split(20);
    backends::StubGenerator generator;
    backends::StubScorer scorer;

    const auto batch = grpo::build_training_batch(split, rewards::Variant::qe_positive,
                                                  4, generator, scorer);
    CHECK(batch.variant == rewards::Variant::qe_positive);
    CHECK(batch.epoch_plan == 5);
    CHECK_FALSE(batch.generator_config_digest.empty());
    REQUIRE(batch.groups.size() == 20);
    for (std::size_t i = 0; i < batch.groups.size(); ++i) {
      const auto& g = batch.groups[i];
      CHECK(g.prompt_id == split.train[i].id);
      REQUIRE(g.completions.size() == 4);
      REQUIRE(g.rewards.size() == 4);
      // identical stub completions => identical rewards => exact zero advantages
      CHECK(g.advantages == std::vector<double>(4, 0.0));
    }
  }

  TEST_CASE("build_training_batch lists every pair failing the variant pre-flight") {
    auto split = make_split(6);
    split.train[1].literal_gloss.reset();
    split.train[4].literal_gloss.reset();
    backends::StubGenerator generator;
    backends::StubScorer scorer;

    CHECK_THROWS_WITH_AS(
        (void)grpo::build_training_batch(split, rewards::Variant::qe_constrained, 4,
                                         generator, scorer),
        doctest::Contains("requires literal_gloss missing for: zh-100001, zh-100004"),
        grpo::GrpoError);

    corpus::CorpusSplit empty;
    CHECK_THROWS_WITH_AS(
        (void)grpo::build_training_batch(empty, rewards::Variant::qe_positive, 4,
                                         generator, scorer),
        doctest::Contains("train split is empty"), grpo::GrpoError);
  }

  TEST_CASE("spread rewards normalize to unit variance inside each group") {
    const auto split = make_split(8);
    NonceGenerator generator;
    backends::StubScorer scorer;
    const auto batch = grpo::build_training_batch(split, rewards::Variant::qe_positive,
                                                  4, generator, scorer);
    for (const auto& g : batch.groups) {
      REQUIRE(g.rewards.size() == 4);
      CHECK(g.advantages == grpo::normalize_advantages(g.rewards));
      const bool constant = std::all_of(
          g.rewards.begin(), g.rewards.end(),
          [&](double r) { return r == g.rewards.front(); });
      if (!constant) {
        CHECK(std::abs(mean_of(g.advantages)) <= 1e-9);
        CHECK(std::abs(pop_std_of(g.advantages) - 1.0) <= 1e-5);
      }
    }
  }

  TEST_CASE("batches round-trip through the export format") {
    const auto split = make_split(5);
    NonceGenerator generator;
    backends::StubScorer scorer;
    const auto batch = grpo::build_training_batch(split, rewards::Variant::qe_constrained,
                                                  3, generator, scorer, 0.3, 7);
    const auto dir = temp_dir("grpo_rt");
    const auto path = dir / "batch.jsonl";
    grpo::export_batch(batch, path);

    // meta record first
    std::ifstream in(path);
    std::string first_line;
    std::getline(in, first_line);
    in.close();
    CHECK(first_line.find("\"type\":\"meta\"") != std::string::npos);
    CHECK(first_line.find("\"epoch_plan\":7") != std::string::npos);

    CHECK(grpo::load_batch(path) == batch);
  }

  TEST_CASE("random batches round-trip exactly") {
    std::mt19937_64 rng(91);
    const auto dir = temp_dir("grpo_random_rt");
    for (int iter = 0; iter < 100; ++iter) {
      grpo::TrainingBatch batch;
      batch.variant = static_cast<rewards::Variant>(rng() % 4);
      batch.epoch_plan = 1 + static_cast<int>(rng() % 9);
      batch.generator_config_digest = "digest-" + std::to_string(rng());
      const std::size_t n_groups = 1 + rng() % 5;
      for (std::size_t gi = 0; gi < n_groups; ++gi) {
        grpo::CandidateGroup g;
        g.prompt_id = "id-" + std::to_string(gi);
        g.prompt = "prompt " + std::to_string(rng());
        const std::size_t size = 2 + rng() % 4;
        for (std::size_t k = 0; k < size; ++k) {
          g.completions.push_back("c" + std::to_string(rng()));
          g.rewards.push_back(static_cast<double>(rng() % 1000) / 999.0);
        }
        g.advantages = grpo::normalize_advantages(g.rewards);
        batch.groups.push_back(std::move(g));
      }
      const auto path = dir / ("batch_" + std::to_string(iter) + ".jsonl");
      grpo::export_batch(batch, path);
      CHECK(grpo::load_batch(path) == batch);
    }
  }

  TEST_CASE("load_batch rejects files without a leading meta record") {
    const auto dir = temp_dir("grpo_bad");
    const auto path = dir / "nometa.jsonl";
    std::ofstream out(path, std::ios::binary);
    out << R"({"prompt_id":"x","prompt":"p","completions":["a","b"],)"
        << R"("rewards":[0.1,0.2],"advantages":[-1.0,1.0],"variant":"qe_positive"})"
        << '\n';
    out.close();
    CHECK_THROWS_WITH_AS((void)grpo::load_batch(path),
                         doctest::Contains("must start with a meta record"),
                         grpo::GrpoError);
    CHECK_THROWS_AS((void)grpo::load_batch(dir / "missing.jsonl"), grpo::GrpoError);
  }

  TEST_CASE("load_batch rejects a group whose variant disagrees with the meta") {
    const auto dir = temp_dir("grpo_mismatch");
    const auto split = make_split(2);
    backends::StubGenerator generator;
    backends::StubScorer scorer;
    const auto batch = grpo::build_training_batch(split, rewards::Variant::qe_positive,
                                                  2, generator, scorer);
    const auto path = dir / "batch.jsonl";
    grpo::export_batch(batch, path);
    std::ifstream in(path);
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    in.close();
    const auto pos = content.find("\"qe_positive\"", content.find('\n'));
    REQUIRE(pos != std::string::npos);
    content.replace(pos, std::string("\"qe_positive\"").size(), "\"qe_negative\"");
    std::ofstream out(path, std::ios::binary);
    out << content;
    out.close();
    CHECK_THROWS_WITH_AS((void)grpo::load_batch(path),
                         doctest::Contains("disagrees with batch meta"),
                         grpo::GrpoError);
  }

  TEST_CASE("sft export writes one record per train pair") {
    const auto dir = temp_dir("grpo_sft");
    const auto split = make_split(20);
    const auto path = dir / "sft.jsonl";
    grpo::export_sft_dataset(split, path);
    const auto records = grpo::load_sft_dataset(path);
    REQUIRE(records.size() == 20);
    for (std::size_t i = 0; i < records.size(); ++i) {
      CHECK(records[i].prompt_id == split.train[i].id);
      CHECK(records[i].prompt == grpo::build_translation_prompt(split.train[i]));
      CHECK(records[i].reference_translation == split.train[i].reference_translation);
    }

    const auto big = make_split(1000);
    grpo::export_sft_dataset(big, dir / "sft_big.jsonl");
    CHECK(grpo::load_sft_dataset(dir / "sft_big.jsonl").size() == 1000);

    corpus::CorpusSplit empty;
    grpo::export_sft_dataset(empty, dir / "sft_empty.jsonl");
    CHECK(grpo::load_sft_dataset(dir / "sft_empty.jsonl").empty());
  }
}
