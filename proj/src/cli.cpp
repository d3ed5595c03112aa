#include "forge/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "forge/backends.hpp"
#include "forge/corpus.hpp"
#include "forge/evalsuite.hpp"
#include "forge/grpo.hpp"
#include "forge/manifest.hpp"
#include "forge/prompts.hpp"
#include "forge/report.hpp"
#include "forge/rewards.hpp"

namespace forge::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct GlobalOptions {
  std::string config_path;
  std::string backends_mode = "stub";
  std::string cache_dir;
  std::int64_t seed = 42;
};

std::string join_args(int argc, const char* const* argv) {
  std::string cmd;
  for (int i = 1; i < argc; ++i) {
    if (i > 1) cmd += ' ';
    cmd += argv[i];
  }
  return cmd;
}

backends::BackendSet make_backends(const GlobalOptions& g) {
  std::optional<fs::path> cache;
  if (!g.cache_dir.empty()) cache = g.cache_dir;
  if (g.backends_mode == "stub") return backends::make_stub_backends(cache);
  if (g.config_path.empty()) {
    throw std::runtime_error("--backends live requires --config");
  }
  auto config = backends::load_backends_config(g.config_path);
  if (cache) config.cache_dir = cache;
  return backends::make_live_backends(config);
}

std::string effective_config_digest(const GlobalOptions& g) {
  std::string canonical =
      "backends=" + g.backends_mode + "\nseed=" + std::to_string(g.seed) + "\n";
  if (!g.config_path.empty()) {
    canonical += "config=" + manifest::file_digest(g.config_path) + "\n";
  }
  return manifest::string_digest(canonical);
}

manifest::RunManifest base_manifest(const GlobalOptions& g,
                                    const std::string& command) {
  manifest::RunManifest m;
  m.command = command;
  m.config_digest = effective_config_digest(g);
  m.seed = g.seed;
  m.timestamp = manifest::current_timestamp_utc();
  return m;
}

// Model output to grade or reward: either a full translate trace or a minimal
// {pair_id|sample_id, mt} record from an external system.
struct MtRecord {
  std::string pair_id;
  std::string mt;
  std::optional<std::string> literal;  // stage-2 gloss when read from a trace
};

std::vector<MtRecord> load_mt_records(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<MtRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw std::runtime_error(where + ": malformed JSON record");
    }
    MtRecord rec;
    if (j.contains("final_translation")) {
      rec.pair_id = j.value("pair_id", "");
      rec.mt = j["final_translation"].get<std::string>();
      if (j.contains("literal")) rec.literal = j["literal"].get<std::string>();
    } else {
      rec.pair_id = j.contains("pair_id") ? j["pair_id"].get<std::string>()
                                          : j.value("sample_id", "");
      if (!j.contains("mt")) {
        throw std::runtime_error(where + ": record has neither final_translation nor mt");
      }
      rec.mt = j["mt"].get<std::string>();
    }
    if (rec.pair_id.empty()) {
      throw std::runtime_error(where + ": record missing pair_id");
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::map<std::string, const corpus::IdiomPair*> index_pairs(
    const corpus::CorpusSplit& split) {
  std::map<std::string, const corpus::IdiomPair*> index;
  for (const auto& p : split.train) index.emplace(p.id, &p);
  for (const auto& p : split.test) index.emplace(p.id, &p);
  return index;
}

struct PrepareOptions {
  std::string source;
  std::string in;
  std::string out;
  std::string language = "zh";
  std::size_t train_count = 0;
  std::size_t sample = 0;
};

void cmd_prepare_data(const GlobalOptions& g, const PrepareOptions& o,
                      const std::string& command) {
  const auto rows = corpus::read_tsv(o.in);
  corpus::RejectLog log;
  std::vector<corpus::IdiomPair> pairs;
  if (o.source == "petci") {
    pairs = corpus::clean_petci(rows, &log);
  } else if (o.source == "hindi") {
    pairs = corpus::clean_hindi(rows, &log);
  } else {
    pairs = corpus::clean_opus(rows, o.language, &log);
  }
  for (const std::string& reject : log.lines) {
    std::cerr << o.in << ": rejected " << reject << '\n';
  }
  if (o.sample > 0) pairs = corpus::sample_subset(pairs, o.sample, g.seed);
  corpus::CorpusSplit split = corpus::split_corpus(pairs, o.train_count, g.seed);
  split.provenance = o.source + ":" + fs::path(o.in).filename().string();
  corpus::save_corpus(split, o.out);

  manifest::RunManifest m = base_manifest(g, command);
  m.input_digests[o.in] = manifest::file_digest(o.in);
  manifest::write_manifest(o.out + ".manifest", m);
  std::cout << "prepare-data: " << rows.size() << " rows -> " << pairs.size()
            << " pairs (" << split.train.size() << " train / " << split.test.size()
            << " test) -> " << o.out << '\n';
}

struct TranslateOptions {
  std::string corpus_path;
  std::string out;
  std::string method = "training-free";
  std::string split = "all";
  double temperature = 0.3;
};

void cmd_translate(const GlobalOptions& g, const TranslateOptions& o,
                   const std::string& command) {
  if (o.method != "training-free") {
    throw std::runtime_error("unknown method '" + o.method +
                             "' (expected training-free)");
  }
  const corpus::CorpusSplit split = corpus::load_corpus(o.corpus_path);
  std::vector<corpus::IdiomPair> pairs;
  if (o.split == "train" || o.split == "all") {
    pairs.insert(pairs.end(), split.train.begin(), split.train.end());
  }
  if (o.split == "test" || o.split == "all") {
    pairs.insert(pairs.end(), split.test.begin(), split.test.end());
  }
  auto backend_set = make_backends(g);
  const auto traces =
      prompts::run_pipeline_batch(pairs, *backend_set.generator, o.temperature);
  prompts::save_traces(o.out, traces);

  manifest::RunManifest m = base_manifest(g, command);
  m.input_digests[o.corpus_path] = manifest::file_digest(o.corpus_path);
  manifest::write_manifest(o.out + ".manifest", m);
  std::cout << "translate: " << traces.size() << " traces -> " << o.out << '\n';
}

struct RewardOptions {
  std::string variant;
  std::string corpus_path;
  std::string mt_path;
  std::string out;
};

void cmd_compute_rewards(const GlobalOptions& g, const RewardOptions& o,
                         const std::string& command) {
  const auto variant = rewards::variant_from_name(o.variant);
  const corpus::CorpusSplit split = corpus::load_corpus(o.corpus_path);
  const auto index = index_pairs(split);
  const auto mts = load_mt_records(o.mt_path);

  std::vector<rewards::RewardInputs> inputs;
  inputs.reserve(mts.size());
  for (const MtRecord& rec : mts) {
    const auto it = index.find(rec.pair_id);
    if (it == index.end()) {
      throw std::runtime_error("unknown pair id '" + rec.pair_id + "' in " +
                               o.mt_path);
    }
    const corpus::IdiomPair& pair = *it->second;
    rewards::RewardInputs in;
    in.sample_id = rec.pair_id;
    in.idiom = pair.source_text;
    // Corpus glosses win; traces provide a model-generated fallback.
    in.literal = pair.literal_gloss ? pair.literal_gloss : rec.literal;
    in.mt = rec.mt;
    in.ref = pair.reference_translation;
    inputs.push_back(std::move(in));
  }

  auto backend_set = make_backends(g);
  backends::Scorer& scorer = variant == rewards::Variant::qe_da
                                 ? *backend_set.ref_based
                                 : *backend_set.ref_free;
  const auto breakdowns = rewards::compute_rewards(inputs, variant, scorer);
  rewards::save_rewards(o.out, breakdowns);

  manifest::RunManifest m = base_manifest(g, command);
  m.input_digests[o.corpus_path] = manifest::file_digest(o.corpus_path);
  m.input_digests[o.mt_path] = manifest::file_digest(o.mt_path);
  manifest::write_manifest(o.out + ".manifest", m);
  std::cout << "compute-rewards: " << breakdowns.size() << " rewards ("
            << rewards::variant_name(variant) << ") -> " << o.out << '\n';
}

struct ExportGrpoOptions {
  std::string variant;
  std::string corpus_path;
  std::string out;
  int group_size = grpo::kDefaultGroupSize;
  int epochs = grpo::kDefaultEpochPlan;
  double temperature = grpo::kDefaultTemperature;
};

void cmd_export_grpo(const GlobalOptions& g, const ExportGrpoOptions& o,
                     const std::string& command) {
  const auto variant = rewards::variant_from_name(o.variant);
  const corpus::CorpusSplit split = corpus::load_corpus(o.corpus_path);
  auto backend_set = make_backends(g);
  backends::Scorer& scorer = variant == rewards::Variant::qe_da
                                 ? *backend_set.ref_based
                                 : *backend_set.ref_free;
  const auto batch =
      grpo::build_training_batch(split, variant, o.group_size, *backend_set.generator,
                                 scorer, o.temperature, o.epochs);
  grpo::export_batch(batch, o.out);

  manifest::RunManifest m = base_manifest(g, command);
  m.input_digests[o.corpus_path] = manifest::file_digest(o.corpus_path);
  manifest::write_manifest(o.out + ".manifest", m);
  std::cout << "export-grpo: " << batch.groups.size() << " groups of "
            << o.group_size << " (" << rewards::variant_name(variant) << ", "
            << o.epochs << " epochs) -> " << o.out << '\n';
}

struct ExportSftOptions {
  std::string corpus_path;
  std::string out;
};

void cmd_export_sft(const GlobalOptions& g, const ExportSftOptions& o,
                    const std::string& command) {
  const corpus::CorpusSplit split = corpus::load_corpus(o.corpus_path);
  grpo::export_sft_dataset(split, o.out);
  manifest::RunManifest m = base_manifest(g, command);
  m.input_digests[o.corpus_path] = manifest::file_digest(o.corpus_path);
  manifest::write_manifest(o.out + ".manifest", m);
  std::cout << "export-sft: " << split.train.size() << " records -> " << o.out
            << '\n';
}

struct EvaluateOptions {
  std::string corpus_path;
  std::string predictions;
  std::string out;
  std::string method_tag = "training-free";
  std::string corpus_tag;
};

void cmd_evaluate(const GlobalOptions& g, const EvaluateOptions& o,
                  const std::string& command) {
  const corpus::CorpusSplit split = corpus::load_corpus(o.corpus_path);
  const auto index = index_pairs(split);
  const auto mts = load_mt_records(o.predictions);

  std::vector<evalsuite::TranslationRecord> records;
  records.reserve(mts.size());
  for (const MtRecord& rec : mts) {
    const auto it = index.find(rec.pair_id);
    if (it == index.end()) {
      throw std::runtime_error("unknown pair id '" + rec.pair_id + "' in " +
                               o.predictions);
    }
    evalsuite::TranslationRecord r;
    r.pair_id = rec.pair_id;
    r.source_text = it->second->source_text;
    r.prediction = rec.mt;
    r.reference = it->second->reference_translation;
    r.method_tag = o.method_tag;
    records.push_back(std::move(r));
  }

  const std::string corpus_tag =
      o.corpus_tag.empty() ? fs::path(o.corpus_path).stem().string() : o.corpus_tag;
  auto backend_set = make_backends(g);
  const auto eval = evalsuite::evaluate_corpus(records, backend_set, corpus_tag);
  evalsuite::save_report(o.out, eval);

  manifest::RunManifest m = base_manifest(g, command);
  m.input_digests[o.corpus_path] = manifest::file_digest(o.corpus_path);
  m.input_digests[o.predictions] = manifest::file_digest(o.predictions);
  manifest::write_manifest(o.out + ".manifest", m);
  std::cout << "evaluate: composite " << eval.report.composite << " over "
            << eval.report.n << " records -> " << o.out << '\n';
}

struct ReportOptions {
  std::vector<std::string> report_paths;
  std::string out_dir;
  std::string baseline;
};

void cmd_report(const GlobalOptions& g, const ReportOptions& o,
                const std::string& command) {
  std::vector<evalsuite::MetricReport> reports;
  reports.reserve(o.report_paths.size());
  for (const std::string& path : o.report_paths) {
    reports.push_back(evalsuite::load_report(path).report);
  }
  std::optional<std::string> baseline;
  if (!o.baseline.empty()) baseline = o.baseline;
  const auto written = report::render_report(reports, o.out_dir, baseline);

  manifest::RunManifest m = base_manifest(g, command);
  for (const std::string& path : o.report_paths) {
    m.input_digests[path] = manifest::file_digest(path);
  }
  manifest::write_manifest(fs::path(o.out_dir) / "manifest.txt", m);
  std::cout << "report: " << written.size() << " files -> " << o.out_dir << '\n';
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"idiom-forge: rewards, prompting pipeline, and evaluation for idiom translation"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  GlobalOptions g;
  app.add_option("--config", g.config_path, "backend config file (key = value lines)");
  app.add_option("--seed", g.seed, "global random seed")->capture_default_str();
  app.add_option("--backends", g.backends_mode, "backend mode")
      ->check(CLI::IsMember({"stub", "live"}))
      ->capture_default_str();
  app.add_option("--cache-dir", g.cache_dir, "directory for the backend response cache");

  const std::string command = join_args(argc, argv);

  PrepareOptions prep;
  auto* prep_cmd =
      app.add_subcommand("prepare-data", "clean and split a raw two-column TSV corpus");
  prep_cmd->fallthrough();
  prep_cmd->add_option("--source", prep.source, "corpus flavor")
      ->required()
      ->check(CLI::IsMember({"petci", "hindi", "opus"}));
  prep_cmd->add_option("--in", prep.in, "raw TSV input")->required();
  prep_cmd->add_option("--out", prep.out, "corpus JSONL output")->required();
  prep_cmd->add_option("--train-count", prep.train_count, "pairs assigned to train")
      ->required();
  prep_cmd->add_option("--sample", prep.sample,
                       "subsample this many pairs before splitting (0 = all)");
  prep_cmd->add_option("--language", prep.language, "language tag for --source opus")
      ->capture_default_str();
  prep_cmd->callback([&] { cmd_prepare_data(g, prep, command); });

  TranslateOptions tr;
  auto* tr_cmd = app.add_subcommand(
      "translate", "run the three-stage training-free pipeline over a corpus");
  tr_cmd->fallthrough();
  tr_cmd->add_option("--corpus", tr.corpus_path, "corpus JSONL")->required();
  tr_cmd->add_option("--out", tr.out, "trace JSONL output")->required();
  tr_cmd->add_option("--method", tr.method, "translation method")
      ->capture_default_str();
  tr_cmd->add_option("--split", tr.split, "which split to translate")
      ->check(CLI::IsMember({"train", "test", "all"}))
      ->capture_default_str();
  tr_cmd->add_option("--temperature", tr.temperature, "sampling temperature")
      ->capture_default_str();
  tr_cmd->callback([&] { cmd_translate(g, tr, command); });

  RewardOptions rw;
  auto* rw_cmd = app.add_subcommand("compute-rewards",
                                    "score model translations with a reward variant");
  rw_cmd->fallthrough();
  rw_cmd->add_option("--variant", rw.variant, "reward variant")
      ->required()
      ->check(CLI::IsMember({"positive", "negative", "constrained", "da"}));
  rw_cmd->add_option("--in", rw.corpus_path, "corpus JSONL")->required();
  rw_cmd->add_option("--mt", rw.mt_path, "translations: trace JSONL or {pair_id, mt} JSONL")
      ->required();
  rw_cmd->add_option("--out", rw.out, "rewards JSONL output")->required();
  rw_cmd->callback([&] { cmd_compute_rewards(g, rw, command); });

  ExportGrpoOptions eg;
  auto* eg_cmd = app.add_subcommand(
      "export-grpo", "sample completion groups and export an advantage-annotated batch");
  eg_cmd->fallthrough();
  eg_cmd->add_option("--variant", eg.variant, "reward variant")
      ->required()
      ->check(CLI::IsMember({"positive", "negative", "constrained", "da"}));
  eg_cmd->add_option("--corpus", eg.corpus_path, "corpus JSONL")->required();
  eg_cmd->add_option("--out", eg.out, "batch JSONL output")->required();
  eg_cmd->add_option("--group-size", eg.group_size, "completions per group")
      ->capture_default_str();
  eg_cmd->add_option("--epochs", eg.epochs, "planned training epochs")
      ->capture_default_str();
  eg_cmd->add_option("--temperature", eg.temperature, "sampling temperature")
      ->capture_default_str();
  eg_cmd->callback([&] { cmd_export_grpo(g, eg, command); });

  ExportSftOptions es;
  auto* es_cmd =
      app.add_subcommand("export-sft", "export (prompt, reference) pairs for SFT");
  es_cmd->fallthrough();
  es_cmd->add_option("--corpus", es.corpus_path, "corpus JSONL")->required();
  es_cmd->add_option("--out", es.out, "SFT JSONL output")->required();
  es_cmd->callback([&] { cmd_export_sft(g, es, command); });

  EvaluateOptions ev;
  auto* ev_cmd = app.add_subcommand("evaluate",
                                    "grade predictions with the five-metric suite");
  ev_cmd->fallthrough();
  ev_cmd->add_option("--corpus", ev.corpus_path, "corpus JSONL")->required();
  ev_cmd->add_option("--predictions", ev.predictions,
                     "trace JSONL or {pair_id, mt} JSONL")
      ->required();
  ev_cmd->add_option("--out", ev.out, "report JSON output")->required();
  ev_cmd->add_option("--method-tag", ev.method_tag, "method label for the report")
      ->capture_default_str();
  ev_cmd->add_option("--corpus-tag", ev.corpus_tag,
                     "corpus label (default: corpus file stem)");
  ev_cmd->callback([&] { cmd_evaluate(g, ev, command); });

  ReportOptions rp;
  auto* rp_cmd =
      app.add_subcommand("report", "render markdown tables and charts from reports");
  rp_cmd->fallthrough();
  rp_cmd->add_option("--out", rp.out_dir, "output directory")->required();
  rp_cmd->add_option("--baseline", rp.baseline, "method tag used as delta baseline");
  rp_cmd->add_option("reports", rp.report_paths, "evaluation report JSON files")
      ->required();
  rp_cmd->callback([&] { cmd_report(g, rp, command); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace forge::cli
