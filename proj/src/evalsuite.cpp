#include "forge/evalsuite.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "forge/text.hpp"
#include "forge/vecops.hpp"

namespace forge::evalsuite {

using nlohmann::json;

double rouge_score(std::string_view prediction, std::string_view reference) {
  if (prediction.empty()) throw EvalError("prediction must be non-empty");
  if (reference.empty()) throw EvalError("reference must be non-empty");
  const auto pred = text::tokenize_lower(prediction);
  const auto ref = text::tokenize_lower(reference);
  if (pred == ref) return 100.0;
  if (pred.empty() || ref.empty()) return 0.0;

  // Classic LCS table; rows iterate the prediction, one row kept at a time.
  std::vector<std::size_t> prev(ref.size() + 1, 0);
  std::vector<std::size_t> cur(ref.size() + 1, 0);
  for (std::size_t i = 1; i <= pred.size(); ++i) {
    for (std::size_t j = 1; j <= ref.size(); ++j) {
      cur[j] = pred[i - 1] == ref[j - 1] ? prev[j - 1] + 1
                                         : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  const auto lcs = static_cast<double>(prev[ref.size()]);
  if (lcs == 0.0) return 0.0;
  const double f = 2.0 * lcs / (static_cast<double>(pred.size() + ref.size()));
  return 100.0 * f;
}

namespace {

double cosine_from_vectors(std::span<const double> a, std::span<const double> b,
                           std::string_view what_a, std::string_view what_b) {
  const double na = vecops::dot(a, a);
  const double nb = vecops::dot(b, b);
  if (na == 0.0) {
    throw EvalError("zero embedding vector for " + std::string(what_a));
  }
  if (nb == 0.0) {
    throw EvalError("zero embedding vector for " + std::string(what_b));
  }
  return vecops::dot(a, b) / (std::sqrt(na) * std::sqrt(nb));
}

double ed_from_cosine(double cosine) { return 100.0 * std::max(0.0, cosine); }

}  // namespace

double embedding_score(std::string_view prediction, std::string_view reference,
                       backends::Embedder& embedder) {
  if (prediction.empty()) throw EvalError("prediction must be non-empty");
  if (reference.empty()) throw EvalError("reference must be non-empty");
  const auto a = backends::embed(embedder, prediction);
  const auto b = backends::embed(embedder, reference);
  return ed_from_cosine(cosine_from_vectors(a, b, "prediction", "reference"));
}

double da_score(const TranslationRecord& record, backends::Scorer& ref_based) {
  return 100.0 * backends::score_reference_based(ref_based, record.source_text,
                                                 record.prediction, record.reference);
}

double qe_score(const TranslationRecord& record, backends::Scorer& ref_free) {
  return 100.0 * backends::score_reference_free(ref_free, record.source_text,
                                                record.prediction);
}

int laj_score(const TranslationRecord& record, backends::Judge& judge) {
  return backends::judge(judge, record.prediction, record.reference);
}

double composite(std::optional<double> da, std::optional<double> qe,
                 std::optional<double> rouge, std::optional<double> ed,
                 std::optional<double> laj) {
  if (!da) throw EvalError("composite requires da");
  if (!qe) throw EvalError("composite requires qe");
  if (!rouge) throw EvalError("composite requires rouge");
  if (!ed) throw EvalError("composite requires ed");
  if (!laj) throw EvalError("composite requires laj");
  return (*da + *qe + *rouge + *ed + 20.0 * *laj) / 5.0;
}

double composite(const MetricReport& report) {
  return composite(report.da, report.qe, report.rouge, report.ed, report.laj);
}

double compare_methods(const MetricReport& a, const MetricReport& b) {
  if (a.corpus_tag != b.corpus_tag) {
    throw EvalError("cannot compare reports for different corpora: '" +
                    a.corpus_tag + "' vs '" + b.corpus_tag + "'");
  }
  return a.composite - b.composite;
}

namespace {

void validate_records(std::span<const TranslationRecord> records) {
  if (records.empty()) throw EvalError("no records to evaluate");
  std::string bad;
  auto flag = [&](const std::string& id, const char* what) {
    if (!bad.empty()) bad += ", ";
    bad += id.empty() ? std::string("<missing id>") : id;
    bad += " (";
    bad += what;
    bad += ")";
  };
  for (const TranslationRecord& r : records) {
    if (r.pair_id.empty()) flag(r.pair_id, "empty pair_id");
    if (r.source_text.empty()) flag(r.pair_id, "empty source_text");
    if (r.prediction.empty()) flag(r.pair_id, "empty prediction");
    if (r.reference.empty()) flag(r.pair_id, "empty reference");
    if (r.method_tag.empty()) flag(r.pair_id, "empty method_tag");
  }
  if (!bad.empty()) throw EvalError("invalid records: " + bad);
  for (const TranslationRecord& r : records) {
    if (r.method_tag != records.front().method_tag) {
      throw EvalError("records mix method tags '" + records.front().method_tag +
                      "' and '" + r.method_tag + "'");
    }
  }
}

std::string id_list(std::span<const TranslationRecord> records) {
  std::string ids;
  for (const TranslationRecord& r : records) {
    if (!ids.empty()) ids += ", ";
    ids += r.pair_id;
  }
  return ids;
}

}  // namespace

CorpusEvaluation evaluate_corpus(std::span<const TranslationRecord> records,
                                 backends::BackendSet& backends,
                                 std::string_view corpus_tag) {
  validate_records(records);
  if (corpus_tag.empty()) throw EvalError("corpus_tag must be non-empty");
  const std::size_t n = records.size();

  std::vector<backends::ScorerRequest> qe_requests;
  std::vector<backends::ScorerRequest> da_requests;
  std::vector<std::string> texts;  // predictions then references
  std::vector<backends::JudgeRequest> judge_requests;
  qe_requests.reserve(n);
  da_requests.reserve(n);
  texts.reserve(2 * n);
  judge_requests.reserve(n);
  for (const TranslationRecord& r : records) {
    qe_requests.push_back({r.source_text, r.prediction, std::nullopt});
    da_requests.push_back({r.source_text, r.prediction, r.reference});
    judge_requests.push_back({r.prediction, r.reference});
  }
  for (const TranslationRecord& r : records) texts.push_back(r.prediction);
  for (const TranslationRecord& r : records) texts.push_back(r.reference);

  std::vector<double> qe_scores;
  std::vector<double> da_scores;
  std::vector<std::vector<double>> vectors;
  std::vector<int> laj_scores;
  try {
    qe_scores = backends.ref_free->score_batch(qe_requests);
    da_scores = backends.ref_based->score_batch(da_requests);
    vectors = backends.embedder->embed_batch(texts);
    laj_scores = backends.judge->judge_batch(judge_requests);
  } catch (const backends::BackendError& e) {
    throw EvalError("backend failure while evaluating records [" +
                    id_list(records) + "]: " + e.what());
  }
  if (qe_scores.size() != n || da_scores.size() != n || vectors.size() != 2 * n ||
      laj_scores.size() != n) {
    throw EvalError("backend returned wrong result count");
  }

  CorpusEvaluation eval;
  eval.records.reserve(n);
  std::vector<double> all_da, all_qe, all_rouge, all_ed, all_laj;
  all_da.reserve(n);
  all_qe.reserve(n);
  all_rouge.reserve(n);
  all_ed.reserve(n);
  all_laj.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    RecordMetrics m;
    m.pair_id = records[i].pair_id;
    m.da = 100.0 * da_scores[i];
    m.qe = 100.0 * qe_scores[i];
    m.rouge = rouge_score(records[i].prediction, records[i].reference);
    m.ed = ed_from_cosine(cosine_from_vectors(
        vectors[i], vectors[n + i], "prediction '" + records[i].pair_id + "'",
        "reference '" + records[i].pair_id + "'"));
    m.laj = laj_scores[i];
    all_da.push_back(m.da);
    all_qe.push_back(m.qe);
    all_rouge.push_back(m.rouge);
    all_ed.push_back(m.ed);
    all_laj.push_back(m.laj);
    eval.records.push_back(std::move(m));
  }

  // Summing in sorted order keeps corpus means exactly permutation-invariant.
  const auto mean_of = [](std::vector<double> values) {
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
  };

  MetricReport& rep = eval.report;
  rep.method_tag = records.front().method_tag;
  rep.corpus_tag = std::string(corpus_tag);
  rep.n = n;
  rep.da = mean_of(std::move(all_da));
  rep.qe = mean_of(std::move(all_qe));
  rep.rouge = mean_of(std::move(all_rouge));
  rep.ed = mean_of(std::move(all_ed));
  rep.laj = mean_of(std::move(all_laj));
  rep.composite = composite(rep);
  return eval;
}

void save_report(const std::filesystem::path& path, const CorpusEvaluation& eval) {
  json report;
  report["method_tag"] = eval.report.method_tag;
  report["corpus_tag"] = eval.report.corpus_tag;
  report["da"] = eval.report.da;
  report["qe"] = eval.report.qe;
  report["rouge"] = eval.report.rouge;
  report["ed"] = eval.report.ed;
  report["laj"] = eval.report.laj;
  report["composite"] = eval.report.composite;
  report["n"] = eval.report.n;
  report["rouge_variant"] = kRougeVariant;

  json rows = json::array();
  for (const RecordMetrics& m : eval.records) {
    json row;
    row["pair_id"] = m.pair_id;
    row["da"] = m.da;
    row["qe"] = m.qe;
    row["rouge"] = m.rouge;
    row["ed"] = m.ed;
    row["laj"] = m.laj;
    rows.push_back(std::move(row));
  }

  json doc;
  doc["report"] = std::move(report);
  doc["records"] = std::move(rows);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw EvalError("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw EvalError("failed writing " + path.string());
}

CorpusEvaluation load_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EvalError("cannot open " + path.string());
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw EvalError(path.string() + ": malformed report JSON");
  }
  try {
    CorpusEvaluation eval;
    const json& report = doc.at("report");
    eval.report.method_tag = report.at("method_tag").get<std::string>();
    eval.report.corpus_tag = report.at("corpus_tag").get<std::string>();
    eval.report.da = report.at("da").get<double>();
    eval.report.qe = report.at("qe").get<double>();
    eval.report.rouge = report.at("rouge").get<double>();
    eval.report.ed = report.at("ed").get<double>();
    eval.report.laj = report.at("laj").get<double>();
    eval.report.composite = report.at("composite").get<double>();
    eval.report.n = report.at("n").get<std::size_t>();
    for (const json& row : doc.at("records")) {
      RecordMetrics m;
      m.pair_id = row.at("pair_id").get<std::string>();
      m.da = row.at("da").get<double>();
      m.qe = row.at("qe").get<double>();
      m.rouge = row.at("rouge").get<double>();
      m.ed = row.at("ed").get<double>();
      m.laj = row.at("laj").get<int>();
      eval.records.push_back(std::move(m));
    }
    return eval;
  } catch (const json::exception& e) {
    throw EvalError(path.string() + ": " + e.what());
  }
}

}  // namespace forge::evalsuite
