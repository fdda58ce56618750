#include "termweave/serialize.hpp"

#include <algorithm>
#include <ostream>

#include "termweave/error.hpp"

namespace termweave {

namespace {

template <typename T>
T field(const Json& j, const char* key) {
  if (!j.contains(key)) throw DataError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw DataError(std::string("bad field '") + key + "': " + e.what());
  }
}

template <typename T>
T field_or(const Json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  return field<T>(j, key);
}

Json optional_string(const std::optional<std::string>& s) { return s ? Json(*s) : Json(nullptr); }

std::optional<std::string> read_optional(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return field<std::string>(j, key);
}

Json term_names(std::span<const TermId> terms, const Vocabulary& vocabulary) {
  Json out = Json::array();
  for (TermId t : terms) out.push_back(vocabulary.term(t));
  return out;
}

std::vector<TermId> term_ids(const Json& j, const Vocabulary& vocabulary) {
  if (!j.is_array()) throw DataError("expected a term list");
  std::vector<TermId> out;
  out.reserve(j.size());
  for (const auto& t : j) {
    if (!t.is_string()) throw DataError("term lists hold strings");
    out.push_back(vocabulary.id(t.get<std::string>()));
  }
  return out;
}

}  // namespace

Json to_json(const RankParams& p) {
  return {{"alpha", p.alpha}, {"beta", p.beta},   {"window", p.window},
          {"idf_floor", p.idf_floor}, {"tol", p.tol}, {"max_iter", p.max_iter}};
}

RankParams rank_params_from_json(const Json& j) {
  RankParams p;
  p.alpha = field_or(j, "alpha", p.alpha);
  p.beta = field_or(j, "beta", p.beta);
  p.window = field_or(j, "window", p.window);
  p.idf_floor = field_or(j, "idf_floor", p.idf_floor);
  p.tol = field_or(j, "tol", p.tol);
  p.max_iter = field_or(j, "max_iter", p.max_iter);
  p.validate();
  return p;
}

Json to_json(const DiscretizeParams& p) { return {{"parts", p.parts}, {"levels", p.levels}}; }

DiscretizeParams discretize_params_from_json(const Json& j) {
  DiscretizeParams p;
  p.parts = field_or(j, "parts", p.parts);
  p.levels = field_or(j, "levels", p.levels);
  p.validate();
  return p;
}

Json to_json(const DetectParams& p) {
  return {{"gamma", p.gamma},
          {"n_rep", p.n_rep},
          {"n_con", p.n_con},
          {"min_size_frac", p.min_size_fraction},
          {"seed", p.seed}};
}

DetectParams detect_params_from_json(const Json& j) {
  DetectParams p;
  p.gamma = field_or(j, "gamma", p.gamma);
  p.n_rep = field_or(j, "n_rep", p.n_rep);
  p.n_con = field_or(j, "n_con", p.n_con);
  p.min_size_fraction = field_or(j, "min_size_frac", p.min_size_fraction);
  p.seed = field_or(j, "seed", p.seed);
  p.validate();
  return p;
}

Json to_json(const Corpus& corpus) {
  Json docs = Json::array();
  for (const auto& d : corpus.documents) {
    docs.push_back({{"id", d.doc_id},
                    {"title", optional_string(d.title)},
                    {"class", optional_string(d.class_label)},
                    {"sequence", d.sequence},
                    {"unique_terms", d.unique_terms},
                    {"first_position", d.first_position}});
  }
  return {{"terms", corpus.vocabulary.terms()}, {"df", corpus.vocabulary.dfs()}, {"documents", std::move(docs)}};
}

Corpus corpus_from_json(const Json& j) {
  Corpus corpus;
  const auto terms = field<std::vector<std::string>>(j, "terms");
  const auto df = field<std::vector<std::uint32_t>>(j, "df");
  if (terms.size() != df.size()) throw DataError("vocabulary and df lengths differ");
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (corpus.vocabulary.intern(terms[i]) != i) throw DataError("duplicate term '" + terms[i] + "'");
    corpus.vocabulary.set_df(static_cast<TermId>(i), df[i]);
  }
  for (const auto& d : field<Json>(j, "documents")) {
    IndexedDocument doc;
    doc.doc_id = field<std::string>(d, "id");
    doc.title = read_optional(d, "title");
    doc.class_label = read_optional(d, "class");
    doc.sequence = field<std::vector<TermId>>(d, "sequence");
    doc.unique_terms = field<std::vector<TermId>>(d, "unique_terms");
    doc.first_position = field<std::vector<std::uint32_t>>(d, "first_position");
    if (doc.unique_terms.size() != doc.first_position.size()) throw DataError("first_position length mismatch");
    for (TermId t : doc.sequence) {
      if (t >= terms.size()) throw DataError("term id out of range in " + doc.doc_id);
    }
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

Json to_json(const RankingSet& rankings) {
  Json docs = Json::array();
  for (const auto& d : rankings.documents) {
    docs.push_back({{"id", d.doc_id}, {"terms", d.terms}, {"r", d.r}, {"q", d.q}});
  }
  return {{"params", to_json(rankings.params)},
          {"levels", to_json(rankings.levels)},
          {"documents", std::move(docs)},
          {"corpus",
           {{"r", rankings.corpus.r},
            {"q_sum", rankings.corpus.q_sum},
            {"prior_weight", rankings.corpus.prior_weight},
            {"prior_mean", rankings.corpus.prior_mean}}}};
}

RankingSet rankings_from_json(const Json& j) {
  RankingSet out;
  out.params = rank_params_from_json(field<Json>(j, "params"));
  out.levels = discretize_params_from_json(field<Json>(j, "levels"));
  for (const auto& d : field<Json>(j, "documents")) {
    DocRanking r;
    r.doc_id = field<std::string>(d, "id");
    r.terms = field<std::vector<TermId>>(d, "terms");
    r.r = field<std::vector<double>>(d, "r");
    r.q = field<std::vector<std::uint8_t>>(d, "q");
    if (r.r.size() != r.terms.size() || r.q.size() != r.terms.size()) {
      throw DataError("ranking of " + r.doc_id + " has inconsistent lengths");
    }
    out.documents.push_back(std::move(r));
  }
  const auto& c = field<Json>(j, "corpus");
  out.corpus.r = field<std::vector<double>>(c, "r");
  out.corpus.q_sum = field<std::vector<std::uint32_t>>(c, "q_sum");
  out.corpus.prior_weight = field<double>(c, "prior_weight");
  out.corpus.prior_mean = field<double>(c, "prior_mean");
  return out;
}

Json to_json(const TopicSet& topics, const Vocabulary& vocabulary) {
  Json list = Json::array();
  for (std::size_t i = 0; i < topics.topics.size(); ++i) {
    list.push_back({{"id", i}, {"terms", term_names(topics.topics[i], vocabulary)}});
  }
  Json params = to_json(topics.params);
  params["reduction"] = topics.reduction;
  params["min_size"] = topics.min_size;
  params["median_community_count"] = topics.median_community_count;
  params["run_community_counts"] = topics.run_community_counts;
  return {{"params", std::move(params)},
          {"topics", std::move(list)},
          {"unassigned", term_names(topics.unassigned, vocabulary)}};
}

TopicSet topics_from_json(const Json& j, const Vocabulary& vocabulary) {
  TopicSet out;
  const auto& params = field<Json>(j, "params");
  out.params = detect_params_from_json(params);
  out.reduction = field<double>(params, "reduction");
  out.min_size = field_or(params, "min_size", 0.0);
  out.median_community_count = field_or(params, "median_community_count", 0.0);
  out.run_community_counts = field_or(params, "run_community_counts", std::vector<std::size_t>{});
  const auto& list = field<Json>(j, "topics");
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (field<std::size_t>(list[i], "id") != i) throw DataError("topic ids must be consecutive from 0");
    out.topics.push_back(term_ids(field<Json>(list[i], "terms"), vocabulary));
  }
  out.unassigned = term_ids(field<Json>(j, "unassigned"), vocabulary);
  return out;
}

Json to_json(const TopicSheet& sheet, const Vocabulary& vocabulary) {
  Json strata = Json::array();
  for (const auto& s : sheet.strata) strata.push_back(term_names(s, vocabulary));
  return {{"topic", sheet.topic}, {"strata", std::move(strata)}, {"residual", term_names(sheet.residual, vocabulary)}};
}

Json to_json(const CoherenceReport& report) {
  return {{"topic", report.topic},
          {"M_H", report.informative_count},
          {"embedded", report.embedded_count},
          {"c_emb", report.coherence ? Json(*report.coherence) : Json(nullptr)}};
}

Json to_json(const TopicShares& shares) {
  return {{"doc_id", shares.doc_id},
          {"counts", shares.counts},
          {"shares", shares.shares},
          {"dominant", shares.dominant ? Json(*shares.dominant) : Json(nullptr)}};
}

Json to_json(const CrossTable& table) {
  return {{"classes", table.classes},
          {"topics", table.topics},
          {"counts", table.counts},
          {"without_dominant", table.without_dominant}};
}

namespace {

Json to_json(const ClassStat& s) {
  return {{"class", s.label}, {"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}, {"support", s.support}};
}

}  // namespace

Json to_json(const ClassStats& stats) {
  Json classes = Json::array();
  for (const auto& c : stats.classes) classes.push_back(to_json(c));
  return {{"classes", std::move(classes)}, {"weighted", to_json(stats.weighted)}};
}

Json to_json(const TopicFlowMatrix& flow) { return {{"rows", flow.rows}, {"cols", flow.cols}, {"counts", flow.counts}}; }

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

namespace {

std::string number(double x) { return Json(x).dump(); }

}  // namespace

void write_corpus_ranking_csv(std::ostream& out, const RankingSet& rankings, const Vocabulary& vocabulary) {
  out << "term,r,Df,sum_q\n";
  std::vector<TermId> order(vocabulary.size());
  for (TermId t = 0; t < order.size(); ++t) order[t] = t;
  std::stable_sort(order.begin(), order.end(),
                   [&](TermId a, TermId b) { return rankings.corpus.r[a] > rankings.corpus.r[b]; });
  for (TermId t : order) {
    out << csv_field(vocabulary.term(t)) << ',' << number(rankings.corpus.r[t]) << ',' << vocabulary.df(t) << ','
        << rankings.corpus.q_sum[t] << '\n';
  }
}

void write_document_ranking_csv(std::ostream& out, const RankingSet& rankings, const Vocabulary& vocabulary) {
  out << "doc_id,term,r_d,q_d\n";
  for (const auto& d : rankings.documents) {
    for (std::size_t i = 0; i < d.terms.size(); ++i) {
      out << csv_field(d.doc_id) << ',' << csv_field(vocabulary.term(d.terms[i])) << ',' << number(d.r[i]) << ','
          << static_cast<int>(d.q[i]) << '\n';
    }
  }
}

void write_topics_csv(std::ostream& out, const TopicSet& topics, const Vocabulary& vocabulary) {
  out << "topic,size,terms\n";
  for (std::size_t i = 0; i < topics.topics.size(); ++i) {
    std::string joined;
    for (TermId t : topics.topics[i]) {
      if (!joined.empty()) joined.push_back(' ');
      joined += vocabulary.term(t);
    }
    out << i << ',' << topics.topics[i].size() << ',' << csv_field(joined) << '\n';
  }
}

void write_sheets_csv(std::ostream& out, const std::vector<TopicSheet>& sheets, const Vocabulary& vocabulary) {
  for (const auto& sheet : sheets) {
    for (std::size_t s = 0; s < sheet.strata.size(); ++s) {
      out << sheet.topic << ',' << s;
      for (TermId t : sheet.strata[s]) out << ',' << csv_field(vocabulary.term(t));
      out << '\n';
    }
    if (!sheet.residual.empty()) {
      out << sheet.topic << ",residual";
      for (TermId t : sheet.residual) out << ',' << csv_field(vocabulary.term(t));
      out << '\n';
    }
  }
}

void write_crosstable_csv(std::ostream& out, const CrossTable& table) {
  out << "class";
  for (const auto& t : table.topics) out << ',' << csv_field(t);
  out << ",total\n";
  for (std::size_t r = 0; r < table.classes.size(); ++r) {
    out << csv_field(table.classes[r]);
    for (auto c : table.counts[r]) out << ',' << c;
    out << ',' << table.row_sum(r) << '\n';
  }
}

void write_stats_csv(std::ostream& out, const ClassStats& stats) {
  out << "class,precision,recall,f1,support\n";
  auto row = [&](const ClassStat& s) {
    out << csv_field(s.label) << ',' << number(s.precision) << ',' << number(s.recall) << ',' << number(s.f1) << ','
        << s.support << '\n';
  };
  for (const auto& c : stats.classes) row(c);
  row(stats.weighted);
}

void write_flow_csv(std::ostream& out, const TopicFlowMatrix& flow) {
  out << "topic";
  for (std::size_t c = 0; c < flow.cols; ++c) out << ",a" << c;
  out << '\n';
  for (std::size_t r = 0; r < flow.rows; ++r) {
    out << 'b' << r;
    for (auto v : flow.counts[r]) out << ',' << v;
    out << '\n';
  }
}

}  // namespace termweave
