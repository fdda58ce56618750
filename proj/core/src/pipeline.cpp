#include "termweave/pipeline.hpp"

#include <algorithm>
#include <sstream>

#include "termweave/error.hpp"

namespace termweave {

namespace {

std::string reduction_key(double reduction) { return Json(reduction).dump(); }

std::string short_id(const std::string& id) { return id.substr(0, 8); }

std::string fixed(double x, int digits) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(digits);
  ss << x;
  return ss.str();
}

std::optional<std::string> string_ref(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) return std::nullopt;
  return j.at(key).get<std::string>();
}

}  // namespace

std::string params_hash(const DetectParams& params, double reduction, std::string_view graph_id) {
  const Json key = {{"detect", to_json(params)}, {"reduction", reduction}, {"graph", graph_id}};
  return sha256_hex(key.dump()).substr(0, 16);
}

Workspace::Workspace(Project& project, Config config) : project_(project), config_(std::move(config)) {
  config_.validate();
}

template <typename T, typename Load>
std::shared_ptr<const T> Workspace::cached(const std::string& id, Load&& load) const {
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = cache_.find(id); it != cache_.end()) return std::static_pointer_cast<const T>(it->second);
  }
  std::shared_ptr<const T> value = std::make_shared<const T>(load());
  std::lock_guard lock(cache_mutex_);
  auto [it, inserted] = cache_.emplace(id, value);
  return std::static_pointer_cast<const T>(it->second);
}

std::string Workspace::corpus_id() const {
  auto id = string_ref(project_.manifest(), "corpus");
  if (!id) throw PrerequisiteError("project has no corpus; run ingest first");
  return *id;
}

std::string Workspace::rankings_id() const {
  auto id = string_ref(project_.manifest(), "rankings");
  if (!id) throw PrerequisiteError("project has no rankings; run rank first");
  return *id;
}

std::optional<std::string> Workspace::find_graph(double reduction) const {
  const auto m = project_.manifest();
  const auto& graphs = m.at("graphs");
  auto it = graphs.find(reduction_key(reduction));
  if (it == graphs.end()) return std::nullopt;
  return it->get<std::string>();
}

std::string Workspace::graph_id(double reduction) const {
  auto id = find_graph(reduction);
  if (!id) throw PrerequisiteError("no graph for reduction " + reduction_key(reduction) + "; run graph first");
  return *id;
}

std::optional<std::string> Workspace::sheets_id(const std::string& run) const {
  const auto m = project_.manifest();
  if (!m.contains("sheets") || !m["sheets"].contains(run)) return std::nullopt;
  return m["sheets"][run].get<std::string>();
}

std::shared_ptr<const Corpus> Workspace::corpus() const {
  const auto id = corpus_id();
  return cached<Corpus>("corpus:" + id, [&] { return corpus_from_json(Json::parse(project_.load_artifact(id))); });
}

std::shared_ptr<const RankingSet> Workspace::rankings() const {
  const auto id = rankings_id();
  return cached<RankingSet>("rankings:" + id,
                            [&] { return rankings_from_json(Json::parse(project_.load_artifact(id))); });
}

std::shared_ptr<const TermGraph> Workspace::term_graph(const std::string& id) const {
  return cached<TermGraph>("graph:" + id, [&] {
    std::istringstream in(project_.load_artifact(id));
    return read_graph_binary(in);
  });
}

std::shared_ptr<const TopicSet> Workspace::topics(const std::string& run) const {
  const auto info = project_.find(run);
  if (!info || info->kind != ArtifactKind::Topics) throw NotFoundError("unknown run '" + run + "'");
  auto c = corpus();
  return cached<TopicSet>("topics:" + run, [&] {
    return topics_from_json(Json::parse(project_.load_artifact(run)), c->vocabulary);
  });
}

std::shared_ptr<const EmbeddingTable> Workspace::embeddings() const {
  if (!config_.presentation.vectors) return std::make_shared<const EmbeddingTable>();
  const auto path = config_.presentation.vectors->string();
  return cached<EmbeddingTable>("vectors:" + path, [&] { return load_vectors(path); });
}

std::shared_ptr<const SheetBundle> Workspace::sheet_bundle(const std::string& run) const {
  auto id = sheets_id(run);
  if (!id) throw PrerequisiteError("no sheets for run " + run + "; run sheets first");
  auto c = corpus();
  return cached<SheetBundle>("sheets:" + *id, [&] {
    const Json j = Json::parse(project_.load_artifact(*id));
    SheetBundle b;
    b.run = j.at("run").get<std::string>();
    for (const auto& s : j.at("sheets")) {
      TopicSheet sheet;
      sheet.topic = s.at("topic").get<std::size_t>();
      for (const auto& stratum : s.at("strata")) {
        auto& row = sheet.strata.emplace_back();
        for (const auto& t : stratum) row.push_back(c->vocabulary.id(t.get<std::string>()));
      }
      for (const auto& t : s.at("residual")) sheet.residual.push_back(c->vocabulary.id(t.get<std::string>()));
      b.sheets.push_back(std::move(sheet));
    }
    for (const auto& r : j.at("coherence")) {
      CoherenceReport report;
      report.topic = r.at("topic").get<std::size_t>();
      report.informative_count = r.at("M_H").get<std::size_t>();
      report.embedded_count = r.at("embedded").get<std::size_t>();
      if (!r.at("c_emb").is_null()) report.coherence = r.at("c_emb").get<double>();
      for (const auto& t : r.at("informative")) report.informative.push_back(c->vocabulary.id(t.get<std::string>()));
      b.coherence.push_back(std::move(report));
    }
    return b;
  });
}

RunInfo Workspace::run_info(const std::string& run) const {
  const auto info = project_.find(run);
  if (!info || info->kind != ArtifactKind::Topics) throw NotFoundError("unknown run '" + run + "'");
  const auto& m = info->meta;
  RunInfo r;
  r.id = run;
  r.graph = m.at("graph").get<std::string>();
  r.reduction = m.at("reduction").get<double>();
  r.params = detect_params_from_json(m.at("params"));
  r.topic_count = m.at("topics").get<std::size_t>();
  r.assigned = m.at("assigned").get<std::size_t>();
  r.vertices = m.at("vertices").get<std::size_t>();
  r.topic_sizes = m.at("sizes").get<std::vector<std::size_t>>();
  return r;
}

std::vector<RunInfo> Workspace::runs() const {
  std::vector<RunInfo> out;
  const auto m = project_.manifest();
  for (const auto& id : m.at("runs")) out.push_back(run_info(id.get<std::string>()));
  return out;
}

std::optional<std::string> Workspace::find_run(const DetectParams& params, double reduction) const {
  auto graph = find_graph(reduction);
  if (!graph) return std::nullopt;
  const auto id = params_hash(params, reduction, *graph);
  if (project_.find(id)) return id;
  return std::nullopt;
}

StageResult Workspace::ingest(const std::filesystem::path& source, CorpusFormat format, bool preannotated) {
  std::lock_guard write(write_mutex_);
  const auto& a = config_.annotation;
  const auto annotation = load_annotation_config(a.stop_words, a.lexicon, a.gazetteer, a.default_stop_words);
  std::vector<AnnotatedDocument> docs;
  if (preannotated) {
    docs = ingest_preannotated(source, annotation);
  } else {
    docs = annotate_all(load_corpus(source, format), annotation, config_.threads);
  }
  const Corpus corpus = index_corpus(docs);
  const auto previous = string_ref(project_.manifest(), "corpus");
  const auto id = project_.save_artifact(
      ArtifactKind::Corpus, to_json(corpus).dump(),
      {{"documents", corpus.documents.size()}, {"terms", corpus.vocabulary.size()}, {"source", source.string()}});
  const bool same = previous && *previous == id;
  const Json annotation_json = to_json(config_)["annotation"];
  project_.update_manifest([&](Json& m) {
    m["annotation"] = annotation_json;
    if (!same) {
      m["corpus"] = id;
      m["rankings"] = nullptr;
      m["graphs"] = Json::object();
    }
  });
  return {"ingest", id, same,
          "ingest: " + std::to_string(corpus.documents.size()) + " documents, " +
              std::to_string(corpus.vocabulary.size()) + " terms -> corpus " + short_id(id)};
}

StageResult Workspace::rank() {
  std::lock_guard write(write_mutex_);
  const auto cid = corpus_id();
  const Json params = {{"corpus", cid}, {"params", to_json(config_.ranking)}, {"levels", to_json(config_.levels)}};
  for (const auto& a : project_.artifacts(ArtifactKind::Rankings)) {
    if (a.meta == params) {
      project_.update_manifest([&](Json& m) {
        if (m["rankings"] != a.id) m["graphs"] = Json::object();
        m["rankings"] = a.id;
      });
      return {"rank", a.id, true, "rank: cached rankings " + short_id(a.id)};
    }
  }
  auto c = corpus();
  RankingSet set;
  set.params = config_.ranking;
  set.levels = config_.levels;
  set.documents = rank_documents(*c, set.params, set.levels, config_.threads);
  set.corpus = corpus_rank(set.documents, c->vocabulary, set.levels);
  const auto id = project_.save_artifact(ArtifactKind::Rankings, to_json(set).dump(), params);
  project_.update_manifest([&](Json& m) {
    m["rankings"] = id;
    m["graphs"] = Json::object();
  });
  TermId top = 0;
  for (TermId t = 1; t < set.corpus.r.size(); ++t) {
    if (set.corpus.r[t] > set.corpus.r[top]) top = t;
  }
  std::string line = "rank: " + std::to_string(set.documents.size()) + " documents ranked";
  if (!set.corpus.r.empty()) {
    line += ", top term " + c->vocabulary.term(top) + " (r=" + fixed(set.corpus.r[top], 3) + ")";
  }
  return {"rank", id, false, line + " -> rankings " + short_id(id)};
}

StageResult Workspace::graph(std::optional<double> reduction) {
  std::lock_guard write(write_mutex_);
  const double p = reduction.value_or(config_.graph.reduction);
  if (!(p > 0.0 && p <= 100.0)) throw DataError("reduction must be in (0, 100]");
  const auto rid = rankings_id();
  const auto cid = corpus_id();
  if (auto existing = find_graph(p)) {
    const auto info = project_.find(*existing);
    if (info && info->meta.value("rankings", "") == rid) {
      return {"graph", *existing, true, "graph: cached graph " + short_id(*existing)};
    }
  }
  auto c = corpus();
  auto r = rankings();
  const TermGraph g = build_corpus_graph(*c, r->documents, p, cid);
  std::ostringstream out;
  write_graph_binary(out, g);
  const auto id = project_.save_artifact(
      ArtifactKind::Graph, out.str(),
      {{"rankings", rid}, {"reduction", p}, {"vertices", g.vertex_count()}, {"edges", g.edge_count()}});
  project_.update_manifest([&](Json& m) { m["graphs"][reduction_key(p)] = id; });
  return {"graph", id, false,
          "graph: p=" + reduction_key(p) + ", " + std::to_string(g.vertex_count()) + " vertices, " +
              std::to_string(g.edge_count()) + " edges -> graph " + short_id(id)};
}

StageResult Workspace::detect(const DetectParams& params, std::optional<double> reduction) {
  params.validate();
  const double p = reduction.value_or(config_.graph.reduction);
  const auto gid = graph_id(p);
  const auto id = params_hash(params, p, gid);
  auto summary = [](const RunInfo& info) {
    return std::to_string(info.topic_count) + " topics, coverage " + fixed(info.coverage(), 1) + "% of " +
           std::to_string(info.vertices) + " terms";
  };
  if (project_.find(id)) {
    return {"detect", id, true, "detect: gamma=" + Json(params.gamma).dump() + ", " + summary(run_info(id)) +
                                    " (cached run " + id + ")"};
  }
  auto g = term_graph(gid);
  auto c = corpus();
  const TopicSet topics = detect_topics(*g, params, config_.threads);

  std::lock_guard write(write_mutex_);
  std::vector<std::size_t> sizes;
  for (const auto& t : topics.topics) sizes.push_back(t.size());
  const Json meta = {{"graph", gid},
                     {"reduction", p},
                     {"params", to_json(params)},
                     {"topics", topics.topics.size()},
                     {"assigned", topics.assigned_count()},
                     {"vertices", g->vertex_count()},
                     {"sizes", sizes}};
  project_.save_artifact(ArtifactKind::Topics, to_json(topics, c->vocabulary).dump(2) + "\n", meta, id);
  project_.update_manifest([&](Json& m) {
    auto& runs = m["runs"];
    if (std::find(runs.begin(), runs.end(), Json(id)) == runs.end()) runs.push_back(id);
  });
  return {"detect", id, false, "detect: gamma=" + Json(params.gamma).dump() + ", " + summary(run_info(id)) +
                                   " -> run " + id};
}

SheetBundle Workspace::build_sheets(const std::string& run) const {
  auto t = topics(run);
  auto c = corpus();
  auto r = rankings();
  auto table = embeddings();
  SheetBundle b;
  b.run = run;
  StratifyParams sp{config_.presentation.threshold, config_.presentation.linkage};
  for (std::size_t i = 0; i < t->topics.size(); ++i) {
    b.sheets.push_back(stratify(i, t->topics[i], c->vocabulary, *table, r->corpus.r, sp));
    b.coherence.push_back(
        coherence(i, t->topics[i], c->vocabulary, r->corpus.r, *table, config_.presentation.tau));
  }
  return b;
}

StageResult Workspace::sheets(const std::string& run) {
  const auto bundle = build_sheets(run);
  auto c = corpus();
  Json sheets = Json::array();
  Json reports = Json::array();
  for (const auto& s : bundle.sheets) sheets.push_back(to_json(s, c->vocabulary));
  for (const auto& report : bundle.coherence) {
    Json j = to_json(report);
    Json names = Json::array();
    for (TermId t : report.informative) names.push_back(c->vocabulary.term(t));
    j["informative"] = std::move(names);
    reports.push_back(std::move(j));
  }
  const Json payload = {{"run", run}, {"sheets", std::move(sheets)}, {"coherence", std::move(reports)}};
  std::ostringstream csv;
  write_sheets_csv(csv, bundle.sheets, c->vocabulary);

  std::lock_guard write(write_mutex_);
  const auto previous = sheets_id(run);
  const auto id = project_.save_artifact(ArtifactKind::Sheets, payload.dump(2) + "\n", {{"run", run}});
  project_.write_file(std::filesystem::path("sheets") / (run + ".csv"), csv.str());
  project_.update_manifest([&](Json& m) { m["sheets"][run] = id; });

  std::size_t strata = 0, residual = 0;
  for (const auto& s : bundle.sheets) {
    strata += s.strata.size();
    residual += s.residual.size();
  }
  return {"sheets", id, previous && *previous == id,
          "sheets: " + std::to_string(bundle.sheets.size()) + " topics, " + std::to_string(strata) + " strata, " +
              std::to_string(residual) + " terms without vectors -> sheets " + short_id(id)};
}

TopicShares Workspace::shares(const std::string& run, const std::string& doc_id) const {
  const auto info = run_info(run);
  auto c = corpus();
  auto r = rankings();
  auto t = topics(run);
  const auto index = c->find_document(doc_id);
  if (!index) throw NotFoundError("unknown document '" + doc_id + "'");
  const auto& doc = c->documents[*index];
  const auto retained = reduce_document(doc, r->documents.at(*index), info.reduction);
  return topic_shares(doc.doc_id, retained, TopicLookup(*t), config_.presentation.share_mode);
}

std::vector<TopicShares> Workspace::all_shares(const std::string& run) const {
  const auto info = run_info(run);
  auto c = corpus();
  auto r = rankings();
  auto t = topics(run);
  const TopicLookup lookup(*t);
  std::vector<TopicShares> out;
  out.reserve(c->documents.size());
  for (std::size_t i = 0; i < c->documents.size(); ++i) {
    const auto& doc = c->documents[i];
    const auto retained = reduce_document(doc, r->documents.at(i), info.reduction);
    out.push_back(topic_shares(doc.doc_id, retained, lookup, config_.presentation.share_mode));
  }
  return out;
}

Evaluation Workspace::evaluate(const std::string& run) const {
  auto c = corpus();
  auto t = topics(run);
  const auto shares = all_shares(run);
  std::vector<std::optional<std::string>> labels;
  labels.reserve(c->documents.size());
  bool any = false;
  for (const auto& d : c->documents) {
    labels.push_back(d.class_label);
    any = any || d.class_label.has_value();
  }
  if (!any) throw DataError("corpus has no class labels to evaluate against");
  Evaluation e;
  e.run = run;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < t->topics.size(); ++i) names.push_back("T" + std::to_string(i));
  e.table = crosstable(labels, shares, t->topics.size(), names);
  std::vector<std::vector<double>> weights(e.table.classes.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    weights[i].assign(e.table.counts[i].begin(), e.table.counts[i].end());
  }
  e.matching = max_weight_matching(weights);
  e.stats = classification_stats(e.table, e.matching);
  return e;
}

StageResult Workspace::eval(const std::string& run) {
  const auto e = evaluate(run);
  Json matching = Json::object();
  for (std::size_t i = 0; i < e.matching.size(); ++i) {
    matching[e.table.classes[i]] = e.matching[i] ? Json(e.table.topics[*e.matching[i]]) : Json(nullptr);
  }
  const Json payload = {
      {"run", run}, {"crosstable", to_json(e.table)}, {"matching", std::move(matching)}, {"stats", to_json(e.stats)}};
  std::ostringstream table_csv, stats_csv;
  write_crosstable_csv(table_csv, e.table);
  write_stats_csv(stats_csv, e.stats);

  std::lock_guard write(write_mutex_);
  const auto id = project_.save_artifact(ArtifactKind::Eval, payload.dump(2) + "\n", {{"run", run}});
  project_.write_file(std::filesystem::path("eval") / (run + "-crosstable.csv"), table_csv.str());
  project_.write_file(std::filesystem::path("eval") / (run + "-stats.csv"), stats_csv.str());
  project_.update_manifest([&](Json& m) { m["eval"][run] = id; });
  return {"eval", id, false,
          "eval: " + std::to_string(e.table.classes.size()) + " classes x " + std::to_string(e.table.topics.size()) +
              " topics, weighted f1 " + fixed(e.stats.weighted.f1, 3) + " -> eval " + short_id(id)};
}

TopicFlowMatrix Workspace::compare(const std::string& a, const std::string& b) const {
  const auto ra = run_info(a);
  const auto rb = run_info(b);
  const auto ga = project_.find(ra.graph);
  const auto gb = project_.find(rb.graph);
  if (!ga || !gb || ga->meta.value("rankings", "") != gb->meta.value("rankings", "")) {
    throw DataError("runs " + a + " and " + b + " were computed on different corpora");
  }
  return compare_topic_sets(*topics(a), *topics(b));
}

std::vector<SweepStep> Workspace::sweep(const std::vector<double>& gammas, const DetectParams& base,
                                        std::optional<double> reduction) {
  if (gammas.empty()) throw DataError("sweep needs at least one gamma");
  std::vector<SweepStep> steps;
  for (double gamma : gammas) {
    DetectParams params = base;
    params.gamma = gamma;
    const auto result = detect(params, reduction);
    SweepStep step;
    step.gamma = gamma;
    step.run = run_info(result.artifact);
    if (!steps.empty()) step.from_previous = compare(steps.back().run.id, step.run.id);
    steps.push_back(std::move(step));
  }
  return steps;
}

}  // namespace termweave
