#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "termweave/analytics.hpp"
#include "termweave/config.hpp"
#include "termweave/graph.hpp"
#include "termweave/presentation.hpp"
#include "termweave/serialize.hpp"
#include "termweave/store.hpp"

namespace termweave {

/// Content hash of the detection parameters, the reduction p and the graph they run on.
std::string params_hash(const DetectParams& params, double reduction, std::string_view graph_id);

struct StageResult {
  std::string stage;
  std::string artifact;
  bool cached = false;
  std::string summary;  // one line for humans
};

struct RunInfo {
  std::string id;
  std::string graph;
  double reduction = 0;
  DetectParams params;
  std::size_t topic_count = 0;
  std::size_t assigned = 0;
  std::size_t vertices = 0;
  std::vector<std::size_t> topic_sizes;

  double coverage() const { return vertices == 0 ? 0.0 : 100.0 * static_cast<double>(assigned) / vertices; }
};

struct SheetBundle {
  std::string run;
  std::vector<TopicSheet> sheets;
  std::vector<CoherenceReport> coherence;
};

struct Evaluation {
  std::string run;
  CrossTable table;
  std::vector<std::optional<std::size_t>> matching;  // class -> topic
  ClassStats stats;
};

struct SweepStep {
  double gamma = 0;
  RunInfo run;
  std::optional<TopicFlowMatrix> from_previous;
};

/// Runs pipeline stages against a project and reads their artifacts back.
///
/// Loaded artifacts are cached by id; since artifacts never change once
/// written the caches need no invalidation. Safe for concurrent readers; stage
/// methods need a project opened for writing.
class Workspace {
 public:
  Workspace(Project& project, Config config);

  Project& project() noexcept { return project_; }
  const Config& config() const noexcept { return config_; }

  StageResult ingest(const std::filesystem::path& source, CorpusFormat format, bool preannotated = false);
  StageResult rank();
  StageResult graph(std::optional<double> reduction = std::nullopt);
  StageResult detect(const DetectParams& params, std::optional<double> reduction = std::nullopt);
  StageResult sheets(const std::string& run);
  StageResult eval(const std::string& run);
  std::vector<SweepStep> sweep(const std::vector<double>& gammas, const DetectParams& base,
                               std::optional<double> reduction = std::nullopt);

  std::string corpus_id() const;
  std::string rankings_id() const;
  std::string graph_id(double reduction) const;
  std::optional<std::string> find_graph(double reduction) const;
  std::optional<std::string> sheets_id(const std::string& run) const;

  std::shared_ptr<const Corpus> corpus() const;
  std::shared_ptr<const RankingSet> rankings() const;
  std::shared_ptr<const TermGraph> term_graph(const std::string& graph_id) const;
  std::shared_ptr<const TopicSet> topics(const std::string& run) const;
  std::shared_ptr<const SheetBundle> sheet_bundle(const std::string& run) const;
  std::shared_ptr<const EmbeddingTable> embeddings() const;

  RunInfo run_info(const std::string& run) const;
  std::vector<RunInfo> runs() const;
  std::optional<std::string> find_run(const DetectParams& params, double reduction) const;

  TopicShares shares(const std::string& run, const std::string& doc_id) const;
  std::vector<TopicShares> all_shares(const std::string& run) const;
  Evaluation evaluate(const std::string& run) const;
  TopicFlowMatrix compare(const std::string& a, const std::string& b) const;
  SheetBundle build_sheets(const std::string& run) const;

 private:
  template <typename T, typename Load>
  std::shared_ptr<const T> cached(const std::string& id, Load&& load) const;

  Project& project_;
  Config config_;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::string, std::shared_ptr<const void>> cache_;
  mutable std::mutex write_mutex_;
};

}  // namespace termweave
