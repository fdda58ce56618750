#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "termweave/analytics.hpp"
#include "termweave/community.hpp"
#include "termweave/ingest.hpp"
#include "termweave/presentation.hpp"
#include "termweave/ranking.hpp"

namespace termweave {

using Json = nlohmann::json;

/// Everything the rank stage produces.
struct RankingSet {
  RankParams params;
  DiscretizeParams levels;
  std::vector<DocRanking> documents;
  CorpusRanking corpus;
};

Json to_json(const RankParams& params);
RankParams rank_params_from_json(const Json& j);
Json to_json(const DiscretizeParams& params);
DiscretizeParams discretize_params_from_json(const Json& j);
Json to_json(const DetectParams& params);
DetectParams detect_params_from_json(const Json& j);

Json to_json(const Corpus& corpus);
Corpus corpus_from_json(const Json& j);

Json to_json(const RankingSet& rankings);
RankingSet rankings_from_json(const Json& j);

Json to_json(const TopicSet& topics, const Vocabulary& vocabulary);
TopicSet topics_from_json(const Json& j, const Vocabulary& vocabulary);

Json to_json(const TopicSheet& sheet, const Vocabulary& vocabulary);
Json to_json(const CoherenceReport& report);
Json to_json(const TopicShares& shares);
Json to_json(const CrossTable& table);
Json to_json(const ClassStats& stats);
Json to_json(const TopicFlowMatrix& flow);

/// RFC 4180 quoting, applied only where needed.
std::string csv_field(std::string_view value);

void write_corpus_ranking_csv(std::ostream& out, const RankingSet& rankings, const Vocabulary& vocabulary);
void write_document_ranking_csv(std::ostream& out, const RankingSet& rankings, const Vocabulary& vocabulary);
void write_topics_csv(std::ostream& out, const TopicSet& topics, const Vocabulary& vocabulary);
/// One row per stratum: topic, stratum index, terms. The residual row uses "residual" as its index.
void write_sheets_csv(std::ostream& out, const std::vector<TopicSheet>& sheets, const Vocabulary& vocabulary);
void write_crosstable_csv(std::ostream& out, const CrossTable& table);
void write_stats_csv(std::ostream& out, const ClassStats& stats);
void write_flow_csv(std::ostream& out, const TopicFlowMatrix& flow);

}  // namespace termweave
