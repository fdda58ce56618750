#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "termweave/analytics.hpp"
#include "termweave/community.hpp"
#include "termweave/presentation.hpp"
#include "termweave/ranking.hpp"

namespace termweave {

struct AnnotationSettings {
  std::optional<std::filesystem::path> stop_words;
  std::optional<std::filesystem::path> lexicon;
  std::optional<std::filesystem::path> gazetteer;
  bool default_stop_words = true;
};

struct GraphSettings {
  double reduction = 50.0;  // p, percent of each document's ranked terms kept
};

struct PresentationSettings {
  std::optional<std::filesystem::path> vectors;
  double threshold = 1.0;
  Linkage linkage = Linkage::Ward;
  double tau = 0.25;
  ShareMode share_mode = ShareMode::Occurrences;
};

struct ServeSettings {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<std::filesystem::path> static_dir;
};

struct Config {
  AnnotationSettings annotation;
  RankParams ranking;
  DiscretizeParams levels;
  GraphSettings graph;
  DetectParams detect;
  PresentationSettings presentation;
  ServeSettings serve;
  unsigned threads = 0;  // 0: hardware concurrency

  void validate() const;
};

Linkage parse_linkage(std::string_view name);
std::string_view to_string(Linkage linkage);
ShareMode parse_share_mode(std::string_view name);
std::string_view to_string(ShareMode mode);

/// Relative paths inside the file are resolved against `base_dir`.
Config config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const Config& config);
Config load_config(const std::filesystem::path& path);

/// The project's config.json when present, defaults otherwise.
Config project_config(const std::filesystem::path& project_root);

}  // namespace termweave
