#include "termweave/config.hpp"

#include <fstream>

#include "termweave/error.hpp"
#include "termweave/serialize.hpp"

namespace termweave {

namespace fs = std::filesystem;

namespace {

void check_keys(const Json& j, std::string_view section, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw DataError("config section '" + std::string(section) + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw DataError("unknown config key '" + std::string(section) + "." + key + "'");
  }
}

template <typename T>
void read(const Json& j, const char* key, T& out) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw DataError(std::string("config key '") + key + "' has the wrong type");
  }
}

void read_path(const Json& j, const char* key, const fs::path& base, std::optional<fs::path>& out) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  if (!j.at(key).is_string()) throw DataError(std::string("config key '") + key + "' must be a path");
  fs::path p = j.at(key).get<std::string>();
  if (p.is_relative() && !base.empty()) p = base / p;
  out = p;
}

Json path_json(const std::optional<fs::path>& p) { return p ? Json(p->string()) : Json(nullptr); }

}  // namespace

Linkage parse_linkage(std::string_view name) {
  if (name == "ward") return Linkage::Ward;
  if (name == "average") return Linkage::Average;
  if (name == "complete") return Linkage::Complete;
  if (name == "single") return Linkage::Single;
  throw DataError("unknown linkage '" + std::string(name) + "'");
}

std::string_view to_string(Linkage linkage) {
  switch (linkage) {
    case Linkage::Ward: return "ward";
    case Linkage::Average: return "average";
    case Linkage::Complete: return "complete";
    case Linkage::Single: return "single";
  }
  return "ward";
}

ShareMode parse_share_mode(std::string_view name) {
  if (name == "occurrences") return ShareMode::Occurrences;
  if (name == "unique") return ShareMode::UniqueTerms;
  throw DataError("unknown share mode '" + std::string(name) + "'");
}

std::string_view to_string(ShareMode mode) { return mode == ShareMode::Occurrences ? "occurrences" : "unique"; }

void Config::validate() const {
  ranking.validate();
  levels.validate();
  detect.validate();
  if (!(graph.reduction > 0.0 && graph.reduction <= 100.0)) throw DataError("reduction must be in (0, 100]");
  if (!(presentation.threshold > 0.0)) throw DataError("presentation threshold must be positive");
  if (!(presentation.tau > 0.0)) throw DataError("tau must be positive");
  if (serve.port < 0 || serve.port > 65535) throw DataError("port out of range");
}

Config config_from_json(const Json& j, const fs::path& base) {
  check_keys(j, "config", {"annotation", "ranking", "graph", "detect", "presentation", "serve", "threads"});
  Config c;
  if (j.contains("annotation")) {
    const auto& a = j["annotation"];
    check_keys(a, "annotation", {"stop_words", "lexicon", "gazetteer", "default_stop_words"});
    read_path(a, "stop_words", base, c.annotation.stop_words);
    read_path(a, "lexicon", base, c.annotation.lexicon);
    read_path(a, "gazetteer", base, c.annotation.gazetteer);
    read(a, "default_stop_words", c.annotation.default_stop_words);
  }
  if (j.contains("ranking")) {
    const auto& r = j["ranking"];
    check_keys(r, "ranking", {"alpha", "beta", "window", "idf_floor", "tol", "max_iter", "parts", "levels"});
    read(r, "alpha", c.ranking.alpha);
    read(r, "beta", c.ranking.beta);
    read(r, "window", c.ranking.window);
    read(r, "idf_floor", c.ranking.idf_floor);
    read(r, "tol", c.ranking.tol);
    read(r, "max_iter", c.ranking.max_iter);
    read(r, "parts", c.levels.parts);
    read(r, "levels", c.levels.levels);
  }
  if (j.contains("graph")) {
    check_keys(j["graph"], "graph", {"reduction"});
    read(j["graph"], "reduction", c.graph.reduction);
  }
  if (j.contains("detect")) {
    const auto& d = j["detect"];
    check_keys(d, "detect", {"gamma", "n_rep", "n_con", "min_size_frac", "seed"});
    read(d, "gamma", c.detect.gamma);
    read(d, "n_rep", c.detect.n_rep);
    read(d, "n_con", c.detect.n_con);
    read(d, "min_size_frac", c.detect.min_size_fraction);
    read(d, "seed", c.detect.seed);
  }
  if (j.contains("presentation")) {
    const auto& p = j["presentation"];
    check_keys(p, "presentation", {"vectors", "threshold", "linkage", "tau", "share_mode"});
    read_path(p, "vectors", base, c.presentation.vectors);
    read(p, "threshold", c.presentation.threshold);
    read(p, "tau", c.presentation.tau);
    std::string s;
    read(p, "linkage", s);
    if (!s.empty()) c.presentation.linkage = parse_linkage(s);
    s.clear();
    read(p, "share_mode", s);
    if (!s.empty()) c.presentation.share_mode = parse_share_mode(s);
  }
  if (j.contains("serve")) {
    const auto& s = j["serve"];
    check_keys(s, "serve", {"host", "port", "static_dir"});
    read(s, "host", c.serve.host);
    read(s, "port", c.serve.port);
    read_path(s, "static_dir", base, c.serve.static_dir);
  }
  read(j, "threads", c.threads);
  c.validate();
  return c;
}

Json to_json(const Config& c) {
  Json ranking = to_json(c.ranking);
  ranking["parts"] = c.levels.parts;
  ranking["levels"] = c.levels.levels;
  return {{"annotation",
           {{"stop_words", path_json(c.annotation.stop_words)},
            {"lexicon", path_json(c.annotation.lexicon)},
            {"gazetteer", path_json(c.annotation.gazetteer)},
            {"default_stop_words", c.annotation.default_stop_words}}},
          {"ranking", std::move(ranking)},
          {"graph", {{"reduction", c.graph.reduction}}},
          {"detect", to_json(c.detect)},
          {"presentation",
           {{"vectors", path_json(c.presentation.vectors)},
            {"threshold", c.presentation.threshold},
            {"linkage", to_string(c.presentation.linkage)},
            {"tau", c.presentation.tau},
            {"share_mode", to_string(c.presentation.share_mode)}}},
          {"serve",
           {{"host", c.serve.host}, {"port", c.serve.port}, {"static_dir", path_json(c.serve.static_dir)}}},
          {"threads", c.threads}};
}

Config load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read config " + path.string());
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError("config " + path.string() + " is not valid JSON");
  return config_from_json(j, path.parent_path());
}

Config project_config(const fs::path& root) {
  const auto path = root / "config.json";
  if (fs::exists(path)) return load_config(path);
  return {};
}

}  // namespace termweave
