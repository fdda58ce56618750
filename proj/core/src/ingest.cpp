#include "termweave/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <istream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "termweave/error.hpp"
#include "termweave/text.hpp"

namespace termweave {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(PosTag tag) {
  switch (tag) {
    case PosTag::Noun:
      return "NOUN";
    case PosTag::Propn:
      return "PROPN";
    case PosTag::Adj:
      return "ADJ";
    case PosTag::Other:
      break;
  }
  return "OTHER";
}

PosTag parse_pos_tag(std::string_view tag) {
  if (tag == "NOUN") return PosTag::Noun;
  if (tag == "PROPN") return PosTag::Propn;
  if (tag == "ADJ") return PosTag::Adj;
  return PosTag::Other;
}

bool is_content_tag(PosTag tag) { return tag != PosTag::Other; }

CorpusFormat parse_corpus_format(std::string_view name) {
  if (name == "jsonl") return CorpusFormat::Jsonl;
  if (name == "txt-dir") return CorpusFormat::TxtDir;
  throw DataError("unknown corpus format '" + std::string(name) + "' (expected jsonl or txt-dir)");
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

void check_unique_ids(const std::vector<RawDocument>& docs) {
  std::unordered_set<std::string> seen;
  for (const auto& d : docs) {
    if (!seen.insert(d.doc_id).second) throw DataError("duplicate doc_id '" + d.doc_id + "'");
  }
}

std::optional<std::string> optional_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw DataError(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

std::vector<RawDocument> load_txt_dir(const fs::path& root) {
  if (!fs::is_directory(root)) throw DataError(root.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<RawDocument> docs;
  docs.reserve(files.size());
  for (const auto& file : files) {
    auto rel = fs::relative(file, root);
    RawDocument doc;
    doc.doc_id = (rel.parent_path() / rel.stem()).generic_string();
    if (rel.has_parent_path() && !rel.parent_path().empty()) {
      doc.class_label = rel.parent_path().filename().string();
    }
    doc.body = read_file(file);
    if (blank(doc.body)) throw DataError("document '" + doc.doc_id + "' has an empty body");
    docs.push_back(std::move(doc));
  }
  return docs;
}

}  // namespace

std::vector<RawDocument> parse_corpus_jsonl(std::istream& in) {
  std::vector<RawDocument> docs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError("line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!rec.is_object() || !rec.contains("id") || !rec.contains("text")) {
      throw DataError("line " + std::to_string(lineno) + ": record needs 'id' and 'text'");
    }
    RawDocument doc;
    if (rec["id"].is_string()) {
      doc.doc_id = rec["id"].get<std::string>();
    } else if (rec["id"].is_number_integer()) {
      doc.doc_id = std::to_string(rec["id"].get<long long>());
    } else {
      throw DataError("line " + std::to_string(lineno) + ": 'id' must be a string");
    }
    if (!rec["text"].is_string()) throw DataError("line " + std::to_string(lineno) + ": 'text' must be a string");
    doc.body = rec["text"].get<std::string>();
    if (blank(doc.body)) throw DataError("document '" + doc.doc_id + "' has an empty body");
    doc.title = optional_string(rec, "title");
    doc.class_label = optional_string(rec, "class");
    docs.push_back(std::move(doc));
  }
  check_unique_ids(docs);
  if (docs.empty()) throw DataError("corpus is empty");
  return docs;
}

std::vector<RawDocument> load_corpus(const fs::path& source, CorpusFormat format) {
  if (!fs::exists(source)) throw DataError("corpus source " + source.string() + " does not exist");
  if (format == CorpusFormat::Jsonl) {
    std::ifstream in(source);
    if (!in) throw DataError("cannot read " + source.string());
    return parse_corpus_jsonl(in);
  }
  auto docs = load_txt_dir(source);
  check_unique_ids(docs);
  if (docs.empty()) throw DataError("corpus is empty");
  return docs;
}

// --- annotation configuration -------------------------------------------------

void AnnotationConfig::add_stop_words(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::string entry = line;
    while (!entry.empty() && (entry.back() == '\r' || entry.back() == ' ' || entry.back() == '\t')) entry.pop_back();
    stop_words.insert(text::to_lower(entry));
  }
}

void AnnotationConfig::add_lexicon(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, '\t')) cols.push_back(col);
    if (cols.size() < 2 || cols[0].empty() || cols[1].empty()) {
      throw DataError("lexicon line " + std::to_string(lineno) + ": expected surface<TAB>lemma<TAB>pos");
    }
    LexiconEntry entry{cols[1], cols.size() >= 3 ? parse_pos_tag(cols[2]) : PosTag::Noun};
    lexicon[cols[0]] = std::move(entry);
  }
}

void AnnotationConfig::add_gazetteer(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    PosTag pos = PosTag::Propn;
    if (auto tab = line.find('\t'); tab != std::string::npos) {
      pos = parse_pos_tag(line.substr(tab + 1));
      line.resize(tab);
    }
    auto words = text::split_words(line);
    if (words.size() < 2 || words.size() > 4) {
      throw DataError("gazetteer line " + std::to_string(lineno) + ": entities must have 2 to 4 words");
    }
    GazetteerEntry entry;
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i) entry.token += '_';
      entry.token += words[i];
      entry.words.push_back(text::to_lower(words[i]));
    }
    entry.pos = pos;
    gazetteer.push_back(std::move(entry));
  }
  // longest first; stable so earlier lines win among equal lengths
  std::stable_sort(gazetteer.begin(), gazetteer.end(),
                   [](const GazetteerEntry& a, const GazetteerEntry& b) { return a.words.size() > b.words.size(); });
}

const LexiconEntry* AnnotationConfig::lookup(std::string_view surface) const {
  if (auto it = lexicon.find(std::string(surface)); it != lexicon.end()) return &it->second;
  if (auto it = lexicon.find(text::to_lower(surface)); it != lexicon.end()) return &it->second;
  return nullptr;
}

const std::vector<std::string>& default_stop_words() {
  static const std::vector<std::string> words = {
      "a", "about", "above", "after", "again", "against", "all", "also", "am", "an", "and", "any",
      "are", "as", "at", "be", "because", "been", "before", "being", "below", "between", "both",
      "but", "by", "can", "could", "did", "do", "does", "doing", "down", "during", "each", "few",
      "for", "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers",
      "herself", "him", "himself", "his", "how", "however", "i", "if", "in", "into", "is", "it",
      "its", "itself", "just", "may", "me", "might", "more", "most", "mr", "mrs", "ms", "much",
      "must", "my", "myself", "no", "nor", "not", "now", "of", "off", "on", "once", "only", "or",
      "other", "our", "ours", "ourselves", "out", "over", "own", "same", "said", "say", "says",
      "she", "should", "so", "some", "such", "than", "that", "the", "their", "theirs", "them",
      "themselves", "then", "there", "these", "they", "this", "those", "through", "to", "too",
      "under", "until", "up", "very", "was", "we", "were", "what", "when", "where", "which",
      "while", "who", "whom", "why", "will", "with", "would", "yet", "you", "your", "yours",
      "yourself", "yourselves"};
  return words;
}

AnnotationConfig load_annotation_config(const std::optional<fs::path>& stop_words,
                                        const std::optional<fs::path>& lexicon,
                                        const std::optional<fs::path>& gazetteer,
                                        bool use_default_stop_words) {
  AnnotationConfig config;
  if (use_default_stop_words) {
    for (const auto& w : default_stop_words()) config.stop_words.insert(w);
  }
  auto open = [](const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw DataError("cannot read " + p.string());
    return in;
  };
  if (stop_words) {
    auto in = open(*stop_words);
    config.add_stop_words(in);
  }
  if (lexicon) {
    auto in = open(*lexicon);
    config.add_lexicon(in);
  }
  if (gazetteer) {
    auto in = open(*gazetteer);
    config.add_gazetteer(in);
  }
  return config;
}

// --- filters -------------------------------------------------------------------

bool is_stop_word(const AnnotatedToken& token, const AnnotationConfig& config) {
  if (config.stop_words.empty()) return false;
  return config.stop_words.count(text::to_lower(token.lemma)) > 0 ||
         config.stop_words.count(text::to_lower(token.surface)) > 0;
}

bool is_too_short(std::string_view lemma) { return text::code_point_count(lemma) <= 2; }

bool is_digit_dominated(std::string_view lemma) {
  const auto cps = text::decode_utf8(lemma);
  const auto digits = std::count_if(cps.begin(), cps.end(), text::is_digit);
  return static_cast<std::size_t>(digits) * 2 > cps.size();
}

bool is_non_letter_dominated(std::string_view lemma) {
  const auto cps = text::decode_utf8(lemma);
  const auto letters = std::count_if(cps.begin(), cps.end(), text::is_letter);
  return static_cast<std::size_t>(letters) * 2 < cps.size();
}

bool passes_filters(const AnnotatedToken& token, const AnnotationConfig& config) {
  return !token.lemma.empty() && is_content_tag(token.pos) && !is_too_short(token.lemma) &&
         !is_digit_dominated(token.lemma) && !is_non_letter_dominated(token.lemma) &&
         !is_stop_word(token, config);
}

AnnotatedDocument finalize_document(std::string doc_id, std::optional<std::string> title,
                                    std::optional<std::string> class_label,
                                    std::vector<AnnotatedToken> tokens,
                                    const AnnotationConfig& config) {
  AnnotatedDocument doc;
  doc.doc_id = std::move(doc_id);
  doc.title = std::move(title);
  doc.class_label = std::move(class_label);
  std::unordered_map<std::string, std::size_t> seen;
  for (auto& token : tokens) {
    if (!passes_filters(token, config)) continue;
    token.position = static_cast<std::uint32_t>(doc.tokens.size());
    if (seen.emplace(token.lemma, doc.unique_terms.size()).second) {
      doc.unique_terms.push_back({token.lemma, token.position});
    }
    doc.tokens.push_back(std::move(token));
  }
  return doc;
}

AnnotatedDocument annotate(const RawDocument& doc, const AnnotationConfig& config) {
  std::vector<std::string> words;
  if (doc.title) words = text::split_words(*doc.title);
  for (auto& w : text::split_words(doc.body)) words.push_back(std::move(w));

  std::vector<std::string> lowered;
  lowered.reserve(words.size());
  for (const auto& w : words) lowered.push_back(text::to_lower(w));

  std::vector<AnnotatedToken> tokens;
  tokens.reserve(words.size());
  std::size_t i = 0;
  while (i < words.size()) {
    const GazetteerEntry* match = nullptr;
    for (const auto& entry : config.gazetteer) {
      const auto n = entry.words.size();
      if (i + n > words.size()) continue;
      if (std::equal(entry.words.begin(), entry.words.end(), lowered.begin() + static_cast<std::ptrdiff_t>(i))) {
        match = &entry;
        break;
      }
    }
    AnnotatedToken token;
    if (match) {
      for (std::size_t k = 0; k < match->words.size(); ++k) {
        if (k) token.surface += '_';
        token.surface += words[i + k];
      }
      token.lemma = match->token;
      token.pos = match->pos;
      token.entity_join = true;
      if (const auto* lex = config.lookup(token.surface)) {
        token.lemma = lex->lemma;
        token.pos = lex->pos;
      }
      i += match->words.size();
    } else {
      token.surface = words[i];
      if (const auto* lex = config.lookup(words[i])) {
        token.lemma = lex->lemma;
        token.pos = lex->pos;
      } else {
        token.lemma = lowered[i];
        token.pos = PosTag::Noun;
      }
      ++i;
    }
    tokens.push_back(std::move(token));
  }
  return finalize_document(doc.doc_id, doc.title, doc.class_label, std::move(tokens), config);
}

std::vector<AnnotatedDocument> parse_preannotated(std::istream& in, const AnnotationConfig& config) {
  std::vector<AnnotatedDocument> docs;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    const std::string where = "line " + std::to_string(lineno);
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(where + ": " + e.what());
    }
    if (!rec.is_object() || !rec.contains("id") || !rec["id"].is_string() || !rec.contains("tokens") ||
        !rec["tokens"].is_array()) {
      throw DataError(where + ": record needs string 'id' and array 'tokens'");
    }
    std::string id = rec["id"].get<std::string>();
    if (!ids.insert(id).second) throw DataError("duplicate doc_id '" + id + "'");
    std::vector<AnnotatedToken> tokens;
    long long last_position = -1;
    for (const auto& t : rec["tokens"]) {
      if (!t.is_object() || !t.contains("lemma") || !t["lemma"].is_string() || !t.contains("pos") ||
          !t["pos"].is_string()) {
        throw DataError(where + ": token needs string 'lemma' and 'pos'");
      }
      AnnotatedToken token;
      token.lemma = t["lemma"].get<std::string>();
      token.surface = t.contains("surface") && t["surface"].is_string() ? t["surface"].get<std::string>() : token.lemma;
      token.pos = parse_pos_tag(t["pos"].get<std::string>());
      token.entity_join = t.value("entity", false);
      long long position = last_position + 1;
      if (t.contains("position")) {
        if (!t["position"].is_number_integer()) throw DataError(where + ": 'position' must be an integer");
        position = t["position"].get<long long>();
      }
      if (position <= last_position) {
        throw DataError(where + ": token positions are not strictly increasing (" + std::to_string(last_position) +
                        " then " + std::to_string(position) + ")");
      }
      last_position = position;
      tokens.push_back(std::move(token));
    }
    docs.push_back(finalize_document(std::move(id), optional_string(rec, "title"), optional_string(rec, "class"),
                                     std::move(tokens), config));
  }
  if (docs.empty()) throw DataError("pre-annotated stream is empty");
  return docs;
}

std::vector<AnnotatedDocument> ingest_preannotated(const fs::path& stream, const AnnotationConfig& config) {
  std::ifstream in(stream);
  if (!in) throw DataError("cannot read " + stream.string());
  return parse_preannotated(in, config);
}

std::vector<AnnotatedDocument> annotate_all(std::span<const RawDocument> docs, const AnnotationConfig& config,
                                            unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<AnnotatedDocument> out(docs.size());
  if (threads == 1 || docs.size() < 64) {
    for (std::size_t i = 0; i < docs.size(); ++i) out[i] = annotate(docs[i], config);
    return out;
  }
  std::vector<std::future<void>> workers;
  const std::size_t chunk = (docs.size() + threads - 1) / threads;
  for (std::size_t begin = 0; begin < docs.size(); begin += chunk) {
    const std::size_t end = std::min(docs.size(), begin + chunk);
    workers.push_back(std::async(std::launch::async, [&, begin, end] {
      for (std::size_t i = begin; i < end; ++i) out[i] = annotate(docs[i], config);
    }));
  }
  for (auto& w : workers) w.get();
  return out;
}

// --- vocabulary ------------------------------------------------------------------

TermId Vocabulary::intern(std::string_view term) {
  std::string key(term);
  if (auto it = ids_.find(key); it != ids_.end()) return it->second;
  const auto id = static_cast<TermId>(terms_.size());
  ids_.emplace(key, id);
  terms_.push_back(std::move(key));
  df_.push_back(0);
  return id;
}

std::optional<TermId> Vocabulary::find(std::string_view term) const {
  if (auto it = ids_.find(std::string(term)); it != ids_.end()) return it->second;
  return std::nullopt;
}

TermId Vocabulary::id(std::string_view term) const {
  if (auto found = find(term)) return *found;
  throw NotFoundError("unknown term '" + std::string(term) + "'");
}

void Vocabulary::count_document(std::span<const TermId> unique_terms) {
  for (TermId t : unique_terms) ++df_.at(t);
}

std::optional<std::size_t> Corpus::find_document(std::string_view doc_id) const {
  for (std::size_t i = 0; i < documents.size(); ++i) {
    if (documents[i].doc_id == doc_id) return i;
  }
  return std::nullopt;
}

Corpus index_corpus(std::span<const AnnotatedDocument> docs) {
  Corpus corpus;
  corpus.documents.reserve(docs.size());
  for (const auto& doc : docs) {
    IndexedDocument indexed;
    indexed.doc_id = doc.doc_id;
    indexed.title = doc.title;
    indexed.class_label = doc.class_label;
    indexed.sequence.reserve(doc.tokens.size());
    for (const auto& token : doc.tokens) indexed.sequence.push_back(corpus.vocabulary.intern(token.lemma));
    for (const auto& u : doc.unique_terms) {
      indexed.unique_terms.push_back(corpus.vocabulary.id(u.lemma));
      indexed.first_position.push_back(u.first_position);
    }
    corpus.vocabulary.count_document(indexed.unique_terms);
    corpus.documents.push_back(std::move(indexed));
  }
  return corpus;
}

}  // namespace termweave
