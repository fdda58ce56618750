#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace termweave {

using TermId = std::uint32_t;

enum class PosTag : std::uint8_t { Noun, Propn, Adj, Other };

std::string_view to_string(PosTag tag);
/// Parses "NOUN" | "PROPN" | "ADJ"; any other tag (VERB, DET, ...) maps to Other.
PosTag parse_pos_tag(std::string_view tag);
bool is_content_tag(PosTag tag);

struct RawDocument {
  std::string doc_id;
  std::optional<std::string> title;
  std::string body;
  std::optional<std::string> class_label;
};

struct AnnotatedToken {
  std::string surface;
  std::string lemma;
  PosTag pos = PosTag::Noun;
  std::uint32_t position = 0;
  bool entity_join = false;
};

struct UniqueTerm {
  std::string lemma;
  std::uint32_t first_position = 0;
};

/// A document reduced to the tokens that survive filtering. Positions index
/// the cleaned sequence.
struct AnnotatedDocument {
  std::string doc_id;
  std::optional<std::string> title;
  std::optional<std::string> class_label;
  std::vector<AnnotatedToken> tokens;
  std::vector<UniqueTerm> unique_terms;  // in order of first occurrence
};

enum class CorpusFormat { Jsonl, TxtDir };

CorpusFormat parse_corpus_format(std::string_view name);

/// Loads raw documents. JSONL records are {"id", "title"?, "text", "class"?};
/// a txt-dir is walked recursively, doc ids are relative paths without the
/// extension and the class label is the name of the containing subfolder.
std::vector<RawDocument> load_corpus(const std::filesystem::path& source, CorpusFormat format);
std::vector<RawDocument> parse_corpus_jsonl(std::istream& in);

struct LexiconEntry {
  std::string lemma;
  PosTag pos = PosTag::Noun;
};

struct GazetteerEntry {
  std::vector<std::string> words;  // lowercased
  std::string token;               // words joined with '_' in their listed casing
  PosTag pos = PosTag::Propn;
};

struct AnnotationConfig {
  std::unordered_set<std::string> stop_words;  // lowercase
  std::unordered_map<std::string, LexiconEntry> lexicon;
  std::vector<GazetteerEntry> gazetteer;

  void add_stop_words(std::istream& in);
  /// "surface<TAB>lemma<TAB>pos" per line.
  void add_lexicon(std::istream& in);
  /// One entity of 2-4 words per line, optionally followed by "<TAB>POS".
  void add_gazetteer(std::istream& in);

  const LexiconEntry* lookup(std::string_view surface) const;
};

/// A compact English stop-word list for use when no list file is configured.
const std::vector<std::string>& default_stop_words();

AnnotationConfig load_annotation_config(const std::optional<std::filesystem::path>& stop_words,
                                        const std::optional<std::filesystem::path>& lexicon,
                                        const std::optional<std::filesystem::path>& gazetteer,
                                        bool use_default_stop_words);

// Individual filter predicates, exposed so callers can re-check survivors.
bool is_stop_word(const AnnotatedToken& token, const AnnotationConfig& config);
bool is_too_short(std::string_view lemma);
bool is_digit_dominated(std::string_view lemma);
bool is_non_letter_dominated(std::string_view lemma);
bool passes_filters(const AnnotatedToken& token, const AnnotationConfig& config);

AnnotatedDocument annotate(const RawDocument& doc, const AnnotationConfig& config);

/// Reads token-JSONL: {"id", "class"?, "tokens": [{"lemma", "surface"?, "pos",
/// "position", "entity"?}]}. Positions must be strictly increasing.
std::vector<AnnotatedDocument> ingest_preannotated(const std::filesystem::path& stream,
                                                   const AnnotationConfig& config);
std::vector<AnnotatedDocument> parse_preannotated(std::istream& in, const AnnotationConfig& config);

/// Applies the filters to an already tokenized sequence and renumbers positions.
AnnotatedDocument finalize_document(std::string doc_id, std::optional<std::string> title,
                                    std::optional<std::string> class_label,
                                    std::vector<AnnotatedToken> tokens,
                                    const AnnotationConfig& config);

class Vocabulary {
 public:
  TermId intern(std::string_view term);
  std::optional<TermId> find(std::string_view term) const;
  TermId id(std::string_view term) const;  // throws NotFoundError
  const std::string& term(TermId id) const { return terms_.at(id); }
  std::uint32_t df(TermId id) const { return df_.at(id); }
  std::size_t size() const noexcept { return terms_.size(); }
  const std::vector<std::string>& terms() const noexcept { return terms_; }
  const std::vector<std::uint32_t>& dfs() const noexcept { return df_; }

  void count_document(std::span<const TermId> unique_terms);
  void set_df(TermId id, std::uint32_t value) { df_.at(id) = value; }

 private:
  std::vector<std::string> terms_;
  std::vector<std::uint32_t> df_;
  std::unordered_map<std::string, TermId> ids_;
};

/// A document after interning: the cleaned term sequence plus its unique
/// terms in order of first appearance.
struct IndexedDocument {
  std::string doc_id;
  std::optional<std::string> title;
  std::optional<std::string> class_label;
  std::vector<TermId> sequence;
  std::vector<TermId> unique_terms;
  std::vector<std::uint32_t> first_position;  // parallel to unique_terms
};

struct Corpus {
  Vocabulary vocabulary;
  std::vector<IndexedDocument> documents;

  std::optional<std::size_t> find_document(std::string_view doc_id) const;
};

/// Interns every document in order; ids are assigned by first appearance in
/// (document order, token order), so the result depends only on the input order.
Corpus index_corpus(std::span<const AnnotatedDocument> docs);

/// Annotates documents on a worker pool, preserving input order.
std::vector<AnnotatedDocument> annotate_all(std::span<const RawDocument> docs,
                                            const AnnotationConfig& config,
                                            unsigned threads = 0);

}  // namespace termweave
