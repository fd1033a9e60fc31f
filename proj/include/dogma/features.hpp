#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dogma/lexicon.hpp"

namespace dogma::features {

enum class Family { BOW, SENT, LING, BOW_SENT, BOW_LING };

std::string_view family_name(Family family);
std::optional<Family> family_from_name(std::string_view name);
bool family_uses_bow(Family family);
bool family_uses_lexicon(Family family);

// Lexicon categories backing the LING feature block, in fixed order.
// Feature index within the block is the position here, so trained
// weights stay meaningful across lexicon files that reorder lines.
inline constexpr std::array<std::string_view, 18> kLingCategories = {
    "certainty",     "tentativeness", "insight",        "perception", "relativity",
    "comparison",    "i",             "you",            "we",         "they",
    "past",          "present",       "future",         "interrogatory", "negation",
    "negative_emotion", "positive_emotion", "swear"};

// Sentiment block: positive then negative emotion proportions.
inline constexpr std::array<std::string_view, 2> kSentCategories = {"positive_emotion",
                                                                    "negative_emotion"};

// Identifies the exact TF-IDF weighting so a model file can refuse to
// load under a different scheme: tf * (ln((1+D)/(1+df)) + 1), then the
// document vector is L2-normalized.
inline constexpr std::string_view kTfidfVariantId = "tfidf-smooth-ln-l2";

struct Vocabulary {
  std::vector<std::string> terms;                   // sorted lexicographically
  std::vector<std::uint32_t> document_frequency;    // aligned with terms
  std::uint64_t document_total = 0;                 // D in the idf formula

  // Binary search over the sorted terms; no side index to keep in sync.
  std::optional<std::uint32_t> index_of(std::string_view term) const;
};

// Terms appearing in at least min_df documents, sorted, with document
// frequencies. Sorting makes the index assignment order-independent.
Vocabulary build_vocabulary(std::span<const std::string> docs, std::uint32_t min_df = 2);

struct FeatureVector {
  std::vector<std::pair<std::uint32_t, double>> entries;  // strictly increasing index
  std::uint32_t dimension = 0;
};

FeatureVector tfidf(std::string_view doc, const Vocabulary& vocab);
FeatureVector sent_features(std::string_view doc, const lexicon::Lexicon& lex);
FeatureVector ling_features(std::string_view doc, const lexicon::Lexicon& lex);

// Stacks b after a: indices of b shift up by a.dimension.
FeatureVector concat_features(const FeatureVector& a, const FeatureVector& b);

// A family plus everything needed to realize it; the single extraction
// path used by training, evaluation, and scoring.
class Extractor {
 public:
  Extractor(Family family, const Vocabulary* vocab, const lexicon::Lexicon* lex);

  FeatureVector extract(std::string_view doc) const;
  std::uint32_t dimension() const;
  Family family() const { return family_; }

 private:
  Family family_;
  const Vocabulary* vocab_;
  const lexicon::Lexicon* lex_;
  std::vector<std::uint32_t> category_slots_;  // lexicon index per block position
};

// Resolves the family's category block against a lexicon, raising
// InputError when a required category is missing.
std::vector<std::uint32_t> resolve_categories(Family family, const lexicon::Lexicon& lex);

}  // namespace dogma::features
