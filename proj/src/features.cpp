#include "dogma/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "dogma/error.hpp"

namespace dogma::features {

std::string_view family_name(Family family) {
  switch (family) {
    case Family::BOW: return "BOW";
    case Family::SENT: return "SENT";
    case Family::LING: return "LING";
    case Family::BOW_SENT: return "BOW+SENT";
    case Family::BOW_LING: return "BOW+LING";
  }
  return "?";
}

std::optional<Family> family_from_name(std::string_view name) {
  if (name == "BOW") return Family::BOW;
  if (name == "SENT") return Family::SENT;
  if (name == "LING") return Family::LING;
  if (name == "BOW+SENT") return Family::BOW_SENT;
  if (name == "BOW+LING") return Family::BOW_LING;
  return std::nullopt;
}

bool family_uses_bow(Family family) {
  return family == Family::BOW || family == Family::BOW_SENT || family == Family::BOW_LING;
}

bool family_uses_lexicon(Family family) {
  return family != Family::BOW;
}

std::optional<std::uint32_t> Vocabulary::index_of(std::string_view term) const {
  auto it = std::lower_bound(terms.begin(), terms.end(), term);
  if (it == terms.end() || *it != term) return std::nullopt;
  return static_cast<std::uint32_t>(it - terms.begin());
}

Vocabulary build_vocabulary(std::span<const std::string> docs, std::uint32_t min_df) {
  if (min_df == 0) throw Error("vocabulary: min_df must be at least 1");
  std::map<std::string, std::uint32_t> df;
  std::vector<std::string> tokens;
  std::vector<std::string_view> uniq;
  for (const std::string& doc : docs) {
    lexicon::tokenize_into(doc, tokens);
    uniq.clear();
    uniq.assign(tokens.begin(), tokens.end());
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (std::string_view t : uniq) ++df[std::string(t)];
  }
  Vocabulary vocab;
  vocab.document_total = docs.size();
  for (auto& [term, count] : df) {
    if (count >= min_df) {
      vocab.terms.push_back(term);
      vocab.document_frequency.push_back(count);
    }
  }
  if (vocab.terms.empty())
    throw Error("vocabulary: no term appears in at least " + std::to_string(min_df) +
                " documents");
  return vocab;
}

FeatureVector tfidf(std::string_view doc, const Vocabulary& vocab) {
  std::vector<std::string> tokens = lexicon::tokenize(doc);
  std::map<std::uint32_t, double> tf;
  for (const std::string& tok : tokens) {
    if (auto idx = vocab.index_of(tok)) tf[*idx] += 1.0;
  }
  FeatureVector fv;
  fv.dimension = static_cast<std::uint32_t>(vocab.terms.size());
  fv.entries.reserve(tf.size());
  const double d_total = static_cast<double>(vocab.document_total);
  double norm_sq = 0.0;
  for (const auto& [idx, count] : tf) {
    const double idf =
        std::log((1.0 + d_total) / (1.0 + static_cast<double>(vocab.document_frequency[idx]))) +
        1.0;
    const double w = count * idf;
    fv.entries.emplace_back(idx, w);
    norm_sq += w * w;
  }
  if (norm_sq > 0.0) {
    const double norm = std::sqrt(norm_sq);
    for (auto& [idx, w] : fv.entries) w /= norm;
  }
  return fv;
}

std::vector<std::uint32_t> resolve_categories(Family family, const lexicon::Lexicon& lex) {
  std::span<const std::string_view> wanted;
  if (family == Family::SENT || family == Family::BOW_SENT) {
    wanted = kSentCategories;
  } else if (family == Family::LING || family == Family::BOW_LING) {
    wanted = kLingCategories;
  } else {
    return {};
  }
  std::vector<std::uint32_t> slots;
  slots.reserve(wanted.size());
  for (std::string_view name : wanted) {
    auto idx = lex.category_index(name);
    if (!idx) {
      throw InputError("lexicon is missing category '" + std::string(name) + "' required by " +
                       std::string(family_name(family)) + " features");
    }
    slots.push_back(static_cast<std::uint32_t>(*idx));
  }
  return slots;
}

namespace {

FeatureVector proportions_block(std::string_view doc, const lexicon::Lexicon& lex,
                                std::span<const std::uint32_t> slots) {
  lexicon::CategoryProportions props = lexicon::category_proportions(lex, doc);
  FeatureVector fv;
  fv.dimension = static_cast<std::uint32_t>(slots.size());
  for (std::uint32_t i = 0; i < slots.size(); ++i) {
    const double v = props.proportions[slots[i]];
    if (v != 0.0) fv.entries.emplace_back(i, v);
  }
  return fv;
}

}  // namespace

FeatureVector sent_features(std::string_view doc, const lexicon::Lexicon& lex) {
  return proportions_block(doc, lex, resolve_categories(Family::SENT, lex));
}

FeatureVector ling_features(std::string_view doc, const lexicon::Lexicon& lex) {
  return proportions_block(doc, lex, resolve_categories(Family::LING, lex));
}

FeatureVector concat_features(const FeatureVector& a, const FeatureVector& b) {
  FeatureVector fv;
  fv.dimension = a.dimension + b.dimension;
  fv.entries.reserve(a.entries.size() + b.entries.size());
  fv.entries = a.entries;
  for (const auto& [idx, w] : b.entries) fv.entries.emplace_back(idx + a.dimension, w);
  return fv;
}

Extractor::Extractor(Family family, const Vocabulary* vocab, const lexicon::Lexicon* lex)
    : family_(family), vocab_(vocab), lex_(lex) {
  if (family_uses_bow(family) && vocab == nullptr) {
    throw Error(std::string(family_name(family)) + " features require a vocabulary");
  }
  if (family_uses_lexicon(family)) {
    if (lex == nullptr) {
      throw Error(std::string(family_name(family)) + " features require a lexicon");
    }
    category_slots_ = resolve_categories(family, *lex);
  }
}

std::uint32_t Extractor::dimension() const {
  std::uint32_t dim = 0;
  if (family_uses_bow(family_)) dim += static_cast<std::uint32_t>(vocab_->terms.size());
  dim += static_cast<std::uint32_t>(category_slots_.size());
  return dim;
}

FeatureVector Extractor::extract(std::string_view doc) const {
  FeatureVector bow_part;
  if (family_uses_bow(family_)) bow_part = tfidf(doc, *vocab_);
  if (!family_uses_lexicon(family_)) return bow_part;
  FeatureVector lex_part = proportions_block(doc, *lex_, category_slots_);
  if (!family_uses_bow(family_)) return lex_part;
  return concat_features(bow_part, lex_part);
}

}  // namespace dogma::features
