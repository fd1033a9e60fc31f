#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dogma::lexicon {

// Lowercased word tokens: maximal runs of letters and digits, plus
// apostrophes with a letter on both sides ("don't" stays one token).
// Lengths and letter classes are computed on Unicode scalar values, not
// bytes, so multi-byte scripts tokenize correctly.
std::vector<std::string> tokenize(std::string_view text);
void tokenize_into(std::string_view text, std::vector<std::string>& out);

// Byte ranges [begin, end) of each token in the original text, before
// lowercasing. The foundation of tokenize and of quote-stripping that
// must preserve the source spelling.
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};
void token_spans_into(std::string_view text, std::vector<TokenSpan>& out);

struct Pattern {
  std::string text;  // lowercased, '*' stripped
  bool wildcard = false;
};

// Word-category lexicon. File format, one category per line:
//
//   category_name: word, word, stem*, ...
//
// '#' starts a comment line, blank lines are skipped, category names
// match [a-z_]+, and a trailing '*' makes a pattern match every token
// with that prefix.
class Lexicon {
 public:
  static Lexicon parse(std::string_view text);
  static Lexicon load(const std::filesystem::path& path);

  std::size_t category_count() const { return names_.size(); }
  const std::vector<std::string>& category_names() const { return names_; }
  const std::vector<Pattern>& patterns(std::size_t category) const {
    return patterns_[category];
  }
  std::optional<std::size_t> category_index(std::string_view name) const;

  // Appends the indices of every category the token belongs to,
  // sorted and without duplicates.
  void match_token(std::string_view token, std::vector<std::uint32_t>& out) const;
  std::vector<std::string> match_categories(std::string_view token) const;

 private:
  Lexicon() = default;
  void index_patterns();

  struct TrieNode {
    std::vector<std::pair<unsigned char, std::int32_t>> edges;  // sorted by byte
    std::vector<std::uint32_t> categories;  // stems ending at this node
  };
  std::int32_t trie_child(std::int32_t node, unsigned char byte) const;

  struct TransparentHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view sv) const {
      return std::hash<std::string_view>{}(sv);
    }
  };

  std::vector<std::string> names_;
  std::vector<std::vector<Pattern>> patterns_;
  std::unordered_map<std::string, std::vector<std::uint32_t>, TransparentHash, std::equal_to<>>
      literals_;
  std::vector<TrieNode> trie_;
};

struct CategoryProportions {
  std::vector<double> proportions;  // aligned with Lexicon::category_names()
  std::size_t token_count = 0;
};

// Per-category share of tokens: matches(category) / max(tokens, 1).
// A token in several categories counts toward each of them.
CategoryProportions category_proportions(const Lexicon& lex, std::string_view text);

// Same computation on a pre-tokenized document, writing raw match counts.
void category_counts(const Lexicon& lex, const std::vector<std::string>& tokens,
                     std::vector<double>& counts);

}  // namespace dogma::lexicon
