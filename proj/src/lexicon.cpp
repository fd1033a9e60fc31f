#include "dogma/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "dogma/error.hpp"
#include "dogma/unicode.hpp"

namespace dogma::lexicon {

void token_spans_into(std::string_view text, std::vector<TokenSpan>& out) {
  out.clear();
  std::size_t token_begin = 0;
  bool in_token = false;
  bool prev_is_letter = false;
  std::size_t i = 0;
  auto flush = [&](std::size_t end) {
    if (in_token) {
      out.push_back({token_begin, end});
      in_token = false;
    }
    prev_is_letter = false;
  };
  while (i < text.size()) {
    std::size_t j = i;
    char32_t cp = unicode::decode(text, j);
    if (unicode::is_word_char(cp)) {
      if (!in_token) {
        token_begin = i;
        in_token = true;
      }
      prev_is_letter = unicode::is_letter(cp);
    } else if (cp == U'\'' && prev_is_letter && j < text.size()) {
      std::size_t k = j;
      char32_t next = unicode::decode(text, k);
      if (unicode::is_letter(next)) {
        prev_is_letter = false;  // apostrophe joins, next letter continues
      } else {
        flush(i);
      }
    } else {
      flush(i);
    }
    i = j;
  }
  flush(text.size());
}

namespace {

void lowercase_append(std::string_view piece, std::string& out) {
  std::size_t i = 0;
  while (i < piece.size()) {
    unicode::append_utf8(out, unicode::to_lower(unicode::decode(piece, i)));
  }
}

}  // namespace

void tokenize_into(std::string_view text, std::vector<std::string>& out) {
  out.clear();
  std::vector<TokenSpan> spans;
  token_spans_into(text, spans);
  out.reserve(spans.size());
  std::string token;
  for (const TokenSpan& s : spans) {
    token.clear();
    lowercase_append(text.substr(s.begin, s.end - s.begin), token);
    out.push_back(token);
  }
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  tokenize_into(text, out);
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool valid_category_name(std::string_view name) {
  if (name.empty()) return false;
  for (char c : name) {
    if (!((c >= 'a' && c <= 'z') || c == '_')) return false;
  }
  return true;
}

std::string lowercased(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  lowercase_append(s, out);
  return out;
}

}  // namespace

Lexicon Lexicon::parse(std::string_view text) {
  Lexicon lex;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  auto fail = [&](const std::string& msg) -> void {
    throw InputError("line " + std::to_string(line_no) + ": " + msg);
  };
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view raw = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos
                                                                          : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    std::size_t colon = line.find(':');
    if (colon == std::string_view::npos) fail("expected 'category: patterns' but found no ':'");
    std::string name(trim(line.substr(0, colon)));
    if (!valid_category_name(name)) {
      fail("invalid category name '" + name + "' (must match [a-z_]+)");
    }
    for (const std::string& existing : lex.names_) {
      if (existing == name) fail("duplicate category '" + name + "'");
    }

    std::vector<Pattern> patterns;
    std::string_view rest = line.substr(colon + 1);
    std::size_t start = 0;
    while (start <= rest.size()) {
      std::size_t comma = rest.find(',', start);
      std::string_view piece =
          rest.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                             : comma - start);
      start = comma == std::string_view::npos ? rest.size() + 1 : comma + 1;
      std::string_view p = trim(piece);
      if (p.empty()) fail("empty pattern in category '" + name + "'");
      Pattern pat;
      pat.wildcard = p.back() == '*';
      if (pat.wildcard) p.remove_suffix(1);
      if (p.empty()) fail("wildcard pattern with empty stem in category '" + name + "'");
      if (p.find('*') != std::string_view::npos) {
        fail("'*' is only allowed at the end of a pattern: '" + std::string(p) + "*'");
      }
      if (p.find(' ') != std::string_view::npos || p.find('\t') != std::string_view::npos) {
        fail("pattern contains whitespace: '" + std::string(p) + "'");
      }
      pat.text = lowercased(p);
      patterns.push_back(std::move(pat));
    }
    if (patterns.empty()) fail("category '" + name + "' has no patterns");
    lex.names_.push_back(std::move(name));
    lex.patterns_.push_back(std::move(patterns));
  }
  if (lex.names_.empty()) throw InputError("lexicon defines no categories");
  lex.index_patterns();
  return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open lexicon file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str());
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::optional<std::size_t> Lexicon::category_index(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  return std::nullopt;
}

void Lexicon::index_patterns() {
  trie_.clear();
  trie_.emplace_back();
  for (std::size_t c = 0; c < patterns_.size(); ++c) {
    for (const Pattern& p : patterns_[c]) {
      if (!p.wildcard) {
        literals_[p.text].push_back(static_cast<std::uint32_t>(c));
        continue;
      }
      std::int32_t node = 0;
      for (char ch : p.text) {
        unsigned char b = static_cast<unsigned char>(ch);
        std::int32_t child = trie_child(node, b);
        if (child < 0) {
          child = static_cast<std::int32_t>(trie_.size());
          auto& edges = trie_[static_cast<std::size_t>(node)].edges;
          edges.insert(std::lower_bound(edges.begin(), edges.end(), b,
                                        [](const auto& e, unsigned char v) { return e.first < v; }),
                       {b, child});
          trie_.emplace_back();
        }
        node = child;
      }
      trie_[static_cast<std::size_t>(node)].categories.push_back(static_cast<std::uint32_t>(c));
    }
  }
  for (auto& [text, cats] : literals_) {
    std::sort(cats.begin(), cats.end());
    cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
  }
  for (TrieNode& node : trie_) {
    std::sort(node.categories.begin(), node.categories.end());
    node.categories.erase(std::unique(node.categories.begin(), node.categories.end()),
                          node.categories.end());
  }
}

std::int32_t Lexicon::trie_child(std::int32_t node, unsigned char byte) const {
  const auto& edges = trie_[static_cast<std::size_t>(node)].edges;
  auto it = std::lower_bound(edges.begin(), edges.end(), byte,
                             [](const auto& e, unsigned char v) { return e.first < v; });
  if (it != edges.end() && it->first == byte) return it->second;
  return -1;
}

void Lexicon::match_token(std::string_view token, std::vector<std::uint32_t>& out) const {
  std::size_t base = out.size();
  auto lit = literals_.find(token);
  if (lit != literals_.end()) {
    out.insert(out.end(), lit->second.begin(), lit->second.end());
  }
  std::int32_t node = 0;
  for (char ch : token) {
    node = trie_child(node, static_cast<unsigned char>(ch));
    if (node < 0) break;
    const auto& cats = trie_[static_cast<std::size_t>(node)].categories;
    out.insert(out.end(), cats.begin(), cats.end());
  }
  std::sort(out.begin() + static_cast<std::ptrdiff_t>(base), out.end());
  out.erase(std::unique(out.begin() + static_cast<std::ptrdiff_t>(base), out.end()), out.end());
}

std::vector<std::string> Lexicon::match_categories(std::string_view token) const {
  std::vector<std::uint32_t> idx;
  match_token(token, idx);
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (std::uint32_t c : idx) out.push_back(names_[c]);
  return out;
}

void category_counts(const Lexicon& lex, const std::vector<std::string>& tokens,
                     std::vector<double>& counts) {
  counts.assign(lex.category_count(), 0.0);
  std::vector<std::uint32_t> matches;
  for (const std::string& tok : tokens) {
    matches.clear();
    lex.match_token(tok, matches);
    for (std::uint32_t c : matches) counts[c] += 1.0;
  }
}

CategoryProportions category_proportions(const Lexicon& lex, std::string_view text) {
  std::vector<std::string> tokens = tokenize(text);
  CategoryProportions result;
  result.token_count = tokens.size();
  category_counts(lex, tokens, result.proportions);
  double denom = static_cast<double>(std::max<std::size_t>(tokens.size(), 1));
  for (double& v : result.proportions) v /= denom;
  return result;
}

}  // namespace dogma::lexicon
