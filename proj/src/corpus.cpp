#include "dogma/corpus.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "dogma/error.hpp"
#include "dogma/rng.hpp"
#include "dogma/unicode.hpp"

namespace dogma::corpus {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void bad_line(const std::string& message) {
  throw InputError(message);
}

std::string at_line(const std::string& path, std::size_t line_no, const std::string& message) {
  return path + ":" + std::to_string(line_no) + ": " + message;
}

}  // namespace

ParsedPostLine parse_post_line_ex(std::string_view line, bool allow_empty_body) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    bad_line(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) bad_line("post record is not a JSON object");

  Post p;
  auto need = [&](const char* key) -> const json& {
    auto it = j.find(key);
    if (it == j.end()) bad_line(std::string("missing key '") + key + "'");
    return *it;
  };

  const json& id = need("id");
  if (!id.is_string()) bad_line("'id' must be a string");
  p.id = id.get<std::string>();
  if (p.id.empty()) bad_line("'id' must be nonempty");

  const json& author = need("author");
  if (!author.is_string()) bad_line("'author' must be a string");
  p.author = author.get<std::string>();

  const json& subreddit = need("subreddit");
  if (!subreddit.is_string()) bad_line("'subreddit' must be a string");
  p.subreddit = subreddit.get<std::string>();

  const json& created = need("created_at");
  if (!created.is_number_integer()) bad_line("'created_at' must be an integer");
  p.created_at = created.get<std::int64_t>();

  const json& parent = need("parent_id");
  if (parent.is_null()) {
    p.parent_id.reset();
  } else if (parent.is_string()) {
    p.parent_id = parent.get<std::string>();
    if (*p.parent_id == p.id) bad_line("'parent_id' equals 'id'");
  } else {
    bad_line("'parent_id' must be a string or null");
  }

  const json& body = need("body");
  if (!body.is_string()) bad_line("'body' must be a string");
  p.body = body.get<std::string>();
  if (p.body.empty() && !allow_empty_body) bad_line("'body' is empty");

  ParsedPostLine out;
  out.post = std::move(p);
  auto score_it = j.find("p_dogmatic");
  if (score_it != j.end()) {
    if (!score_it->is_number()) bad_line("'p_dogmatic' must be a number");
    double v = score_it->get<double>();
    if (!(v >= 0.0 && v <= 1.0)) bad_line("'p_dogmatic' outside [0, 1]");
    out.p_dogmatic = v;
  }
  return out;
}

Post parse_post_line(std::string_view line, bool allow_empty_body) {
  return parse_post_line_ex(line, allow_empty_body).post;
}

std::string serialize_post(const Post& post) {
  ordered_json j;
  j["id"] = post.id;
  j["author"] = post.author;
  j["subreddit"] = post.subreddit;
  j["created_at"] = post.created_at;
  if (post.parent_id) {
    j["parent_id"] = *post.parent_id;
  } else {
    j["parent_id"] = nullptr;
  }
  j["body"] = post.body;
  return j.dump();
}

PostReader::PostReader(const std::filesystem::path& path, ParseOptions options)
    : in_(path), path_(path.string()), options_(options) {
  if (!in_) throw InputError("cannot open posts file: " + path_);
}

std::optional<Post> PostReader::next() {
  while (std::getline(in_, buf_)) {
    ++line_no_;
    if (!buf_.empty() && buf_.back() == '\r') buf_.pop_back();
    if (buf_.empty()) continue;  // tolerate blank separator lines
    try {
      return parse_post_line(buf_, options_.allow_empty_body);
    } catch (const InputError& e) {
      if (options_.policy == OnBadLine::Abort) {
        throw InputError(at_line(path_, line_no_, e.what()));
      }
      issues_.push_back({line_no_, e.what()});
    }
  }
  return std::nullopt;
}

std::vector<Post> load_posts(const std::filesystem::path& path, ParseOptions options,
                             std::vector<LineIssue>* issues) {
  PostReader reader(path, options);
  std::vector<Post> posts;
  std::unordered_set<std::string> seen;
  std::vector<LineIssue> duplicate_issues;
  while (auto p = reader.next()) {
    if (!seen.insert(p->id).second) {
      std::string msg = "duplicate post id '" + p->id + "'";
      if (options.policy == OnBadLine::Abort) {
        throw InputError(at_line(path.string(), reader.line_no(), msg));
      }
      duplicate_issues.push_back({reader.line_no(), msg});
      continue;
    }
    posts.push_back(std::move(*p));
  }
  if (issues) {
    *issues = reader.issues();
    issues->insert(issues->end(), duplicate_issues.begin(), duplicate_issues.end());
    std::sort(issues->begin(), issues->end(),
              [](const LineIssue& a, const LineIssue& b) { return a.line_no < b.line_no; });
  }
  return posts;
}

std::vector<AnnotationRecord> load_ratings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open annotations file: " + path.string());
  std::vector<AnnotationRecord> out;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw InputError(at_line(path.string(), line_no, std::string("invalid JSON: ") + e.what()));
    }
    auto fail = [&](const std::string& msg) -> void {
      throw InputError(at_line(path.string(), line_no, msg));
    };
    if (!j.is_object()) fail("annotation record is not a JSON object");
    auto id_it = j.find("id");
    if (id_it == j.end() || !id_it->is_string()) fail("missing or non-string 'id'");
    auto r_it = j.find("ratings");
    if (r_it == j.end() || !r_it->is_array()) fail("missing or non-array 'ratings'");
    if (r_it->size() != 3) fail("'ratings' must have exactly 3 entries");
    AnnotationRecord rec;
    rec.id = id_it->get<std::string>();
    if (rec.id.empty()) fail("'id' must be nonempty");
    if (!seen.insert(rec.id).second) fail("duplicate annotation id '" + rec.id + "'");
    for (std::size_t k = 0; k < 3; ++k) {
      const json& r = (*r_it)[k];
      if (!r.is_number_integer()) fail("ratings must be integers");
      int v = r.get<int>();
      if (v < 1 || v > 5) fail("rating out of range [1, 5]: " + std::to_string(v));
      rec.ratings[k] = v;
    }
    rec.aggregate = rec.ratings[0] + rec.ratings[1] + rec.ratings[2];
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<AnnotatedComment> join_annotations(const std::vector<AnnotationRecord>& ratings,
                                               const std::vector<Post>& posts) {
  std::unordered_map<std::string_view, const Post*> by_id;
  by_id.reserve(posts.size());
  for (const Post& p : posts) by_id.emplace(p.id, &p);
  std::vector<AnnotatedComment> out;
  out.reserve(ratings.size());
  for (const AnnotationRecord& r : ratings) {
    auto it = by_id.find(r.id);
    if (it == by_id.end()) {
      throw InputError("annotation id '" + r.id + "' not found in corpus");
    }
    out.push_back({*it->second, r.ratings, r.aggregate});
  }
  return out;
}

std::vector<AnnotatedComment> load_annotations(const std::filesystem::path& path,
                                               const std::vector<Post>& posts) {
  return join_annotations(load_ratings(path), posts);
}

bool body_length_between(const Post& post, std::size_t min_chars, std::size_t max_chars) {
  std::size_t n = unicode::scalar_count(post.body);
  return n >= min_chars && n <= max_chars;
}

std::vector<Post> filter_length(const std::vector<Post>& posts, std::size_t min_chars,
                                std::size_t max_chars) {
  if (min_chars > max_chars) throw Error("length filter: min_chars exceeds max_chars");
  std::vector<Post> out;
  for (const Post& p : posts) {
    if (body_length_between(p, min_chars, max_chars)) out.push_back(p);
  }
  return out;
}

namespace {

// Algorithm R over an arbitrary pull source.
template <class Next>
std::vector<Post> reservoir(Next&& next, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Post> sample;
  sample.reserve(n);
  std::size_t seen = 0;
  while (auto p = next()) {
    ++seen;
    if (sample.size() < n) {
      sample.push_back(std::move(*p));
    } else if (n > 0) {
      std::uint64_t j = rng.below(seen);
      if (j < n) sample[static_cast<std::size_t>(j)] = std::move(*p);
    }
  }
  std::sort(sample.begin(), sample.end(),
            [](const Post& a, const Post& b) { return a.id < b.id; });
  return sample;
}

}  // namespace

std::vector<Post> sample_posts(const std::vector<Post>& posts, std::size_t n, std::uint64_t seed) {
  std::size_t i = 0;
  auto next = [&]() -> std::optional<Post> {
    if (i >= posts.size()) return std::nullopt;
    return posts[i++];
  };
  return reservoir(next, n, seed);
}

std::vector<Post> sample_posts(PostReader& reader, std::size_t n, std::uint64_t seed) {
  return reservoir([&reader] { return reader.next(); }, n, seed);
}

QuartileCuts quartile_cuts(const std::vector<int>& aggregates) {
  if (aggregates.empty()) throw Error("quartile cuts: no aggregates");
  std::map<int, std::size_t> counts;
  for (int a : aggregates) ++counts[a];
  std::size_t n = aggregates.size();
  std::size_t quarter = (n + 3) / 4;  // ceil(N/4)

  int lo = counts.begin()->first;
  int hi = counts.rbegin()->first;

  QuartileCuts cuts;
  cuts.lower_cut = lo - 1;
  std::size_t below = 0;
  for (int v = lo; v <= hi; ++v) {
    auto it = counts.find(v);
    if (it != counts.end()) below += it->second;
    if (below <= quarter) cuts.lower_cut = v;
  }
  cuts.upper_cut = hi + 1;
  std::size_t above = 0;
  for (int v = hi; v >= lo; --v) {
    auto it = counts.find(v);
    if (it != counts.end()) above += it->second;
    if (above <= quarter) cuts.upper_cut = v;
  }
  return cuts;
}

LabeledSplit split_by_cuts(const std::vector<AnnotatedComment>& annotated, QuartileCuts cuts) {
  if (cuts.lower_cut >= cuts.upper_cut) {
    throw Error("quartile split: lower cut " + std::to_string(cuts.lower_cut) +
                " must be below upper cut " + std::to_string(cuts.upper_cut));
  }
  LabeledSplit split;
  split.cuts = cuts;
  for (const AnnotatedComment& a : annotated) {
    if (a.aggregate >= cuts.upper_cut) {
      split.dogmatic.push_back(a);
    } else if (a.aggregate <= cuts.lower_cut) {
      split.nondogmatic.push_back(a);
    }
  }
  if (split.dogmatic.empty() || split.nondogmatic.empty()) {
    throw Error("quartile split: degenerate aggregate distribution leaves the " +
                std::string(split.dogmatic.empty() ? "dogmatic" : "nondogmatic") +
                " class empty (cuts " + std::to_string(cuts.lower_cut) + "/" +
                std::to_string(cuts.upper_cut) + "); pass explicit cuts instead");
  }
  return split;
}

LabeledSplit quartile_split(const std::vector<AnnotatedComment>& annotated) {
  if (annotated.size() < 4)
    throw Error("quartile split: needs at least 4 annotated comments, got " +
                std::to_string(annotated.size()));
  std::vector<int> aggregates;
  aggregates.reserve(annotated.size());
  for (const AnnotatedComment& a : annotated) aggregates.push_back(a.aggregate);
  return split_by_cuts(annotated, quartile_cuts(aggregates));
}

}  // namespace dogma::corpus
