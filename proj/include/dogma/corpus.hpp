#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dogma::corpus {

struct Post {
  std::string id;
  std::string author;
  std::string subreddit;
  std::int64_t created_at = 0;
  std::optional<std::string> parent_id;  // empty for top-level posts
  std::string body;
};

struct AnnotationRecord {
  std::string id;
  std::array<int, 3> ratings{};  // each in [1, 5]
  int aggregate = 0;             // sum of the three, in [3, 15]
};

struct AnnotatedComment {
  Post post;
  std::array<int, 3> ratings{};
  int aggregate = 0;
};

enum class OnBadLine { Abort, Skip };

struct LineIssue {
  std::size_t line_no = 0;
  std::string message;
};

struct ParseOptions {
  OnBadLine policy = OnBadLine::Abort;
  bool allow_empty_body = false;
};

// One post per line as a JSON object. Required keys: id, author,
// subreddit, created_at, parent_id (string or null), body. Unknown keys
// are ignored so enriched files stay loadable.
Post parse_post_line(std::string_view line, bool allow_empty_body = false);
std::string serialize_post(const Post& post);  // one line, no trailing newline

// Same parse, also surfacing the optional "p_dogmatic" key that scored
// corpora carry. Plain loaders ignore it; scored loaders require it.
struct ParsedPostLine {
  Post post;
  std::optional<double> p_dogmatic;
};
ParsedPostLine parse_post_line_ex(std::string_view line, bool allow_empty_body = false);

// Streams posts in file order without materializing the corpus.
class PostReader {
 public:
  explicit PostReader(const std::filesystem::path& path, ParseOptions options = {});
  std::optional<Post> next();  // nullopt at end of file
  const std::vector<LineIssue>& issues() const { return issues_; }
  std::size_t line_no() const { return line_no_; }

 private:
  std::ifstream in_;
  std::string path_;
  ParseOptions options_;
  std::vector<LineIssue> issues_;
  std::size_t line_no_ = 0;
  std::string buf_;
};

// Materializing loader. Also enforces id uniqueness, which the
// streaming reader cannot do without holding every id in memory.
std::vector<Post> load_posts(const std::filesystem::path& path, ParseOptions options = {},
                             std::vector<LineIssue>* issues = nullptr);

// One annotation per line: {"id": ..., "ratings": [r1, r2, r3]}.
std::vector<AnnotationRecord> load_ratings(const std::filesystem::path& path);

// Joins ratings to their posts by id. Every annotation id must resolve.
std::vector<AnnotatedComment> join_annotations(const std::vector<AnnotationRecord>& ratings,
                                               const std::vector<Post>& posts);
std::vector<AnnotatedComment> load_annotations(const std::filesystem::path& path,
                                               const std::vector<Post>& posts);

// Body length in Unicode scalar values, bounds inclusive.
bool body_length_between(const Post& post, std::size_t min_chars, std::size_t max_chars);
std::vector<Post> filter_length(const std::vector<Post>& posts, std::size_t min_chars,
                                std::size_t max_chars);

// Seeded reservoir sample, returned sorted by id. Asking for at least
// the corpus size returns every post (still sorted by id).
std::vector<Post> sample_posts(const std::vector<Post>& posts, std::size_t n, std::uint64_t seed);
std::vector<Post> sample_posts(PostReader& reader, std::size_t n, std::uint64_t seed);

struct QuartileCuts {
  int lower_cut = 0;  // largest value v with count(aggregate <= v) <= ceil(N/4)
  int upper_cut = 0;  // smallest value v with count(aggregate >= v) <= ceil(N/4)
};

QuartileCuts quartile_cuts(const std::vector<int>& aggregates);

struct LabeledSplit {
  std::vector<AnnotatedComment> dogmatic;     // aggregate >= upper_cut
  std::vector<AnnotatedComment> nondogmatic;  // aggregate <= lower_cut
  QuartileCuts cuts;
};

// Quartile split on annotation aggregates; middle half is dropped.
// Degenerate distributions that would leave a class empty are an error;
// split_by_cuts is the manual escape hatch.
LabeledSplit quartile_split(const std::vector<AnnotatedComment>& annotated);
LabeledSplit split_by_cuts(const std::vector<AnnotatedComment>& annotated, QuartileCuts cuts);

}  // namespace dogma::corpus
