#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "dogma/corpus.hpp"
#include "dogma/lexicon.hpp"
#include "dogma/model.hpp"
#include "dogma/stats.hpp"

namespace dogma::analysis {

using corpus::Post;

// ---- lexicon odds table ----------------------------------------------

struct OddsRow {
  std::string category;       // lexicon order
  double odds_ratio = 0.0;    // dogmatic vs nondogmatic usage
  double p_raw = 1.0;         // Mann-Whitney on per-document proportions
  double p_adjusted = 1.0;    // Holm across all categories
  bool significant = false;   // p_adjusted < alpha
};

std::vector<OddsRow> odds_table(std::span<const std::string> dogmatic_docs,
                                std::span<const std::string> nondogmatic_docs,
                                const lexicon::Lexicon& lex, double alpha = 0.05);

// ---- scored posts ------------------------------------------------------

struct ScoredPost {
  Post post;
  double p_dogmatic = 0.0;
};

std::string serialize_scored(const ScoredPost& scored);
ScoredPost parse_scored_line(std::string_view line, bool allow_empty_body = false);
std::vector<ScoredPost> load_scored(const std::filesystem::path& path,
                                    corpus::ParseOptions options = {});

// Model plus optional lexicon bound into a body -> probability map.
class Scorer {
 public:
  Scorer(const model::LogisticModel& model, const lexicon::Lexicon* lex);
  double score(std::string_view body) const;
  ScoredPost score_post(const Post& post) const;

 private:
  const model::LogisticModel& model_;
  features::Extractor extractor_;
};

std::vector<ScoredPost> score_corpus(const Scorer& scorer, std::span<const Post> posts);

enum class ScoredFormat { Jsonl, Tsv };

struct StreamOptions {
  std::size_t workers = 1;
  std::size_t chunk_size = 512;  // posts per work unit
  corpus::ParseOptions parse;
  ScoredFormat format = ScoredFormat::Jsonl;
  std::string source_name = "input";  // for error messages
};

struct StreamStats {
  std::uint64_t scored = 0;
  std::uint64_t skipped = 0;
};

// Chunked parallel scoring with ordered output: results are written in
// input order regardless of worker count, so the byte stream is
// identical for any number of workers. Memory stays bounded by
// (workers + queue slack) * chunk_size posts.
StreamStats score_stream(const Scorer& scorer, std::istream& in, std::ostream& out,
                         const StreamOptions& options = {});

// ---- subreddit rankings (analysis 1) -----------------------------------

struct SubredditRank {
  std::string subreddit;
  double mean_score = 0.0;
  std::uint64_t posts = 0;
};

// Accumulator form so corpora never have to fit in memory.
class SubredditAccumulator {
 public:
  void add(const std::string& subreddit, double score);
  // Subreddits with at least min_posts, sorted by mean descending,
  // name ascending on ties.
  std::vector<SubredditRank> finish(std::uint64_t min_posts) const;

 private:
  struct Cell {
    std::uint64_t count = 0;
    double sum = 0.0;
  };
  std::map<std::string, Cell> cells_;
};

std::vector<SubredditRank> subreddit_rankings(std::span<const ScoredPost> scored,
                                              std::uint64_t min_posts);

// ---- co-dogmatism (analysis 2) ------------------------------------------

struct SubredditStats {
  std::uint64_t posts = 0;
  double mean_score = 0.0;
};

struct UserSubredditProfile {
  std::string user;
  std::map<std::string, SubredditStats> per_subreddit;  // qualifying only
  std::set<std::string> dogmatic_subreddits;            // mean strictly above threshold
};

class ProfileAccumulator {
 public:
  void add(const std::string& user, const std::string& subreddit, double score);
  // Users keep subreddits with at least min_posts_per_sub of their
  // posts; of those, the ones whose mean exceeds the threshold are the
  // user's dogmatic set. Users with no qualifying subreddit drop out.
  std::vector<UserSubredditProfile> finish(std::uint64_t min_posts_per_sub,
                                           double dogmatic_threshold) const;

 private:
  struct Cell {
    std::uint64_t count = 0;
    double sum = 0.0;
  };
  std::map<std::string, std::map<std::string, Cell>> by_user_;
};

std::vector<UserSubredditProfile> build_profiles(std::span<const ScoredPost> scored,
                                                 std::uint64_t min_posts_per_sub,
                                                 double dogmatic_threshold);

// Unordered co-dogmatism pairs: every user dogmatic in both X and Y
// adds one count to {X, Y}.
std::map<stats::PairKey, std::int64_t> dogmatic_pair_counts(
    std::span<const UserSubredditProfile> profiles);

struct NeighborEntry {
  std::string neighbor;
  double pmi = 0.0;
  std::int64_t pair_count = 0;
};

// Top-k PMI neighbors per subreddit, PMI descending then name ascending.
std::map<std::string, std::vector<NeighborEntry>> cluster_by_association(
    const std::map<stats::PairKey, std::int64_t>& pair_counts, std::size_t top_k);

enum class EnrichmentPopulation { QualifiedBoth, QualifiedAnchor };

// Binomial test: among users dogmatic in `anchor`, is dogmatism in
// `other` enriched over its base rate in the population?
stats::TestResult enrichment_test(std::span<const UserSubredditProfile> profiles,
                                  const std::string& anchor, const std::string& other,
                                  EnrichmentPopulation population =
                                      EnrichmentPopulation::QualifiedBoth);

// ---- user behavior (analysis 3) -----------------------------------------

struct BehaviorFeatures {
  std::string user;
  double activity = 0.0;    // total posts
  double breadth = 0.0;     // distinct subreddits
  double focus = 0.0;       // share of posts in the user's modal subreddit
  double engagement = 0.0;  // posts per discussion thread entered
};

// Thread identity is the root of the parent chain; posts whose parents
// are missing from the corpus count their deepest known ancestor.
std::vector<BehaviorFeatures> behavior_features(std::span<const Post> posts);

struct UserMeanScore {
  std::string user;
  double mean_score = 0.0;
  std::uint64_t posts = 0;
};

std::vector<UserMeanScore> user_mean_scores(std::span<const ScoredPost> scored);

// OLS of mean user dogmatism on the four z-scored behavior features.
// Columns in order: activity, breadth, focus, engagement.
stats::OlsFit behavior_regression(std::span<const BehaviorFeatures> features,
                                  std::span<const double> mean_scores);
stats::OlsFit behavior_regression(std::span<const ScoredPost> scored);

// ---- conversation triples (analysis 4) -----------------------------------

struct ConversationTriple {
  Post a1;  // original speaker
  Post b;   // interlocutor replying to a1
  Post a2;  // the original speaker again, replying to b
};

// A1 <- B <- A2 reply chains where A1 and A2 share an author distinct
// from B's. Found by a linked scan over parent ids, in corpus order.
std::vector<ConversationTriple> extract_triples(std::span<const Post> posts);

// Drops every token of a2 that appears anywhere in b, preserving the
// order of what survives. Used to stop verbatim quoting of B from
// inflating the contagion estimate.
std::string remove_quoted_words(std::string_view a2_body, std::string_view b_body);

// OLS of score(A2) on score(A1) and score(B). With quote_control, A2 is
// scored on its body stripped of B's words. Columns: a1, b.
stats::OlsFit triple_regression(std::span<const ConversationTriple> triples,
                                const std::function<double(const Post&)>& score,
                                bool quote_control);

}  // namespace dogma::analysis
