#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dogma/analysis.hpp"
#include "dogma/lexicon.hpp"

namespace dogma::synth {

// Planted-signal corpus description. Every knob is recorded in the
// ground-truth file so recovery tests can check estimates against what
// was actually planted.
struct SyntheticSpec {
  std::uint64_t n_docs = 5000;        // posts in the user-behavior section
  std::uint64_t n_users = 200;
  std::uint64_t n_subreddits = 20;
  std::uint64_t n_triples = 0;        // extra A1<-B<-A2 conversations, 3 posts each
  std::uint64_t n_blocks = 1;         // co-dogmatism block structure over subreddits
  double block_affinity = 0.95;       // P(a secondary subreddit stays in the user's block)

  double base_dogmatism = 0.5;
  double user_noise = 0.05;    // sd of per-user dogmatism around the planted mean
  double post_noise = 0.15;    // sd of per-post dogmatism around the user mean
  double rating_noise = 0.5;   // sd on each synthetic annotator's rating

  // Token model: per token, each category fires with probability
  // lexicon_token_rate (times its multiplier in dogmatic posts); then a
  // class-specific topic word fires with topic_token_rate; the rest is
  // shared filler. Absolute rates, so unplanted categories keep
  // identical rates in both classes.
  double lexicon_token_rate = 0.02;
  std::map<std::string, double> category_multipliers;  // dogmatic-class rate multipliers
  double topic_token_rate = 0.10;
  std::uint32_t vocabulary_shift = 0;  // offsets topic word ids: simulates a domain shift
  std::uint64_t doc_tokens_min = 25;
  std::uint64_t doc_tokens_max = 55;

  // User-level dogmatism written onto z-scored realized behavior.
  double behavior_activity = 0.0;
  double behavior_breadth = 0.0;
  double behavior_focus = 0.0;
  double behavior_engagement = 0.0;

  // score(A2) = intercept + a1 * score(A1) + b * score(B) + noise.
  double contagion_intercept = 0.2;
  double contagion_a1 = 0.5;
  double contagion_b = 0.3;
  double triple_noise = 0.03;

  std::uint64_t seed = 1;
};

struct SyntheticSummary {
  std::uint64_t posts = 0;
  std::uint64_t annotations = 0;
  std::uint64_t triples = 0;
};

std::vector<std::string> subreddit_names(const SyntheticSpec& spec);

// Contiguous block assignment: subreddit i belongs to block
// i * n_blocks / n_subreddits.
std::uint64_t subreddit_block(const SyntheticSpec& spec, std::uint64_t subreddit_index);

using PostSink = std::function<void(const analysis::ScoredPost&)>;
using AnnotationSink = std::function<void(const std::string& id, const std::array<int, 3>&)>;

// Streaming core: posts arrive with their true dogmatism as
// p_dogmatic, annotations with noisy 3-rater scores. Memory is
// O(users + subreddits), never O(posts).
SyntheticSummary generate_synthetic(const SyntheticSpec& spec, const lexicon::Lexicon& lex,
                                    const PostSink& post_sink,
                                    const AnnotationSink& annotation_sink);

// Writes corpus.jsonl, annotations.jsonl, and groundtruth.json.
SyntheticSummary generate_synthetic(const SyntheticSpec& spec, const lexicon::Lexicon& lex,
                                    const std::filesystem::path& out_dir);

}  // namespace dogma::synth
