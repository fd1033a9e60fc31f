#include "dogma/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <unordered_set>

#include "dogma/corpus.hpp"
#include "dogma/error.hpp"
#include "dogma/rng.hpp"

#include "json.hpp"

namespace dogma::synth {

namespace {

constexpr std::uint64_t kTopicWordsPerClass = 30;
constexpr std::uint64_t kFillerWords = 400;
constexpr double kRateBudget = 0.85;

std::string zero_padded(std::uint64_t value, std::size_t width) {
  std::string s = std::to_string(value);
  if (s.size() < width) s.insert(0, width - s.size(), '0');
  return s;
}

std::size_t digits_for(std::uint64_t count) {
  std::size_t width = 2;
  std::uint64_t bound = 100;
  while (count > bound) {
    ++width;
    bound *= 10;
  }
  return width;
}

void validate(const SyntheticSpec& spec, const std::vector<double>& dog_rates,
              const std::vector<double>& non_rates) {
  if (spec.n_docs == 0 && spec.n_triples == 0)
    throw Error("synthetic spec produces no posts (n_docs and n_triples are both 0)");
  if (spec.n_docs > 0 && spec.n_users == 0)
    throw Error("n_users must be positive when n_docs > 0");
  if (spec.n_docs > 0 && spec.n_docs < spec.n_users)
    throw Error("n_docs must be at least n_users so every user posts");
  if (spec.n_subreddits == 0) throw Error("n_subreddits must be positive");
  if (spec.n_blocks == 0 || spec.n_blocks > spec.n_subreddits)
    throw Error("n_blocks must be in [1, n_subreddits]");
  if (!(spec.block_affinity >= 0.0 && spec.block_affinity <= 1.0))
    throw Error("block_affinity must be in [0, 1]");
  if (!(spec.base_dogmatism > 0.0 && spec.base_dogmatism < 1.0))
    throw Error("base_dogmatism must be in (0, 1)");
  if (!(spec.lexicon_token_rate >= 0.0) || !(spec.topic_token_rate >= 0.0))
    throw Error("token rates must be non-negative");
  if (spec.doc_tokens_min < 3 || spec.doc_tokens_min > spec.doc_tokens_max)
    throw Error("doc token bounds must satisfy 3 <= min <= max");
  for (double sd : {spec.user_noise, spec.post_noise, spec.rating_noise, spec.triple_noise})
    if (!(sd >= 0.0)) throw Error("noise scales must be non-negative");
  for (const auto& [name, mult] : spec.category_multipliers)
    if (!(mult > 0.0)) throw Error("category multiplier for '" + name + "' must be positive");

  double dog_total = std::accumulate(dog_rates.begin(), dog_rates.end(), spec.topic_token_rate);
  double non_total = std::accumulate(non_rates.begin(), non_rates.end(), spec.topic_token_rate);
  double worst = std::max(dog_total, non_total);
  if (worst > kRateBudget)
    throw Error("planted token rates sum to " + std::to_string(worst) + "; must stay below " +
                std::to_string(kRateBudget));

  // The contagion plane must keep the mean response inside [0, 1] over
  // the sampled parent-score box, otherwise clamping would bias the
  // planted coefficients.
  if (spec.n_triples > 0) {
    for (double a1 : {0.05, 0.85}) {
      for (double b : {0.05, 0.85}) {
        double mean = spec.contagion_intercept + spec.contagion_a1 * a1 + spec.contagion_b * b;
        if (mean < 0.0 || mean > 1.0)
          throw Error("contagion coefficients push the mean response to " + std::to_string(mean) +
                      ", outside [0, 1]");
      }
    }
  }
}

// Words that match exactly one category, so planting one category never
// bleeds into another's counts.
std::vector<std::vector<std::string>> unique_word_pools(const lexicon::Lexicon& lex) {
  std::vector<std::vector<std::string>> pools(lex.category_count());
  std::vector<std::uint32_t> cats;
  for (std::size_t c = 0; c < lex.category_count(); ++c) {
    for (const auto& pattern : lex.patterns(c)) {
      const std::string& word = pattern.text;
      if (word.empty()) continue;
      cats.clear();
      lex.match_token(word, cats);
      if (cats.size() == 1 && cats[0] == c) pools[c].push_back(word);
    }
  }
  return pools;
}

struct TokenModel {
  std::vector<double> cum_dog;  // cumulative category thresholds, dogmatic class
  std::vector<double> cum_non;
  std::vector<const std::vector<std::string>*> pools;
  double topic_rate;
  std::uint64_t topic_base[2];  // first topic word id per class
  std::uint64_t scratch_reserve;
};

void append_body(const TokenModel& model, bool dogmatic, Rng& rng, std::string& out) {
  const std::vector<double>& cum = dogmatic ? model.cum_dog : model.cum_non;
  double cat_total = cum.empty() ? 0.0 : cum.back();
  for (std::size_t t = 0; t < model.scratch_reserve; ++t) {
    if (t > 0) out.push_back(' ');
    double u = rng.uniform();
    if (u < cat_total) {
      auto it = std::upper_bound(cum.begin(), cum.end(), u);
      const auto& pool = *model.pools[static_cast<std::size_t>(it - cum.begin())];
      out += pool[rng.below(pool.size())];
    } else if (u < cat_total + model.topic_rate) {
      std::uint64_t id = model.topic_base[dogmatic ? 1 : 0] + rng.below(kTopicWordsPerClass);
      out += dogmatic ? "veris" : "mund";
      out += std::to_string(id);
    } else {
      out += 'w';
      out += std::to_string(rng.below(kFillerWords));
    }
  }
}

std::array<int, 3> noisy_ratings(double g, double noise, Rng& rng) {
  std::array<int, 3> ratings;
  for (int& r : ratings) {
    double raw = 1.0 + 4.0 * g + rng.normal(0.0, noise);
    r = static_cast<int>(std::clamp(std::lround(raw), 1l, 5l));
  }
  return ratings;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

struct UserPlan {
  std::vector<std::uint64_t> subreddits;   // first entry is the modal subreddit
  std::vector<std::uint64_t> post_counts;  // per subreddit
  std::vector<std::uint64_t> thread_counts;
  double mean_dogmatism = 0.0;
};

double z_or_zero(double value, double mean, double sd) {
  return sd > 0.0 ? (value - mean) / sd : 0.0;
}

}  // namespace

std::vector<std::string> subreddit_names(const SyntheticSpec& spec) {
  std::size_t width = digits_for(spec.n_subreddits);
  std::vector<std::string> names;
  names.reserve(spec.n_subreddits);
  for (std::uint64_t i = 0; i < spec.n_subreddits; ++i) names.push_back("s" + zero_padded(i, width));
  return names;
}

std::uint64_t subreddit_block(const SyntheticSpec& spec, std::uint64_t subreddit_index) {
  return subreddit_index * spec.n_blocks / spec.n_subreddits;
}

SyntheticSummary generate_synthetic(const SyntheticSpec& spec, const lexicon::Lexicon& lex,
                                    const PostSink& post_sink,
                                    const AnnotationSink& annotation_sink) {
  const auto& names = lex.category_names();
  std::vector<double> dog_rates(names.size()), non_rates(names.size());
  for (std::size_t c = 0; c < names.size(); ++c) {
    double mult = 1.0;
    auto it = spec.category_multipliers.find(names[c]);
    if (it != spec.category_multipliers.end()) mult = it->second;
    non_rates[c] = spec.lexicon_token_rate;
    dog_rates[c] = spec.lexicon_token_rate * mult;
  }
  for (const auto& [name, mult] : spec.category_multipliers) {
    (void)mult;
    if (!lex.category_index(name))
      throw InputError("category multiplier names unknown category '" + name + "'");
  }
  validate(spec, dog_rates, non_rates);

  auto pools = unique_word_pools(lex);
  TokenModel model;
  model.topic_rate = spec.topic_token_rate;
  model.topic_base[0] = spec.vocabulary_shift;
  model.topic_base[1] = spec.vocabulary_shift;
  double acc_dog = 0.0, acc_non = 0.0;
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (dog_rates[c] <= 0.0 && non_rates[c] <= 0.0) continue;
    if (pools[c].empty())
      throw Error("lexicon category '" + names[c] +
                  "' has no word matching only that category; cannot plant it");
    acc_dog += dog_rates[c];
    acc_non += non_rates[c];
    model.cum_dog.push_back(acc_dog);
    model.cum_non.push_back(acc_non);
    model.pools.push_back(&pools[c]);
  }

  auto subs = subreddit_names(spec);
  Rng rng(spec.seed);

  SyntheticSummary summary;
  std::uint64_t post_counter = 0;
  std::int64_t created_at = 1500000000;
  std::size_t user_width = digits_for(spec.n_users);

  auto emit = [&](std::string id, const std::string& author, const std::string& subreddit,
                  std::optional<std::string> parent, double g) -> std::string {
    analysis::ScoredPost sp;
    sp.post.id = std::move(id);
    sp.post.author = author;
    sp.post.subreddit = subreddit;
    sp.post.created_at = created_at++;
    sp.post.parent_id = std::move(parent);
    bool dogmatic = g > 0.5;
    model.scratch_reserve =
        spec.doc_tokens_min + rng.below(spec.doc_tokens_max - spec.doc_tokens_min + 1);
    sp.post.body.reserve(model.scratch_reserve * 7);
    append_body(model, dogmatic, rng, sp.post.body);
    sp.p_dogmatic = g;
    std::string post_id = sp.post.id;
    post_sink(sp);
    ++summary.posts;
    annotation_sink(post_id, noisy_ratings(g, spec.rating_noise, rng));
    ++summary.annotations;
    return post_id;
  };

  if (spec.n_docs > 0) {
    // Pass 1: realize each user's structure (post count, subreddit
    // spread, thread counts), then z-score those realized features and
    // write the behavior coefficients onto the user's mean dogmatism.
    std::vector<UserPlan> plans(spec.n_users);
    std::vector<double> raw_activity(spec.n_users);
    double raw_total = 0.0;
    for (double& a : raw_activity) {
      a = std::exp(rng.normal(0.0, 0.7));
      raw_total += a;
    }
    std::vector<std::uint64_t> posts_per_user(spec.n_users);
    std::uint64_t assigned = 0;
    for (std::size_t u = 0; u < spec.n_users; ++u) {
      posts_per_user[u] = std::max<std::uint64_t>(
          1, static_cast<std::uint64_t>(std::llround(raw_activity[u] / raw_total *
                                                     static_cast<double>(spec.n_docs))));
      assigned += posts_per_user[u];
    }
    for (std::size_t u = 0; assigned < spec.n_docs; u = (u + 1) % spec.n_users) {
      ++posts_per_user[u];
      ++assigned;
    }
    for (std::size_t u = 0; assigned > spec.n_docs; u = (u + 1) % spec.n_users) {
      if (posts_per_user[u] > 1) {
        --posts_per_user[u];
        --assigned;
      }
    }

    std::vector<std::vector<std::uint64_t>> block_members(spec.n_blocks);
    for (std::uint64_t s = 0; s < spec.n_subreddits; ++s)
      block_members[subreddit_block(spec, s)].push_back(s);

    for (std::size_t u = 0; u < spec.n_users; ++u) {
      UserPlan& plan = plans[u];
      std::uint64_t n_posts = posts_per_user[u];
      std::uint64_t block = u % spec.n_blocks;
      const auto& home = block_members[block];

      std::uint64_t breadth = 1 + rng.below(std::min<std::uint64_t>(6, spec.n_subreddits));
      breadth = std::min({breadth, n_posts, spec.n_subreddits});

      std::set<std::uint64_t> chosen;
      chosen.insert(home[rng.below(home.size())]);
      while (chosen.size() < breadth) {
        std::uint64_t pick;
        if (spec.n_blocks > 1 && rng.uniform() >= spec.block_affinity) {
          // Jump to a random subreddit outside the user's block.
          do {
            pick = rng.below(spec.n_subreddits);
          } while (subreddit_block(spec, pick) == block);
        } else {
          pick = home[rng.below(home.size())];
        }
        if (chosen.count(pick)) {
          // Deterministic fallback so tiny blocks cannot stall the loop.
          for (std::uint64_t s = 0; s < spec.n_subreddits && chosen.count(pick); ++s) pick = s;
        }
        chosen.insert(pick);
      }
      plan.subreddits.assign(chosen.begin(), chosen.end());
      std::swap(plan.subreddits[0], plan.subreddits[rng.below(plan.subreddits.size())]);

      double focus_target = breadth == 1 ? 1.0
                                         : 1.0 / static_cast<double>(breadth) +
                                               rng.uniform() * (1.0 - 1.0 / static_cast<double>(breadth));
      std::uint64_t modal = static_cast<std::uint64_t>(
          std::llround(focus_target * static_cast<double>(n_posts)));
      modal = std::clamp<std::uint64_t>(modal, 1, n_posts - (breadth - 1));
      plan.post_counts.assign(plan.subreddits.size(), 0);
      plan.post_counts[0] = modal;
      std::uint64_t rest = n_posts - modal;
      for (std::size_t j = 0; rest > 0; j = (j + 1) % plan.subreddits.size()) {
        if (j == 0 && plan.subreddits.size() > 1) {
          j = 1;
        }
        ++plan.post_counts[j];
        --rest;
        if (plan.subreddits.size() == 1) continue;
      }

      double engagement_target = 1.0 + std::fabs(rng.normal(0.0, 1.5));
      std::uint64_t want_threads = std::clamp<std::uint64_t>(
          static_cast<std::uint64_t>(std::llround(static_cast<double>(n_posts) / engagement_target)),
          1, n_posts);
      plan.thread_counts.assign(plan.subreddits.size(), 0);
      std::uint64_t threads_assigned = 0;
      for (std::size_t j = 0; j < plan.subreddits.size(); ++j) {
        std::uint64_t t = std::max<std::uint64_t>(
            1, static_cast<std::uint64_t>(std::llround(static_cast<double>(want_threads) *
                                                       static_cast<double>(plan.post_counts[j]) /
                                                       static_cast<double>(n_posts))));
        t = std::min(t, plan.post_counts[j]);
        plan.thread_counts[j] = t;
        threads_assigned += t;
      }
      (void)threads_assigned;
    }

    // Realized behavior features, matching what the analysis recomputes
    // from the emitted corpus.
    std::vector<std::array<double, 4>> feats(spec.n_users);
    std::array<double, 4> mean{}, sd{};
    for (std::size_t u = 0; u < spec.n_users; ++u) {
      const UserPlan& plan = plans[u];
      double n_posts = static_cast<double>(posts_per_user[u]);
      double threads = static_cast<double>(
          std::accumulate(plan.thread_counts.begin(), plan.thread_counts.end(), std::uint64_t{0}));
      double modal = static_cast<double>(*std::max_element(plan.post_counts.begin(),
                                                           plan.post_counts.end()));
      feats[u] = {n_posts, static_cast<double>(plan.subreddits.size()), modal / n_posts,
                  n_posts / threads};
      for (int f = 0; f < 4; ++f) mean[f] += feats[u][f];
    }
    for (int f = 0; f < 4; ++f) mean[f] /= static_cast<double>(spec.n_users);
    for (std::size_t u = 0; u < spec.n_users; ++u)
      for (int f = 0; f < 4; ++f) sd[f] += (feats[u][f] - mean[f]) * (feats[u][f] - mean[f]);
    for (int f = 0; f < 4; ++f) sd[f] = std::sqrt(sd[f] / static_cast<double>(spec.n_users));

    const std::array<double, 4> betas = {spec.behavior_activity, spec.behavior_breadth,
                                         spec.behavior_focus, spec.behavior_engagement};
    for (std::size_t u = 0; u < spec.n_users; ++u) {
      double mu = spec.base_dogmatism + rng.normal(0.0, spec.user_noise);
      for (int f = 0; f < 4; ++f) mu += betas[f] * z_or_zero(feats[u][f], mean[f], sd[f]);
      plans[u].mean_dogmatism = std::clamp(mu, 0.02, 0.98);
    }

    // Pass 2: emit posts as per-subreddit thread chains. Chains are
    // single-author, so they never form cross-author triples.
    for (std::size_t u = 0; u < spec.n_users; ++u) {
      const UserPlan& plan = plans[u];
      std::string author = "u" + zero_padded(u, user_width);
      for (std::size_t j = 0; j < plan.subreddits.size(); ++j) {
        const std::string& sub = subs[plan.subreddits[j]];
        std::uint64_t posts_here = plan.post_counts[j];
        std::uint64_t threads_here = std::max<std::uint64_t>(1, plan.thread_counts[j]);
        std::uint64_t base_len = posts_here / threads_here;
        std::uint64_t longer = posts_here % threads_here;
        for (std::uint64_t t = 0; t < threads_here; ++t) {
          std::uint64_t len = base_len + (t < longer ? 1 : 0);
          std::optional<std::string> parent;
          for (std::uint64_t p = 0; p < len; ++p) {
            double g = clamp01(plan.mean_dogmatism + rng.normal(0.0, spec.post_noise));
            std::string id = "p" + std::to_string(post_counter++);
            parent = emit(std::move(id), author, sub, std::move(parent), g);
          }
        }
      }
    }
  }

  // Conversation triples: fresh author pair per triple, so the corpus
  // contains exactly n_triples A1<-B<-A2 chains.
  for (std::uint64_t k = 0; k < spec.n_triples; ++k) {
    std::string author_a = "ta" + std::to_string(k);
    std::string author_b = "tb" + std::to_string(k);
    const std::string& sub = subs[rng.below(spec.n_subreddits)];
    double g_a1 = 0.05 + rng.uniform() * 0.80;
    double g_b = 0.05 + rng.uniform() * 0.80;
    double g_a2 = clamp01(spec.contagion_intercept + spec.contagion_a1 * g_a1 +
                          spec.contagion_b * g_b + rng.normal(0.0, spec.triple_noise));
    std::string id_a1 = emit("p" + std::to_string(post_counter++), author_a, sub, std::nullopt, g_a1);
    std::string id_b = emit("p" + std::to_string(post_counter++), author_b, sub, id_a1, g_b);
    emit("p" + std::to_string(post_counter++), author_a, sub, id_b, g_a2);
    ++summary.triples;
  }

  return summary;
}

SyntheticSummary generate_synthetic(const SyntheticSpec& spec, const lexicon::Lexicon& lex,
                                    const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::ofstream corpus_out(out_dir / "corpus.jsonl");
  std::ofstream ann_out(out_dir / "annotations.jsonl");
  if (!corpus_out || !ann_out)
    throw InputError("cannot open output files under " + out_dir.string());

  SyntheticSummary summary = generate_synthetic(
      spec, lex,
      [&](const analysis::ScoredPost& sp) { corpus_out << analysis::serialize_scored(sp) << '\n'; },
      [&](const std::string& id, const std::array<int, 3>& ratings) {
        nlohmann::ordered_json j;
        j["id"] = id;
        j["ratings"] = ratings;
        ann_out << j.dump() << '\n';
      });
  corpus_out.close();
  ann_out.close();
  if (!corpus_out || !ann_out)
    throw InputError("failed writing synthetic corpus under " + out_dir.string());

  nlohmann::ordered_json truth;
  truth["seed"] = spec.seed;
  truth["n_docs"] = spec.n_docs;
  truth["n_users"] = spec.n_users;
  truth["n_subreddits"] = spec.n_subreddits;
  truth["n_triples"] = spec.n_triples;
  truth["n_blocks"] = spec.n_blocks;
  truth["block_affinity"] = spec.block_affinity;
  truth["base_dogmatism"] = spec.base_dogmatism;
  truth["user_noise"] = spec.user_noise;
  truth["post_noise"] = spec.post_noise;
  truth["rating_noise"] = spec.rating_noise;
  truth["lexicon_token_rate"] = spec.lexicon_token_rate;
  truth["category_multipliers"] = spec.category_multipliers;
  truth["topic_token_rate"] = spec.topic_token_rate;
  truth["vocabulary_shift"] = spec.vocabulary_shift;
  truth["doc_tokens_min"] = spec.doc_tokens_min;
  truth["doc_tokens_max"] = spec.doc_tokens_max;
  truth["behavior_coefficients"] = {{"activity", spec.behavior_activity},
                                    {"breadth", spec.behavior_breadth},
                                    {"focus", spec.behavior_focus},
                                    {"engagement", spec.behavior_engagement}};
  truth["contagion"] = {{"intercept", spec.contagion_intercept},
                        {"a1", spec.contagion_a1},
                        {"b", spec.contagion_b},
                        {"noise", spec.triple_noise}};
  auto subs = subreddit_names(spec);
  nlohmann::ordered_json blocks;
  for (std::uint64_t s = 0; s < spec.n_subreddits; ++s) blocks[subs[s]] = subreddit_block(spec, s);
  truth["subreddit_blocks"] = std::move(blocks);
  truth["posts_written"] = summary.posts;
  truth["annotations_written"] = summary.annotations;
  truth["triples_written"] = summary.triples;

  std::ofstream truth_out(out_dir / "groundtruth.json");
  if (!truth_out) throw InputError("cannot open groundtruth.json under " + out_dir.string());
  truth_out << truth.dump(2) << '\n';

  return summary;
}

}  // namespace dogma::synth
