#include "dogma/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <istream>
#include <mutex>
#include <ostream>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "dogma/error.hpp"

namespace dogma::analysis {

using nlohmann::ordered_json;

// ---- odds table -----------------------------------------------------------

std::vector<OddsRow> odds_table(std::span<const std::string> dogmatic_docs,
                                std::span<const std::string> nondogmatic_docs,
                                const lexicon::Lexicon& lex, double alpha) {
  if (dogmatic_docs.empty() || nondogmatic_docs.empty()) {
    throw Error("odds table: both document groups must be nonempty");
  }
  const std::size_t n_cats = lex.category_count();

  // One tokenization pass per document; aggregate token counts for the
  // odds ratio, per-document proportions for the rank test.
  struct GroupStats {
    std::vector<double> category_tokens;       // per category
    double total_tokens = 0.0;
    std::vector<std::vector<double>> doc_props;  // [category][doc]
  };
  auto scan = [&](std::span<const std::string> docs) {
    GroupStats g;
    g.category_tokens.assign(n_cats, 0.0);
    g.doc_props.assign(n_cats, {});
    for (auto& v : g.doc_props) v.reserve(docs.size());
    std::vector<std::string> tokens;
    std::vector<double> counts;
    for (const std::string& doc : docs) {
      lexicon::tokenize_into(doc, tokens);
      lexicon::category_counts(lex, tokens, counts);
      const double denom = static_cast<double>(std::max<std::size_t>(tokens.size(), 1));
      g.total_tokens += static_cast<double>(tokens.size());
      for (std::size_t c = 0; c < n_cats; ++c) {
        g.category_tokens[c] += counts[c];
        g.doc_props[c].push_back(counts[c] / denom);
      }
    }
    return g;
  };
  GroupStats dog = scan(dogmatic_docs);
  GroupStats non = scan(nondogmatic_docs);

  std::vector<OddsRow> rows(n_cats);
  std::vector<double> raw_p(n_cats);
  for (std::size_t c = 0; c < n_cats; ++c) {
    rows[c].category = lex.category_names()[c];
    rows[c].odds_ratio =
        stats::odds_ratio(dog.category_tokens[c], dog.total_tokens - dog.category_tokens[c],
                          non.category_tokens[c], non.total_tokens - non.category_tokens[c]);
    // Proportion samples carry heavy ties (all the zero-usage
    // documents), so the tie-corrected normal approximation applies.
    stats::TestResult test = stats::mann_whitney_u(dog.doc_props[c], non.doc_props[c],
                                                   stats::TestMethod::NormalApprox);
    rows[c].p_raw = test.p_value;
    raw_p[c] = test.p_value;
  }
  std::vector<double> adjusted = stats::holm_correct(raw_p);
  for (std::size_t c = 0; c < n_cats; ++c) {
    rows[c].p_adjusted = adjusted[c];
    rows[c].significant = adjusted[c] < alpha;
  }
  return rows;
}

// ---- scored posts ----------------------------------------------------------

std::string serialize_scored(const ScoredPost& scored) {
  ordered_json j;
  j["id"] = scored.post.id;
  j["author"] = scored.post.author;
  j["subreddit"] = scored.post.subreddit;
  j["created_at"] = scored.post.created_at;
  if (scored.post.parent_id) {
    j["parent_id"] = *scored.post.parent_id;
  } else {
    j["parent_id"] = nullptr;
  }
  j["body"] = scored.post.body;
  j["p_dogmatic"] = scored.p_dogmatic;
  return j.dump();
}

ScoredPost parse_scored_line(std::string_view line, bool allow_empty_body) {
  corpus::ParsedPostLine parsed = corpus::parse_post_line_ex(line, allow_empty_body);
  if (!parsed.p_dogmatic) throw InputError("missing key 'p_dogmatic'");
  return {std::move(parsed.post), *parsed.p_dogmatic};
}

std::vector<ScoredPost> load_scored(const std::filesystem::path& path,
                                    corpus::ParseOptions options) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scored posts file: " + path.string());
  std::vector<ScoredPost> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      out.push_back(parse_scored_line(line, options.allow_empty_body));
    } catch (const InputError& e) {
      if (options.policy == corpus::OnBadLine::Abort) {
        throw InputError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
  }
  return out;
}

Scorer::Scorer(const model::LogisticModel& model, const lexicon::Lexicon* lex)
    : model_(model), extractor_(model::make_extractor(model.space, lex)) {}

double Scorer::score(std::string_view body) const {
  return model::predict_proba(model_, extractor_.extract(body));
}

ScoredPost Scorer::score_post(const Post& post) const {
  return {post, score(post.body)};
}

std::vector<ScoredPost> score_corpus(const Scorer& scorer, std::span<const Post> posts) {
  std::vector<ScoredPost> out;
  out.reserve(posts.size());
  for (const Post& p : posts) out.push_back(scorer.score_post(p));
  return out;
}

// ---- streaming scorer --------------------------------------------------------

namespace {

struct ScoredLine {
  std::string text;  // serialized output, empty when the line was skipped
  bool ok = false;
};

std::string render_scored(const ScoredPost& scored, ScoredFormat format) {
  if (format == ScoredFormat::Jsonl) return serialize_scored(scored);
  // nlohmann renders doubles with the shortest round-trip form; reusing
  // it keeps TSV and JSONL probability text identical.
  return scored.post.id + "\t" + nlohmann::json(scored.p_dogmatic).dump();
}

// Transforms one raw input line; pure, so output is independent of
// which worker runs it.
ScoredLine process_line(const Scorer& scorer, const std::string& line,
                        const StreamOptions& options, std::size_t line_no,
                        std::uint64_t& skipped) {
  if (line.empty()) return {"", false};
  std::string_view view = line;
  if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
  if (view.empty()) return {"", false};
  try {
    Post post = corpus::parse_post_line(view, options.parse.allow_empty_body);
    ScoredPost scored{std::move(post), 0.0};
    scored.p_dogmatic = scorer.score(scored.post.body);
    return {render_scored(scored, options.format), true};
  } catch (const InputError& e) {
    if (options.parse.policy == corpus::OnBadLine::Abort) {
      throw InputError(options.source_name + ":" + std::to_string(line_no) + ": " + e.what());
    }
    ++skipped;
    return {"", false};
  }
}

struct Chunk {
  std::size_t index = 0;
  std::size_t first_line = 0;
  std::vector<std::string> lines;
};

}  // namespace

StreamStats score_stream(const Scorer& scorer, std::istream& in, std::ostream& out,
                         const StreamOptions& options) {
  const std::size_t workers = std::max<std::size_t>(1, options.workers);
  const std::size_t chunk_size = std::max<std::size_t>(1, options.chunk_size);
  StreamStats totals;

  if (workers == 1) {
    std::string line;
    std::size_t line_no = 0;
    std::uint64_t skipped = 0;
    while (std::getline(in, line)) {
      ++line_no;
      ScoredLine result = process_line(scorer, line, options, line_no, skipped);
      if (result.ok) {
        out << result.text << '\n';
        ++totals.scored;
      }
    }
    totals.skipped = skipped;
    return totals;
  }

  std::mutex mu;
  std::condition_variable work_ready;
  std::condition_variable space_ready;
  std::condition_variable result_ready;
  std::deque<Chunk> pending;
  std::unordered_map<std::size_t, std::pair<std::string, std::uint64_t>> finished;
  bool input_done = false;
  std::size_t total_chunks = 0;
  std::exception_ptr failure;
  std::atomic<std::uint64_t> skipped_total{0};
  const std::size_t max_inflight = workers * 4;

  auto worker_fn = [&] {
    for (;;) {
      Chunk chunk;
      {
        std::unique_lock<std::mutex> lock(mu);
        work_ready.wait(lock, [&] { return !pending.empty() || input_done || failure; });
        if (failure) return;
        if (pending.empty()) {
          if (input_done) return;
          continue;
        }
        chunk = std::move(pending.front());
        pending.pop_front();
      }
      space_ready.notify_one();

      std::string blob;
      std::uint64_t scored = 0;
      std::uint64_t skipped = 0;
      try {
        for (std::size_t i = 0; i < chunk.lines.size(); ++i) {
          ScoredLine result =
              process_line(scorer, chunk.lines[i], options, chunk.first_line + i, skipped);
          if (result.ok) {
            blob += result.text;
            blob += '\n';
            ++scored;
          }
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
        work_ready.notify_all();
        result_ready.notify_all();
        space_ready.notify_all();
        return;
      }
      skipped_total += skipped;
      {
        std::lock_guard<std::mutex> lock(mu);
        finished.emplace(chunk.index, std::make_pair(std::move(blob), scored));
      }
      result_ready.notify_one();
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker_fn);

  // Writer drains results in chunk order on its own thread so the
  // reader never stalls behind output.
  std::thread writer([&] {
    std::size_t next = 0;
    for (;;) {
      std::pair<std::string, std::uint64_t> blob;
      {
        std::unique_lock<std::mutex> lock(mu);
        result_ready.wait(lock, [&] {
          return failure || finished.count(next) != 0 || (input_done && next >= total_chunks);
        });
        if (failure) return;
        if (input_done && next >= total_chunks && finished.empty()) return;
        auto it = finished.find(next);
        if (it == finished.end()) continue;
        blob = std::move(it->second);
        finished.erase(it);
      }
      out << blob.first;
      totals.scored += blob.second;
      ++next;
      space_ready.notify_one();
    }
  });

  // Reader: the calling thread feeds bounded chunks.
  {
    std::size_t chunk_index = 0;
    std::size_t line_no = 0;
    bool eof = false;
    while (!eof) {
      Chunk chunk;
      chunk.index = chunk_index;
      chunk.first_line = line_no + 1;
      chunk.lines.reserve(chunk_size);
      std::string line;
      while (chunk.lines.size() < chunk_size && std::getline(in, line)) {
        ++line_no;
        chunk.lines.push_back(std::move(line));
      }
      eof = chunk.lines.size() < chunk_size;
      if (!chunk.lines.empty()) {
        std::unique_lock<std::mutex> lock(mu);
        space_ready.wait(lock, [&] {
          return failure || pending.size() + finished.size() < max_inflight;
        });
        if (failure) break;
        pending.push_back(std::move(chunk));
        ++chunk_index;
        work_ready.notify_one();
      }
    }
    std::lock_guard<std::mutex> lock(mu);
    total_chunks = chunk_index;
    input_done = true;
  }
  work_ready.notify_all();
  result_ready.notify_all();

  for (std::thread& t : pool) t.join();
  result_ready.notify_all();
  writer.join();

  if (failure) std::rethrow_exception(failure);
  totals.skipped = skipped_total.load();
  return totals;
}

// ---- subreddit rankings -----------------------------------------------------

void SubredditAccumulator::add(const std::string& subreddit, double score) {
  Cell& cell = cells_[subreddit];
  ++cell.count;
  cell.sum += score;
}

std::vector<SubredditRank> SubredditAccumulator::finish(std::uint64_t min_posts) const {
  std::vector<SubredditRank> out;
  for (const auto& [name, cell] : cells_) {
    if (cell.count >= min_posts) {
      out.push_back({name, cell.sum / static_cast<double>(cell.count), cell.count});
    }
  }
  std::sort(out.begin(), out.end(), [](const SubredditRank& a, const SubredditRank& b) {
    if (a.mean_score != b.mean_score) return a.mean_score > b.mean_score;
    return a.subreddit < b.subreddit;
  });
  return out;
}

std::vector<SubredditRank> subreddit_rankings(std::span<const ScoredPost> scored,
                                              std::uint64_t min_posts) {
  SubredditAccumulator acc;
  for (const ScoredPost& s : scored) acc.add(s.post.subreddit, s.p_dogmatic);
  return acc.finish(min_posts);
}

// ---- co-dogmatism -------------------------------------------------------------

void ProfileAccumulator::add(const std::string& user, const std::string& subreddit, double score) {
  Cell& cell = by_user_[user][subreddit];
  ++cell.count;
  cell.sum += score;
}

std::vector<UserSubredditProfile> ProfileAccumulator::finish(std::uint64_t min_posts_per_sub,
                                                             double dogmatic_threshold) const {
  std::vector<UserSubredditProfile> out;
  for (const auto& [user, subs] : by_user_) {
    UserSubredditProfile profile;
    profile.user = user;
    for (const auto& [sub, cell] : subs) {
      if (cell.count < min_posts_per_sub) continue;
      const double mean = cell.sum / static_cast<double>(cell.count);
      profile.per_subreddit.emplace(sub, SubredditStats{cell.count, mean});
      if (mean > dogmatic_threshold) profile.dogmatic_subreddits.insert(sub);
    }
    if (!profile.per_subreddit.empty()) out.push_back(std::move(profile));
  }
  return out;
}

std::vector<UserSubredditProfile> build_profiles(std::span<const ScoredPost> scored,
                                                 std::uint64_t min_posts_per_sub,
                                                 double dogmatic_threshold) {
  ProfileAccumulator acc;
  for (const ScoredPost& s : scored) acc.add(s.post.author, s.post.subreddit, s.p_dogmatic);
  return acc.finish(min_posts_per_sub, dogmatic_threshold);
}

std::map<stats::PairKey, std::int64_t> dogmatic_pair_counts(
    std::span<const UserSubredditProfile> profiles) {
  std::map<stats::PairKey, std::int64_t> counts;
  for (const UserSubredditProfile& profile : profiles) {
    for (auto it = profile.dogmatic_subreddits.begin(); it != profile.dogmatic_subreddits.end();
         ++it) {
      auto jt = it;
      for (++jt; jt != profile.dogmatic_subreddits.end(); ++jt) {
        ++counts[{*it, *jt}];  // set iteration is sorted, so *it < *jt
      }
    }
  }
  return counts;
}

std::map<std::string, std::vector<NeighborEntry>> cluster_by_association(
    const std::map<stats::PairKey, std::int64_t>& pair_counts, std::size_t top_k) {
  if (pair_counts.empty()) throw Error("clustering: no co-dogmatism pairs");
  std::map<stats::PairKey, double> scores = stats::pmi(pair_counts);
  std::map<std::string, std::vector<NeighborEntry>> neighbors;
  for (const auto& [key, score] : scores) {
    if (key.first == key.second) continue;
    const std::int64_t count = pair_counts.at(key);
    neighbors[key.first].push_back({key.second, score, count});
    neighbors[key.second].push_back({key.first, score, count});
  }
  for (auto& [sub, list] : neighbors) {
    std::sort(list.begin(), list.end(), [](const NeighborEntry& a, const NeighborEntry& b) {
      if (a.pmi != b.pmi) return a.pmi > b.pmi;
      return a.neighbor < b.neighbor;
    });
    if (list.size() > top_k) list.resize(top_k);
  }
  return neighbors;
}

stats::TestResult enrichment_test(std::span<const UserSubredditProfile> profiles,
                                  const std::string& anchor, const std::string& other,
                                  EnrichmentPopulation population) {
  std::int64_t population_n = 0;
  std::int64_t other_dogmatic = 0;
  std::int64_t anchor_dogmatic = 0;
  std::int64_t both_dogmatic = 0;
  for (const UserSubredditProfile& p : profiles) {
    const bool has_anchor = p.per_subreddit.count(anchor) != 0;
    const bool has_other = p.per_subreddit.count(other) != 0;
    const bool qualifies = population == EnrichmentPopulation::QualifiedBoth
                               ? (has_anchor && has_other)
                               : has_anchor;
    if (!qualifies) continue;
    ++population_n;
    const bool dog_anchor = p.dogmatic_subreddits.count(anchor) != 0;
    const bool dog_other = p.dogmatic_subreddits.count(other) != 0;
    if (dog_other) ++other_dogmatic;
    if (dog_anchor) {
      ++anchor_dogmatic;
      if (dog_other) ++both_dogmatic;
    }
  }
  if (population_n == 0) {
    throw Error("enrichment: no users qualify in '" + anchor + "' and '" + other + "'");
  }
  if (anchor_dogmatic == 0) {
    throw Error("enrichment: no qualifying user is dogmatic in '" + anchor + "'");
  }
  const double base_rate = static_cast<double>(other_dogmatic) /
                           static_cast<double>(population_n);
  if (base_rate <= 0.0 || base_rate >= 1.0) {
    throw Error("enrichment: base rate for '" + other + "' is degenerate (" +
                std::to_string(base_rate) + ")");
  }
  return stats::binomial_test(both_dogmatic, anchor_dogmatic, base_rate, stats::Tail::Greater);
}

// ---- user behavior --------------------------------------------------------------

std::vector<BehaviorFeatures> behavior_features(std::span<const Post> posts) {
  std::unordered_map<std::string_view, std::size_t> index_of;
  index_of.reserve(posts.size());
  for (std::size_t i = 0; i < posts.size(); ++i) index_of.emplace(posts[i].id, i);

  // Thread root per post: follow parent links while they resolve;
  // dangling parents end the chain. Path compression keeps repeated
  // lookups over deep threads linear overall.
  std::vector<std::int64_t> root_of(posts.size(), -1);
  std::vector<std::size_t> path;
  for (std::size_t i = 0; i < posts.size(); ++i) {
    if (root_of[i] >= 0) continue;
    path.clear();
    std::size_t cur = i;
    std::int64_t root;
    for (;;) {
      if (root_of[cur] >= 0) {
        root = root_of[cur];
        break;
      }
      path.push_back(cur);
      if (!posts[cur].parent_id) {
        root = static_cast<std::int64_t>(cur);
        break;
      }
      auto it = index_of.find(*posts[cur].parent_id);
      if (it == index_of.end()) {
        root = static_cast<std::int64_t>(cur);
        break;
      }
      if (root_of[it->second] == -2) {  // parent already on the current path: a cycle
        root = static_cast<std::int64_t>(cur);
        break;
      }
      root_of[cur] = -2;
      cur = it->second;
    }
    for (std::size_t node : path) root_of[node] = root;
  }

  struct UserAgg {
    std::uint64_t posts = 0;
    std::map<std::string, std::uint64_t> per_sub;
    std::set<std::size_t> threads;
  };
  std::map<std::string, UserAgg> users;
  for (std::size_t i = 0; i < posts.size(); ++i) {
    UserAgg& agg = users[posts[i].author];
    ++agg.posts;
    ++agg.per_sub[posts[i].subreddit];
    agg.threads.insert(static_cast<std::size_t>(root_of[i]));
  }

  std::vector<BehaviorFeatures> out;
  out.reserve(users.size());
  for (const auto& [user, agg] : users) {
    BehaviorFeatures f;
    f.user = user;
    f.activity = static_cast<double>(agg.posts);
    f.breadth = static_cast<double>(agg.per_sub.size());
    std::uint64_t modal = 0;
    for (const auto& [sub, count] : agg.per_sub) modal = std::max(modal, count);
    f.focus = static_cast<double>(modal) / static_cast<double>(agg.posts);
    f.engagement = static_cast<double>(agg.posts) / static_cast<double>(agg.threads.size());
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<UserMeanScore> user_mean_scores(std::span<const ScoredPost> scored) {
  std::map<std::string, std::pair<double, std::uint64_t>> agg;
  for (const ScoredPost& s : scored) {
    auto& cell = agg[s.post.author];
    cell.first += s.p_dogmatic;
    ++cell.second;
  }
  std::vector<UserMeanScore> out;
  out.reserve(agg.size());
  for (const auto& [user, cell] : agg) {
    out.push_back({user, cell.first / static_cast<double>(cell.second), cell.second});
  }
  return out;
}

stats::OlsFit behavior_regression(std::span<const BehaviorFeatures> features,
                                  std::span<const double> mean_scores) {
  if (features.size() != mean_scores.size()) {
    throw Error("behavior regression: features and scores differ in length");
  }
  if (features.size() < 20) {
    throw Error("behavior regression: needs at least 20 users, have " +
                std::to_string(features.size()));
  }
  const std::vector<std::string> names = {"activity", "breadth", "focus", "engagement"};
  std::vector<std::vector<double>> columns(4, std::vector<double>(features.size()));
  for (std::size_t i = 0; i < features.size(); ++i) {
    columns[0][i] = features[i].activity;
    columns[1][i] = features[i].breadth;
    columns[2][i] = features[i].focus;
    columns[3][i] = features[i].engagement;
  }
  const double n = static_cast<double>(features.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    double mean = 0.0;
    for (double v : columns[c]) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : columns[c]) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / n);
    if (sd == 0.0) {
      throw Error("behavior regression: feature '" + names[c] + "' is constant across users");
    }
    for (double& v : columns[c]) v = (v - mean) / sd;
  }
  return stats::ols_fit(columns, mean_scores, names);
}

stats::OlsFit behavior_regression(std::span<const ScoredPost> scored) {
  std::vector<Post> posts;
  posts.reserve(scored.size());
  for (const ScoredPost& s : scored) posts.push_back(s.post);
  std::vector<BehaviorFeatures> features = behavior_features(posts);
  std::vector<UserMeanScore> means = user_mean_scores(scored);
  // Both lists are sorted by user and built from the same posts, so
  // they align one to one.
  std::vector<double> response;
  response.reserve(means.size());
  for (std::size_t i = 0; i < means.size(); ++i) {
    if (features[i].user != means[i].user) {
      throw Error("behavior regression: user alignment broke at '" + means[i].user + "'");
    }
    response.push_back(means[i].mean_score);
  }
  return behavior_regression(features, response);
}

// ---- conversation triples ----------------------------------------------------------

std::vector<ConversationTriple> extract_triples(std::span<const Post> posts) {
  std::unordered_map<std::string_view, std::size_t> index_of;
  index_of.reserve(posts.size());
  for (std::size_t i = 0; i < posts.size(); ++i) index_of.emplace(posts[i].id, i);

  std::vector<ConversationTriple> out;
  for (const Post& a2 : posts) {
    if (!a2.parent_id) continue;
    auto b_it = index_of.find(*a2.parent_id);
    if (b_it == index_of.end()) continue;
    const Post& b = posts[b_it->second];
    if (!b.parent_id) continue;
    auto a1_it = index_of.find(*b.parent_id);
    if (a1_it == index_of.end()) continue;
    const Post& a1 = posts[a1_it->second];
    if (a1.author != a2.author || a1.author == b.author) continue;
    out.push_back({a1, b, a2});
  }
  return out;
}

std::string remove_quoted_words(std::string_view a2_body, std::string_view b_body) {
  std::vector<std::string> b_tokens = lexicon::tokenize(b_body);
  std::set<std::string> b_set(b_tokens.begin(), b_tokens.end());

  std::vector<lexicon::TokenSpan> spans;
  lexicon::token_spans_into(a2_body, spans);
  std::vector<std::string> a2_tokens = lexicon::tokenize(a2_body);

  std::string out;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (b_set.count(a2_tokens[i]) != 0) continue;
    if (!out.empty()) out += ' ';
    out += a2_body.substr(spans[i].begin, spans[i].end - spans[i].begin);
  }
  return out;
}

stats::OlsFit triple_regression(std::span<const ConversationTriple> triples,
                                const std::function<double(const Post&)>& score,
                                bool quote_control) {
  if (triples.size() < 100) {
    throw Error("triple regression: needs at least 100 triples, have " +
                std::to_string(triples.size()));
  }
  std::vector<std::vector<double>> columns(2, std::vector<double>(triples.size()));
  std::vector<double> response(triples.size());
  for (std::size_t i = 0; i < triples.size(); ++i) {
    columns[0][i] = score(triples[i].a1);
    columns[1][i] = score(triples[i].b);
    if (quote_control) {
      Post stripped = triples[i].a2;
      stripped.body = remove_quoted_words(triples[i].a2.body, triples[i].b.body);
      response[i] = score(stripped);
    } else {
      response[i] = score(triples[i].a2);
    }
  }
  return stats::ols_fit(columns, response, {"a1", "b"});
}

}  // namespace dogma::analysis
