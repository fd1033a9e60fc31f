// Acceptance gate for the dogma toolkit. Each criterion prints one
// [PASS]/[FAIL]/[SKIP] line with its runtime; supplementary indented
// lines carry the measured numbers. Exit status is 0 only when no
// criterion fails. Runtime budgets are enforced as failures.
//
// Re-invoked with --score-child for the scale criterion, so the child
// process's peak memory reflects scoring alone.
#include <sys/resource.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dogma/analysis.hpp"
#include "dogma/corpus.hpp"
#include "dogma/error.hpp"
#include "dogma/features.hpp"
#include "dogma/lexicon.hpp"
#include "dogma/model.hpp"
#include "dogma/rng.hpp"
#include "dogma/stats.hpp"
#include "dogma/synth.hpp"
#include "oracles.hpp"

namespace an = dogma::analysis;
namespace cp = dogma::corpus;
namespace ft = dogma::features;
namespace lx = dogma::lexicon;
namespace md = dogma::model;
namespace st = dogma::stats;
namespace sy = dogma::synth;
using dogma::Rng;

namespace {

// ---- harness ---------------------------------------------------------

struct Check {
  std::vector<std::string> failures;
  std::vector<std::string> notes;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void note(const std::string& text) { notes.push_back(text); }
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;  // 0 = unenforced
  std::function<void(Check&)> run;
};

std::filesystem::path g_workdir;

std::string data_file(const char* name) {
  return (std::filesystem::path(DOGMA_DATA_DIR) / name).string();
}

std::string fmtd(double v, int digits = 4) {
  std::ostringstream ss;
  ss.precision(digits);
  ss << std::fixed << v;
  return ss.str();
}

// ---- shared synthetic-corpus plumbing ---------------------------------

struct MemoryCorpus {
  std::vector<cp::Post> posts;
  std::vector<double> scores;  // aligned with posts
  std::vector<cp::AnnotationRecord> ratings;
};

MemoryCorpus generate(const sy::SyntheticSpec& spec, const lx::Lexicon& lex) {
  MemoryCorpus mc;
  sy::generate_synthetic(
      spec, lex,
      [&](const an::ScoredPost& sp) {
        mc.posts.push_back(sp.post);
        mc.scores.push_back(sp.p_dogmatic);
      },
      [&](const std::string& id, const std::array<int, 3>& r) {
        cp::AnnotationRecord rec;
        rec.id = id;
        rec.ratings = r;
        rec.aggregate = r[0] + r[1] + r[2];
        mc.ratings.push_back(rec);
      });
  return mc;
}

struct LabeledDocs {
  std::vector<std::string> docs;
  std::vector<int> labels;
};

LabeledDocs quartile_docs(const MemoryCorpus& mc) {
  auto annotated = cp::join_annotations(mc.ratings, mc.posts);
  auto split = cp::quartile_split(annotated);
  LabeledDocs ld;
  for (const auto& a : split.dogmatic) {
    ld.docs.push_back(a.post.body);
    ld.labels.push_back(1);
  }
  for (const auto& a : split.nondogmatic) {
    ld.docs.push_back(a.post.body);
    ld.labels.push_back(0);
  }
  return ld;
}

// The eight-category signal plant used by the classifier and odds
// criteria: strong boosters, a couple of suppressors.
std::map<std::string, double> planted_multipliers() {
  return {{"certainty", 3.0},     {"you", 2.2},
          {"negation", 1.5},      {"negative_emotion", 2.3},
          {"i", 0.5},             {"tentativeness", 0.6},
          {"insight", 0.7},       {"swear", 3.0}};
}

md::LogisticModel train_family(ft::Family family, const LabeledDocs& ld,
                               const lx::Lexicon* lex) {
  md::FeatureSpace space = ft::family_uses_bow(family)
                               ? md::make_feature_space(family, ft::build_vocabulary(ld.docs, 2))
                               : md::make_feature_space(family);
  ft::Extractor ex = md::make_extractor(space, lex);
  std::vector<ft::FeatureVector> xs;
  xs.reserve(ld.docs.size());
  for (const auto& d : ld.docs) xs.push_back(ex.extract(d));
  return md::train(xs, ld.labels, std::move(space));
}

double heldout_auc(const md::LogisticModel& m, const lx::Lexicon* lex, const LabeledDocs& ld) {
  ft::Extractor ex = md::make_extractor(m.space, lex);
  std::vector<double> scores;
  scores.reserve(ld.docs.size());
  for (const auto& d : ld.docs) scores.push_back(md::predict_proba(m, ex.extract(d)));
  return st::auc(scores, ld.labels);
}

// ---- criterion 1: statistical oracles ----------------------------------

void run_statistical_oracles(Check& c) {
  // Exact Mann-Whitney equals brute-force enumeration on every tie-free
  // rank configuration with pooled size <= 10.
  std::size_t instances = 0;
  for (int n = 2; n <= 10; ++n) {
    for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
      std::vector<double> xs, ys;
      for (int i = 0; i < n; ++i) {
        (mask >> i & 1u ? xs : ys).push_back(static_cast<double>(i + 1));
      }
      auto got = st::mann_whitney_u(xs, ys, st::TestMethod::Exact);
      double want_u = oracle::mwu_u_pairwise(xs, ys);
      double want_p = oracle::mwu_exact_p_enumerated(xs, ys);
      if (got.statistic != want_u || got.p_value != want_p) {
        c.expect(false, "exact MWU mismatch at n=" + std::to_string(n) +
                            " mask=" + std::to_string(mask) + ": p " +
                            fmtd(got.p_value, 12) + " vs " + fmtd(want_p, 12));
        return;
      }
      ++instances;
    }
  }
  c.note("exact MWU verified on " + std::to_string(instances) + " rank configurations");

  // Holm step-down against hand-computed fixtures, exact arithmetic.
  {
    const std::vector<double> raw = {0.01, 0.04, 0.03};
    auto got = st::holm_correct(raw);
    double a0 = 0.01 * 3.0;
    double a1 = std::max(a0, 0.03 * 2.0);
    double a2 = std::max(a1, 0.04 * 1.0);
    c.expect(got.size() == 3 && got[0] == a0 && got[1] == a2 && got[2] == a1,
             "holm fixture {0.01, 0.04, 0.03} mismatch");
  }
  {
    const std::vector<double> raw = {0.005, 0.011, 0.02, 0.04};
    auto got = st::holm_correct(raw);
    double a0 = 0.005 * 4.0;
    double a1 = std::max(a0, 0.011 * 3.0);
    double a2 = std::max(a1, 0.02 * 2.0);
    double a3 = std::max(a2, 0.04 * 1.0);
    c.expect(got.size() == 4 && got[0] == a0 && got[1] == a1 && got[2] == a2 && got[3] == a3,
             "holm fixture {0.005, 0.011, 0.02, 0.04} mismatch");
  }
  {
    const std::vector<double> raw = {0.5, 0.9};
    auto got = st::holm_correct(raw);
    c.expect(got.size() == 2 && got[0] == 1.0 && got[1] == 1.0, "holm clipping fixture mismatch");
  }

  // Krippendorff's alpha against the coincidence-matrix oracle on five
  // fixtures with missing cells, both metrics, tolerance 1e-10.
  using Row = std::vector<std::optional<int>>;
  const std::optional<int> na;
  std::vector<std::vector<Row>> fixtures = {
      {{1, 1, na}, {2, 2, 2}, {3, 3, 3}, {3, 3, 3}, {2, 2, 2}, {1, 2, 3}, {4, 4, 4}, {1, 1, 2}},
      {{1, 2, na}, {1, 1, 1}, {2, 3, 2}, {4, na, 4}, {1, 1, na}, {2, 2, 2}},
      {{5, 5, 5}, {1, 1, 1}, {3, 3, 3}, {5, 4, 5}, {2, 2, 1}, {1, 2, 1}, {4, 4, na}},
      {{1, 3, na}, {2, na, 2}, {na, 4, 4}, {1, 1, 3}, {3, 3, 2}, {2, 4, 1}, {1, na, 1}},
      {{2, 2, 2, 2}, {1, 1, 3, 3}, {4, 4, 4, na}, {1, 2, 1, 2}, {3, 3, na, na}, {2, 1, 2, 1}},
  };
  for (std::size_t f = 0; f < fixtures.size(); ++f) {
    const auto& rows = fixtures[f];
    std::size_t raters = rows[0].size();
    st::RatingsMatrix m(rows.size(), raters, 1, 5);
    for (std::size_t u = 0; u < rows.size(); ++u) {
      for (std::size_t r = 0; r < raters; ++r) {
        if (rows[u][r]) m.set(u, r, *rows[u][r]);
      }
    }
    for (bool ordinal : {false, true}) {
      double got = st::krippendorff_alpha(
          m, ordinal ? st::AgreementMetric::Ordinal : st::AgreementMetric::Interval);
      double want = oracle::krippendorff_alpha(rows, ordinal);
      c.expect(std::abs(got - want) <= 1e-10,
               "alpha fixture " + std::to_string(f) + (ordinal ? " ordinal" : " interval") +
                   ": " + fmtd(got, 12) + " vs oracle " + fmtd(want, 12));
    }
  }
}

// ---- criterion 2: auc / U identity --------------------------------------

void run_auc_u_identity(Check& c) {
  Rng rng(20260201);
  double worst = 0.0;
  for (int round = 0; round < 1000; ++round) {
    std::size_t n1 = 1 + rng.below(30);
    std::size_t n2 = 1 + rng.below(30);
    std::vector<double> scores;
    std::vector<int> labels;
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < n1 + n2; ++i) {
      // Coarse grid so ties are common.
      double s = static_cast<double>(rng.below(12)) / 4.0;
      bool positive = i < n1;
      scores.push_back(s);
      labels.push_back(positive ? 1 : 0);
      (positive ? xs : ys).push_back(s);
    }
    double u = oracle::mwu_u_pairwise(xs, ys);
    double got = st::auc(scores, labels);
    double want = u / (static_cast<double>(n1) * static_cast<double>(n2));
    worst = std::max(worst, std::abs(got - want));
  }
  c.note("worst |auc - U/(n1*n2)| = " + fmtd(worst, 16));
  c.expect(worst <= 1e-12, "identity violated: worst delta " + fmtd(worst, 16) + " > 1e-12");
}

// ---- criterion 3: gradient check ------------------------------------------

void run_gradient_check(Check& c) {
  Rng rng(444);
  double worst = 0.0;
  for (int round = 0; round < 100; ++round) {
    std::size_t dim = 3 + rng.below(10);
    std::size_t n = 5 + rng.below(36);
    std::vector<ft::FeatureVector> xs(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      xs[i].dimension = static_cast<std::uint32_t>(dim);
      for (std::uint32_t d = 0; d < dim; ++d) {
        if (rng.below(3) == 0) xs[i].entries.push_back({d, rng.normal(0.0, 1.0)});
      }
      labels[i] = static_cast<int>(rng.below(2));
    }
    std::vector<double> w(dim);
    for (double& v : w) v = rng.normal(0.0, 0.8);
    double bias = rng.normal(0.0, 0.5);
    double l2 = 2.0 * rng.uniform();

    std::vector<double> grad;
    double grad_bias = 0.0;
    md::gradient(xs, labels, w, bias, l2, grad, grad_bias);

    const double h = 1e-6;
    double scale = std::abs(grad_bias);
    for (double g : grad) scale = std::max(scale, std::abs(g));
    scale = std::max(scale, 1.0);

    double err = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      std::vector<double> lo = w, hi = w;
      lo[d] -= h;
      hi[d] += h;
      double fd = (md::objective(xs, labels, hi, bias, l2) -
                   md::objective(xs, labels, lo, bias, l2)) /
                  (2.0 * h);
      err = std::max(err, std::abs(fd - grad[d]));
    }
    double fd_bias = (md::objective(xs, labels, w, bias + h, l2) -
                      md::objective(xs, labels, w, bias - h, l2)) /
                     (2.0 * h);
    err = std::max(err, std::abs(fd_bias - grad_bias));
    worst = std::max(worst, err / scale);
  }
  c.note("worst relative gradient error = " + fmtd(worst, 10));
  c.expect(worst <= 1e-5, "gradient error " + fmtd(worst, 10) + " > 1e-5");
}

// ---- criterion 4: classifier recovery -------------------------------------

sy::SyntheticSpec classifier_spec(std::uint64_t n_docs, std::uint64_t seed) {
  sy::SyntheticSpec spec;
  spec.n_docs = n_docs;
  spec.n_users = n_docs / 20;
  spec.n_subreddits = 8;
  spec.category_multipliers = planted_multipliers();
  spec.seed = seed;
  return spec;
}

void run_classifier_recovery(Check& c) {
  auto lex = lx::Lexicon::load(data_file("demo_lexicon.txt"));

  // In-domain: 15-fold mean AUC at least 0.90 for LING and BOW+LING on
  // a 5000-document corpus with the planted lexical signal.
  auto mc = generate(classifier_spec(5000, 101), lex);
  auto ld = quartile_docs(mc);
  md::CvOptions copt;
  copt.folds = 15;
  copt.seed = 7;
  auto ling = md::cross_validate(ld.docs, ld.labels, ft::Family::LING, &lex, copt);
  auto bow_ling = md::cross_validate(ld.docs, ld.labels, ft::Family::BOW_LING, &lex, copt);
  c.note("15-fold mean AUC: LING " + fmtd(ling.mean_auc) + ", BOW+LING " +
         fmtd(bow_ling.mean_auc) + " (threshold 0.90)");
  c.expect(ling.mean_auc >= 0.90, "LING mean AUC " + fmtd(ling.mean_auc) + " < 0.90");
  c.expect(bow_ling.mean_auc >= 0.90, "BOW+LING mean AUC " + fmtd(bow_ling.mean_auc) + " < 0.90");

  // Domain shift: train BOW and BOW+LING in-domain, evaluate on a
  // held-out corpus whose topic vocabulary is disjoint. The lexicon
  // families must win at least 8 of 10 seeds.
  int wins = 0;
  const std::array<std::uint64_t, 10> seeds = {201, 202, 203, 204, 205, 206, 207, 208, 209, 210};
  for (std::uint64_t seed : seeds) {
    auto train_mc = generate(classifier_spec(1500, seed), lex);
    auto train_ld = quartile_docs(train_mc);
    auto shifted_spec = classifier_spec(800, seed + 5000);
    shifted_spec.vocabulary_shift = 1000;
    auto held_mc = generate(shifted_spec, lex);
    auto held_ld = quartile_docs(held_mc);

    auto bow = train_family(ft::Family::BOW, train_ld, nullptr);
    auto both = train_family(ft::Family::BOW_LING, train_ld, &lex);
    double auc_bow = heldout_auc(bow, nullptr, held_ld);
    double auc_both = heldout_auc(both, &lex, held_ld);
    if (auc_both >= auc_bow) ++wins;
  }
  c.note("shifted held-out: BOW+LING beat or tied BOW in " + std::to_string(wins) +
         "/10 seeds (threshold 8)");
  c.expect(wins >= 8, "BOW+LING won only " + std::to_string(wins) + "/10 shifted seeds");
}

// ---- criterion 5: odds-table recovery --------------------------------------

void run_odds_recovery(Check& c) {
  auto lex = lx::Lexicon::load(data_file("demo_lexicon.txt"));
  const std::vector<std::string> planted = {"certainty", "negative_emotion", "swear"};
  const std::array<std::uint64_t, 10> seeds = {301, 302, 303, 304, 305, 306, 307, 308, 309, 310};

  std::map<std::string, int> null_hits;
  int planted_ok_seeds = 0;
  for (std::uint64_t seed : seeds) {
    sy::SyntheticSpec spec;
    spec.n_docs = 1200;
    spec.n_users = 60;
    spec.seed = seed;
    for (const auto& name : planted) spec.category_multipliers[name] = 3.0;
    auto mc = generate(spec, lex);
    auto annotated = cp::join_annotations(mc.ratings, mc.posts);
    auto split = cp::quartile_split(annotated);
    std::vector<std::string> dog, non;
    for (const auto& a : split.dogmatic) dog.push_back(a.post.body);
    for (const auto& a : split.nondogmatic) non.push_back(a.post.body);
    auto rows = an::odds_table(dog, non, lex, 0.05);

    bool all_planted = true;
    for (const auto& row : rows) {
      bool is_planted =
          std::find(planted.begin(), planted.end(), row.category) != planted.end();
      if (is_planted) {
        if (!(row.odds_ratio > 1.0 && row.significant)) all_planted = false;
      } else if (row.significant) {
        ++null_hits[row.category];
      }
    }
    if (all_planted) ++planted_ok_seeds;
  }
  int worst_null = 0;
  std::string worst_name = "-";
  for (const auto& [name, hits] : null_hits) {
    if (hits > worst_null) {
      worst_null = hits;
      worst_name = name;
    }
  }
  c.note("planted categories recovered in " + std::to_string(planted_ok_seeds) +
         "/10 seeds (threshold 9); worst null category '" + worst_name + "' flagged " +
         std::to_string(worst_null) + "/10 (threshold 1)");
  c.expect(planted_ok_seeds >= 9,
           "planted categories recovered in only " + std::to_string(planted_ok_seeds) + "/10");
  c.expect(worst_null <= 1, "null category '" + worst_name + "' significant in " +
                                std::to_string(worst_null) + "/10 seeds");
}

// ---- criterion 6: behavior regression recovery ------------------------------

void run_behavior_recovery(Check& c) {
  auto lex = lx::Lexicon::load(data_file("demo_lexicon.txt"));
  sy::SyntheticSpec spec;
  spec.n_docs = 40000;
  spec.n_users = 10000;
  spec.n_subreddits = 12;
  spec.behavior_activity = 0.06;
  spec.behavior_breadth = -0.05;
  spec.behavior_focus = 0.05;
  spec.behavior_engagement = -0.04;
  spec.user_noise = 0.03;
  spec.post_noise = 0.10;
  spec.lexicon_token_rate = 0.0;
  spec.topic_token_rate = 0.0;
  spec.doc_tokens_min = 3;
  spec.doc_tokens_max = 6;
  spec.seed = 401;
  auto mc = generate(spec, lex);

  std::vector<an::ScoredPost> scored(mc.posts.size());
  for (std::size_t i = 0; i < mc.posts.size(); ++i) {
    scored[i].post = mc.posts[i];
    scored[i].p_dogmatic = mc.scores[i];
  }
  auto fit = an::behavior_regression(scored);
  c.note("coefficients (activity, breadth, focus, engagement) = " + fmtd(fit.coefficients[1]) +
         ", " + fmtd(fit.coefficients[2]) + ", " + fmtd(fit.coefficients[3]) + ", " +
         fmtd(fit.coefficients[4]) + " over " + std::to_string(fit.n) + " users");
  c.expect(fit.n == 10000, "expected 10000 users, regressed " + std::to_string(fit.n));
  c.expect(fit.coefficients[1] > 0.0 && fit.p_values[1] < 0.01,
           "activity sign/significance not recovered");
  c.expect(fit.coefficients[2] < 0.0 && fit.p_values[2] < 0.01,
           "breadth sign/significance not recovered");
  c.expect(fit.coefficients[3] > 0.0 && fit.p_values[3] < 0.01,
           "focus sign/significance not recovered");
  c.expect(fit.coefficients[4] < 0.0 && fit.p_values[4] < 0.01,
           "engagement sign/significance not recovered");
}

// ---- criterion 7: triple contagion recovery ----------------------------------

void run_triple_recovery(Check& c) {
  auto lex = lx::Lexicon::load(data_file("demo_lexicon.txt"));
  sy::SyntheticSpec spec;
  spec.n_docs = 0;
  spec.n_triples = 100000;
  spec.contagion_intercept = 0.2;
  spec.contagion_a1 = 0.5;
  spec.contagion_b = 0.3;
  spec.triple_noise = 0.05;
  spec.lexicon_token_rate = 0.0;
  spec.topic_token_rate = 0.0;
  spec.doc_tokens_min = 3;
  spec.doc_tokens_max = 6;
  spec.seed = 402;
  auto mc = generate(spec, lex);

  std::map<std::string, double> score;
  for (std::size_t i = 0; i < mc.posts.size(); ++i) score[mc.posts[i].id] = mc.scores[i];
  auto triples = an::extract_triples(mc.posts);
  mc.posts.clear();
  mc.posts.shrink_to_fit();
  c.expect(triples.size() == 100000,
           "expected 100000 triples, extracted " + std::to_string(triples.size()));

  auto by_id = [&](const cp::Post& p) { return score.at(p.id); };
  auto fit = an::triple_regression(triples, by_id, false);
  double b = fit.coefficients[2];
  c.note("planted B coefficient 0.3 estimated as " + fmtd(b) + " (p " +
         fmtd(fit.p_values[2], 6) + "), accepted band [0.24, 0.36]");
  c.expect(b >= 0.24 && b <= 0.36, "B estimate " + fmtd(b) + " outside +-20% of 0.3");
  c.expect(fit.p_values[2] < 1e-3, "B p-value " + fmtd(fit.p_values[2], 6) + " >= 1e-3");

  // Breaking the A-B link by permuting B scores across triples must
  // kill the effect in at least 9 of 10 fixed shuffles.
  std::vector<double> b_scores;
  b_scores.reserve(triples.size());
  for (const auto& t : triples) b_scores.push_back(score.at(t.b.id));
  int nonsig = 0;
  for (std::uint64_t perm_seed = 1; perm_seed <= 10; ++perm_seed) {
    std::vector<double> shuffled = b_scores;
    Rng rng(perm_seed);
    rng.shuffle(shuffled);
    std::map<std::string, double> permuted;
    for (std::size_t i = 0; i < triples.size(); ++i) permuted[triples[i].b.id] = shuffled[i];
    auto null_fit = an::triple_regression(
        triples,
        [&](const cp::Post& p) {
          auto it = permuted.find(p.id);
          return it != permuted.end() ? it->second : score.at(p.id);
        },
        false);
    if (null_fit.p_values[2] >= 0.05) ++nonsig;
  }
  c.note("permutation-null B non-significant in " + std::to_string(nonsig) +
         "/10 shuffles (threshold 9)");
  c.expect(nonsig >= 9, "permutation-null B significant in " + std::to_string(10 - nonsig) +
                            "/10 shuffles");
}

// ---- criterion 8: cluster recovery --------------------------------------------

void run_cluster_recovery(Check& c) {
  auto lex = lx::Lexicon::load(data_file("demo_lexicon.txt"));
  sy::SyntheticSpec spec;
  spec.n_docs = 18000;
  spec.n_users = 400;
  spec.n_subreddits = 20;
  spec.n_blocks = 2;
  spec.block_affinity = 0.95;
  spec.base_dogmatism = 0.6;
  spec.lexicon_token_rate = 0.0;
  spec.topic_token_rate = 0.0;
  spec.doc_tokens_min = 3;
  spec.doc_tokens_max = 6;
  spec.seed = 403;
  auto mc = generate(spec, lex);

  std::vector<an::ScoredPost> scored(mc.posts.size());
  for (std::size_t i = 0; i < mc.posts.size(); ++i) {
    scored[i].post = mc.posts[i];
    scored[i].p_dogmatic = mc.scores[i];
  }
  auto profiles = an::build_profiles(scored, 5, 0.5);
  auto pairs = an::dogmatic_pair_counts(profiles);
  auto neighbors = an::cluster_by_association(pairs, 1);

  auto names = sy::subreddit_names(spec);
  int within = 0, covered = 0;
  for (std::uint64_t i = 0; i < spec.n_subreddits; ++i) {
    auto it = neighbors.find(names[i]);
    if (it == neighbors.end() || it->second.empty()) continue;
    ++covered;
    const std::string& top = it->second[0].neighbor;
    auto top_idx = std::find(names.begin(), names.end(), top) - names.begin();
    if (sy::subreddit_block(spec, i) ==
        sy::subreddit_block(spec, static_cast<std::uint64_t>(top_idx))) {
      ++within;
    }
  }
  c.note("top-1 PMI neighbor within-block for " + std::to_string(within) + "/" +
         std::to_string(covered) + " covered subreddits of " +
         std::to_string(spec.n_subreddits) + " (threshold 18/20)");
  c.expect(covered == 20, "only " + std::to_string(covered) + "/20 subreddits have neighbors");
  c.expect(within >= 18, "within-block top-1 for only " + std::to_string(within) + "/20");
}

// ---- criterion 9: determinism and scale -----------------------------------------

struct ChildReport {
  std::string digest;
  std::uint64_t bytes = 0;
  std::uint64_t scored = 0;
  std::uint64_t maxrss_kb = 0;
  bool ok = false;
};

ChildReport run_child(const std::string& model_path, const std::string& corpus_path,
                      int workers) {
  ChildReport rep;
  auto exe = std::filesystem::read_symlink("/proc/self/exe").string();
  auto out_path = (g_workdir / ("child_" + std::to_string(workers) + ".txt")).string();
  std::string cmd = exe + " --score-child " + model_path + " " + corpus_path + " " +
                    std::to_string(workers) + " >" + out_path + " 2>&1";
  if (std::system(cmd.c_str()) != 0) return rep;
  std::ifstream in(out_path);
  std::string key;
  while (in >> key) {
    auto eq = key.find('=');
    if (eq == std::string::npos) continue;
    std::string name = key.substr(0, eq);
    std::string value = key.substr(eq + 1);
    if (name == "digest") rep.digest = value;
    if (name == "bytes") rep.bytes = std::stoull(value);
    if (name == "scored") rep.scored = std::stoull(value);
    if (name == "maxrss_kb") rep.maxrss_kb = std::stoull(value);
  }
  rep.ok = !rep.digest.empty();
  return rep;
}

void run_determinism_scale(Check& c) {
  auto lex = lx::Lexicon::load(data_file("demo_lexicon.txt"));

  // A small training corpus fits a model whose vocabulary covers the
  // same synthetic token distribution the big corpus uses.
  sy::SyntheticSpec small;
  small.n_docs = 2000;
  small.n_users = 100;
  small.doc_tokens_min = 6;
  small.doc_tokens_max = 12;
  small.seed = 404;
  auto train_mc = generate(small, lex);
  auto train_ld = quartile_docs(train_mc);
  auto model = train_family(ft::Family::BOW, train_ld, nullptr);
  auto model_path = (g_workdir / "scale.model").string();
  md::save_model(model, model_path);

  sy::SyntheticSpec big = small;
  big.n_docs = 1000000;
  big.n_users = 20000;
  big.n_subreddits = 50;
  big.seed = 405;
  auto corpus_path = (g_workdir / "scale_corpus.jsonl").string();
  {
    std::ofstream out(corpus_path, std::ios::binary);
    sy::generate_synthetic(
        big, lex, [&](const an::ScoredPost& sp) { out << cp::serialize_post(sp.post) << '\n'; },
        [](const std::string&, const std::array<int, 3>&) {});
    out.flush();
    if (!out) {
      c.expect(false, "failed writing the million-post corpus");
      return;
    }
  }
  auto corpus_bytes = std::filesystem::file_size(corpus_path);
  c.note("corpus: 1000000 posts, " + std::to_string(corpus_bytes / (1024 * 1024)) + " MiB");

  auto one = run_child(model_path, corpus_path, 1);
  auto eight = run_child(model_path, corpus_path, 8);
  std::filesystem::remove(corpus_path);
  c.expect(one.ok, "single-worker scoring child failed");
  c.expect(eight.ok, "eight-worker scoring child failed");
  if (!one.ok || !eight.ok) return;

  c.note("digests: workers=1 " + one.digest + ", workers=8 " + eight.digest + "; " +
         std::to_string(one.scored) + " posts scored");
  c.expect(one.scored == 1000000, "scored " + std::to_string(one.scored) + " != 1000000");
  c.expect(one.digest == eight.digest && one.bytes == eight.bytes,
           "outputs differ between worker counts");

  std::uint64_t limit_kb = std::max<std::uint64_t>(64 * 1024, corpus_bytes / 3 / 1024);
  std::uint64_t peak_kb = std::max(one.maxrss_kb, eight.maxrss_kb);
  c.note("peak scoring RSS " + std::to_string(peak_kb / 1024) + " MiB (limit " +
         std::to_string(limit_kb / 1024) + " MiB; corpus " +
         std::to_string(corpus_bytes / (1024 * 1024)) + " MiB)");
  c.expect(peak_kb < limit_kb, "peak RSS " + std::to_string(peak_kb / 1024) +
                                   " MiB not sublinear in the corpus size");
}

// ---- criterion 10: reference corpus reproduction --------------------------------

void run_reference_reproduction(Check& c, bool& skipped) {
  const char* corpus_env = std::getenv("DOGMA_REFERENCE_CORPUS");
  const char* ann_env = std::getenv("DOGMA_REFERENCE_ANNOTATIONS");
  const char* lex_env = std::getenv("DOGMA_REFERENCE_LEXICON");
  if (!corpus_env || !ann_env || !lex_env) {
    skipped = true;
    c.note("SKIPPED: set DOGMA_REFERENCE_CORPUS, DOGMA_REFERENCE_ANNOTATIONS, DOGMA_REFERENCE_LEXICON "
           "to the released annotated corpus and a compatible lexicon");
    return;
  }

  auto records = cp::load_ratings(ann_env);
  st::RatingsMatrix m(records.size(), 3, 1, 5);
  for (std::size_t u = 0; u < records.size(); ++u) {
    for (std::size_t r = 0; r < 3; ++r) m.set(u, r, records[u].ratings[r]);
  }
  double alpha_overall = st::krippendorff_alpha(m, st::AgreementMetric::Interval);

  std::vector<int> aggregates;
  for (const auto& r : records) aggregates.push_back(r.aggregate);
  auto cuts = cp::quartile_cuts(aggregates);
  std::vector<cp::AnnotationRecord> extremes;
  for (const auto& r : records) {
    if (r.aggregate >= cuts.upper_cut || r.aggregate <= cuts.lower_cut) extremes.push_back(r);
  }
  st::RatingsMatrix me(extremes.size(), 3, 1, 5);
  for (std::size_t u = 0; u < extremes.size(); ++u) {
    for (std::size_t r = 0; r < 3; ++r) me.set(u, r, extremes[u].ratings[r]);
  }
  double alpha_extremes = st::krippendorff_alpha(me, st::AgreementMetric::Ordinal);

  c.note("alpha overall " + fmtd(alpha_overall) + " (expect 0.44 +- 0.03), extremes " +
         fmtd(alpha_extremes) + " (expect 0.69 +- 0.03)");
  c.expect(std::abs(alpha_overall - 0.44) <= 0.03,
           "alpha overall " + fmtd(alpha_overall) + " outside 0.44 +- 0.03");
  c.expect(std::abs(alpha_extremes - 0.69) <= 0.03,
           "alpha extremes " + fmtd(alpha_extremes) + " outside 0.69 +- 0.03");

  auto lex = lx::Lexicon::load(lex_env);
  auto posts = cp::load_posts(corpus_env);
  auto annotated = cp::join_annotations(records, posts);
  auto split = cp::quartile_split(annotated);
  LabeledDocs ld;
  for (const auto& a : split.dogmatic) {
    ld.docs.push_back(a.post.body);
    ld.labels.push_back(1);
  }
  for (const auto& a : split.nondogmatic) {
    ld.docs.push_back(a.post.body);
    ld.labels.push_back(0);
  }
  md::CvOptions copt;
  copt.folds = 15;
  copt.seed = 0;
  struct Target {
    ft::Family family;
    const char* name;
    double expect;
  };
  const std::vector<Target> targets = {{ft::Family::BOW, "BOW", 0.853},
                                       {ft::Family::LING, "LING", 0.801},
                                       {ft::Family::BOW_LING, "BOW+LING", 0.881}};
  for (const auto& t : targets) {
    auto report = md::cross_validate(ld.docs, ld.labels, t.family,
                                     ft::family_uses_lexicon(t.family) ? &lex : nullptr, copt);
    c.note(std::string(t.name) + " 15-fold AUC " + fmtd(report.mean_auc) + " (expect " +
           fmtd(t.expect, 3) + " +- 0.05)");
    c.expect(std::abs(report.mean_auc - t.expect) <= 0.05,
             std::string(t.name) + " AUC " + fmtd(report.mean_auc) + " outside " +
                 fmtd(t.expect, 3) + " +- 0.05");
  }
}

// ---- scoring child -----------------------------------------------------------

class HashBuf : public std::streambuf {
 public:
  std::uint64_t digest = 1469598103934665603ull;
  std::uint64_t bytes = 0;

 protected:
  int overflow(int ch) override {
    if (ch != traits_type::eof()) step(static_cast<unsigned char>(ch));
    return ch;
  }
  std::streamsize xsputn(const char* s, std::streamsize n) override {
    for (std::streamsize i = 0; i < n; ++i) step(static_cast<unsigned char>(s[i]));
    return n;
  }

 private:
  void step(unsigned char c) {
    digest = (digest ^ c) * 1099511628211ull;
    ++bytes;
  }
};

int score_child_main(int argc, char** argv) {
  if (argc != 5) {
    std::cerr << "usage: --score-child <model> <corpus> <workers>\n";
    return 1;
  }
  try {
    auto model = md::load_model(argv[2]);
    an::Scorer scorer(model, nullptr);
    std::ifstream in(argv[3], std::ios::binary);
    if (!in) {
      std::cerr << "cannot open " << argv[3] << "\n";
      return 1;
    }
    HashBuf buf;
    std::ostream out(&buf);
    an::StreamOptions opt;
    opt.workers = static_cast<std::size_t>(std::stoul(argv[4]));
    opt.source_name = argv[3];
    auto stats = an::score_stream(scorer, in, out, opt);
    struct rusage ru {};
    getrusage(RUSAGE_SELF, &ru);
    std::ostringstream hex;
    hex << std::hex << buf.digest;
    std::cout << "digest=" << hex.str() << " bytes=" << buf.bytes << " scored=" << stats.scored
              << " maxrss_kb=" << ru.ru_maxrss << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "score child failed: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1 && std::string(argv[1]) == "--score-child") {
    return score_child_main(argc, argv);
  }

  g_workdir = std::filesystem::temp_directory_path() /
              ("dogma_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(g_workdir);

  std::vector<Criterion> criteria = {
      {1, "statistical-oracles", 10.0, run_statistical_oracles},
      {2, "auc-u-identity", 5.0, run_auc_u_identity},
      {3, "gradient-check", 10.0, run_gradient_check},
      {4, "classifier-recovery", 120.0, run_classifier_recovery},
      {5, "odds-table-recovery", 60.0, run_odds_recovery},
      {6, "behavior-regression-recovery", 30.0, run_behavior_recovery},
      {7, "triple-contagion-recovery", 60.0, run_triple_recovery},
      {8, "cluster-recovery", 30.0, run_cluster_recovery},
      {9, "determinism-and-scale", 300.0, run_determinism_scale},
  };

  int passed = 0, failed = 0, skipped = 0;
  auto report = [&](int id, const std::string& name, const Check& c, bool skip, double secs,
                    double budget) {
    std::vector<std::string> failures = c.failures;
    if (budget > 0.0 && secs > budget) {
      failures.push_back("runtime " + fmtd(secs, 1) + "s exceeded the " + fmtd(budget, 0) +
                         "s budget");
    }
    const char* verdict = skip ? "[SKIP]" : failures.empty() ? "[PASS]" : "[FAIL]";
    std::cout << verdict << " " << id << ". " << name << "  " << fmtd(secs, 1) << "s\n";
    for (const auto& note : c.notes) std::cout << "       " << note << "\n";
    for (const auto& f : failures) std::cout << "       FAIL: " << f << "\n";
    (skip ? skipped : failures.empty() ? passed : failed) += 1;
  };

  for (const auto& criterion : criteria) {
    Check c;
    auto t0 = std::chrono::steady_clock::now();
    try {
      criterion.run(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(criterion.id, criterion.name, c, false, secs, criterion.budget_seconds);
  }

  {
    Check c;
    bool skip = false;
    auto t0 = std::chrono::steady_clock::now();
    try {
      run_reference_reproduction(c, skip);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(10, "reference-corpus-reproduction", c, skip, secs, 0.0);
  }

  std::error_code ec;
  std::filesystem::remove_all(g_workdir, ec);

  std::cout << "RESULT: " << passed << " passed, " << failed << " failed, " << skipped
            << " skipped\n";
  return failed == 0 ? 0 : 1;
}
