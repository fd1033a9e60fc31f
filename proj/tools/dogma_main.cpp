// dogma: detect dogmatic language in social-media posts.
//
// Subcommands cover the full pipeline: annotation agreement, lexicon
// odds tables, classifier training and evaluation, bulk scoring, and
// the corpus-scale analyses (subreddit rankings, co-dogmatism clusters,
// user behavior regression, conversation-triple contagion), plus a
// synthetic corpus generator with recorded ground truth.
//
// Exit codes: 0 success, 1 internal error, 2 usage or input error.

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dogma/analysis.hpp"
#include "dogma/corpus.hpp"
#include "dogma/error.hpp"
#include "dogma/features.hpp"
#include "dogma/format.hpp"
#include "dogma/lexicon.hpp"
#include "dogma/model.hpp"
#include "dogma/stats.hpp"
#include "dogma/synth.hpp"

namespace {

using dogma::Error;
using dogma::InputError;
namespace analysis = dogma::analysis;
namespace corpus = dogma::corpus;
namespace features = dogma::features;
namespace lexicon = dogma::lexicon;
namespace model = dogma::model;
namespace stats = dogma::stats;
namespace synth = dogma::synth;

std::string fmt6(double v) { return dogma::fmt_double(v, 6); }

// ---------------------------------------------------------------------
// Flat key=value config files. Precedence: command-line flag (or its
// environment variable) > config file > built-in default. A file may
// hold keys for several subcommands; each subcommand applies only the
// keys it understands.

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    std::size_t e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos || eq == 0)
      throw InputError(path + ":" + std::to_string(line_no) +
                       ": expected key=value, got '" + t + "'");
    std::string key = trim(t.substr(0, eq));
    kv[key] = trim(t.substr(eq + 1));
  }
  return kv;
}

void parse_config_value(const std::string& key, const std::string& raw, std::string& out) {
  (void)key;
  out = raw;
}

void parse_config_value(const std::string& key, const std::string& raw, bool& out) {
  if (raw == "1" || raw == "true" || raw == "yes" || raw == "on") {
    out = true;
  } else if (raw == "0" || raw == "false" || raw == "no" || raw == "off") {
    out = false;
  } else {
    throw InputError("config key '" + key + "': expected a boolean, got '" + raw + "'");
  }
}

template <class T>
void parse_config_value(const std::string& key, const std::string& raw, T& out) {
  std::istringstream ss(raw);
  T value{};
  ss >> value;
  if (ss.fail() || !(ss >> std::ws).eof())
    throw InputError("config key '" + key + "': cannot parse '" + raw + "'");
  out = value;
}

template <class T>
void parse_config_value(const std::string& key, const std::string& raw, std::optional<T>& out) {
  T value{};
  parse_config_value(key, raw, value);
  out = value;
}

class ConfigBinding {
 public:
  void attach(CLI::App* cmd) {
    cmd->add_option("--config", path_,
                    "Flat key=value config file; flags and environment variables win");
  }

  template <class T>
  CLI::Option* bind(CLI::Option* opt, T* target) {
    const std::string key = opt->get_lnames().at(0);
    entries_.push_back({opt, key, [key, target](const std::string& raw) {
                          parse_config_value(key, raw, *target);
                        }});
    return opt;
  }

  CLI::Option* bind_custom(CLI::Option* opt, std::function<void(const std::string&)> fn) {
    entries_.push_back({opt, opt->get_lnames().at(0), std::move(fn)});
    return opt;
  }

  void apply() const {
    if (path_.empty()) return;
    auto kv = read_config_file(path_);
    for (const Entry& e : entries_) {
      if (e.opt->count() > 0) continue;
      auto it = kv.find(e.key);
      if (it != kv.end()) e.apply(it->second);
    }
  }

 private:
  struct Entry {
    CLI::Option* opt;
    std::string key;
    std::function<void(const std::string&)> apply;
  };
  std::string path_;
  std::vector<Entry> entries_;
};

void require_path(const std::string& value, const char* flag) {
  if (value.empty())
    throw InputError(std::string("missing required ") + flag + " (flag or config key)");
}

// ---------------------------------------------------------------------
// Output plumbing. "-" means stdout; analysis tables are TSV by
// default, one JSON object per row behind --jsonl.

class OutputSink {
 public:
  explicit OutputSink(const std::string& path) {
    if (path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw InputError("cannot open output file: " + path);
      os_ = &file_;
    }
  }
  std::ostream& stream() { return *os_; }
  void finish(const std::string& path) {
    os_->flush();
    if (!*os_) throw Error("failed writing output to " + (path == "-" ? "stdout" : path));
  }

 private:
  std::ofstream file_;
  std::ostream* os_ = &std::cout;
};

struct TableOpts {
  std::string output = "-";
  bool jsonl = false;
};

void add_table_opts(CLI::App* cmd, ConfigBinding& cfg, TableOpts& opts) {
  cfg.bind(cmd->add_option("--output", opts.output, "Output file, '-' for stdout"),
           &opts.output);
  cfg.bind(cmd->add_flag("--jsonl", opts.jsonl, "Emit JSON lines instead of TSV"),
           &opts.jsonl);
}

void write_tsv_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out << '\t';
    out << cells[i];
  }
  out << '\n';
}

// Key-value report shared by single-object outputs (agreement, train,
// synth, enrichment): TSV gets key/value rows, JSONL one object.
class KvReport {
 public:
  void add(const std::string& key, std::string value) {
    j_[key] = value;
    rows_.push_back({key, std::move(value)});
  }
  void add(const std::string& key, double value) {
    j_[key] = value;
    rows_.push_back({key, fmt6(value)});
  }
  void add(const std::string& key, std::uint64_t value) {
    j_[key] = value;
    rows_.push_back({key, std::to_string(value)});
  }
  void add(const std::string& key, std::int64_t value) {
    j_[key] = value;
    rows_.push_back({key, std::to_string(value)});
  }
  void add(const std::string& key, int value) { add(key, static_cast<std::int64_t>(value)); }
  void add(const std::string& key, bool value) {
    j_[key] = value;
    rows_.push_back({key, value ? "true" : "false"});
  }
  void write(std::ostream& out, bool jsonl) const {
    if (jsonl) {
      out << j_.dump() << '\n';
      return;
    }
    write_tsv_row(out, {"key", "value"});
    for (const auto& row : rows_) write_tsv_row(out, {row.first, row.second});
  }

 private:
  nlohmann::ordered_json j_ = nlohmann::ordered_json::object();
  std::vector<std::pair<std::string, std::string>> rows_;
};

// ---------------------------------------------------------------------
// Shared input plumbing.

struct CorpusOpts {
  std::string corpus;
  std::string annotations;
  bool skip_bad = false;
};

void add_corpus_opts(CLI::App* cmd, ConfigBinding& cfg, CorpusOpts& opts) {
  cfg.bind(cmd->add_option("--corpus", opts.corpus, "Posts file, one JSON object per line"),
           &opts.corpus);
  cfg.bind(cmd->add_option("--annotations", opts.annotations,
                           "Annotations file: {\"id\", \"ratings\": [r1,r2,r3]} per line"),
           &opts.annotations);
  cfg.bind(cmd->add_flag("--skip-bad", opts.skip_bad,
                         "Skip malformed corpus lines instead of aborting"),
           &opts.skip_bad);
}

corpus::ParseOptions parse_options(const CorpusOpts& opts) {
  corpus::ParseOptions p;
  p.policy = opts.skip_bad ? corpus::OnBadLine::Skip : corpus::OnBadLine::Abort;
  return p;
}

// Quartile split controls shared by odds/train/eval. Explicit cuts
// override the computed quartiles; the optional length filter keeps
// only bodies of 300..400 scalar values (annotation-time bounds).
struct SplitOpts {
  std::optional<int> lower_cut;
  std::optional<int> upper_cut;
  bool filter_length = false;
  std::uint64_t min_length = 300;
  std::uint64_t max_length = 400;
};

void add_split_opts(CLI::App* cmd, ConfigBinding& cfg, SplitOpts& opts) {
  cfg.bind(cmd->add_option("--lower-cut", opts.lower_cut,
                           "Aggregate <= this is nondogmatic (needs --upper-cut)"),
           &opts.lower_cut);
  cfg.bind(cmd->add_option("--upper-cut", opts.upper_cut,
                           "Aggregate >= this is dogmatic (needs --lower-cut)"),
           &opts.upper_cut);
  cfg.bind(cmd->add_flag("--filter-length", opts.filter_length,
                         "Keep only bodies of --min-length..--max-length characters"),
           &opts.filter_length);
  cfg.bind(cmd->add_option("--min-length", opts.min_length, "Length filter lower bound"),
           &opts.min_length);
  cfg.bind(cmd->add_option("--max-length", opts.max_length, "Length filter upper bound"),
           &opts.max_length);
}

std::vector<corpus::AnnotatedComment> load_annotated(const CorpusOpts& copts,
                                                     const SplitOpts& sopts) {
  require_path(copts.corpus, "--corpus");
  require_path(copts.annotations, "--annotations");
  auto posts = corpus::load_posts(copts.corpus, parse_options(copts));
  auto annotated = corpus::load_annotations(copts.annotations, posts);
  if (sopts.filter_length) {
    std::erase_if(annotated, [&](const corpus::AnnotatedComment& a) {
      return !corpus::body_length_between(a.post, sopts.min_length, sopts.max_length);
    });
  }
  return annotated;
}

corpus::LabeledSplit make_split(const std::vector<corpus::AnnotatedComment>& annotated,
                                const SplitOpts& opts) {
  if (opts.lower_cut.has_value() != opts.upper_cut.has_value())
    throw InputError("--lower-cut and --upper-cut must be given together");
  if (opts.lower_cut)
    return corpus::split_by_cuts(annotated, {*opts.lower_cut, *opts.upper_cut});
  return corpus::quartile_split(annotated);
}

std::vector<analysis::ScoredPost> load_scored_any(const std::string& path,
                                                  corpus::ParseOptions options) {
  if (path != "-") return analysis::load_scored(path, options);
  std::vector<analysis::ScoredPost> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(std::cin, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      out.push_back(analysis::parse_scored_line(line, options.allow_empty_body));
    } catch (const InputError& e) {
      if (options.policy == corpus::OnBadLine::Abort)
        throw InputError("stdin:" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

struct ScoredOpts {
  std::string scored;
  bool skip_bad = false;
};

void add_scored_opts(CLI::App* cmd, ConfigBinding& cfg, ScoredOpts& opts) {
  cfg.bind(cmd->add_option("--scored", opts.scored,
                           "Scored corpus (posts with p_dogmatic), '-' for stdin"),
           &opts.scored);
  cfg.bind(cmd->add_flag("--skip-bad", opts.skip_bad,
                         "Skip malformed lines instead of aborting"),
           &opts.skip_bad);
}

std::vector<analysis::ScoredPost> load_scored_opts(const ScoredOpts& opts) {
  require_path(opts.scored, "--scored");
  corpus::ParseOptions p;
  p.policy = opts.skip_bad ? corpus::OnBadLine::Skip : corpus::OnBadLine::Abort;
  return load_scored_any(opts.scored, p);
}

features::Family parse_family(const std::string& name) {
  auto fam = features::family_from_name(name);
  if (!fam)
    throw InputError("unknown feature family '" + name +
                     "'; expected BOW, SENT, LING, BOW+SENT, or BOW+LING");
  return *fam;
}

lexicon::Lexicon load_required_lexicon(const std::string& path, features::Family family) {
  if (path.empty())
    throw InputError("--lexicon is required for " +
                     std::string(features::family_name(family)) + " features");
  return lexicon::Lexicon::load(path);
}

// ---------------------------------------------------------------------
// agreement

struct AgreementOpts {
  ConfigBinding cfg;
  TableOpts table;
  std::string annotations;
  std::string metric = "interval";
};

void run_agreement(const AgreementOpts& o) {
  require_path(o.annotations, "--annotations");
  stats::AgreementMetric metric;
  if (o.metric == "interval") {
    metric = stats::AgreementMetric::Interval;
  } else if (o.metric == "ordinal") {
    metric = stats::AgreementMetric::Ordinal;
  } else {
    throw InputError("unknown agreement metric '" + o.metric +
                     "'; expected interval or ordinal");
  }

  auto records = corpus::load_ratings(o.annotations);
  if (records.empty()) throw InputError("no annotations in " + o.annotations);

  auto fill = [](const std::vector<corpus::AnnotationRecord>& recs) {
    stats::RatingsMatrix m(recs.size(), 3, 1, 5);
    for (std::size_t u = 0; u < recs.size(); ++u)
      for (std::size_t r = 0; r < 3; ++r) m.set(u, r, recs[u].ratings[r]);
    return m;
  };

  double alpha_overall = stats::krippendorff_alpha(fill(records), metric);

  std::vector<int> aggregates;
  aggregates.reserve(records.size());
  for (const auto& r : records) aggregates.push_back(r.aggregate);
  corpus::QuartileCuts cuts = corpus::quartile_cuts(aggregates);
  std::vector<corpus::AnnotationRecord> extremes;
  for (const auto& r : records)
    if (r.aggregate >= cuts.upper_cut || r.aggregate <= cuts.lower_cut) extremes.push_back(r);
  double alpha_extremes = stats::krippendorff_alpha(fill(extremes), metric);

  KvReport report;
  report.add("metric", o.metric);
  report.add("alpha_overall", alpha_overall);
  report.add("alpha_extremes", alpha_extremes);
  report.add("lower_cut", cuts.lower_cut);
  report.add("upper_cut", cuts.upper_cut);
  report.add("units", static_cast<std::uint64_t>(records.size()));
  report.add("extreme_units", static_cast<std::uint64_t>(extremes.size()));

  OutputSink sink(o.table.output);
  report.write(sink.stream(), o.table.jsonl);
  sink.finish(o.table.output);
}

// ---------------------------------------------------------------------
// odds

struct OddsOpts {
  ConfigBinding cfg;
  TableOpts table;
  CorpusOpts corpus;
  SplitOpts split;
  std::string lexicon;
  double alpha = 0.05;
};

void run_odds(const OddsOpts& o) {
  require_path(o.lexicon, "--lexicon");
  auto lex = lexicon::Lexicon::load(o.lexicon);
  auto annotated = load_annotated(o.corpus, o.split);
  auto split = make_split(annotated, o.split);

  std::vector<std::string> dog, non;
  for (const auto& a : split.dogmatic) dog.push_back(a.post.body);
  for (const auto& a : split.nondogmatic) non.push_back(a.post.body);
  auto rows = analysis::odds_table(dog, non, lex, o.alpha);

  OutputSink sink(o.table.output);
  std::ostream& out = sink.stream();
  if (o.table.jsonl) {
    for (const auto& r : rows) {
      nlohmann::ordered_json j;
      j["category"] = r.category;
      j["odds_ratio"] = r.odds_ratio;
      j["p_raw"] = r.p_raw;
      j["p_holm"] = r.p_adjusted;
      j["significant"] = r.significant;
      out << j.dump() << '\n';
    }
  } else {
    write_tsv_row(out, {"category", "odds_ratio", "p_raw", "p_holm", "significant"});
    for (const auto& r : rows)
      write_tsv_row(out, {r.category, fmt6(r.odds_ratio), fmt6(r.p_raw), fmt6(r.p_adjusted),
                          r.significant ? "true" : "false"});
  }
  sink.finish(o.table.output);
}

// ---------------------------------------------------------------------
// train / eval

struct TrainOpts {
  ConfigBinding cfg;
  TableOpts table;
  CorpusOpts corpus;
  SplitOpts split;
  std::string lexicon;
  std::string family = "BOW+LING";
  std::string model_path;
  double l2_strength = 1.5;
  std::uint64_t max_iters = 1000;
  double tolerance = 1e-7;
  std::uint64_t min_df = 2;
};

void add_train_knobs(CLI::App* cmd, ConfigBinding& cfg, TrainOpts& o) {
  cfg.bind(cmd->add_option("--lexicon", o.lexicon, "Word-category lexicon file"), &o.lexicon);
  cfg.bind(cmd->add_option("--family", o.family,
                           "Feature family: BOW, SENT, LING, BOW+SENT, BOW+LING"),
           &o.family);
  cfg.bind(cmd->add_option("--l2", o.l2_strength, "L2 penalty strength"), &o.l2_strength);
  cfg.bind(cmd->add_option("--max-iters", o.max_iters, "Gradient descent iteration cap"),
           &o.max_iters);
  cfg.bind(cmd->add_option("--tol", o.tolerance, "Convergence tolerance on gradient max-norm"),
           &o.tolerance);
  cfg.bind(cmd->add_option("--min-df", o.min_df, "Minimum document frequency for BOW terms"),
           &o.min_df);
}

struct SplitDocs {
  std::vector<std::string> docs;  // dogmatic first, then nondogmatic
  std::vector<int> labels;
  corpus::QuartileCuts cuts;
};

SplitDocs split_docs(const TrainOpts& o) {
  auto annotated = load_annotated(o.corpus, o.split);
  auto split = make_split(annotated, o.split);
  SplitDocs sd;
  sd.cuts = split.cuts;
  for (const auto& a : split.dogmatic) {
    sd.docs.push_back(a.post.body);
    sd.labels.push_back(1);
  }
  for (const auto& a : split.nondogmatic) {
    sd.docs.push_back(a.post.body);
    sd.labels.push_back(0);
  }
  return sd;
}

void run_train(const TrainOpts& o) {
  require_path(o.model_path, "--model");
  features::Family family = parse_family(o.family);

  lexicon::Lexicon lex = lexicon::Lexicon::parse("placeholder: x");
  const lexicon::Lexicon* lexptr = nullptr;
  if (features::family_uses_lexicon(family)) {
    lex = load_required_lexicon(o.lexicon, family);
    lexptr = &lex;
  }

  SplitDocs sd = split_docs(o);

  model::FeatureSpace space =
      features::family_uses_bow(family)
          ? model::make_feature_space(family,
                                      features::build_vocabulary(sd.docs, static_cast<std::uint32_t>(o.min_df)))
          : model::make_feature_space(family);
  features::Extractor extractor = model::make_extractor(space, lexptr);

  std::vector<features::FeatureVector> xs;
  xs.reserve(sd.docs.size());
  for (const auto& doc : sd.docs) xs.push_back(extractor.extract(doc));

  model::TrainOptions topt;
  topt.l2_strength = o.l2_strength;
  topt.max_iters = o.max_iters;
  topt.tolerance = o.tolerance;
  model::TrainTrace trace;
  model::LogisticModel m = model::train(xs, sd.labels, std::move(space), topt, &trace);
  model::save_model(m, o.model_path);

  KvReport report;
  report.add("family", std::string(features::family_name(family)));
  report.add("dimension", static_cast<std::uint64_t>(m.space.dimension()));
  report.add("documents_dogmatic",
             static_cast<std::uint64_t>(std::count(sd.labels.begin(), sd.labels.end(), 1)));
  report.add("documents_nondogmatic",
             static_cast<std::uint64_t>(std::count(sd.labels.begin(), sd.labels.end(), 0)));
  report.add("lower_cut", sd.cuts.lower_cut);
  report.add("upper_cut", sd.cuts.upper_cut);
  report.add("final_loss", trace.losses.back());
  report.add("iterations", static_cast<std::uint64_t>(trace.iterations));
  report.add("gradient_norm", trace.gradient_norm);
  report.add("converged", trace.converged);
  report.add("model", o.model_path);

  OutputSink sink(o.table.output);
  report.write(sink.stream(), o.table.jsonl);
  sink.finish(o.table.output);
}

struct EvalOpts {
  TrainOpts train;  // reuses data/feature/optimizer knobs
  std::uint64_t folds = 15;
  std::uint64_t seed = 0;
};

void run_eval(const EvalOpts& o) {
  features::Family family = parse_family(o.train.family);

  lexicon::Lexicon lex = lexicon::Lexicon::parse("placeholder: x");
  const lexicon::Lexicon* lexptr = nullptr;
  if (features::family_uses_lexicon(family)) {
    lex = load_required_lexicon(o.train.lexicon, family);
    lexptr = &lex;
  }

  SplitDocs sd = split_docs(o.train);

  model::CvOptions copt;
  copt.folds = o.folds;
  copt.seed = o.seed;
  copt.min_df = static_cast<std::uint32_t>(o.train.min_df);
  copt.train.l2_strength = o.train.l2_strength;
  copt.train.max_iters = o.train.max_iters;
  copt.train.tolerance = o.train.tolerance;

  model::EvalReport report = model::cross_validate(sd.docs, sd.labels, family, lexptr, copt);

  OutputSink sink(o.train.table.output);
  std::ostream& out = sink.stream();
  if (o.train.table.jsonl) {
    for (std::size_t f = 0; f < report.fold_aucs.size(); ++f) {
      nlohmann::ordered_json j;
      j["fold"] = f;
      j["auc"] = report.fold_aucs[f];
      out << j.dump() << '\n';
    }
    nlohmann::ordered_json j;
    j["mean_auc"] = report.mean_auc;
    j["folds"] = report.fold_aucs.size();
    j["family"] = std::string(features::family_name(family));
    out << j.dump() << '\n';
  } else {
    write_tsv_row(out, {"fold", "auc"});
    for (std::size_t f = 0; f < report.fold_aucs.size(); ++f)
      write_tsv_row(out, {std::to_string(f), fmt6(report.fold_aucs[f])});
    write_tsv_row(out, {"mean", fmt6(report.mean_auc)});
  }
  sink.finish(o.train.table.output);
}

// ---------------------------------------------------------------------
// predict

struct PredictOpts {
  ConfigBinding cfg;
  std::string corpus = "-";
  std::string model_path;
  std::string lexicon;
  std::string output = "-";
  bool jsonl = false;
  bool skip_bad = false;
  bool allow_empty_body = false;
  std::uint64_t workers = 1;
  std::uint64_t chunk_size = 512;
};

void run_predict(const PredictOpts& o) {
  require_path(o.model_path, "--model");
  model::LogisticModel m = model::load_model(o.model_path);

  lexicon::Lexicon lex = lexicon::Lexicon::parse("placeholder: x");
  const lexicon::Lexicon* lexptr = nullptr;
  if (features::family_uses_lexicon(m.space.family)) {
    lex = load_required_lexicon(o.lexicon, m.space.family);
    lexptr = &lex;
  }
  analysis::Scorer scorer(m, lexptr);

  std::ifstream file;
  std::istream* in = &std::cin;
  if (o.corpus != "-") {
    file.open(o.corpus, std::ios::binary);
    if (!file) throw InputError("cannot open corpus file: " + o.corpus);
    in = &file;
  }

  analysis::StreamOptions sopt;
  sopt.workers = std::max<std::uint64_t>(1, o.workers);
  sopt.chunk_size = std::max<std::uint64_t>(1, o.chunk_size);
  sopt.parse.policy = o.skip_bad ? corpus::OnBadLine::Skip : corpus::OnBadLine::Abort;
  sopt.parse.allow_empty_body = o.allow_empty_body;
  sopt.format = o.jsonl ? analysis::ScoredFormat::Jsonl : analysis::ScoredFormat::Tsv;
  sopt.source_name = o.corpus == "-" ? "stdin" : o.corpus;

  OutputSink sink(o.output);
  analysis::StreamStats st = analysis::score_stream(scorer, *in, sink.stream(), sopt);
  sink.finish(o.output);
  if (st.skipped > 0) std::cerr << "skipped " << st.skipped << " bad lines\n";
}

// ---------------------------------------------------------------------
// subreddits

struct SubredditsOpts {
  ConfigBinding cfg;
  TableOpts table;
  ScoredOpts scored;
  std::uint64_t min_posts = 100;
};

void run_subreddits(const SubredditsOpts& o) {
  auto scored = load_scored_opts(o.scored);
  auto ranks = analysis::subreddit_rankings(scored, o.min_posts);

  OutputSink sink(o.table.output);
  std::ostream& out = sink.stream();
  if (o.table.jsonl) {
    for (const auto& r : ranks) {
      nlohmann::ordered_json j;
      j["subreddit"] = r.subreddit;
      j["mean_score"] = r.mean_score;
      j["posts"] = r.posts;
      out << j.dump() << '\n';
    }
  } else {
    write_tsv_row(out, {"subreddit", "mean_score", "posts"});
    for (const auto& r : ranks)
      write_tsv_row(out, {r.subreddit, fmt6(r.mean_score), std::to_string(r.posts)});
  }
  sink.finish(o.table.output);
}

// ---------------------------------------------------------------------
// clusters

struct ClustersOpts {
  ConfigBinding cfg;
  TableOpts table;
  ScoredOpts scored;
  std::uint64_t min_posts_per_sub = 10;
  double threshold = 0.50;
  std::uint64_t top_k = 5;
  std::string anchor;
  std::string other;
  std::string population = "both";
};

void run_clusters(const ClustersOpts& o) {
  if (o.anchor.empty() != o.other.empty())
    throw InputError("--anchor and --other must be given together");

  auto scored = load_scored_opts(o.scored);
  auto profiles = analysis::build_profiles(scored, o.min_posts_per_sub, o.threshold);

  OutputSink sink(o.table.output);
  std::ostream& out = sink.stream();

  if (!o.anchor.empty()) {
    analysis::EnrichmentPopulation pop;
    if (o.population == "both") {
      pop = analysis::EnrichmentPopulation::QualifiedBoth;
    } else if (o.population == "anchor") {
      pop = analysis::EnrichmentPopulation::QualifiedAnchor;
    } else {
      throw InputError("unknown --population '" + o.population + "'; expected both or anchor");
    }
    stats::TestResult res = analysis::enrichment_test(profiles, o.anchor, o.other, pop);
    KvReport report;
    report.add("anchor", o.anchor);
    report.add("other", o.other);
    report.add("both_dogmatic", res.statistic);
    report.add("p_value", res.p_value);
    report.write(out, o.table.jsonl);
    sink.finish(o.table.output);
    return;
  }

  auto pairs = analysis::dogmatic_pair_counts(profiles);
  auto neighbors = analysis::cluster_by_association(pairs, o.top_k);
  if (o.table.jsonl) {
    for (const auto& [sub, entries] : neighbors) {
      for (std::size_t rank = 0; rank < entries.size(); ++rank) {
        nlohmann::ordered_json j;
        j["subreddit"] = sub;
        j["rank"] = rank + 1;
        j["neighbor"] = entries[rank].neighbor;
        j["pmi"] = entries[rank].pmi;
        j["pairs"] = entries[rank].pair_count;
        out << j.dump() << '\n';
      }
    }
  } else {
    write_tsv_row(out, {"subreddit", "rank", "neighbor", "pmi", "pairs"});
    for (const auto& [sub, entries] : neighbors) {
      for (std::size_t rank = 0; rank < entries.size(); ++rank)
        write_tsv_row(out, {sub, std::to_string(rank + 1), entries[rank].neighbor,
                            fmt6(entries[rank].pmi), std::to_string(entries[rank].pair_count)});
    }
  }
  sink.finish(o.table.output);
}

// ---------------------------------------------------------------------
// behavior

struct BehaviorOpts {
  ConfigBinding cfg;
  TableOpts table;
  ScoredOpts scored;
  std::uint64_t min_user_posts = 1;
};

void write_ols(std::ostream& out, bool jsonl, const stats::OlsFit& fit,
               const std::vector<std::string>& terms, const char* count_key,
               std::uint64_t count, const std::vector<std::pair<std::string, std::string>>& extra = {}) {
  if (jsonl) {
    for (std::size_t i = 0; i < terms.size(); ++i) {
      nlohmann::ordered_json j;
      j["term"] = terms[i];
      j["coefficient"] = fit.coefficients[i];
      j["std_error"] = fit.std_errors[i];
      j["t"] = fit.t_values[i];
      j["p"] = fit.p_values[i];
      out << j.dump() << '\n';
    }
    nlohmann::ordered_json j;
    j["r_squared"] = fit.r_squared;
    j[count_key] = count;
    for (const auto& [k, v] : extra) j[k] = v;
    out << j.dump() << '\n';
  } else {
    write_tsv_row(out, {"term", "coefficient", "std_error", "t", "p"});
    for (std::size_t i = 0; i < terms.size(); ++i)
      write_tsv_row(out, {terms[i], fmt6(fit.coefficients[i]), fmt6(fit.std_errors[i]),
                          fmt6(fit.t_values[i]), fmt6(fit.p_values[i])});
    out << '\n';
    write_tsv_row(out, {"key", "value"});
    write_tsv_row(out, {"r_squared", fmt6(fit.r_squared)});
    write_tsv_row(out, {count_key, std::to_string(count)});
    for (const auto& [k, v] : extra) write_tsv_row(out, {k, v});
  }
}

void run_behavior(const BehaviorOpts& o) {
  auto scored = load_scored_opts(o.scored);

  std::vector<corpus::Post> posts;
  posts.reserve(scored.size());
  for (const auto& s : scored) posts.push_back(s.post);
  auto feats = analysis::behavior_features(posts);
  auto means = analysis::user_mean_scores(scored);
  if (feats.size() != means.size())
    throw Error("behavior: features and mean scores disagree on user count");

  std::vector<analysis::BehaviorFeatures> kept_feats;
  std::vector<double> kept_means;
  for (std::size_t i = 0; i < feats.size(); ++i) {
    if (means[i].posts < o.min_user_posts) continue;
    if (feats[i].user != means[i].user)
      throw Error("behavior: user alignment mismatch at index " + std::to_string(i));
    kept_feats.push_back(feats[i]);
    kept_means.push_back(means[i].mean_score);
  }

  stats::OlsFit fit = analysis::behavior_regression(kept_feats, kept_means);

  OutputSink sink(o.table.output);
  write_ols(sink.stream(), o.table.jsonl, fit,
            {"intercept", "activity", "breadth", "focus", "engagement"}, "users",
            kept_feats.size());
  sink.finish(o.table.output);
}

// ---------------------------------------------------------------------
// triples

struct TriplesOpts {
  ConfigBinding cfg;
  TableOpts table;
  ScoredOpts scored;
  std::string model_path;
  std::string lexicon;
  bool quote_control = false;
};

void run_triples(const TriplesOpts& o) {
  auto scored = load_scored_opts(o.scored);

  std::vector<corpus::Post> posts;
  posts.reserve(scored.size());
  for (const auto& s : scored) posts.push_back(s.post);
  auto triples = analysis::extract_triples(posts);

  std::function<double(const corpus::Post&)> score_fn;
  std::optional<model::LogisticModel> m;
  std::optional<lexicon::Lexicon> lex;
  std::optional<analysis::Scorer> scorer;
  if (o.quote_control || !o.model_path.empty()) {
    if (o.model_path.empty())
      throw InputError("--quote-control needs --model (and --lexicon for lexicon families): "
                       "stripped replies must be re-scored from text");
    m = model::load_model(o.model_path);
    const lexicon::Lexicon* lexptr = nullptr;
    if (features::family_uses_lexicon(m->space.family)) {
      lex = load_required_lexicon(o.lexicon, m->space.family);
      lexptr = &*lex;
    }
    scorer.emplace(*m, lexptr);
    score_fn = [&](const corpus::Post& p) { return scorer->score(p.body); };
  } else {
    auto by_id = std::make_shared<std::map<std::string, double>>();
    for (const auto& s : scored) (*by_id)[s.post.id] = s.p_dogmatic;
    score_fn = [by_id](const corpus::Post& p) {
      auto it = by_id->find(p.id);
      if (it == by_id->end()) throw Error("triples: no score for post '" + p.id + "'");
      return it->second;
    };
  }

  stats::OlsFit fit = analysis::triple_regression(triples, score_fn, o.quote_control);

  OutputSink sink(o.table.output);
  write_ols(sink.stream(), o.table.jsonl, fit, {"intercept", "a1", "b"}, "triples",
            triples.size(), {{"quote_control", o.quote_control ? "true" : "false"}});
  sink.finish(o.table.output);
}

// ---------------------------------------------------------------------
// synth

struct SynthOpts {
  ConfigBinding cfg;
  TableOpts table;
  std::string out_dir;
  std::string lexicon;
  synth::SyntheticSpec spec;
  std::vector<std::string> multipliers;
};

void apply_multiplier(const std::string& item, std::map<std::string, double>& out) {
  std::size_t eq = item.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
    throw InputError("--multiplier expects category=value, got '" + item + "'");
  std::string name = item.substr(0, eq);
  double value = 0.0;
  parse_config_value("multiplier", item.substr(eq + 1), value);
  out[name] = value;
}

void run_synth(const SynthOpts& o) {
  require_path(o.out_dir, "--out");
  require_path(o.lexicon, "--lexicon");
  auto lex = lexicon::Lexicon::load(o.lexicon);

  synth::SyntheticSpec spec = o.spec;
  for (const std::string& item : o.multipliers) {
    std::string rest = item;
    while (!rest.empty()) {
      std::size_t comma = rest.find(',');
      apply_multiplier(rest.substr(0, comma), spec.category_multipliers);
      rest = comma == std::string::npos ? std::string() : rest.substr(comma + 1);
    }
  }

  synth::SyntheticSummary summary = synth::generate_synthetic(spec, lex, o.out_dir);

  KvReport report;
  report.add("posts", summary.posts);
  report.add("annotations", summary.annotations);
  report.add("triples", summary.triples);
  report.add("corpus", (std::filesystem::path(o.out_dir) / "corpus.jsonl").string());
  report.add("annotations_file",
             (std::filesystem::path(o.out_dir) / "annotations.jsonl").string());
  report.add("groundtruth", (std::filesystem::path(o.out_dir) / "groundtruth.json").string());

  OutputSink sink(o.table.output);
  report.write(sink.stream(), o.table.jsonl);
  sink.finish(o.table.output);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "dogma: detect and analyze dogmatic language in social-media posts.\n"
      "Formats and pipelines are documented in FORMATS.md."};
  app.require_subcommand(1);

  AgreementOpts agreement;
  {
    CLI::App* cmd = app.add_subcommand(
        "agreement", "Krippendorff's alpha for 3-rater annotations, overall and on extremes");
    agreement.cfg.attach(cmd);
    agreement.cfg.bind(
        cmd->add_option("--annotations", agreement.annotations, "Annotations file [required]"),
        &agreement.annotations);
    agreement.cfg.bind(cmd->add_option("--metric", agreement.metric,
                                       "Agreement metric: interval or ordinal"),
                       &agreement.metric);
    add_table_opts(cmd, agreement.cfg, agreement.table);
  }

  OddsOpts odds;
  {
    CLI::App* cmd = app.add_subcommand(
        "odds", "Per-category odds ratios between dogmatic and nondogmatic quartiles");
    odds.cfg.attach(cmd);
    add_corpus_opts(cmd, odds.cfg, odds.corpus);
    add_split_opts(cmd, odds.cfg, odds.split);
    odds.cfg.bind(cmd->add_option("--lexicon", odds.lexicon, "Word-category lexicon [required]"),
                  &odds.lexicon);
    odds.cfg.bind(cmd->add_option("--alpha", odds.alpha, "Familywise significance level"),
                  &odds.alpha);
    add_table_opts(cmd, odds.cfg, odds.table);
  }

  TrainOpts train;
  {
    CLI::App* cmd = app.add_subcommand(
        "train", "Fit an L2 logistic classifier on the annotated quartile split");
    train.cfg.attach(cmd);
    add_corpus_opts(cmd, train.cfg, train.corpus);
    add_split_opts(cmd, train.cfg, train.split);
    add_train_knobs(cmd, train.cfg, train);
    train.cfg.bind(cmd->add_option("--model", train.model_path, "Model output path [required]"),
                   &train.model_path);
    add_table_opts(cmd, train.cfg, train.table);
  }

  EvalOpts eval;
  {
    CLI::App* cmd = app.add_subcommand(
        "eval", "Stratified k-fold AUC of a feature family on the quartile split");
    eval.train.cfg.attach(cmd);
    add_corpus_opts(cmd, eval.train.cfg, eval.train.corpus);
    add_split_opts(cmd, eval.train.cfg, eval.train.split);
    add_train_knobs(cmd, eval.train.cfg, eval.train);
    eval.train.cfg.bind(cmd->add_option("--folds", eval.folds, "Cross-validation folds"),
                        &eval.folds);
    eval.train.cfg
        .bind(cmd->add_option("--seed", eval.seed, "Fold-assignment seed")->envname("DOGMA_SEED"),
              &eval.seed);
    add_table_opts(cmd, eval.train.cfg, eval.train.table);
  }

  PredictOpts predict;
  {
    CLI::App* cmd = app.add_subcommand(
        "predict", "Score a corpus with a trained model (streaming, ordered output)");
    predict.cfg.attach(cmd);
    predict.cfg.bind(
        cmd->add_option("--corpus", predict.corpus, "Posts file, '-' for stdin"),
        &predict.corpus);
    predict.cfg.bind(cmd->add_option("--model", predict.model_path, "Model file [required]"),
                     &predict.model_path);
    predict.cfg.bind(
        cmd->add_option("--lexicon", predict.lexicon, "Lexicon (required by lexicon families)"),
        &predict.lexicon);
    predict.cfg.bind(cmd->add_option("--output", predict.output, "Output file, '-' for stdout"),
                     &predict.output);
    predict.cfg.bind(
        cmd->add_flag("--jsonl", predict.jsonl,
                      "Emit full scored posts as JSON lines instead of id<TAB>score"),
        &predict.jsonl);
    predict.cfg.bind(cmd->add_flag("--skip-bad", predict.skip_bad,
                                   "Skip malformed corpus lines instead of aborting"),
                     &predict.skip_bad);
    predict.cfg.bind(cmd->add_flag("--allow-empty-body", predict.allow_empty_body,
                                   "Accept posts with empty bodies"),
                     &predict.allow_empty_body);
    predict.cfg.bind(cmd->add_option("--workers", predict.workers, "Scoring worker threads"),
                     &predict.workers);
    predict.cfg.bind(cmd->add_option("--chunk-size", predict.chunk_size,
                                     "Posts per work unit (tuning only; output is identical)"),
                     &predict.chunk_size);
  }

  SubredditsOpts subreddits;
  {
    CLI::App* cmd = app.add_subcommand(
        "subreddits", "Rank subreddits by mean dogmatism score of their posts");
    subreddits.cfg.attach(cmd);
    add_scored_opts(cmd, subreddits.cfg, subreddits.scored);
    subreddits.cfg.bind(cmd->add_option("--min-posts", subreddits.min_posts,
                                        "Minimum posts for a subreddit to be ranked"),
                        &subreddits.min_posts);
    add_table_opts(cmd, subreddits.cfg, subreddits.table);
  }

  ClustersOpts clusters;
  {
    CLI::App* cmd = app.add_subcommand(
        "clusters",
        "Co-dogmatism PMI neighbors per subreddit; with --anchor/--other, an enrichment test");
    clusters.cfg.attach(cmd);
    add_scored_opts(cmd, clusters.cfg, clusters.scored);
    clusters.cfg.bind(cmd->add_option("--min-posts-per-sub", clusters.min_posts_per_sub,
                                      "Posts a user needs in a subreddit to qualify"),
                      &clusters.min_posts_per_sub);
    clusters.cfg.bind(cmd->add_option("--threshold", clusters.threshold,
                                      "Mean score strictly above this marks a user dogmatic"),
                      &clusters.threshold);
    clusters.cfg.bind(cmd->add_option("--top-k", clusters.top_k, "Neighbors per subreddit"),
                      &clusters.top_k);
    clusters.cfg.bind(cmd->add_option("--anchor", clusters.anchor,
                                      "Enrichment mode: anchor subreddit"),
                      &clusters.anchor);
    clusters.cfg.bind(cmd->add_option("--other", clusters.other,
                                      "Enrichment mode: tested subreddit"),
                      &clusters.other);
    clusters.cfg.bind(cmd->add_option("--population", clusters.population,
                                      "Enrichment population: both (qualified in anchor and "
                                      "other) or anchor"),
                      &clusters.population);
    add_table_opts(cmd, clusters.cfg, clusters.table);
  }

  BehaviorOpts behavior;
  {
    CLI::App* cmd = app.add_subcommand(
        "behavior", "OLS of mean user dogmatism on z-scored behavior features");
    behavior.cfg.attach(cmd);
    add_scored_opts(cmd, behavior.cfg, behavior.scored);
    behavior.cfg.bind(cmd->add_option("--min-user-posts", behavior.min_user_posts,
                                      "Minimum posts for a user to enter the regression"),
                      &behavior.min_user_posts);
    add_table_opts(cmd, behavior.cfg, behavior.table);
  }

  TriplesOpts triples;
  {
    CLI::App* cmd = app.add_subcommand(
        "triples", "Contagion OLS over A1<-B<-A2 conversation triples");
    triples.cfg.attach(cmd);
    add_scored_opts(cmd, triples.cfg, triples.scored);
    triples.cfg.bind(cmd->add_option("--model", triples.model_path,
                                     "Re-score replies from text with this model"),
                     &triples.model_path);
    triples.cfg.bind(
        cmd->add_option("--lexicon", triples.lexicon, "Lexicon for the model, if it needs one"),
        &triples.lexicon);
    triples.cfg.bind(cmd->add_flag("--quote-control", triples.quote_control,
                                   "Strip B's words from A2 before scoring (needs --model)"),
                     &triples.quote_control);
    add_table_opts(cmd, triples.cfg, triples.table);
  }

  SynthOpts synth_opts;
  {
    CLI::App* cmd = app.add_subcommand(
        "synth", "Generate a synthetic corpus with planted, recorded signal");
    synth_opts.cfg.attach(cmd);
    synth_opts.cfg.bind(cmd->add_option("--out", synth_opts.out_dir,
                                        "Output directory for corpus.jsonl, annotations.jsonl, "
                                        "groundtruth.json [required]"),
                        &synth_opts.out_dir);
    synth_opts.cfg.bind(
        cmd->add_option("--lexicon", synth_opts.lexicon, "Word-category lexicon [required]"),
        &synth_opts.lexicon);
    auto& spec = synth_opts.spec;
    auto& cfg = synth_opts.cfg;
    cfg.bind(cmd->add_option("--n-docs", spec.n_docs, "Posts in the user-behavior section"),
             &spec.n_docs);
    cfg.bind(cmd->add_option("--n-users", spec.n_users, "Users"), &spec.n_users);
    cfg.bind(cmd->add_option("--n-subreddits", spec.n_subreddits, "Subreddits"),
             &spec.n_subreddits);
    cfg.bind(cmd->add_option("--n-triples", spec.n_triples, "Conversation triples to plant"),
             &spec.n_triples);
    cfg.bind(cmd->add_option("--n-blocks", spec.n_blocks, "Co-dogmatism blocks"), &spec.n_blocks);
    cfg.bind(cmd->add_option("--block-affinity", spec.block_affinity,
                             "P(a user's extra subreddit stays in their block)"),
             &spec.block_affinity);
    cfg.bind(cmd->add_option("--base-dogmatism", spec.base_dogmatism, "Population mean score"),
             &spec.base_dogmatism);
    cfg.bind(cmd->add_option("--user-noise", spec.user_noise, "Per-user mean score noise sd"),
             &spec.user_noise);
    cfg.bind(cmd->add_option("--post-noise", spec.post_noise, "Per-post score noise sd"),
             &spec.post_noise);
    cfg.bind(cmd->add_option("--rating-noise", spec.rating_noise, "Annotator rating noise sd"),
             &spec.rating_noise);
    cfg.bind(cmd->add_option("--lexicon-rate", spec.lexicon_token_rate,
                             "Per-token rate of each lexicon category"),
             &spec.lexicon_token_rate);
    cfg.bind_custom(cmd->add_option("--multiplier", synth_opts.multipliers,
                                    "category=rate multiplier in dogmatic posts (repeatable, "
                                    "comma lists allowed)"),
                    [&synth_opts](const std::string& raw) {
                      synth_opts.multipliers.push_back(raw);
                    });
    cfg.bind(cmd->add_option("--topic-rate", spec.topic_token_rate,
                             "Per-token rate of class-exclusive topic words"),
             &spec.topic_token_rate);
    cfg.bind(cmd->add_option("--vocab-shift", spec.vocabulary_shift,
                             "Offset topic word ids (simulates a domain shift)"),
             &spec.vocabulary_shift);
    cfg.bind(cmd->add_option("--doc-tokens-min", spec.doc_tokens_min, "Minimum tokens per post"),
             &spec.doc_tokens_min);
    cfg.bind(cmd->add_option("--doc-tokens-max", spec.doc_tokens_max, "Maximum tokens per post"),
             &spec.doc_tokens_max);
    cfg.bind(cmd->add_option("--behavior-activity", spec.behavior_activity,
                             "Planted activity coefficient"),
             &spec.behavior_activity);
    cfg.bind(cmd->add_option("--behavior-breadth", spec.behavior_breadth,
                             "Planted breadth coefficient"),
             &spec.behavior_breadth);
    cfg.bind(cmd->add_option("--behavior-focus", spec.behavior_focus,
                             "Planted focus coefficient"),
             &spec.behavior_focus);
    cfg.bind(cmd->add_option("--behavior-engagement", spec.behavior_engagement,
                             "Planted engagement coefficient"),
             &spec.behavior_engagement);
    cfg.bind(cmd->add_option("--contagion-intercept", spec.contagion_intercept,
                             "Triple response intercept"),
             &spec.contagion_intercept);
    cfg.bind(cmd->add_option("--contagion-a1", spec.contagion_a1, "Triple A1 coefficient"),
             &spec.contagion_a1);
    cfg.bind(cmd->add_option("--contagion-b", spec.contagion_b, "Triple B coefficient"),
             &spec.contagion_b);
    cfg.bind(cmd->add_option("--triple-noise", spec.triple_noise, "Triple response noise sd"),
             &spec.triple_noise);
    cfg.bind(cmd->add_option("--seed", spec.seed, "Generator seed")->envname("DOGMA_SEED"),
             &spec.seed);
    add_table_opts(cmd, synth_opts.cfg, synth_opts.table);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.get_subcommand("agreement")->parsed()) {
      agreement.cfg.apply();
      run_agreement(agreement);
    } else if (app.get_subcommand("odds")->parsed()) {
      odds.cfg.apply();
      run_odds(odds);
    } else if (app.get_subcommand("train")->parsed()) {
      train.cfg.apply();
      run_train(train);
    } else if (app.get_subcommand("eval")->parsed()) {
      eval.train.cfg.apply();
      run_eval(eval);
    } else if (app.get_subcommand("predict")->parsed()) {
      predict.cfg.apply();
      run_predict(predict);
    } else if (app.get_subcommand("subreddits")->parsed()) {
      subreddits.cfg.apply();
      run_subreddits(subreddits);
    } else if (app.get_subcommand("clusters")->parsed()) {
      clusters.cfg.apply();
      run_clusters(clusters);
    } else if (app.get_subcommand("behavior")->parsed()) {
      behavior.cfg.apply();
      run_behavior(behavior);
    } else if (app.get_subcommand("triples")->parsed()) {
      triples.cfg.apply();
      run_triples(triples);
    } else if (app.get_subcommand("synth")->parsed()) {
      synth_opts.cfg.apply();
      run_synth(synth_opts);
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
