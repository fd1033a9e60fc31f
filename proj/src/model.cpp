#include "dogma/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dogma/error.hpp"
#include "dogma/format.hpp"
#include "dogma/rng.hpp"
#include "dogma/stats.hpp"

namespace dogma::model {

std::uint32_t FeatureSpace::dimension() const {
  std::uint32_t dim = 0;
  if (vocabulary) dim += static_cast<std::uint32_t>(vocabulary->terms.size());
  dim += static_cast<std::uint32_t>(category_order.size());
  return dim;
}

FeatureSpace make_feature_space(features::Family family, features::Vocabulary vocab) {
  FeatureSpace space;
  space.family = family;
  if (features::family_uses_bow(family)) {
    space.vocabulary = std::move(vocab);
    space.tfidf_variant = std::string(features::kTfidfVariantId);
  }
  if (family == features::Family::SENT || family == features::Family::BOW_SENT) {
    space.category_order.assign(features::kSentCategories.begin(),
                                features::kSentCategories.end());
  } else if (family == features::Family::LING || family == features::Family::BOW_LING) {
    space.category_order.assign(features::kLingCategories.begin(),
                                features::kLingCategories.end());
  }
  return space;
}

features::Extractor make_extractor(const FeatureSpace& space, const lexicon::Lexicon* lex) {
  const features::Vocabulary* vocab = space.vocabulary ? &*space.vocabulary : nullptr;
  return features::Extractor(space.family, vocab, lex);
}

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double raw_score(const features::FeatureVector& x, std::span<const double> weights, double bias) {
  double z = bias;
  for (const auto& [idx, v] : x.entries) z += weights[idx] * v;
  return z;
}

// -y*log(s) - (1-y)*log(1-s) computed without forming s.
double logistic_loss(double z, int y) {
  if (z >= 0.0) return std::log1p(std::exp(-z)) + (1 - y) * z;
  return std::log1p(std::exp(z)) - y * z;
}

void check_training_input(std::span<const features::FeatureVector> xs, std::span<const int> labels,
                          std::uint32_t dim, double l2_strength) {
  if (xs.size() != labels.size()) throw Error("train: features and labels differ in length");
  if (xs.empty()) throw Error("train: no examples");
  if (!(l2_strength >= 0.0)) throw Error("train: l2 strength must be nonnegative");
  for (int y : labels) {
    if (y != 0 && y != 1) throw Error("train: labels must be 0 or 1");
  }
  for (const auto& x : xs) {
    if (x.dimension != dim) {
      throw Error("train: feature vector dimension " + std::to_string(x.dimension) +
                  " does not match space dimension " + std::to_string(dim));
    }
  }
}

}  // namespace

double objective(std::span<const features::FeatureVector> xs, std::span<const int> labels,
                 std::span<const double> weights, double bias, double l2_strength) {
  double loss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    loss += logistic_loss(raw_score(xs[i], weights, bias), labels[i]);
  }
  loss /= static_cast<double>(xs.size());
  double reg = 0.0;
  for (double w : weights) reg += w * w;
  return loss + 0.5 * l2_strength * reg;
}

void gradient(std::span<const features::FeatureVector> xs, std::span<const int> labels,
              std::span<const double> weights, double bias, double l2_strength,
              std::vector<double>& grad_weights, double& grad_bias) {
  grad_weights.assign(weights.size(), 0.0);
  grad_bias = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = sigmoid(raw_score(xs[i], weights, bias)) - labels[i];
    for (const auto& [idx, v] : xs[i].entries) grad_weights[idx] += r * v;
    grad_bias += r;
  }
  const double inv_n = 1.0 / static_cast<double>(xs.size());
  for (std::size_t j = 0; j < weights.size(); ++j) {
    grad_weights[j] = grad_weights[j] * inv_n + l2_strength * weights[j];
  }
  grad_bias *= inv_n;
}

LogisticModel train(std::span<const features::FeatureVector> xs, std::span<const int> labels,
                    FeatureSpace space, const TrainOptions& options, TrainTrace* trace) {
  const std::uint32_t dim = space.dimension();
  check_training_input(xs, labels, dim, options.l2_strength);

  std::vector<double> w(dim, 0.0);
  double b = 0.0;
  double loss = objective(xs, labels, w, b, options.l2_strength);
  if (trace) {
    *trace = TrainTrace{};
    trace->losses.push_back(loss);
  }

  std::vector<double> g(dim, 0.0);
  std::vector<double> w_next(dim, 0.0);
  double gb = 0.0;
  double step = 1.0;
  bool converged = false;
  std::size_t iter = 0;
  double grad_inf = 0.0;

  for (; iter < options.max_iters; ++iter) {
    gradient(xs, labels, w, b, options.l2_strength, g, gb);
    double grad_sq = gb * gb;
    grad_inf = std::abs(gb);
    for (double v : g) {
      grad_sq += v * v;
      grad_inf = std::max(grad_inf, std::abs(v));
    }
    if (grad_inf < options.tolerance) {
      converged = true;
      break;
    }

    // Backtracking Armijo line search on the full objective.
    double t = step;
    double next_loss = 0.0;
    double b_next = 0.0;
    for (;;) {
      for (std::size_t j = 0; j < w.size(); ++j) w_next[j] = w[j] - t * g[j];
      b_next = b - t * gb;
      next_loss = objective(xs, labels, w_next, b_next, options.l2_strength);
      if (next_loss <= loss - 1e-4 * t * grad_sq) break;
      t *= 0.5;
      if (t < 1e-20) throw Error("train: line search failed to make progress");
    }
    w.swap(w_next);
    b = b_next;
    loss = next_loss;
    step = std::min(t * 2.0, 1e6);
    if (trace) trace->losses.push_back(loss);
    if (!std::isfinite(loss)) throw Error("train: objective diverged");
  }

  if (trace) {
    trace->iterations = iter;
    trace->gradient_norm = grad_inf;
    trace->converged = converged;
  }

  LogisticModel model;
  model.weights = std::move(w);
  model.bias = b;
  model.l2_strength = options.l2_strength;
  model.space = std::move(space);
  return model;
}

double predict_proba(const LogisticModel& model, const features::FeatureVector& x) {
  if (x.dimension != model.space.dimension()) {
    throw Error("predict: feature dimension " + std::to_string(x.dimension) +
                " does not match model dimension " + std::to_string(model.space.dimension()));
  }
  return sigmoid(raw_score(x, model.weights, model.bias));
}

std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t k,
                                          std::uint64_t seed) {
  if (k < 2) throw Error("cross-validation: need at least 2 folds");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw Error("cross-validation: labels must be 0 or 1");
    by_class[labels[i]].push_back(i);
  }
  Rng rng(seed);
  std::vector<std::size_t> fold_of(labels.size(), 0);
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].size() < k) {
      throw Error("cross-validation: class " + std::to_string(c) + " has " +
                  std::to_string(by_class[c].size()) + " examples, fewer than " +
                  std::to_string(k) + " folds");
    }
    Rng class_rng = rng.fork(static_cast<std::uint64_t>(c));
    class_rng.shuffle(by_class[c]);
    for (std::size_t j = 0; j < by_class[c].size(); ++j) {
      fold_of[by_class[c][j]] = j % k;
    }
  }
  return fold_of;
}

EvalReport cross_validate(std::span<const std::string> docs, std::span<const int> labels,
                          features::Family family, const lexicon::Lexicon* lex,
                          const CvOptions& options, const FoldHook& hook) {
  if (docs.size() != labels.size()) {
    throw Error("cross-validation: docs and labels differ in length");
  }
  std::vector<std::size_t> fold_of = stratified_folds(labels, options.folds, options.seed);

  EvalReport report;
  for (std::size_t f = 0; f < options.folds; ++f) {
    std::vector<std::string> train_docs;
    std::vector<int> train_labels;
    std::vector<std::size_t> test_idx;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      if (fold_of[i] == f) {
        test_idx.push_back(i);
      } else {
        train_docs.push_back(docs[i]);
        train_labels.push_back(labels[i]);
      }
    }

    features::Vocabulary vocab;
    if (features::family_uses_bow(family)) {
      vocab = features::build_vocabulary(train_docs, options.min_df);
    }
    FeatureSpace space = make_feature_space(family, std::move(vocab));

    std::vector<features::FeatureVector> train_x;
    {
      features::Extractor train_extractor = make_extractor(space, lex);
      train_x.reserve(train_docs.size());
      for (const std::string& doc : train_docs) train_x.push_back(train_extractor.extract(doc));
    }

    TrainOptions topts = options.train;
    LogisticModel fold_model = train(train_x, train_labels, std::move(space), topts);

    // Bound to the model's own space: `space` was moved into the model.
    features::Extractor test_extractor = make_extractor(fold_model.space, lex);
    std::vector<double> scores;
    std::vector<int> truth;
    scores.reserve(test_idx.size());
    for (std::size_t i : test_idx) {
      scores.push_back(predict_proba(fold_model, test_extractor.extract(docs[i])));
      truth.push_back(labels[i]);
    }
    report.fold_aucs.push_back(stats::auc(scores, truth));
    if (hook) hook(f, fold_model, test_idx);
  }
  double sum = 0.0;
  for (double a : report.fold_aucs) sum += a;
  report.mean_auc = sum / static_cast<double>(report.fold_aucs.size());
  return report;
}

namespace {

std::string canonical_category_error(const FeatureSpace& space) {
  return "model category order does not match the fixed " +
         std::string(features::family_name(space.family)) + " block";
}

void validate_space(const FeatureSpace& space) {
  const bool uses_bow = features::family_uses_bow(space.family);
  const bool uses_lex = features::family_uses_lexicon(space.family);
  if (uses_bow != space.vocabulary.has_value()) {
    throw Error("model feature space: vocabulary section does not match family " +
                std::string(features::family_name(space.family)));
  }
  if (uses_bow && space.tfidf_variant != features::kTfidfVariantId) {
    throw Error("model uses tf-idf variant '" + space.tfidf_variant + "' but this build computes '" +
                std::string(features::kTfidfVariantId) + "'");
  }
  if (uses_lex) {
    std::span<const std::string_view> want;
    if (space.family == features::Family::SENT || space.family == features::Family::BOW_SENT) {
      want = features::kSentCategories;
    } else {
      want = features::kLingCategories;
    }
    if (space.category_order.size() != want.size() ||
        !std::equal(space.category_order.begin(), space.category_order.end(), want.begin())) {
      throw Error(canonical_category_error(space));
    }
  } else if (!space.category_order.empty()) {
    throw Error("model feature space: BOW family cannot carry category features");
  }
  if (space.vocabulary) {
    const auto& terms = space.vocabulary->terms;
    if (terms.size() != space.vocabulary->document_frequency.size()) {
      throw Error("model vocabulary: term and frequency counts differ");
    }
    for (std::size_t i = 1; i < terms.size(); ++i) {
      if (!(terms[i - 1] < terms[i])) {
        throw Error("model vocabulary terms must be strictly sorted; '" + terms[i] +
                    "' is out of order");
      }
    }
  }
}

}  // namespace

void save_model(const LogisticModel& model, const std::filesystem::path& path) {
  validate_space(model.space);
  if (model.weights.size() != model.space.dimension()) {
    throw Error("model weights (" + std::to_string(model.weights.size()) +
                ") do not match feature space dimension (" +
                std::to_string(model.space.dimension()) + ")");
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write model file: " + path.string());
  out << "dogma-model " << kModelFormatVersion << "\n";
  out << "objective " << kL2ConventionId << "\n";
  out << "family " << features::family_name(model.space.family) << "\n";
  out << "l2_strength " << fmt_double(model.l2_strength, 17) << "\n";
  out << "bias " << fmt_double(model.bias, 17) << "\n";
  if (model.space.vocabulary) {
    out << "tfidf " << model.space.tfidf_variant << "\n";
    const auto& vocab = *model.space.vocabulary;
    out << "vocabulary " << vocab.terms.size() << " " << vocab.document_total << "\n";
    for (std::size_t i = 0; i < vocab.terms.size(); ++i) {
      out << vocab.terms[i] << " " << vocab.document_frequency[i] << "\n";
    }
  }
  if (!model.space.category_order.empty()) {
    out << "categories " << model.space.category_order.size() << "\n";
    for (const std::string& name : model.space.category_order) out << name << "\n";
  }
  out << "weights " << model.weights.size() << "\n";
  for (double w : model.weights) out << fmt_double(w, 17) << "\n";
  out << "end\n";
  if (!out) throw InputError("failed writing model file: " + path.string());
}

namespace {

class LineParser {
 public:
  LineParser(std::istream& in, const std::string& path) : in_(in), path_(path) {}

  std::string next(const char* what) {
    std::string line;
    if (!std::getline(in_, line)) {
      throw InputError(path_ + ": unexpected end of file, expected " + std::string(what));
    }
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

  [[noreturn]] void fail(const std::string& msg) {
    throw InputError(path_ + ":" + std::to_string(line_no_) + ": " + msg);
  }

  bool at_eof() {
    std::string line;
    while (std::getline(in_, line)) {
      if (!line.empty() && line != "\r") return false;
    }
    return true;
  }

 private:
  std::istream& in_;
  std::string path_;
  std::size_t line_no_ = 0;
};

double parse_double(LineParser& parser, const std::string& text) {
  char* end = nullptr;
  double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0') parser.fail("invalid number '" + text + "'");
  return v;
}

std::uint64_t parse_count(LineParser& parser, const std::string& text) {
  char* end = nullptr;
  unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (end == text.c_str() || *end != '\0') parser.fail("invalid count '" + text + "'");
  return v;
}

std::pair<std::string, std::string> split_kv(LineParser& parser, const std::string& line) {
  std::size_t sp = line.find(' ');
  if (sp == std::string::npos) parser.fail("expected 'key value' but found '" + line + "'");
  return {line.substr(0, sp), line.substr(sp + 1)};
}

}  // namespace

LogisticModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open model file: " + path.string());
  LineParser parser(in, path.string());

  {
    auto [magic, version] = split_kv(parser, parser.next("header"));
    if (magic != "dogma-model") parser.fail("not a model file (missing 'dogma-model' header)");
    if (parse_count(parser, version) != static_cast<std::uint64_t>(kModelFormatVersion)) {
      parser.fail("model format version " + version + " is not supported; this build reads version " +
                  std::to_string(kModelFormatVersion));
    }
  }

  LogisticModel model;
  {
    auto [key, value] = split_kv(parser, parser.next("objective"));
    if (key != "objective") parser.fail("expected 'objective'");
    if (value != kL2ConventionId) {
      parser.fail("model was trained under objective '" + value + "' but this build expects '" +
                  std::string(kL2ConventionId) + "'");
    }
  }
  {
    auto [key, value] = split_kv(parser, parser.next("family"));
    if (key != "family") parser.fail("expected 'family'");
    auto family = features::family_from_name(value);
    if (!family) parser.fail("unknown feature family '" + value + "'");
    model.space.family = *family;
  }
  {
    auto [key, value] = split_kv(parser, parser.next("l2_strength"));
    if (key != "l2_strength") parser.fail("expected 'l2_strength'");
    model.l2_strength = parse_double(parser, value);
  }
  {
    auto [key, value] = split_kv(parser, parser.next("bias"));
    if (key != "bias") parser.fail("expected 'bias'");
    model.bias = parse_double(parser, value);
  }

  if (features::family_uses_bow(model.space.family)) {
    {
      auto [key, value] = split_kv(parser, parser.next("tfidf"));
      if (key != "tfidf") parser.fail("expected 'tfidf'");
      model.space.tfidf_variant = value;
    }
    auto [key, value] = split_kv(parser, parser.next("vocabulary"));
    if (key != "vocabulary") parser.fail("expected 'vocabulary'");
    std::istringstream vs(value);
    std::uint64_t v_count = 0, d_total = 0;
    if (!(vs >> v_count >> d_total)) parser.fail("expected 'vocabulary <terms> <documents>'");
    features::Vocabulary vocab;
    vocab.document_total = d_total;
    vocab.terms.reserve(v_count);
    vocab.document_frequency.reserve(v_count);
    for (std::uint64_t i = 0; i < v_count; ++i) {
      auto [term, df] = split_kv(parser, parser.next("vocabulary entry"));
      vocab.terms.push_back(term);
      vocab.document_frequency.push_back(static_cast<std::uint32_t>(parse_count(parser, df)));
    }
    model.space.vocabulary = std::move(vocab);
  }

  if (features::family_uses_lexicon(model.space.family)) {
    auto [key, value] = split_kv(parser, parser.next("categories"));
    if (key != "categories") parser.fail("expected 'categories'");
    std::uint64_t c_count = parse_count(parser, value);
    for (std::uint64_t i = 0; i < c_count; ++i) {
      model.space.category_order.push_back(parser.next("category name"));
    }
  }

  {
    auto [key, value] = split_kv(parser, parser.next("weights"));
    if (key != "weights") parser.fail("expected 'weights'");
    std::uint64_t w_count = parse_count(parser, value);
    if (w_count != model.space.dimension()) {
      parser.fail("weight count " + std::to_string(w_count) + " does not match feature space " +
                  "dimension " + std::to_string(model.space.dimension()));
    }
    model.weights.reserve(w_count);
    for (std::uint64_t i = 0; i < w_count; ++i) {
      model.weights.push_back(parse_double(parser, parser.next("weight")));
    }
  }
  if (parser.next("end") != "end") parser.fail("expected 'end'");
  if (!parser.at_eof()) parser.fail("unexpected content after 'end'");

  try {
    validate_space(model.space);
  } catch (const Error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return model;
}

}  // namespace dogma::model
