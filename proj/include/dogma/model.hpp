#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dogma/features.hpp"
#include "dogma/lexicon.hpp"

namespace dogma::model {

// Identifies the objective so a model file can refuse to load under a
// different convention: mean logistic loss + (l2/2) * ||w||^2, bias
// unpenalized.
inline constexpr std::string_view kL2ConventionId = "mean-loss-half-l2";
inline constexpr int kModelFormatVersion = 1;

struct FeatureSpace {
  features::Family family = features::Family::BOW;
  std::optional<features::Vocabulary> vocabulary;  // present for BOW families
  std::vector<std::string> category_order;         // present for lexicon families
  std::string tfidf_variant;                       // pinned for BOW families

  std::uint32_t dimension() const;
};

FeatureSpace make_feature_space(features::Family family, features::Vocabulary vocab = {});

// Binds a feature space to a lexicon, validating that the lexicon
// provides every category the space was trained with.
features::Extractor make_extractor(const FeatureSpace& space, const lexicon::Lexicon* lex);

struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;
  double l2_strength = 1.5;
  FeatureSpace space;
};

struct TrainOptions {
  double l2_strength = 1.5;
  std::size_t max_iters = 1000;
  double tolerance = 1e-7;  // on the gradient max-norm
};

struct TrainTrace {
  std::vector<double> losses;  // objective after each accepted step
  std::size_t iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
};

// Regularized objective and its gradient, exposed so tests can check
// the analytic gradient against finite differences.
double objective(std::span<const features::FeatureVector> xs, std::span<const int> labels,
                 std::span<const double> weights, double bias, double l2_strength);
void gradient(std::span<const features::FeatureVector> xs, std::span<const int> labels,
              std::span<const double> weights, double bias, double l2_strength,
              std::vector<double>& grad_weights, double& grad_bias);

// Deterministic full-batch gradient descent with backtracking line
// search. Identical inputs produce identical weights; there is no
// stochastic element anywhere.
LogisticModel train(std::span<const features::FeatureVector> xs, std::span<const int> labels,
                    FeatureSpace space, const TrainOptions& options = {},
                    TrainTrace* trace = nullptr);

double predict_proba(const LogisticModel& model, const features::FeatureVector& x);

// Fold assignment per example: within each class, a seeded shuffle
// dealt round-robin, so every fold holds both classes.
std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t k,
                                          std::uint64_t seed);

struct CvOptions {
  std::size_t folds = 15;
  std::uint64_t seed = 0;
  std::uint32_t min_df = 2;
  TrainOptions train;
};

struct EvalReport {
  std::vector<double> fold_aucs;
  double mean_auc = 0.0;
};

// Hook invoked after each fold with the fold's model and test indices.
using FoldHook =
    std::function<void(std::size_t fold, const LogisticModel&, std::span<const std::size_t>)>;

// Stratified k-fold cross-validation. The vocabulary is rebuilt from
// each training fold alone, so test tokens never leak into fitting.
EvalReport cross_validate(std::span<const std::string> docs, std::span<const int> labels,
                          features::Family family, const lexicon::Lexicon* lex,
                          const CvOptions& options = {}, const FoldHook& hook = {});

// Versioned plain-text model file; doubles survive a round trip bit
// for bit.
void save_model(const LogisticModel& model, const std::filesystem::path& path);
LogisticModel load_model(const std::filesystem::path& path);

}  // namespace dogma::model
