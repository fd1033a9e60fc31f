#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dogma::stats {

enum class AgreementMetric { Interval, Ordinal };

// Units x raters matrix of ordinal ratings with missing cells allowed.
class RatingsMatrix {
 public:
  RatingsMatrix(std::size_t units, std::size_t raters, int lo, int hi);

  void set(std::size_t unit, std::size_t rater, int value);
  std::optional<int> get(std::size_t unit, std::size_t rater) const;

  std::size_t units() const { return units_; }
  std::size_t raters() const { return raters_; }
  int lo() const { return lo_; }
  int hi() const { return hi_; }

 private:
  std::size_t units_;
  std::size_t raters_;
  int lo_;
  int hi_;
  std::vector<std::optional<int>> cells_;
};

// Chance-corrected inter-rater agreement via the coincidence-matrix
// formulation: alpha = 1 - D_observed / D_expected. Units with fewer
// than two ratings contribute nothing; a matrix where expected
// disagreement is zero has no defined alpha and raises an error.
double krippendorff_alpha(const RatingsMatrix& ratings, AgreementMetric metric);

enum class TestMethod { Exact, NormalApprox };

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  TestMethod method = TestMethod::Exact;
};

// Two-sided Mann-Whitney U. The statistic counts pairs where x beats y,
// ties counting one half. Exact mode enumerates the null distribution
// and requires both samples <= 20 with no ties across the pooled data;
// the normal approximation applies the tie-corrected variance and a
// 0.5 continuity correction.
TestResult mann_whitney_u(std::span<const double> xs, std::span<const double> ys,
                          TestMethod method);

// Holm step-down adjustment, returned in the input order. Output is
// clipped to 1 and never below the raw p-value.
std::vector<double> holm_correct(std::span<const double> p_values);

// (a/b) / (c/d) with the 0.5 add-to-every-cell correction when any
// count is zero.
double odds_ratio(double a, double b, double c, double d);

// Canonical unordered pair: first <= second.
using PairKey = std::pair<std::string, std::string>;
PairKey make_pair_key(std::string a, std::string b);

// Pointwise mutual information over co-occurrence pair counts. The
// marginal for x is the share of all pair observations that contain x.
// Natural log; zero-count pairs are absent from the result.
std::map<PairKey, double> pmi(const std::map<PairKey, std::int64_t>& pair_counts);

struct OlsFit {
  std::vector<double> coefficients;  // intercept first, then one per column
  std::vector<double> std_errors;
  std::vector<double> t_values;
  std::vector<double> p_values;  // two-sided, Student-t
  double r_squared = 0.0;
  std::size_t n = 0;
  std::size_t dof = 0;
};

// Ordinary least squares with an implicit intercept column and
// classical (homoskedastic) standard errors. column_names, when given,
// label rank-deficiency errors.
OlsFit ols_fit(const std::vector<std::vector<double>>& columns, std::span<const double> response,
               const std::vector<std::string>& column_names = {});

enum class Tail { Greater, TwoSided };

// Exact binomial test of k successes in n trials against rate p0.
// The two-sided p-value sums every outcome whose probability does not
// exceed the observed one.
TestResult binomial_test(std::int64_t k, std::int64_t n, double p0, Tail tail);

// Area under the ROC curve by midranks; ties in scores are averaged.
// Labels must be 0/1 with both classes present.
double auc(std::span<const double> scores, std::span<const int> labels);

double normal_cdf(double z);

namespace detail {
// Regularized incomplete beta I_x(a, b) via the Lentz continued
// fraction; exposed so tests can pin it against reference values.
double reg_inc_beta(double a, double b, double x);
double student_t_two_sided_p(double t, double dof);
}  // namespace detail

}  // namespace dogma::stats
