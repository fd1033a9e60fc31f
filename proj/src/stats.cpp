#include "dogma/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dogma/error.hpp"

namespace dogma::stats {

RatingsMatrix::RatingsMatrix(std::size_t units, std::size_t raters, int lo, int hi)
    : units_(units), raters_(raters), lo_(lo), hi_(hi) {
  if (units == 0 || raters == 0) throw Error("ratings matrix must have units and raters");
  if (lo > hi) throw Error("ratings matrix value range is empty");
  cells_.resize(units * raters);
}

void RatingsMatrix::set(std::size_t unit, std::size_t rater, int value) {
  if (unit >= units_ || rater >= raters_) throw Error("ratings matrix index out of range");
  if (value < lo_ || value > hi_) {
    throw Error("rating " + std::to_string(value) + " outside [" + std::to_string(lo_) + ", " +
                std::to_string(hi_) + "]");
  }
  cells_[unit * raters_ + rater] = value;
}

std::optional<int> RatingsMatrix::get(std::size_t unit, std::size_t rater) const {
  if (unit >= units_ || rater >= raters_) throw Error("ratings matrix index out of range");
  return cells_[unit * raters_ + rater];
}

double krippendorff_alpha(const RatingsMatrix& ratings, AgreementMetric metric) {
  const std::size_t v = static_cast<std::size_t>(ratings.hi() - ratings.lo()) + 1;
  std::vector<double> o(v * v, 0.0);  // coincidence matrix

  std::vector<int> present;
  for (std::size_t u = 0; u < ratings.units(); ++u) {
    present.clear();
    for (std::size_t r = 0; r < ratings.raters(); ++r) {
      if (auto val = ratings.get(u, r)) present.push_back(*val - ratings.lo());
    }
    if (present.size() < 2) continue;
    double w = 1.0 / static_cast<double>(present.size() - 1);
    for (std::size_t i = 0; i < present.size(); ++i) {
      for (std::size_t j = 0; j < present.size(); ++j) {
        if (i != j) o[static_cast<std::size_t>(present[i]) * v +
                      static_cast<std::size_t>(present[j])] += w;
      }
    }
  }

  std::vector<double> marginals(v, 0.0);
  double n = 0.0;
  for (std::size_t c = 0; c < v; ++c) {
    for (std::size_t k = 0; k < v; ++k) marginals[c] += o[c * v + k];
    n += marginals[c];
  }
  if (n <= 0.0) throw Error("agreement undefined: no unit has two or more ratings");

  // Squared difference between value slots under the chosen metric.
  std::vector<double> delta(v * v, 0.0);
  for (std::size_t c = 0; c < v; ++c) {
    for (std::size_t k = c + 1; k < v; ++k) {
      double d;
      if (metric == AgreementMetric::Interval) {
        d = static_cast<double>(k) - static_cast<double>(c);
      } else {
        // Ordinal distance: coincidence mass spanned by the two values,
        // counting each endpoint at half weight.
        double span = 0.0;
        for (std::size_t g = c; g <= k; ++g) span += marginals[g];
        d = span - (marginals[c] + marginals[k]) / 2.0;
      }
      delta[c * v + k] = delta[k * v + c] = d * d;
    }
  }

  double d_observed = 0.0;
  double d_expected = 0.0;
  for (std::size_t c = 0; c < v; ++c) {
    for (std::size_t k = 0; k < v; ++k) {
      d_observed += o[c * v + k] * delta[c * v + k];
      d_expected += marginals[c] * marginals[k] * delta[c * v + k];
    }
  }
  if (d_expected <= 0.0) {
    throw Error("agreement undefined: expected disagreement is zero (all ratings identical)");
  }
  return 1.0 - (n - 1.0) * d_observed / d_expected;
}

namespace {

// Midranks for a pooled sample; returns the rank sum of group 1 and the
// tie-correction term T = sum(t^3 - t) over tie groups.
struct PooledRanks {
  double rank_sum_1 = 0.0;
  double tie_term = 0.0;
  bool has_ties = false;
};

PooledRanks pooled_midranks(std::span<const double> xs, std::span<const double> ys) {
  struct Entry {
    double value;
    int group;
  };
  std::vector<Entry> pooled;
  pooled.reserve(xs.size() + ys.size());
  for (double x : xs) pooled.push_back({x, 1});
  for (double y : ys) pooled.push_back({y, 0});
  std::sort(pooled.begin(), pooled.end(),
            [](const Entry& a, const Entry& b) { return a.value < b.value; });

  PooledRanks out;
  std::size_t i = 0;
  while (i < pooled.size()) {
    std::size_t j = i;
    while (j < pooled.size() && pooled[j].value == pooled[i].value) ++j;
    double t = static_cast<double>(j - i);
    if (t > 1.0) {
      out.has_ties = true;
      out.tie_term += t * t * t - t;
    }
    double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (pooled[k].group == 1) out.rank_sum_1 += midrank;
    }
    i = j;
  }
  return out;
}

// Number of x/y arrangements yielding each U value, for sample sizes
// (m, n): f(u; m, n) = f(u - n; m - 1, n) + f(u; m, n - 1).
std::vector<unsigned long long> exact_u_counts(std::size_t m, std::size_t n) {
  std::size_t umax = m * n;
  std::vector<unsigned long long> prev((m + 1) * (umax + 1), 0);
  std::vector<unsigned long long> cur((m + 1) * (umax + 1), 0);
  auto at = [umax](std::vector<unsigned long long>& t, std::size_t mm, std::size_t u)
      -> unsigned long long& { return t[mm * (umax + 1) + u]; };
  for (std::size_t mm = 0; mm <= m; ++mm) at(prev, mm, 0) = 1;  // n = 0
  for (std::size_t nn = 1; nn <= n; ++nn) {
    std::fill(cur.begin(), cur.end(), 0ull);
    at(cur, 0, 0) = 1;
    for (std::size_t mm = 1; mm <= m; ++mm) {
      for (std::size_t u = 0; u <= umax; ++u) {
        unsigned long long total = at(prev, mm, u);
        if (u >= nn) total += at(cur, mm - 1, u - nn);
        at(cur, mm, u) = total;
      }
    }
    std::swap(prev, cur);
  }
  std::vector<unsigned long long> dist(umax + 1);
  for (std::size_t u = 0; u <= umax; ++u) dist[u] = prev[m * (umax + 1) + u];
  return dist;
}

}  // namespace

TestResult mann_whitney_u(std::span<const double> xs, std::span<const double> ys,
                          TestMethod method) {
  if (xs.empty() || ys.empty()) throw Error("mann-whitney: both samples must be nonempty");
  const double n1 = static_cast<double>(xs.size());
  const double n2 = static_cast<double>(ys.size());

  PooledRanks ranks = pooled_midranks(xs, ys);
  const double u_stat = ranks.rank_sum_1 - n1 * (n1 + 1.0) / 2.0;

  TestResult result;
  result.statistic = u_stat;
  result.method = method;

  if (method == TestMethod::Exact) {
    if (xs.size() > 20 || ys.size() > 20) {
      throw Error("mann-whitney: exact method requires both sample sizes <= 20");
    }
    if (ranks.has_ties) {
      throw Error("mann-whitney: exact method requires untied data");
    }
    auto dist = exact_u_counts(xs.size(), ys.size());
    double total = 0.0;
    for (unsigned long long c : dist) total += static_cast<double>(c);
    std::size_t u = static_cast<std::size_t>(std::llround(u_stat));
    double lo_tail = 0.0, hi_tail = 0.0;
    for (std::size_t i = 0; i <= u; ++i) lo_tail += static_cast<double>(dist[i]);
    for (std::size_t i = u; i < dist.size(); ++i) hi_tail += static_cast<double>(dist[i]);
    double p = 2.0 * std::min(lo_tail, hi_tail) / total;
    result.p_value = std::min(1.0, p);
    return result;
  }

  const double n = n1 + n2;
  const double mean_u = n1 * n2 / 2.0;
  double variance = n1 * n2 / 12.0 * ((n + 1.0) - ranks.tie_term / (n * (n - 1.0)));
  if (variance <= 0.0) {
    // Every pooled value identical; the test carries no information.
    result.p_value = 1.0;
    return result;
  }
  double z = (std::abs(u_stat - mean_u) - 0.5) / std::sqrt(variance);
  if (z < 0.0) z = 0.0;
  result.p_value = std::min(1.0, 2.0 * (1.0 - normal_cdf(z)));
  return result;
}

std::vector<double> holm_correct(std::span<const double> p_values) {
  const std::size_t m = p_values.size();
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error("holm: p-values must lie in [0, 1]");
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
  std::vector<double> adjusted(m);
  double running_max = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double scaled = static_cast<double>(m - j) * p_values[order[j]];
    running_max = std::max(running_max, std::min(1.0, scaled));
    adjusted[order[j]] = running_max;
  }
  return adjusted;
}

double odds_ratio(double a, double b, double c, double d) {
  for (double v : {a, b, c, d}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error("odds ratio: counts must be nonnegative");
  }
  if (a == 0.0 || b == 0.0 || c == 0.0 || d == 0.0) {
    a += 0.5;
    b += 0.5;
    c += 0.5;
    d += 0.5;
  }
  return (a * d) / (b * c);
}

PairKey make_pair_key(std::string a, std::string b) {
  if (b < a) std::swap(a, b);
  return {std::move(a), std::move(b)};
}

std::map<PairKey, double> pmi(const std::map<PairKey, std::int64_t>& pair_counts) {
  double total = 0.0;
  std::map<std::string, double> marginal;
  for (const auto& [key, count] : pair_counts) {
    if (count < 0) throw Error("pmi: negative pair count");
    if (count == 0) continue;
    total += static_cast<double>(count);
    marginal[key.first] += static_cast<double>(count);
    if (key.second != key.first) marginal[key.second] += static_cast<double>(count);
  }
  if (total <= 0.0) throw Error("pmi: no pair observations");
  std::map<PairKey, double> out;
  for (const auto& [key, count] : pair_counts) {
    if (count == 0) continue;
    double joint = static_cast<double>(count);
    out[key] = std::log(joint * total / (marginal[key.first] * marginal[key.second]));
  }
  return out;
}

double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

namespace detail {

namespace {

double beta_cont_frac(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr int kMaxIter = 300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 3e-16) break;
  }
  return h;
}

}  // namespace

double reg_inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cont_frac(a, b, x) / a;
  }
  return 1.0 - front * beta_cont_frac(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double dof) {
  if (!std::isfinite(t)) return 0.0;
  const double x = dof / (dof + t * t);
  double p = reg_inc_beta(dof / 2.0, 0.5, x);
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace detail

OlsFit ols_fit(const std::vector<std::vector<double>>& columns, std::span<const double> response,
               const std::vector<std::string>& column_names) {
  const std::size_t n = response.size();
  const std::size_t k = columns.size();
  const std::size_t p = k + 1;  // intercept plus predictors
  for (const auto& col : columns) {
    if (col.size() != n) throw Error("ols: design column length mismatch");
  }
  if (n <= p) {
    throw Error("ols: need more observations (" + std::to_string(n) + ") than coefficients (" +
                std::to_string(p) + ")");
  }

  auto col_name = [&](std::size_t j) -> std::string {
    if (j == 0) return "intercept";
    if (j - 1 < column_names.size()) return column_names[j - 1];
    return "column " + std::to_string(j - 1);
  };
  auto x_at = [&](std::size_t i, std::size_t j) -> double {
    return j == 0 ? 1.0 : columns[j - 1][i];
  };

  // Normal equations; the designs here are a handful of columns wide.
  std::vector<double> xtx(p * p, 0.0);
  std::vector<double> xty(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      const double xij = x_at(i, j);
      xty[j] += xij * response[i];
      for (std::size_t l = j; l < p; ++l) xtx[j * p + l] += xij * x_at(i, l);
    }
  }
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t l = 0; l < j; ++l) xtx[j * p + l] = xtx[l * p + j];
  }

  double scale = 0.0;
  for (std::size_t j = 0; j < p; ++j) scale = std::max(scale, std::abs(xtx[j * p + j]));
  if (scale == 0.0) scale = 1.0;

  // Gauss-Jordan inverse with partial pivoting.
  std::vector<double> inv(p * p, 0.0);
  for (std::size_t j = 0; j < p; ++j) inv[j * p + j] = 1.0;
  std::vector<double> a = xtx;
  for (std::size_t col = 0; col < p; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < p; ++r) {
      if (std::abs(a[r * p + col]) > std::abs(a[pivot * p + col])) pivot = r;
    }
    if (std::abs(a[pivot * p + col]) < 1e-10 * scale) {
      throw Error("ols: design is rank deficient at " + col_name(col));
    }
    if (pivot != col) {
      for (std::size_t c = 0; c < p; ++c) {
        std::swap(a[pivot * p + c], a[col * p + c]);
        std::swap(inv[pivot * p + c], inv[col * p + c]);
      }
    }
    const double d = a[col * p + col];
    for (std::size_t c = 0; c < p; ++c) {
      a[col * p + c] /= d;
      inv[col * p + c] /= d;
    }
    for (std::size_t r = 0; r < p; ++r) {
      if (r == col) continue;
      const double f = a[r * p + col];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < p; ++c) {
        a[r * p + c] -= f * a[col * p + c];
        inv[r * p + c] -= f * inv[col * p + c];
      }
    }
  }

  OlsFit fit;
  fit.n = n;
  fit.dof = n - p;
  fit.coefficients.assign(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t l = 0; l < p; ++l) fit.coefficients[j] += inv[j * p + l] * xty[l];
  }

  double rss = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean_y += response[i];
  mean_y /= static_cast<double>(n);
  double tss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double fitted = 0.0;
    for (std::size_t j = 0; j < p; ++j) fitted += fit.coefficients[j] * x_at(i, j);
    const double r = response[i] - fitted;
    rss += r * r;
    tss += (response[i] - mean_y) * (response[i] - mean_y);
  }
  if (tss <= 0.0) throw Error("ols: response is constant");

  const double s2 = rss / static_cast<double>(fit.dof);
  fit.r_squared = 1.0 - rss / tss;
  fit.std_errors.assign(p, 0.0);
  fit.t_values.assign(p, 0.0);
  fit.p_values.assign(p, 1.0);
  for (std::size_t j = 0; j < p; ++j) {
    const double var = std::max(0.0, s2 * inv[j * p + j]);
    fit.std_errors[j] = std::sqrt(var);
    if (fit.std_errors[j] > 0.0) {
      fit.t_values[j] = fit.coefficients[j] / fit.std_errors[j];
    } else {
      fit.t_values[j] = fit.coefficients[j] == 0.0
                            ? 0.0
                            : std::copysign(std::numeric_limits<double>::infinity(),
                                            fit.coefficients[j]);
    }
    fit.p_values[j] = detail::student_t_two_sided_p(fit.t_values[j],
                                                    static_cast<double>(fit.dof));
  }
  return fit;
}

TestResult binomial_test(std::int64_t k, std::int64_t n, double p0, Tail tail) {
  if (n < 1) throw Error("binomial test: n must be at least 1");
  if (k < 0 || k > n) throw Error("binomial test: k must lie in [0, n]");
  if (!(p0 > 0.0 && p0 < 1.0)) throw Error("binomial test: p0 must lie in (0, 1)");

  const double ln_p = std::log(p0);
  const double ln_q = std::log1p(-p0);
  const double ln_n1 = std::lgamma(static_cast<double>(n) + 1.0);
  auto log_pmf = [&](std::int64_t i) {
    return ln_n1 - std::lgamma(static_cast<double>(i) + 1.0) -
           std::lgamma(static_cast<double>(n - i) + 1.0) + static_cast<double>(i) * ln_p +
           static_cast<double>(n - i) * ln_q;
  };

  TestResult result;
  result.statistic = static_cast<double>(k);
  result.method = TestMethod::Exact;

  double p = 0.0;
  if (tail == Tail::Greater) {
    for (std::int64_t i = k; i <= n; ++i) p += std::exp(log_pmf(i));
  } else {
    // Every outcome no more likely than the observed one contributes.
    const double threshold = log_pmf(k) + 1e-7;
    for (std::int64_t i = 0; i <= n; ++i) {
      if (log_pmf(i) <= threshold) p += std::exp(log_pmf(i));
    }
  }
  result.p_value = std::min(1.0, p);
  return result;
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw Error("auc: scores and labels differ in length");
  if (scores.empty()) throw Error("auc: empty input");
  std::size_t n_pos = 0, n_neg = 0;
  for (int l : labels) {
    if (l == 1) {
      ++n_pos;
    } else if (l == 0) {
      ++n_neg;
    } else {
      throw Error("auc: labels must be 0 or 1");
    }
  }
  if (n_pos == 0 || n_neg == 0) throw Error("auc: both classes must be present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] == 1) rank_sum_pos += midrank;
    }
    i = j;
  }
  const double n1 = static_cast<double>(n_pos);
  const double u = rank_sum_pos - n1 * (n1 + 1.0) / 2.0;
  return u / (n1 * static_cast<double>(n_neg));
}

}  // namespace dogma::stats
