#include "oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace oracle {

double krippendorff_alpha(const std::vector<std::vector<std::optional<int>>>& units,
                          bool ordinal) {
  int lo = 0, hi = 0;
  bool seen = false;
  for (const auto& unit : units) {
    for (const auto& cell : unit) {
      if (!cell) continue;
      if (!seen) {
        lo = hi = *cell;
        seen = true;
      } else {
        lo = std::min(lo, *cell);
        hi = std::max(hi, *cell);
      }
    }
  }
  if (!seen) throw std::runtime_error("oracle alpha: empty table");
  const int v = hi - lo + 1;

  std::vector<std::vector<double>> o(v, std::vector<double>(v, 0.0));
  for (const auto& unit : units) {
    std::vector<int> vals;
    for (const auto& cell : unit) {
      if (cell) vals.push_back(*cell - lo);
    }
    const std::size_t m = vals.size();
    if (m < 2) continue;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (i != j) o[vals[i]][vals[j]] += 1.0 / static_cast<double>(m - 1);
      }
    }
  }

  std::vector<double> nc(v, 0.0);
  double n = 0.0;
  for (int c = 0; c < v; ++c) {
    for (int k = 0; k < v; ++k) nc[c] += o[c][k];
    n += nc[c];
  }
  if (n <= 0.0) throw std::runtime_error("oracle alpha: no pairable unit");

  auto delta2 = [&](int c, int k) {
    if (!ordinal) {
      const double d = static_cast<double>(c - k);
      return d * d;
    }
    const int a = std::min(c, k), b = std::max(c, k);
    double span = 0.0;
    for (int g = a; g <= b; ++g) span += nc[g];
    const double d = span - (nc[a] + nc[b]) / 2.0;
    return d * d;
  };

  double d_obs = 0.0, d_exp = 0.0;
  for (int c = 0; c < v; ++c) {
    for (int k = 0; k < v; ++k) {
      d_obs += o[c][k] * delta2(c, k);
      d_exp += nc[c] * nc[k] * delta2(c, k);
    }
  }
  d_obs /= n;
  d_exp /= n * (n - 1.0);
  if (d_exp <= 0.0) throw std::runtime_error("oracle alpha: zero expected disagreement");
  return 1.0 - d_obs / d_exp;
}

double mwu_u_pairwise(std::span<const double> xs, std::span<const double> ys) {
  double u = 0.0;
  for (double x : xs) {
    for (double y : ys) {
      if (x > y) {
        u += 1.0;
      } else if (x == y) {
        u += 0.5;
      }
    }
  }
  return u;
}

double mwu_exact_p_enumerated(std::span<const double> xs, std::span<const double> ys) {
  const std::size_t n1 = xs.size();
  const std::size_t n = n1 + ys.size();
  if (n > 24) throw std::runtime_error("oracle mwu: pool too large to enumerate");
  std::vector<double> pool(xs.begin(), xs.end());
  pool.insert(pool.end(), ys.begin(), ys.end());

  const double u_obs = mwu_u_pairwise(xs, ys);
  std::uint64_t total = 0, at_most = 0, at_least = 0;
  std::vector<double> gx, gy;
  for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcountll(mask)) != n1) continue;
    gx.clear();
    gy.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1ull << i)) {
        gx.push_back(pool[i]);
      } else {
        gy.push_back(pool[i]);
      }
    }
    const double u = mwu_u_pairwise(gx, gy);
    ++total;
    if (u <= u_obs) ++at_most;
    if (u >= u_obs) ++at_least;
  }
  const double p = 2.0 * static_cast<double>(std::min(at_most, at_least)) /
                   static_cast<double>(total);
  return std::min(1.0, p);
}

std::vector<double> logistic_newton(const std::vector<std::vector<double>>& rows,
                                    const std::vector<int>& labels, double l2) {
  const std::size_t n = rows.size();
  const std::size_t d = rows.empty() ? 0 : rows[0].size();
  const std::size_t p = d + 1;  // bias last
  std::vector<double> w(p, 0.0);

  auto sigmoid = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };

  for (int iter = 0; iter < 200; ++iter) {
    std::vector<double> grad(p, 0.0);
    std::vector<double> hess(p * p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double z = w[d];
      for (std::size_t j = 0; j < d; ++j) z += w[j] * rows[i][j];
      const double mu = sigmoid(z);
      const double err = mu - static_cast<double>(labels[i]);
      const double s = mu * (1.0 - mu);
      for (std::size_t j = 0; j < p; ++j) {
        const double xj = j == d ? 1.0 : rows[i][j];
        grad[j] += err * xj / static_cast<double>(n);
        for (std::size_t k = 0; k < p; ++k) {
          const double xk = k == d ? 1.0 : rows[i][k];
          hess[j * p + k] += s * xj * xk / static_cast<double>(n);
        }
      }
    }
    for (std::size_t j = 0; j < d; ++j) {
      grad[j] += l2 * w[j];
      hess[j * p + j] += l2;
    }
    hess[d * p + d] += 1e-9;  // keep the bias block invertible on degenerate data

    // Solve hess * step = grad by Gaussian elimination.
    std::vector<double> a = hess;
    std::vector<double> step = grad;
    for (std::size_t col = 0; col < p; ++col) {
      std::size_t piv = col;
      for (std::size_t r = col + 1; r < p; ++r) {
        if (std::abs(a[r * p + col]) > std::abs(a[piv * p + col])) piv = r;
      }
      for (std::size_t c = 0; c < p; ++c) std::swap(a[piv * p + c], a[col * p + c]);
      std::swap(step[piv], step[col]);
      const double dgn = a[col * p + col];
      for (std::size_t c = col; c < p; ++c) a[col * p + c] /= dgn;
      step[col] /= dgn;
      for (std::size_t r = 0; r < p; ++r) {
        if (r == col) continue;
        const double f = a[r * p + col];
        if (f == 0.0) continue;
        for (std::size_t c = col; c < p; ++c) a[r * p + c] -= f * a[col * p + c];
        step[r] -= f * step[col];
      }
    }

    double gmax = 0.0;
    for (double g : grad) gmax = std::max(gmax, std::abs(g));
    if (gmax < 1e-12) break;
    for (std::size_t j = 0; j < p; ++j) w[j] -= step[j];
  }
  return w;
}

namespace {

std::string thread_root(const SimplePost& post,
                        const std::map<std::string, const SimplePost*>& by_id) {
  const SimplePost* cur = &post;
  std::set<std::string> seen;
  while (cur->parent_id && seen.insert(cur->id).second) {
    auto it = by_id.find(*cur->parent_id);
    if (it == by_id.end()) break;
    cur = it->second;
  }
  return cur->id;
}

}  // namespace

std::vector<BehaviorRow> behavior_features(const std::vector<SimplePost>& posts) {
  std::map<std::string, const SimplePost*> by_id;
  for (const auto& p : posts) by_id[p.id] = &p;

  std::map<std::string, std::vector<const SimplePost*>> by_user;
  for (const auto& p : posts) by_user[p.author].push_back(&p);

  std::vector<BehaviorRow> out;
  for (const auto& [user, ups] : by_user) {
    std::map<std::string, int> per_sub;
    std::set<std::string> threads;
    for (const SimplePost* p : ups) {
      per_sub[p->subreddit] += 1;
      threads.insert(thread_root(*p, by_id));
    }
    int modal = 0;
    for (const auto& [sub, cnt] : per_sub) modal = std::max(modal, cnt);
    BehaviorRow row;
    row.user = user;
    row.activity = static_cast<double>(ups.size());
    row.breadth = static_cast<double>(per_sub.size());
    row.focus = static_cast<double>(modal) / static_cast<double>(ups.size());
    row.engagement = static_cast<double>(ups.size()) / static_cast<double>(threads.size());
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<std::array<std::string, 3>> triples(const std::vector<SimplePost>& posts) {
  std::map<std::string, const SimplePost*> by_id;
  for (const auto& p : posts) by_id[p.id] = &p;

  std::vector<std::array<std::string, 3>> out;
  for (const auto& a2 : posts) {
    if (!a2.parent_id) continue;
    auto bit = by_id.find(*a2.parent_id);
    if (bit == by_id.end()) continue;
    const SimplePost* b = bit->second;
    if (!b->parent_id) continue;
    auto ait = by_id.find(*b->parent_id);
    if (ait == by_id.end()) continue;
    const SimplePost* a1 = ait->second;
    if (a1->author == a2.author && b->author != a2.author) {
      out.push_back({a1->id, b->id, a2.id});
    }
  }
  return out;
}

std::map<std::pair<std::string, std::string>, std::int64_t> pair_counts(
    const std::vector<std::set<std::string>>& dogmatic_sets) {
  std::map<std::pair<std::string, std::string>, std::int64_t> out;
  for (const auto& subs : dogmatic_sets) {
    std::vector<std::string> v(subs.begin(), subs.end());
    for (std::size_t i = 0; i < v.size(); ++i) {
      for (std::size_t j = i + 1; j < v.size(); ++j) {
        out[{v[i], v[j]}] += 1;  // set iteration is ordered, so v[i] < v[j]
      }
    }
  }
  return out;
}

std::map<std::pair<std::string, std::string>, double> pmi(
    const std::map<std::pair<std::string, std::string>, std::int64_t>& counts) {
  double total = 0.0;
  std::map<std::string, double> margin;
  for (const auto& [key, c] : counts) {
    if (c == 0) continue;
    total += static_cast<double>(c);
    margin[key.first] += static_cast<double>(c);
    if (key.second != key.first) margin[key.second] += static_cast<double>(c);
  }
  std::map<std::pair<std::string, std::string>, double> out;
  for (const auto& [key, c] : counts) {
    if (c == 0) continue;
    const double p_xy = static_cast<double>(c) / total;
    const double p_x = margin[key.first] / total;
    const double p_y = margin[key.second] / total;
    out[key] = std::log(p_xy / (p_x * p_y));
  }
  return out;
}

QuartileCutsRef quartile_cuts(const std::vector<int>& aggregates) {
  const int lo = *std::min_element(aggregates.begin(), aggregates.end());
  const int hi = *std::max_element(aggregates.begin(), aggregates.end());
  const auto n = aggregates.size();
  const auto quarter = (n + 3) / 4;  // ceil(n/4)
  auto count_le = [&](int v) {
    return static_cast<std::size_t>(
        std::count_if(aggregates.begin(), aggregates.end(), [&](int a) { return a <= v; }));
  };
  auto count_ge = [&](int v) {
    return static_cast<std::size_t>(
        std::count_if(aggregates.begin(), aggregates.end(), [&](int a) { return a >= v; }));
  };
  QuartileCutsRef cuts;
  cuts.lower_cut = lo - 1;
  for (int v = lo - 1; v <= hi; ++v) {
    if (count_le(v) <= quarter) cuts.lower_cut = v;
  }
  cuts.upper_cut = hi + 1;
  for (int v = hi + 1; v >= lo; --v) {
    if (count_ge(v) <= quarter) cuts.upper_cut = v;
  }
  return cuts;
}

}  // namespace oracle
