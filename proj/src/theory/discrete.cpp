#include "parlab/theory/discrete.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace parlab {

namespace {

Vector softmax(const Vector& z) {
  const double m = *std::max_element(z.begin(), z.end());
  Vector p(z.size());
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) s += (p[i] = std::exp(z[i] - m));
  for (double& v : p) v /= s;
  return p;
}

Vector unit_or(const DiscreteBandit& db) {
  return db.weights.empty() ? Vector(db.size(), 1.0) : db.weights;
}

}  // namespace

void DiscreteBandit::validate() const {
  if (q.empty() || behavior.size() != q.size()) {
    throw std::invalid_argument("DiscreteBandit: q and behavior sizes differ");
  }
  if (!weights.empty() && weights.size() != q.size()) {
    throw std::invalid_argument("DiscreteBandit: weight size mismatch");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!std::isfinite(q[i])) throw std::invalid_argument("DiscreteBandit: non-finite Q");
    if (behavior[i] < 0.0) throw std::invalid_argument("DiscreteBandit: negative probability");
    total += behavior[i];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("DiscreteBandit: behavior probabilities do not sum to 1");
  }
}

bool DiscreteBandit::supports_suboptimal() const {
  const double best = *std::max_element(q.begin(), q.end());
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (behavior[i] > 0.0 && q[i] < best) return true;
  }
  return false;
}

Vector boltzmann_policy(const DiscreteBandit& db) {
  if (db.behavior.size() != db.q.size() || db.q.empty()) {
    throw std::invalid_argument("boltzmann_policy: size mismatch");
  }
  double m = -INFINITY;
  for (std::size_t i = 0; i < db.size(); ++i) {
    if (db.behavior[i] > 0.0) m = std::max(m, db.q[i]);
  }
  if (m == -INFINITY) throw std::invalid_argument("boltzmann_policy: behavior has no mass");
  Vector p(db.size(), 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < db.size(); ++i) {
    if (db.behavior[i] > 0.0) z += (p[i] = db.behavior[i] * std::exp(db.q[i] - m));
  }
  for (double& v : p) v /= z;
  return p;
}

Vector weighted_behavior_policy(const DiscreteBandit& db) {
  const Vector w = unit_or(db);
  if (db.behavior.size() != w.size()) throw std::invalid_argument("weighted_behavior_policy: size mismatch");
  Vector p(w.size());
  double z = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) z += (p[i] = w[i] * db.behavior[i]);
  if (!(z > 0.0) || !std::isfinite(z)) {
    throw std::invalid_argument("weighted_behavior_policy: zero normalizer");
  }
  for (double& v : p) v /= z;
  return p;
}

double expected_q(const Vector& policy, const Vector& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) s += policy[i] * q[i];
  return s;
}

double max_abs_gap(const Vector& a, const Vector& b) {
  double g = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) g = std::max(g, std::abs(a[i] - b[i]));
  return g;
}

Vector train_kl_tabular(const DiscreteBandit& db, std::size_t steps, double lr) {
  db.validate();
  const std::size_t n = db.size();
  Vector c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = db.q[i] + std::log(std::max(db.behavior[i], DBL_MIN));
  Vector z(n, 0.0);
  Vector dj(n);
  for (std::size_t t = 0; t < steps; ++t) {
    const Vector p = softmax(z);
    double avg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dj[i] = c[i] - std::log(std::max(p[i], DBL_MIN));
      avg += p[i] * dj[i];
    }
    for (std::size_t i = 0; i < n; ++i) z[i] += lr * p[i] * (dj[i] - avg);
  }
  return softmax(z);
}

double kl_training_matches_boltzmann(const DiscreteBandit& db, std::size_t steps, double lr) {
  return max_abs_gap(train_kl_tabular(db, steps, lr), boltzmann_policy(db));
}

Vector fit_weighted_mle(const DiscreteBandit& db, std::size_t samples, std::size_t steps,
                        double lr, Rng& rng) {
  db.validate();
  const Vector w = unit_or(db);
  std::discrete_distribution<std::size_t> draw(db.behavior.begin(), db.behavior.end());
  // The self-normalised weighted log-likelihood depends only on per-action weight shares.
  Vector mass(db.size(), 0.0);
  for (std::size_t i = 0; i < samples; ++i) {
    const std::size_t a = draw(rng.engine());
    mass[a] += w[a] / static_cast<double>(samples);
  }
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  Vector z(db.size(), 0.0);
  for (std::size_t t = 0; t < steps; ++t) {
    const Vector p = softmax(z);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += lr * (mass[i] / total - p[i]);
  }
  return softmax(z);
}

DiscreteBandit random_discrete_bandit(Rng& rng, const RandomBanditOptions& options) {
  std::size_t n = options.min_actions + rng.index(options.max_actions - options.min_actions + 1);
  if (options.hide_optimal) n = std::max<std::size_t>(n, 3);
  DiscreteBandit db;
  db.q.resize(n);
  for (double& v : db.q) v = rng.uniform(-options.q_range, options.q_range);
  const std::size_t best =
      static_cast<std::size_t>(std::max_element(db.q.begin(), db.q.end()) - db.q.begin());

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng.engine());
  if (options.hide_optimal) std::erase(order, best);
  // The first two entries of `order` always keep mass, so at least one is sub-optimal.
  db.behavior.assign(n, 0.0);
  for (std::size_t j = 0; j < order.size(); ++j) {
    if (j < 2 || rng.uniform() >= options.zero_support_prob) {
      db.behavior[order[j]] = rng.uniform(0.05, 1.0);
    }
  }
  const double total = std::accumulate(db.behavior.begin(), db.behavior.end(), 0.0);
  for (double& v : db.behavior) v /= total;
  // Renormalizing can leave an ulp of error; fold it into the largest entry.
  const double resid = 1.0 - std::accumulate(db.behavior.begin(), db.behavior.end(), 0.0);
  *std::max_element(db.behavior.begin(), db.behavior.end()) += resid;

  const double qmax = db.q[best];
  db.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) db.weights[i] = std::exp(db.q[i] - qmax);
  return db;
}

}  // namespace parlab
