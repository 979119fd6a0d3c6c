#include "parlab/theory/bound.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "parlab/errors.hpp"

namespace parlab {

double BoundInstance::q(std::size_t k, std::size_t j, std::span<const double> a) const {
  const NextState& ns = next_states.at(j);
  const Matrix& h = ns.hessians.at(k);
  double lin = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < action_dim; ++i) {
    const double di = a[i] - ns.behavior_action[i];
    lin += ns.grads[k][i] * di;
    for (std::size_t m = 0; m < action_dim; ++m) {
      quad += di * h(i, m) * (a[m] - ns.behavior_action[m]);
    }
  }
  return ns.value + lin + 0.5 * quad;
}

Vector BoundInstance::grad_q(std::size_t k, std::size_t j, std::span<const double> a) const {
  const NextState& ns = next_states.at(j);
  const Matrix& h = ns.hessians.at(k);
  Vector g = ns.grads.at(k);
  for (std::size_t i = 0; i < action_dim; ++i) {
    for (std::size_t m = 0; m < action_dim; ++m) g[i] += h(i, m) * (a[m] - ns.behavior_action[m]);
  }
  return g;
}

void BoundInstance::validate() const {
  if (next_states.empty() || pairs.empty() || ensemble_size() == 0) {
    throw std::invalid_argument("BoundInstance: empty instance");
  }
  for (const NextState& ns : next_states) {
    if (ns.behavior_action.size() != action_dim || ns.policy_action.size() != action_dim ||
        ns.grads.size() != ensemble_size() || ns.hessians.size() != ensemble_size()) {
      throw DimensionError("BoundInstance: inconsistent next-state shapes");
    }
  }
  for (const Pair& p : pairs) {
    if (p.next_probs.size() != next_states.size()) {
      throw DimensionError("BoundInstance: next-state distribution size");
    }
  }
}

namespace {

double min_eigen_of_grad_cov(const BoundInstance& inst, std::size_t j, std::span<const double> a) {
  const std::size_t k_count = inst.ensemble_size();
  const auto d = static_cast<Eigen::Index>(inst.action_dim);
  Eigen::MatrixXd g(static_cast<Eigen::Index>(k_count), d);
  for (std::size_t k = 0; k < k_count; ++k) {
    const Vector gk = inst.grad_q(k, j, a);
    for (Eigen::Index i = 0; i < d; ++i) g(static_cast<Eigen::Index>(k), i) = gk[static_cast<std::size_t>(i)];
  }
  const Eigen::RowVectorXd mean = g.colwise().mean();
  const Eigen::MatrixXd centered = g.rowwise() - mean;
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(k_count);
  const double asym = (cov - cov.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(1.0, cov.cwiseAbs().maxCoeff())) {
    throw std::runtime_error("divergence_bound_report: covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov, Eigen::EigenvaluesOnly);
  // Eigenvalues of a PSD matrix can come back as -1e-17; the covariance cannot be negative.
  return std::max(0.0, solver.eigenvalues().minCoeff());
}

}  // namespace

BoundReport divergence_bound_report(const BoundInstance& inst, std::size_t probe_points) {
  inst.validate();
  if (probe_points < 2) throw std::invalid_argument("divergence_bound_report: need >= 2 probe points");
  const std::size_t k_count = inst.ensemble_size();
  const double kd = static_cast<double>(k_count);
  const double g2 = inst.gamma * inst.gamma;
  const double noise_var = inst.reward_std * inst.reward_std;

  BoundReport rep;
  rep.mu = std::numeric_limits<double>::infinity();
  Vector gap2(inst.next_states.size());
  Vector probe(inst.action_dim);
  for (std::size_t j = 0; j < inst.next_states.size(); ++j) {
    const auto& ns = inst.next_states[j];
    gap2[j] = 0.0;
    for (std::size_t i = 0; i < inst.action_dim; ++i) {
      const double d = ns.policy_action[i] - ns.behavior_action[i];
      gap2[j] += d * d;
    }
    for (std::size_t p = 0; p < probe_points; ++p) {
      const double t = static_cast<double>(p) / static_cast<double>(probe_points - 1);
      for (std::size_t i = 0; i < inst.action_dim; ++i) {
        probe[i] = ns.behavior_action[i] + t * (ns.policy_action[i] - ns.behavior_action[i]);
      }
      rep.mu = std::min(rep.mu, min_eigen_of_grad_cov(inst, j, probe));
    }
  }

  const double n_pairs = static_cast<double>(inst.pairs.size());
  for (const auto& pair : inst.pairs) {
    // Var over (s', k) of Q_k(s', pi_theta(s')) and of v(s'), by exact two-pass enumeration.
    double q_mean = 0.0, v_mean = 0.0, div = 0.0;
    for (std::size_t j = 0; j < inst.next_states.size(); ++j) {
      const double pj = pair.next_probs[j];
      const auto& ns = inst.next_states[j];
      for (std::size_t k = 0; k < k_count; ++k) q_mean += pj / kd * inst.q(k, j, ns.policy_action);
      v_mean += pj * ns.value;
      div += pj * gap2[j];
    }
    double q_var = 0.0, v_var = 0.0;
    for (std::size_t j = 0; j < inst.next_states.size(); ++j) {
      const double pj = pair.next_probs[j];
      const auto& ns = inst.next_states[j];
      for (std::size_t k = 0; k < k_count; ++k) {
        const double e = inst.q(k, j, ns.policy_action) - q_mean;
        q_var += pj / kd * e * e;
      }
      v_var += pj * (ns.value - v_mean) * (ns.value - v_mean);
    }
    rep.lhs += (noise_var + g2 * q_var) / n_pairs;
    rep.aleatoric += (noise_var + g2 * v_var) / n_pairs;
    rep.divergence += div / n_pairs;
  }
  rep.unscaled_rhs = rep.mu * rep.divergence;
  rep.rhs = g2 * rep.unscaled_rhs;
  return rep;
}

double monte_carlo_min_loss(const BoundInstance& inst, std::size_t samples, Rng& rng) {
  inst.validate();
  if (samples < 2) throw std::invalid_argument("monte_carlo_min_loss: need >= 2 samples");
  double total = 0.0;
  for (const auto& pair : inst.pairs) {
    std::discrete_distribution<std::size_t> next(pair.next_probs.begin(), pair.next_probs.end());
    double mean = 0.0, m2 = 0.0;
    for (std::size_t n = 0; n < samples; ++n) {
      const std::size_t j = next(rng.engine());
      const std::size_t k = rng.index(inst.ensemble_size());
      const double y = pair.reward_mean + inst.reward_std * rng.normal() +
                       inst.gamma * inst.q(k, j, inst.next_states[j].policy_action);
      const double delta = y - mean;
      mean += delta / static_cast<double>(n + 1);
      m2 += delta * (y - mean);
    }
    total += m2 / static_cast<double>(samples);
  }
  return total / static_cast<double>(inst.pairs.size());
}

BoundInstance random_bound_instance(Rng& rng, const RandomBoundOptions& o) {
  BoundInstance inst;
  inst.action_dim = o.action_dim;
  inst.gamma = o.gamma;
  inst.reward_std = rng.uniform(0.0, 0.5);
  Vector shared_grad(o.action_dim);
  for (double& v : shared_grad) v = rng.normal();
  for (std::size_t j = 0; j < o.next_states; ++j) {
    BoundInstance::NextState ns;
    ns.value = rng.normal(0.0, 2.0);
    ns.behavior_action.resize(o.action_dim);
    ns.policy_action.resize(o.action_dim);
    for (std::size_t i = 0; i < o.action_dim; ++i) {
      ns.behavior_action[i] = rng.uniform(-1.0, 1.0);
      ns.policy_action[i] = ns.behavior_action[i] + o.policy_shift * rng.normal();
    }
    for (std::size_t k = 0; k < o.ensemble; ++k) {
      Matrix h(o.action_dim, o.action_dim);
      Vector g = shared_grad;
      if (!o.linear_critic) {
        for (double& v : g) v = rng.normal();
        for (std::size_t a = 0; a < o.action_dim; ++a) {
          for (std::size_t b = 0; b <= a; ++b) h(a, b) = h(b, a) = rng.normal(0.0, 0.5);
        }
      }
      ns.grads.push_back(std::move(g));
      ns.hessians.push_back(std::move(h));
    }
    inst.next_states.push_back(std::move(ns));
  }
  for (std::size_t p = 0; p < o.pairs; ++p) {
    BoundInstance::Pair pair;
    pair.reward_mean = rng.normal();
    pair.next_probs.resize(o.next_states);
    double total = 0.0;
    for (double& v : pair.next_probs) total += (v = rng.uniform(0.0, 1.0));
    for (double& v : pair.next_probs) v /= total;
    inst.pairs.push_back(std::move(pair));
  }
  return inst;
}

}  // namespace parlab
