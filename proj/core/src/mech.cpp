#include "mwem/mech.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mwem {

BudgetLedger::BudgetLedger(double cap) : cap_(cap) {
  if (!(cap > 0.0)) {
    throw ConfigError("budget cap must be positive");
  }
}

void BudgetLedger::charge(std::string label, double epsilon_spent) {
  if (!(epsilon_spent > 0.0)) {
    throw DomainError("ledger charges must be positive");
  }
  if (total_ + epsilon_spent > cap_ + kLedgerSlack) {
    throw BudgetExhaustedError("privacy budget exhausted: charge '" + label + "' of " +
                               std::to_string(epsilon_spent) + " exceeds remaining " +
                               std::to_string(cap_ - total_));
  }
  total_ += epsilon_spent;
  entries_.push_back({std::move(label), epsilon_spent});
}

double laplace_from_uniform(double unit_open, bool negative, double scale) {
  const double magnitude = -scale * std::log(unit_open);
  return negative ? -magnitude : magnitude;
}

double laplace_sample(double scale, RngStream& rng) {
  if (!(scale > 0.0)) {
    throw DomainError("Laplace scale must be positive");
  }
  const double u = rng.next_open_double();
  const bool negative = rng.next_bool();
  return laplace_from_uniform(u, negative, scale);
}

std::size_t exponential_mechanism(std::span<const double> scores, double epsilon, RngStream& rng) {
  if (scores.empty()) {
    throw DomainError("exponential mechanism needs at least one candidate");
  }
  if (!(epsilon > 0.0)) {
    throw DomainError("exponential mechanism epsilon must be positive");
  }
  const double half_eps = epsilon / 2.0;
  double top = -std::numeric_limits<double>::infinity();
  for (double s : scores) {
    if (!std::isfinite(s)) throw DomainError("exponential mechanism scores must be finite");
    top = std::max(top, half_eps * s);
  }
  std::vector<double> weight(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    weight[i] = std::exp(half_eps * scores[i] - top);
    total += weight[i];
  }
  double u = total * rng.next_double();
  for (std::size_t i = 0; i < weight.size(); ++i) {
    u -= weight[i];
    if (u <= 0.0) return i;
  }
  return weight.size() - 1;
}

double eps_delta_recharacterize(double epsilon, int iterations, double delta) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  if (iterations < 1) throw DomainError("iteration count must be >= 1");
  if (!(delta > 0.0) || delta >= 1.0) {
    throw DomainError("recharacterization requires delta in (0, 1)");
  }
  const double t = static_cast<double>(iterations);
  return epsilon * std::sqrt(2.0 * std::log(1.0 / delta) / t) +
         epsilon * (std::exp(epsilon / t) - 1.0);
}

}  // namespace mwem
