#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mwem/errors.hpp"
#include "mwem/rng.hpp"

namespace mwem {

struct PrivacyParams {
  double epsilon = 1.0;
  double delta = 0.0;
  int iterations = 10;  // T

  void validate() const {
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (delta < 0.0 || delta >= 1.0) throw ConfigError("delta must lie in [0, 1)");
    if (iterations < 1) throw ConfigError("iteration count must be >= 1");
  }
};

struct LedgerEntry {
  std::string label;
  double epsilon_spent = 0.0;
};

// Additive record of privacy budget consumption. Charges that would push the
// total past the cap abort the run.
class BudgetLedger {
 public:
  explicit BudgetLedger(double cap);

  void charge(std::string label, double epsilon_spent);
  double total() const { return total_; }
  double cap() const { return cap_; }
  double remaining() const { return cap_ - total_; }
  const std::vector<LedgerEntry>& entries() const { return entries_; }

 private:
  double cap_;
  double total_ = 0.0;
  std::vector<LedgerEntry> entries_;
};

inline constexpr double kLedgerSlack = 1e-12;

// Laplace(0, scale) from a unit draw and a sign; exposed for direct testing.
double laplace_from_uniform(double unit_open, bool negative, double scale);

// Sample from Laplace(0, scale): exponentially distributed magnitude with a
// random sign; the unit draw is kept away from 0 so log() stays finite.
double laplace_sample(double scale, RngStream& rng);

// Returns index i with probability exp(epsilon * scores[i] / 2) / Z.
// Stabilized by subtracting the maximum scaled score before exponentiation;
// sampled by one uniform draw and a cumulative scan.
std::size_t exponential_mechanism(std::span<const double> scores, double epsilon, RngStream& rng);

// Effective epsilon' such that a T-iteration epsilon-private run is also
// (epsilon', delta)-private under k-fold adaptive composition:
//   epsilon * sqrt(2 ln(1/delta) / T) + epsilon * (e^(epsilon/T) - 1).
double eps_delta_recharacterize(double epsilon, int iterations, double delta);

}  // namespace mwem
