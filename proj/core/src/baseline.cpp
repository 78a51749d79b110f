#include "mwem/baseline.hpp"

#include <utility>

#include "mwem/sensitive.hpp"

namespace mwem {

BaselineResult run_baseline(const Histogram& dataset, const BaselineConfig& config,
                            RngStream& rng) {
  config.validate();
  if (!dataset.universe()->schema().all_binary()) {
    throw DomainError("baseline requires a binary universe");
  }
  if (!(dataset.mass() > 0.0)) {
    throw DomainError("dataset mass must be positive");
  }

  Workload workload = [&] {
    std::vector<LinearQuery> queries;
    if (config.include_total) {
      queries.push_back(LinearQuery::cell(dataset.universe(), {}));
    }
    Workload parities = parity_workload(dataset.universe(), config.max_order);
    queries.insert(queries.end(), parities.begin(), parities.end());
    return Workload(std::move(queries), "baseline parity order<=" +
                                            std::to_string(config.max_order));
  }();

  BudgetLedger ledger(config.epsilon);
  SensitiveGate gate(SensitiveSource(&dataset), &workload, &ledger, /*diagnostics_allowed=*/false);

  const double n = gate.mass();
  const double eps_each = config.epsilon / static_cast<double>(workload.size());
  const double noise_scale = static_cast<double>(workload.size()) / config.epsilon;

  Histogram approx = uniform_histogram(dataset.universe(), n);
  History history;
  history.reserve(workload.size());
  for (std::size_t q = 0; q < workload.size(); ++q) {
    const double exact = gate.charged_answer(q, "measure", eps_each);
    const double m = exact + laplace_sample(noise_scale, rng);
    history.push_back({q, m, m - evaluate(workload[q], approx)});
  }
  mw_replay(approx, workload, history, config.replay_passes);

  return BaselineResult{std::move(approx), std::move(workload), std::move(history),
                        std::move(ledger), gate.charged_touches()};
}

}  // namespace mwem
