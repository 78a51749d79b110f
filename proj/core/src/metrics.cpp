#include "mwem/metrics.hpp"

#include <cmath>

namespace mwem {

ErrorReport error_report(std::span<const double> answers_a, std::span<const double> answers_b) {
  if (answers_a.size() != answers_b.size() || answers_a.empty()) {
    throw DomainError("error report needs two equally sized non-empty answer lists");
  }
  ErrorReport report;
  report.per_query_abs_error.reserve(answers_a.size());
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < answers_a.size(); ++i) {
    const double gap = std::abs(answers_a[i] - answers_b[i]);
    report.per_query_abs_error.push_back(gap);
    report.max_error = std::max(report.max_error, gap);
    sum += gap;
    sum_sq += gap * gap;
  }
  report.mean_error = sum / static_cast<double>(answers_a.size());
  report.mean_squared_error = sum_sq / static_cast<double>(answers_a.size());
  return report;
}

namespace {

std::vector<double> all_answers(const Workload& workload, const Histogram& hist) {
  std::vector<double> answers(workload.size());
  for (std::size_t i = 0; i < workload.size(); ++i) answers[i] = evaluate(workload[i], hist);
  return answers;
}

}  // namespace

ErrorReport error_report(const Workload& workload, const Histogram& a, const Histogram& b) {
  return error_report(all_answers(workload, a), all_answers(workload, b));
}

double max_error(const Workload& workload, const Histogram& a, const Histogram& b) {
  double worst = 0.0;
  for (const LinearQuery& q : workload) {
    worst = std::max(worst, std::abs(evaluate(q, a) - evaluate(q, b)));
  }
  return worst;
}

double avg_squared_error(const Workload& workload, const Histogram& a, const Histogram& b) {
  double sum = 0.0;
  for (const LinearQuery& q : workload) {
    const double gap = evaluate(q, a) - evaluate(q, b);
    sum += gap * gap;
  }
  return sum / static_cast<double>(workload.size());
}

double relative_entropy(const Histogram& b, const Histogram& a) {
  if (!b.universe()->same_as(*a.universe())) {
    throw DomainError("relative entropy requires a shared universe");
  }
  const double n = b.mass();
  if (!(n > 0.0) || !(a.mass() > 0.0)) {
    throw DomainError("relative entropy requires positive masses");
  }
  if (std::abs(a.mass() - n) > 1e-9 * n) {
    throw DomainError("relative entropy requires equal masses");
  }
  double sum = 0.0;
  std::span<const double> wb = b.weights();
  std::span<const double> wa = a.weights();
  for (std::size_t x = 0; x < wb.size(); ++x) {
    if (wb[x] == 0.0) continue;  // 0 log 0 = 0
    if (wa[x] <= 0.0) {
      throw DivergenceError("relative entropy is infinite: approximation has zero weight at a "
                            "supported element");
    }
    sum += wb[x] * std::log(wb[x] / wa[x]);
  }
  return sum / n;
}

ErrorReport cuboid_errors(std::span<const CuboidGroup> cuboids, const Histogram& a,
                          const Histogram& b) {
  if (cuboids.empty()) {
    throw DomainError("cuboid error report needs at least one cuboid");
  }
  ErrorReport report;
  double sum = 0.0;
  for (const CuboidGroup& group : cuboids) {
    double cell_sum = 0.0;
    for (const LinearQuery& cell : group.cells) {
      const double gap = std::abs(evaluate(cell, a) - evaluate(cell, b));
      report.per_query_abs_error.push_back(gap);
      report.max_error = std::max(report.max_error, gap);
    }
    for (std::size_t i = report.per_query_abs_error.size() - group.cells.size();
         i < report.per_query_abs_error.size(); ++i) {
      cell_sum += report.per_query_abs_error[i];
    }
    const double avg = cell_sum / static_cast<double>(group.cell_count());
    report.per_cuboid_error.push_back(avg);
    report.max_cuboid_error = std::max(report.max_cuboid_error, avg);
    sum += avg;
  }
  report.mean_cuboid_error = sum / static_cast<double>(cuboids.size());
  double total = 0.0, total_sq = 0.0;
  for (double gap : report.per_query_abs_error) {
    total += gap;
    total_sq += gap * gap;
  }
  report.mean_error = total / static_cast<double>(report.per_query_abs_error.size());
  report.mean_squared_error = total_sq / static_cast<double>(report.per_query_abs_error.size());
  return report;
}

}  // namespace mwem
