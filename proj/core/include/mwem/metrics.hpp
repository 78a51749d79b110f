#pragma once

#include <span>
#include <vector>

#include "mwem/domain.hpp"
#include "mwem/query.hpp"

namespace mwem {

// Per-query and per-cuboid error summary. Aggregates are plain functions of
// the per-item lists so reports can be recomputed from serialized output.
struct ErrorReport {
  std::vector<double> per_query_abs_error;
  double max_error = 0.0;
  double mean_error = 0.0;
  double mean_squared_error = 0.0;

  std::vector<double> per_cuboid_error;  // average absolute cell error per cuboid
  double max_cuboid_error = 0.0;
  double mean_cuboid_error = 0.0;
};

// max_{q in workload} |q(a) - q(b)|.
double max_error(const Workload& workload, const Histogram& a, const Histogram& b);

// mean_{q in workload} (q(a) - q(b))^2.
double avg_squared_error(const Workload& workload, const Histogram& a, const Histogram& b);

// Aggregates from precomputed per-query answers.
ErrorReport error_report(std::span<const double> answers_a, std::span<const double> answers_b);
ErrorReport error_report(const Workload& workload, const Histogram& a, const Histogram& b);

// RE(b || a) = sum_x b(x) log(b(x) / a(x)) / n, natural log, 0 log 0 = 0.
// Throws DivergenceError when a(x) = 0 somewhere b(x) > 0.
double relative_entropy(const Histogram& b, const Histogram& a);

// Per-cuboid average absolute cell error, with max/mean across cuboids.
ErrorReport cuboid_errors(std::span<const CuboidGroup> cuboids, const Histogram& a,
                          const Histogram& b);

}  // namespace mwem
