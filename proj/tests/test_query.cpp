#include "mwem/query.hpp"

#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "support/oracles.hpp"

namespace mwem {
namespace {

using testing::enumerate_tuples;
using testing::hadamard_entry;
using testing::hadamard_transform_oracle;
using testing::make_universe;
using testing::oracle_evaluate;
using testing::parity_row_index;
using testing::random_histogram;

TEST(Evaluate, RangeSumsWeightsInsideTheBox) {
  const UniversePtr u = make_universe({4});
  const Histogram h(u, std::vector<double>{1, 2, 3, 4});
  const LinearQuery q = LinearQuery::range(u, {{1, 2}});
  EXPECT_DOUBLE_EQ(evaluate(q, h), 5.0);
}

TEST(Evaluate, ZeroCustomQueryIsZero) {
  const UniversePtr u = make_universe({3, 3});
  RngStream rng(1);
  const Histogram h = random_histogram(u, 42.0, rng);
  const LinearQuery q = LinearQuery::custom(u, std::vector<double>(9, 0.0));
  EXPECT_DOUBLE_EQ(evaluate(q, h), 0.0);
}

TEST(Evaluate, ParityOnUniformIsZero) {
  // Brute-force oracle over every non-empty subset of up to 10 binary attrs.
  const UniversePtr u = make_universe({2, 2, 2, 2, 2, 2, 2, 2, 2, 2});
  const Histogram uniform = uniform_histogram(u, 512.0);
  for (std::uint64_t bits = 1; bits < 1024; bits += 97) {
    std::vector<std::size_t> attrs;
    for (std::size_t a = 0; a < 10; ++a) {
      if (bits & (std::uint64_t(1) << (9 - a))) attrs.push_back(a);
    }
    const LinearQuery q = LinearQuery::parity(u, attrs);
    EXPECT_NEAR(evaluate(q, uniform), 0.0, 1e-9);
    EXPECT_NEAR(oracle_evaluate(q, uniform), 0.0, 1e-9);
  }
}

TEST(Evaluate, MatchesElementwiseOracleOnRandomQueries) {
  const UniversePtr u = make_universe({3, 4, 2, 5});
  RngStream rng(7);
  const Histogram h = random_histogram(u, 350.0, rng);
  RngStream wrng(8);
  const Workload ranges = random_range_workload(u, 50, wrng);
  for (const LinearQuery& q : ranges) {
    EXPECT_NEAR(evaluate(q, h), oracle_evaluate(q, h), 1e-9 * h.mass());
  }
  const LinearQuery cell = LinearQuery::cell(u, {{0, 2}, {3, 4}});
  EXPECT_NEAR(evaluate(cell, h), oracle_evaluate(cell, h), 1e-9 * h.mass());
  const LinearQuery total = LinearQuery::cell(u, {});
  EXPECT_NEAR(evaluate(total, h), h.mass(), 1e-9 * h.mass());
}

TEST(Evaluate, RejectsUniverseMismatch) {
  const UniversePtr a = make_universe({2, 2});
  const UniversePtr b = make_universe({2, 3});
  const Histogram h = uniform_histogram(b, 10.0);
  EXPECT_THROW(evaluate(LinearQuery::cell(a, {{0, 1}}), h), DomainError);
}

TEST(Evaluate, RangeQueryIsProductOfPerAttributeIndicators) {
  const UniversePtr u = make_universe({3, 4, 5});
  RngStream rng(21);
  const Workload w = random_range_workload(u, 30, rng);
  for (const LinearQuery& q : w) {
    for (const auto& tuple : enumerate_tuples(u->schema())) {
      double product = 1.0;
      for (std::size_t a = 0; a < 3; ++a) {
        product *= q.intervals()[a].contains(tuple[a]) ? 1.0 : 0.0;
      }
      ASSERT_DOUBLE_EQ(q.value_on_tuple(tuple), product);
    }
  }
}

TEST(Queries, ValuesStayInUnitInterval) {
  const UniversePtr u = make_universe({2, 2, 2, 2, 2, 2, 2, 2});
  RngStream rng(5);
  const Workload ranges = random_range_workload(u, 40, rng);
  const Workload parities = parity_workload(u, 3);
  auto check = [&](const Workload& w) {
    for (const LinearQuery& q : w) {
      for (std::uint64_t x = 0; x < u->size(); ++x) {
        const double v = q.value_at(x);
        ASSERT_GE(v, -1.0);
        ASSERT_LE(v, 1.0);
      }
    }
  };
  check(ranges);
  check(parities);
  for (const LinearQuery& q : ranges) {
    for (std::uint64_t x = 0; x < u->size(); ++x) {
      const double v = q.value_at(x);
      ASSERT_TRUE(v == 0.0 || v == 1.0);
    }
  }
  for (const LinearQuery& q : parities) {
    for (std::uint64_t x = 0; x < u->size(); ++x) {
      const double v = q.value_at(x);
      ASSERT_TRUE(v == -1.0 || v == 1.0);
    }
  }
}

TEST(RandomRangeWorkload, RejectsEmptyAndIsDeterministic) {
  const UniversePtr u = make_universe({91, 25});
  RngStream zero_rng(1);
  EXPECT_THROW(random_range_workload(u, 0, zero_rng), DomainError);

  RngStream a(42), b(42), c(43);
  const Workload wa = random_range_workload(u, 100, a);
  const Workload wb = random_range_workload(u, 100, b);
  const Workload wc = random_range_workload(u, 100, c);
  bool differs_from_c = false;
  for (std::size_t i = 0; i < wa.size(); ++i) {
    for (std::size_t attr = 0; attr < 2; ++attr) {
      EXPECT_EQ(wa[i].intervals()[attr].lo, wb[i].intervals()[attr].lo);
      EXPECT_EQ(wa[i].intervals()[attr].hi, wb[i].intervals()[attr].hi);
      if (wa[i].intervals()[attr].lo != wc[i].intervals()[attr].lo) differs_from_c = true;
    }
  }
  EXPECT_TRUE(differs_from_c);
}

TEST(RandomRangeWorkload, AgeHoursShapeSatisfiesInvariants) {
  const UniversePtr u = make_universe({91, 25});
  RngStream rng(2024);
  const Workload w = random_range_workload(u, 2000, rng);
  EXPECT_EQ(w.size(), 2000u);
  for (const LinearQuery& q : w) {
    ASSERT_EQ(q.kind(), LinearQuery::Kind::range);
    for (std::size_t a = 0; a < 2; ++a) {
      const Interval iv = q.intervals()[a];
      ASSERT_LE(iv.lo, iv.hi);
      ASSERT_LT(iv.hi, u->schema().attribute(a).cardinality);
    }
  }
}

TEST(RandomRangeWorkload, IntervalsAreUniformOverPairs) {
  // Cardinality 4 has 10 intervals; each should appear ~1/10 of the time.
  const UniversePtr u = make_universe({4});
  RngStream rng(9);
  const Workload w = random_range_workload(u, 40000, rng);
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> counts;
  for (const LinearQuery& q : w) {
    counts[{q.intervals()[0].lo, q.intervals()[0].hi}]++;
  }
  EXPECT_EQ(counts.size(), 10u);
  for (const auto& [iv, count] : counts) {
    EXPECT_NEAR(count / 40000.0, 0.1, 0.01);
  }
}

TEST(ParityWorkload, CountsAndOrdering) {
  EXPECT_EQ(parity_workload(make_universe({2, 2, 2, 2, 2, 2}), 3).size(), 41u);
  EXPECT_EQ(parity_workload(make_universe({2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2}), 2)
                .size(),
            136u);

  const UniversePtr u1 = make_universe({2});
  const Workload w1 = parity_workload(u1, 1);
  ASSERT_EQ(w1.size(), 1u);
  EXPECT_DOUBLE_EQ(w1[0].value_on_tuple(std::vector<std::uint32_t>{0}), 1.0);
  EXPECT_DOUBLE_EQ(w1[0].value_on_tuple(std::vector<std::uint32_t>{1}), -1.0);

  // Ordered by size then lexicographically.
  const Workload w = parity_workload(make_universe({2, 2, 2}), 3);
  std::vector<std::vector<std::size_t>> expected{{0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2}, {0, 1, 2}};
  ASSERT_EQ(w.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_EQ(w[i].footprint(), expected[i]);
  }

  EXPECT_THROW(parity_workload(make_universe({2, 3}), 2), DomainError);
}

TEST(CuboidWorkload, CountsCellsAndCoverage) {
  const UniversePtr u8 = make_universe({2, 2, 2, 2, 2, 2, 2, 2});
  EXPECT_EQ(cuboid_workload(u8, 8, /*include_empty=*/true).size(), 256u);
  EXPECT_EQ(cuboid_workload(u8, 3).size(), 92u);  // C(8,1)+C(8,2)+C(8,3)

  const UniversePtr u2 = make_universe({2, 2});
  const auto groups = cuboid_workload(u2, 1);
  ASSERT_EQ(groups.size(), 2u);
  for (const CuboidGroup& g : groups) {
    EXPECT_EQ(g.cell_count(), 2u);
  }

  // Cells partition the universe: disjoint and covering.
  const UniversePtr u = make_universe({3, 2, 4});
  for (const CuboidGroup& g : cuboid_workload(u, 2)) {
    std::uint64_t expected_cells = 1;
    for (std::size_t a : g.attributes) expected_cells *= u->schema().attribute(a).cardinality;
    EXPECT_EQ(g.cell_count(), expected_cells);
    for (std::uint64_t x = 0; x < u->size(); ++x) {
      int hits = 0;
      for (const LinearQuery& cell : g.cells) hits += cell.value_at(x) > 0.5 ? 1 : 0;
      ASSERT_EQ(hits, 1) << "element " << x << " not covered exactly once";
    }
  }

  EXPECT_THROW(cuboid_workload(u, 9), DomainError);
}

TEST(CuboidWorkload, CellsSumToMassOnAnyHistogram) {
  const UniversePtr u = make_universe({3, 2, 4});
  RngStream rng(17);
  const Histogram h = random_histogram(u, 123.0, rng);
  for (const CuboidGroup& g : cuboid_workload(u, 3)) {
    double sum = 0.0;
    for (const LinearQuery& cell : g.cells) {
      const double v = evaluate(cell, h);
      EXPECT_GE(v, 0.0);
      sum += v;
    }
    EXPECT_NEAR(sum, h.mass(), 1e-9 * h.mass());
  }
}

TEST(Hadamard, MatchesRecursionBaseCases) {
  const HadamardMatrix h1 = hadamard_matrix(1);
  ASSERT_EQ(h1.side, 1u);
  EXPECT_EQ(h1.at(0, 0), 1);

  const HadamardMatrix h2 = hadamard_matrix(2);
  ASSERT_EQ(h2.side, 2u);
  EXPECT_EQ(h2.at(0, 0), 1);
  EXPECT_EQ(h2.at(0, 1), 1);
  EXPECT_EQ(h2.at(1, 0), 1);
  EXPECT_EQ(h2.at(1, 1), -1);

  EXPECT_THROW(hadamard_matrix(0), DomainError);
  EXPECT_THROW(hadamard_matrix(15), ResourceError);
}

TEST(Hadamard, TimesOwnTransposeIsScaledIdentity) {
  const HadamardMatrix h = hadamard_matrix(4);  // side 8
  for (std::size_t r = 0; r < h.side; ++r) {
    for (std::size_t c = 0; c < h.side; ++c) {
      long dot = 0;
      for (std::size_t k = 0; k < h.side; ++k) dot += h.at(r, k) * h.at(c, k);
      EXPECT_EQ(dot, r == c ? 8 : 0);
    }
  }
}

TEST(Hadamard, RowsMatchParityValueTables) {
  const int d = 6;
  const UniversePtr u = make_universe({2, 2, 2, 2, 2, 2});
  const HadamardMatrix h = hadamard_matrix(d + 1);
  ASSERT_EQ(h.side, 64u);
  const Workload parities = parity_workload(u, d);
  for (const LinearQuery& q : parities) {
    const std::uint64_t row = parity_row_index(q.footprint(), d);
    for (std::uint64_t x = 0; x < 64; ++x) {
      ASSERT_EQ(q.value_at(x), h.at(row, x));
      ASSERT_EQ(h.at(row, x), hadamard_entry(row, x));
    }
  }
}

TEST(Parity, EvaluationEqualsHadamardTransformCoordinate) {
  const UniversePtr u = make_universe({2, 2, 2, 2, 2, 2, 2, 2});
  RngStream rng(33);
  const Histogram h = random_histogram(u, 500.0, rng);
  const std::vector<double> transform =
      hadamard_transform_oracle(std::vector<double>(h.weights().begin(), h.weights().end()));
  for (const LinearQuery& q : parity_workload(u, 8)) {
    const std::uint64_t row = parity_row_index(q.footprint(), 8);
    EXPECT_NEAR(evaluate(q, h), transform[row], 1e-9 * h.mass());
  }
}

TEST(Marginal, MatchesDirectCounting) {
  const UniversePtr u = make_universe({2, 2});
  const Histogram uniform = uniform_histogram(u, 100.0);
  const std::vector<std::size_t> attr0{0};
  const auto m0 = marginal_of(uniform, attr0);
  ASSERT_EQ(m0.size(), 2u);
  EXPECT_DOUBLE_EQ(m0[0], 50.0);
  EXPECT_DOUBLE_EQ(m0[1], 50.0);

  const Histogram h(u, std::vector<double>{2, 0, 0, 1});
  const std::vector<std::size_t> attr1{1};
  const auto m1 = marginal_of(h, attr1);
  EXPECT_DOUBLE_EQ(m1[0], 2.0);
  EXPECT_DOUBLE_EQ(m1[1], 1.0);

  EXPECT_THROW(marginal_of(h, std::vector<std::size_t>{}), DomainError);
  EXPECT_THROW(marginal_of(h, std::vector<std::size_t>{5}), DomainError);
}

TEST(Marginal, CellsSumToMassForEverySubset) {
  const UniversePtr u = make_universe({3, 4, 2});
  RngStream rng(12);
  const Histogram h = random_histogram(u, 77.0, rng);
  const std::vector<std::vector<std::size_t>> subsets{{0}, {1}, {2}, {0, 1}, {1, 2}, {0, 1, 2}};
  for (const auto& subset : subsets) {
    const auto m = marginal_of(h, subset);
    double sum = 0.0;
    for (double cell : m) {
      EXPECT_GE(cell, 0.0);
      sum += cell;
    }
    EXPECT_NEAR(sum, h.mass(), 1e-9 * h.mass());
  }
}

TEST(Workload, RejectsEmptyAndMixedUniverses) {
  EXPECT_THROW(Workload({}, "empty"), DomainError);
  const UniversePtr a = make_universe({2, 2});
  const UniversePtr b = make_universe({3, 3});
  std::vector<LinearQuery> queries;
  queries.push_back(LinearQuery::cell(a, {{0, 1}}));
  queries.push_back(LinearQuery::cell(b, {{0, 1}}));
  EXPECT_THROW(Workload(std::move(queries), "mixed"), DomainError);
}

TEST(CustomQuery, ValidatesRangeAndSize) {
  const UniversePtr u = make_universe({2, 2});
  EXPECT_THROW(LinearQuery::custom(u, std::vector<double>{0.0, 2.0, 0.0, 0.0}), DomainError);
  EXPECT_THROW(LinearQuery::custom(u, std::vector<double>{0.0, 1.0}), DomainError);
  const LinearQuery q = LinearQuery::custom(u, std::vector<double>{-1.0, 0.25, 0.5, 1.0});
  EXPECT_DOUBLE_EQ(q.min_value(), -1.0);
  EXPECT_DOUBLE_EQ(q.max_value(), 1.0);
}

}  // namespace
}  // namespace mwem
