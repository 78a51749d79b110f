#include "mwem/domain.hpp"

#include <gtest/gtest.h>

#include "mwem/mwem.hpp"
#include "support/oracles.hpp"

namespace mwem {
namespace {

using testing::enumerate_tuples;
using testing::make_universe;

TEST(Schema, RejectsInvalidDeclarations) {
  EXPECT_THROW(AttributeSchema({}), DomainError);
  EXPECT_THROW(AttributeSchema({{"a", 1}}), DomainError);
  EXPECT_THROW(AttributeSchema({{"a", 2}, {"a", 3}}), DomainError);
}

TEST(Universe, IndexOfMatchesRowMajorOrder) {
  const UniversePtr u = make_universe({2, 2});
  EXPECT_EQ(u->index_of(std::vector<std::uint32_t>{0, 0}), 0u);
  EXPECT_EQ(u->index_of(std::vector<std::uint32_t>{1, 0}), 2u);
  EXPECT_EQ(u->index_of(std::vector<std::uint32_t>{0, 1}), 1u);
}

TEST(Universe, IndexOfMatchesLexicographicEnumeration) {
  const UniversePtr u = make_universe({3, 4, 5});
  const auto tuples = enumerate_tuples(u->schema());
  ASSERT_EQ(tuples.size(), 60u);
  // Locate (2,3,4) in the enumeration.
  const std::vector<std::uint32_t> probe{2, 3, 4};
  std::size_t position = tuples.size();
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    if (tuples[i] == probe) {
      position = i;
      break;
    }
  }
  EXPECT_EQ(position, 59u);
  EXPECT_EQ(u->index_of(probe), 59u);
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    EXPECT_EQ(u->index_of(tuples[i]), i);
  }
}

TEST(Universe, TupleOfInvertsIndexOfExhaustively) {
  // 2^4 * 3 * 5 * 7 = 1680 elements; full bijection check.
  const UniversePtr u = make_universe({2, 2, 2, 2, 3, 5, 7});
  ASSERT_EQ(u->size(), 1680u);
  for (std::uint64_t x = 0; x < u->size(); ++x) {
    EXPECT_EQ(u->index_of(u->tuple_of(x)), x);
  }
}

TEST(Universe, RejectsOutOfRangeValuesNamingTheAttribute) {
  const UniversePtr u = make_universe({2, 3});
  try {
    u->index_of(std::vector<std::uint32_t>{0, 3});
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("a1"), std::string::npos);
  }
}

TEST(Universe, HugeDomainsCarryLogSizeOnly) {
  std::vector<std::uint32_t> cards(100, 2);
  const UniversePtr u = Universe::create(make_schema(cards));
  EXPECT_FALSE(u->has_explicit_size());
  EXPECT_DOUBLE_EQ(u->log2_size(), 100.0);
  EXPECT_THROW(u->size(), ResourceError);
  EXPECT_THROW(u->index_of(std::vector<std::uint32_t>(100, 0)), ResourceError);
}

TEST(Histogram, FromRecordsCountsRows) {
  RecordTable table(make_schema({2, 2}));
  const Histogram empty = histogram_from_records(table);
  EXPECT_EQ(empty.mass(), 0.0);
  for (std::uint64_t x = 0; x < empty.size(); ++x) EXPECT_EQ(empty.weight(x), 0.0);

  table.append_row(std::vector<std::uint32_t>{0, 0});
  table.append_row(std::vector<std::uint32_t>{0, 0});
  table.append_row(std::vector<std::uint32_t>{1, 1});
  const Histogram h = histogram_from_records(table);
  EXPECT_DOUBLE_EQ(h.mass(), 3.0);
  EXPECT_DOUBLE_EQ(h.weight(0), 2.0);
  EXPECT_DOUBLE_EQ(h.weight(1), 0.0);
  EXPECT_DOUBLE_EQ(h.weight(2), 0.0);
  EXPECT_DOUBLE_EQ(h.weight(3), 1.0);
}

TEST(Histogram, FromRecordsPreservesMassOnRandomData) {
  RngStream rng(11);
  RecordTable table(make_schema({4, 4}));
  std::vector<std::uint32_t> row(2);
  for (int r = 0; r < 1000; ++r) {
    row[0] = static_cast<std::uint32_t>(rng.next_below(4));
    row[1] = static_cast<std::uint32_t>(rng.next_below(4));
    table.append_row(row);
  }
  const Histogram h = histogram_from_records(table);
  EXPECT_DOUBLE_EQ(h.mass(), 1000.0);
  double recount = 0.0;
  for (std::uint64_t x = 0; x < h.size(); ++x) recount += h.weight(x);
  EXPECT_NEAR(recount, 1000.0, 1e-9);
}

TEST(Histogram, UniformSplitsMassEvenly) {
  EXPECT_DOUBLE_EQ(uniform_histogram(make_universe({2, 2}), 100.0).weight(0), 25.0);
  // Degenerate-ish small domain (cardinalities must be >= 2, so use 2 and
  // check the two-element case directly).
  const Histogram h2 = uniform_histogram(make_universe({2}), 7.0);
  EXPECT_DOUBLE_EQ(h2.weight(0), 3.5);
  EXPECT_DOUBLE_EQ(h2.weight(1), 3.5);

  const Histogram h64 = uniform_histogram(make_universe({4, 4, 4}), 100.0);
  EXPECT_DOUBLE_EQ(h64.weight(0), 1.5625);
  double sum = 0.0;
  for (std::uint64_t x = 0; x < h64.size(); ++x) sum += h64.weight(x);
  EXPECT_NEAR(sum, 100.0, 1e-9);

  EXPECT_THROW(uniform_histogram(make_universe({2, 2}), -1.0), DomainError);
}

TEST(Histogram, ExplicitCapRefusesHugeDomains) {
  const UniversePtr u = make_universe({256, 256, 256});  // 2^24
  EXPECT_THROW(Histogram(u, /*explicit_cap=*/1 << 20), ResourceError);
  EXPECT_NO_THROW(Histogram(u, /*explicit_cap=*/std::uint64_t(1) << 24));
}

TEST(Histogram, RejectsNegativeOrNonFiniteWeights) {
  const UniversePtr u = make_universe({2, 2});
  EXPECT_THROW(Histogram(u, std::vector<double>{1.0, -0.5, 0.0, 0.0}), DomainError);
  EXPECT_THROW(Histogram(u, std::vector<double>{1.0, std::nan(""), 0.0, 0.0}), DomainError);
  EXPECT_THROW(Histogram(u, std::vector<double>{1.0, 2.0}), DomainError);
}

TEST(Histogram, UniformStaysPositiveUnderUpdates) {
  const UniversePtr u = make_universe({2, 2, 2, 2});
  Histogram approx = uniform_histogram(u, 50.0);
  RngStream rng(3);
  for (int i = 0; i < 200; ++i) {
    std::vector<std::size_t> attrs{rng.next_below(4)};
    const LinearQuery q = LinearQuery::parity(u, attrs);
    mw_update(approx, q, (rng.next_double() - 0.5) * 100.0);
    EXPECT_GT(approx.min_weight(), 0.0) << "after update " << i;
    EXPECT_NEAR(approx.mass(), 50.0, 1e-9 * 50.0);
  }
}

TEST(RecordTable, RejectsBadRowsNamingRowAndAttribute) {
  RecordTable table(make_schema({2, 3}));
  table.append_row(std::vector<std::uint32_t>{1, 2});
  try {
    table.append_row(std::vector<std::uint32_t>{1, 3});
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("row 1"), std::string::npos);
    EXPECT_NE(what.find("a1"), std::string::npos);
  }
  EXPECT_THROW(table.append_row(std::vector<std::uint32_t>{0}), DomainError);
}

TEST(RecordTable, WideCardinalitiesUseWideStorage) {
  RecordTable table(AttributeSchema({{"big", 5000}, {"small", 2}}));
  table.append_row(std::vector<std::uint32_t>{4357, 1});
  EXPECT_EQ(table.value(0, 0), 4357u);
  EXPECT_EQ(table.value(0, 1), 1u);
}

}  // namespace
}  // namespace mwem
