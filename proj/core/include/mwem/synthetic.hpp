#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mwem/domain.hpp"
#include "mwem/rng.hpp"

namespace mwem {

// Binary attributes set independently with probability p.
RecordTable synthetic_binary_independent(std::size_t rows, std::size_t attributes, double p,
                                         RngStream& rng);

// Correlated binary chain: the first attribute is a fair coin, each later one
// flips its predecessor with probability flip_prob.
RecordTable synthetic_binary_chain(std::size_t rows, std::size_t attributes, double flip_prob,
                                   RngStream& rng);

// Mixture of fixed row patterns (chosen by `pattern_weights`) with a per-cell
// resample probability; general categorical schemas.
RecordTable synthetic_pattern_mixture(const AttributeSchema& schema, std::size_t rows,
                                      std::span<const std::vector<std::uint32_t>> patterns,
                                      std::span<const double> pattern_weights, double noise,
                                      RngStream& rng);

// Copy of `table` with `extra` additional binary attributes set independently
// with probability p.
RecordTable append_noise_attributes(const RecordTable& table, std::size_t extra, double p,
                                    RngStream& rng);

}  // namespace mwem
