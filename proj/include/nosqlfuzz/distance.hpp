#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "nosqlfuzz/filter.hpp"
#include "nosqlfuzz/value.hpp"

namespace nosqlfuzz {

/// Non-negative branch distance; kMaxDistance marks structurally hopeless
/// comparisons (wrong kinds, absent gradient) and normalizes to 1.
using Distance = double;
inline constexpr Distance kMaxDistance = std::numeric_limits<double>::infinity();

struct DistanceConfig {
    double k = 1.0;
    Distance missing_field_penalty = kMaxDistance;
    bool char_as_codepoint = true;
};

enum class RelOp { Gt, Gte, Lt, Lte, Eq, Ne };

struct EmptyCollection : std::runtime_error {
    EmptyCollection() : std::runtime_error("collection distance over an empty collection") {}
};

/// x/(x+1), mapping kMaxDistance to 1. Monotone, 0 at 0, < 1 for finite x.
double nu(Distance x);

/// Edit distance over codepoint sequences.
std::size_t levenshtein(const std::vector<std::int32_t>& a, const std::vector<std::int32_t>& b);
std::size_t levenshtein(std::string_view a, std::string_view b);

/// Relational distance between two values: 0 when the relation holds,
/// a positive gradient toward satisfying it otherwise. Numeric pairs use
/// the classic rules (offset by cfg.k for strict and failed comparisons);
/// Text equality uses Levenshtein, or the codepoint gap for single-char
/// operands; Text ordering compares the first differing codepoint (end of
/// string orders below every character). Everything else is categorical:
/// 0 or k for same-kind equality, kMaxDistance across kinds.
Distance rho(RelOp op, const Value& a, const Value& b, const DistanceConfig& cfg);

/// Distance from d to satisfying a single condition at path p. Zero iff
/// matches_condition(d, p, c).
Distance hd_condition(const Document& d, const FieldPath& p, const Condition& c,
                      const DistanceConfig& cfg);

/// Document-level heuristic: field clause -> hd_condition; and-node ->
/// sum of normalized clause distances; or-node -> min of raw clause
/// distances; nor-node -> sum of normalized negated-clause distances.
/// Zero iff matches(d, f).
Distance hd_filter(const Document& d, const Filter& f, const DistanceConfig& cfg);

/// Min over documents of hd_filter. Throws EmptyCollection on no docs.
Distance collection_distance(const std::vector<Document>& docs, const Filter& f,
                             const DistanceConfig& cfg);

}  // namespace nosqlfuzz
