#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "nosqlfuzz/distance.hpp"
#include "nosqlfuzz/filter.hpp"
#include "nosqlfuzz/rng.hpp"
#include "nosqlfuzz/value.hpp"

namespace nosqlfuzz {

/// Random document over a deliberately small domain (fields a..d plus a
/// nested e.f, values drawn from a few near-collision scalars) so that
/// random document/filter pairs match often enough to exercise both
/// outcomes of every operator.
Document random_document(Rng& rng);

/// Random filter over the same domain: every condition kind, nested $not,
/// and $and/$or/$nor combinators up to depth 3.
Filter random_filter(Rng& rng);

struct EquivalenceViolation {
    std::size_t trial = 0;
    Document doc;
    Filter filter;
    bool matched = false;
    Distance hd = 0.0;
};

struct EquivalenceResult {
    std::size_t trials = 0;
    std::size_t matched = 0;
    std::size_t violations = 0;
    std::optional<EquivalenceViolation> first;
};

using DocDistanceFn = std::function<Distance(const Document&, const Filter&, const DistanceConfig&)>;

/// Checks hd(doc, filter) == 0 exactly when the matcher accepts, over
/// `trials` random pairs. `distance` overrides hd_filter, which lets a
/// test prove the check rejects a deliberately broken engine.
EquivalenceResult run_equivalence_trials(std::size_t trials, std::uint64_t seed,
                                         const DistanceConfig& cfg,
                                         const DocDistanceFn& distance = {});

}  // namespace nosqlfuzz
