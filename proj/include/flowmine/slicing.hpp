#pragma once

#include <cstddef>
#include <vector>

#include "flowmine/types.hpp"

namespace flowmine {

inline constexpr std::size_t kDefaultSliceWindow = 16;

// Causality slicing: partition a trace into slices such that, within a slice,
// every event after the first is causality-related (under `predicate`) to at
// least one of the preceding `window` events of that same slice. Events that
// relate to no open slice start a new one; when several slices match, the most
// recently extended one wins. The slices partition the input and preserve
// relative order. `window` must be >= 2.
std::vector<Trace> causality_slice(const Trace& trace, const Catalog& catalog,
                                   Predicate predicate = Predicate::kUnion,
                                   std::size_t window = kDefaultSliceWindow);

}  // namespace flowmine
