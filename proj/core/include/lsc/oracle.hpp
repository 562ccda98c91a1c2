#pragma once

#include <cstddef>

#include "lsc/monitor.hpp"
#include "lsc/spec.hpp"

namespace lsc {

// Reference semantics by direct recursive enumeration over the log suffix
// of each trigger match. Independent of the compiler and the streaming
// session; used to cross-validate check(). Throws LogTooLarge beyond
// max_events (total events, meta included).
Report oracle_check(const Spec& spec, const Log& log,
                    const PredicateRegistry& predicates = {},
                    std::size_t max_events = 64);

}  // namespace lsc
