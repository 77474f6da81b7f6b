#pragma once

// Manifold files (JSON):
//
//   {"dim": 2, "domain": [lo1, hi1, lo2, hi2],
//    "metric": {"g11": "...", "g21": "...", "g22": "..."},
//    "weight": {"V": "..."},          // optional, default "0"
//    "name": "..."}                   // optional
//
// or {"builtin": "sphere(2,1)"} / {"builtin": {"name": "sphere", "params": [2, 1]}}.
// Metric keys are g<i><j> with i >= j (1-based); g_<i>_<j> is accepted for any dimension and
// g<j><i> as an alias of the lower entry.

#include <optional>
#include <string>

#include "bmcd/zoo.hpp"

namespace bmcd {

struct LoadedManifold {
  ChartManifold manifold;
  std::optional<ZooEntry> builtin;  // set when the file or name refers to the zoo
};

/// Parses a manifold document. Throws InputError (ParseError for expression text).
LoadedManifold parse_manifold_json(const std::string& text);

/// `spec` is a path to a manifold file or a built-in name such as "sphere(2,1)".
LoadedManifold load_manifold(const std::string& spec);

}  // namespace bmcd
