#pragma once

#include <filesystem>
#include <string_view>

#include "mcjesp/model.hpp"

namespace mcjesp {

/// Parse Cassandra-style `.dpomdp` text.
///
/// Supported: `agents`, `discount`, `values` (reward|cost), `states`,
/// `actions`, `observations` (counts or names, one line per agent), `start`
/// (vector, `uniform`, a single state, `start include:`/`start exclude:`),
/// and `T:`/`O:`/`R:` entries in scalar, row and matrix forms with the
/// `uniform`/`identity` keywords and `*` wildcards.  Later entries overwrite
/// earlier ones.  Rewards given over (a, s, s', o) are reduced to R(s, a) by
/// taking the expectation under T and O.  `values: cost` negates rewards.
///
/// Throws ParseError / ResolutionError (with line and column) or
/// ValidationError when a row is off by more than `tolerance`.
ExplicitDecPomdp parse_dpomdp(std::string_view text, double tolerance = 1e-6);

ExplicitDecPomdp load_dpomdp(const std::filesystem::path& path, double tolerance = 1e-6);

}  // namespace mcjesp
