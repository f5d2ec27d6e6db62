#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "ddctl/io.hpp"

namespace ddctl::cli {

inline constexpr std::string_view kVersion = "0.1.0";

/// FNV-1a of the canonical (key-sorted, compact) dump, as 16 hex digits.
std::string config_hash(const Json& config);

/// Entry point of the ddctl tool. Returns 0 on success, 1 on a domain signal
/// (the result file then carries the signal name as "status"), 2 on usage or
/// configuration errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ddctl::cli
