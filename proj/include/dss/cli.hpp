#pragma once

// Config-driven command-line front end. Exit codes: 0 all checks pass,
// 1 a check failed, 2 usage or configuration error.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace dss {

inline constexpr const char* kToolVersion = "1.0.0";

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

/// args excludes the program name. Reports go to the output directory
/// (--out, else $DSS_OUT_DIR, else the config's "out", else ./dss_out).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dss
