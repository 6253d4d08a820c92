#pragma once

#include <string>
#include <string_view>

namespace karmats {

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);

}  // namespace karmats
