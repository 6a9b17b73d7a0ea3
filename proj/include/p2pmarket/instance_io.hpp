#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "p2pmarket/market_model.hpp"

namespace p2p {

/// Parses a market instance document. Unknown keys, wrong types and missing
/// required fields raise ParseError naming the JSON path; syntax errors carry
/// the line and column reported by the JSON reader.
[[nodiscard]] MarketInstance parse_instance(std::string_view json_text);

/// Reads and parses an instance file.
[[nodiscard]] MarketInstance load_instance(const std::filesystem::path& path);

/// Serializes an instance back to the input schema.
[[nodiscard]] std::string dump_instance(const MarketInstance& instance);

}  // namespace p2p
