#pragma once

#include <string>

#include <json.hpp>

namespace qnls {

/// Pretty-printed JSON with every floating-point value at 17 significant
/// digits; non-finite numbers become null. Key order is insertion order.
std::string dump_json(const nlohmann::ordered_json& doc, int indent = 2);

/// dump_json + trailing newline, written atomically enough for a batch tool
/// (temporary file, then rename).
void write_json_file(const nlohmann::ordered_json& doc, const std::string& path);

}  // namespace qnls
