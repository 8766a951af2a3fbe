#pragma once

#include <gapblock/matrix_core.hpp>

#include <json.hpp>

#include <string>

namespace gapblock {

// Exchange format: {"rows": n, "cols": m, "data": [[re, im], ...]}, row-major.

nlohmann::json matrix_to_json(const ComplexMatrix& a);

/// Throws gapblock::Error on malformed input or non-finite entries.
ComplexMatrix matrix_from_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::string& path);

/// Writes through a temporary file in the same directory followed by a
/// rename, so readers never observe a partial report.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace gapblock
