#pragma once

// Matrix text and JSON formats.
//
// Text:  first line N, then N lines of N whitespace-separated decimals.
// JSON:  {"dim": N, "rows": [[...], ...]}
//
// Numbers are written in the shortest decimal form that parses back to the
// same double, so write(parse(s)) re-parses bit-exactly.

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "elliptic/symmat.hpp"

namespace elliptic {

std::string format_double(double v);
double parse_double(std::string_view token);

std::string to_text(const SymmetricMatrix& x);
SymmetricMatrix parse_text(std::string_view text);

nlohmann::json to_json(const SymmetricMatrix& x);
nlohmann::json to_json(const Matrix& x);
SymmetricMatrix symmetric_from_json(const nlohmann::json& j);
Matrix matrix_from_json(const nlohmann::json& j);

/// Accepts either format; a leading '{' selects JSON.
SymmetricMatrix parse_matrix(std::string_view text);
SymmetricMatrix read_matrix_file(const std::filesystem::path& path);

}  // namespace elliptic
