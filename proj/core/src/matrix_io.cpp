#include "elliptic/matrix_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "elliptic/error.hpp"

namespace elliptic {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::vector<std::string_view> nonblank_lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    if (!split_ws(line).empty()) out.push_back(line);
    pos = end + 1;
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (!std::isfinite(v)) throw Error(ErrorKind::InvalidMatrix, "cannot format non-finite value");
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view token) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
    throw Error(ErrorKind::ParseError, "not a decimal number: '" + std::string(token) + "'");
  }
  if (!std::isfinite(v)) throw Error(ErrorKind::InvalidMatrix, "non-finite entry '" + std::string(token) + "'");
  return v;
}

std::string to_text(const SymmetricMatrix& x) {
  std::ostringstream os;
  os << x.dim() << '\n';
  for (std::size_t i = 0; i < x.dim(); ++i) {
    for (std::size_t j = 0; j < x.dim(); ++j) {
      if (j) os << ' ';
      os << format_double(x(i, j));
    }
    os << '\n';
  }
  return os.str();
}

SymmetricMatrix parse_text(std::string_view text) {
  const auto lines = nonblank_lines(text);
  if (lines.empty()) throw Error(ErrorKind::ParseError, "empty matrix text");
  const auto header = split_ws(lines.front());
  if (header.size() != 1) throw Error(ErrorKind::ParseError, "first line must hold only N");
  std::size_t n = 0;
  const auto res = std::from_chars(header[0].data(), header[0].data() + header[0].size(), n);
  if (res.ec != std::errc{} || res.ptr != header[0].data() + header[0].size() || n == 0) {
    throw Error(ErrorKind::ParseError, "bad dimension '" + std::string(header[0]) + "'");
  }
  if (lines.size() != n + 1) {
    throw Error(ErrorKind::ParseError,
                "expected " + std::to_string(n) + " rows, found " + std::to_string(lines.size() - 1));
  }
  std::vector<std::vector<double>> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto tokens = split_ws(lines[i + 1]);
    if (tokens.size() != n) {
      throw Error(ErrorKind::ParseError, "row " + std::to_string(i) + " has " + std::to_string(tokens.size()) +
                                             " entries, expected " + std::to_string(n));
    }
    rows[i].reserve(n);
    for (auto t : tokens) rows[i].push_back(parse_double(t));
  }
  return SymmetricMatrix::from_rows(rows);
}

nlohmann::json to_json(const SymmetricMatrix& x) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < x.dim(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < x.dim(); ++j) row.push_back(x(i, j));
    rows.push_back(std::move(row));
  }
  return {{"dim", x.dim()}, {"rows", std::move(rows)}};
}

nlohmann::json to_json(const Matrix& x) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < x.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < x.cols(); ++j) row.push_back(x(i, j));
    rows.push_back(std::move(row));
  }
  return {{"dim", x.rows()}, {"rows", std::move(rows)}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("rows") || !j.at("rows").is_array()) {
    throw Error(ErrorKind::ParseError, "matrix JSON needs a \"rows\" array");
  }
  std::vector<std::vector<double>> rows;
  for (const auto& r : j.at("rows")) {
    if (!r.is_array()) throw Error(ErrorKind::ParseError, "matrix row is not an array");
    auto& row = rows.emplace_back();
    for (const auto& v : r) {
      if (!v.is_number()) throw Error(ErrorKind::ParseError, "matrix entry is not a number");
      row.push_back(v.get<double>());
    }
  }
  if (j.contains("dim")) {
    const auto& d = j.at("dim");
    if (!d.is_number_unsigned() || d.get<std::size_t>() != rows.size()) {
      throw Error(ErrorKind::ParseError, "\"dim\" does not match the number of rows");
    }
  }
  return Matrix::from_rows(rows);
}

SymmetricMatrix symmetric_from_json(const nlohmann::json& j) { return SymmetricMatrix::from_matrix(matrix_from_json(j)); }

SymmetricMatrix parse_matrix(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::ParseError, e.what());
    }
    return symmetric_from_json(j);
  }
  return parse_text(text);
}

SymmetricMatrix read_matrix_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_matrix(ss.str());
}

}  // namespace elliptic
