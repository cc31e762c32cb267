#pragma once

// Loader for cli_matrix.txt: "<expected exit> <args...>" per line, '#'
// comments, single quotes group a token.

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

struct CliCase {
  int expected_exit{0};
  std::vector<std::string> args;
  std::string line;
};

inline std::vector<std::string> split_args(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false, have = false;
  for (char ch : line) {
    if (ch == '\'') {
      quoted = !quoted;
      have = true;
    } else if (!quoted && (ch == ' ' || ch == '\t')) {
      if (have) out.push_back(cur);
      cur.clear();
      have = false;
    } else {
      cur += ch;
      have = true;
    }
  }
  if (quoted) throw std::runtime_error("unbalanced quote in: " + line);
  if (have) out.push_back(cur);
  return out;
}

inline std::vector<CliCase> load_cli_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<CliCase> cases;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto tokens = split_args(line);
    if (tokens.size() < 2) throw std::runtime_error("bad matrix line: " + line);
    CliCase c;
    c.expected_exit = std::stoi(tokens.front());
    c.args.assign(tokens.begin() + 1, tokens.end());
    c.args.push_back("--json");
    c.line = line;
    cases.push_back(std::move(c));
  }
  return cases;
}
