#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "decmps/model.hpp"
#include "decmps/policy.hpp"

namespace decmps {

/// Parse failure with the 1-based line and column of the first error.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int col, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ", column " +
                           std::to_string(col) + ": " + message),
        line(line),
        col(col) {}
  int line;
  int col;
};

/// Line-oriented problem format, '#' starts a comment:
///   agents <n>
///   per agent: obs <id...> / actions <id...> / t <z> <a> <z'> <p> lines
///   reward <z^1 .. z^n> <a^1 .. a^n> <value> lines (sparse)
///   start <|S| reals>  |  start-factored followed by one line per agent
///   horizon <T>
FactoredDecMdp parse_problem(std::string_view text);

/// Canonical text form: agents, observations, actions and table entries in
/// ascending index order, zero entries omitted, 17 significant digits.
/// parse_problem(serialize_problem(m)) reproduces m exactly.
std::string serialize_problem(const FactoredDecMdp& model);

struct PolicyFileData {
  MarkovPolicy policy;
  std::vector<std::pair<int, int>> shape;  // per agent: |Z^i|, |A^i|
  double lower = 0.0;
  double upper = 0.0;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
};

/// "mps-policy v1" header, metadata lines, then one `tau agent obs action`
/// line per slot; every (tau, agent, obs) appears exactly once.
std::string serialize_policy(const PolicyFileData& data);
PolicyFileData parse_policy(std::string_view text);

/// Double formatted with 17 significant digits (lossless round-trip).
std::string format_double(double v);

}  // namespace decmps
