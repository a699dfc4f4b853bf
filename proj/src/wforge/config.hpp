#pragma once

#include <optional>
#include <string>

#include "wforge/scheme.hpp"

namespace wforge {

// ---------------------------------------------------------------------------
// Run configuration: a sectioned key = value text format with a tiny
// expression grammar (x1, x2, pi, numbers, + - * ^, sin, cos, parentheses)
// for initial data.  Parse errors report line and column.
// ---------------------------------------------------------------------------

/// Parses one expression in the config grammar.
Expr parse_expression(const std::string& text);

struct RunConfig {
  Domain domain{{0.0, 0.0}, {1.0, 1.0}, 0.25};
  Expr v0;                          // defaults to 0
  std::array<Expr, 2> w0;           // defaults to 0
  std::optional<SymField> a0;       // direct target (a11/a12/a22)
  std::optional<Expr> f;            // right-hand side (Poisson preprocessing)
  SchemeConfig scheme;
  int export_resolution = 129;
  std::string out_dir = "out";

  // Original grammar strings, kept for round-trip serialization.
  std::string v0_text = "0", w1_text = "0", w2_text = "0";
  std::string a11_text, a12_text, a22_text, f_text;
};

/// Parses the sectioned text format; validates the exponent gate at load.
RunConfig parse_config(const std::string& text);
RunConfig parse_config_file(const std::string& path);

/// Serializes back to the text format; parse(serialize(c)) reproduces c.
std::string serialize_config(const RunConfig& c);

}  // namespace wforge
