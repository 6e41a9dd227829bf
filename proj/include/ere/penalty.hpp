#pragma once

#include <string_view>

namespace ere {

enum class PenaltyKind { scad, mcp };

/// Folded-concave penalty p_lambda(t), t >= 0.
struct PenaltyConfig {
  PenaltyKind kind = PenaltyKind::scad;
  double lambda = 0.0;
  double a = 3.7;

  static PenaltyConfig scad(double lambda, double a = 3.7) { return {PenaltyKind::scad, lambda, a}; }
  static PenaltyConfig mcp(double lambda, double a = 3.0) { return {PenaltyKind::mcp, lambda, a}; }

  /// Throws ConfigError for lambda < 0, SCAD a <= 2 or MCP a <= 1.
  void validate() const;
  std::string_view name() const { return kind == PenaltyKind::scad ? "scad" : "mcp"; }
};

double penalty_value(const PenaltyConfig& config, double t);
double penalty_derivative(const PenaltyConfig& config, double t);

}  // namespace ere
