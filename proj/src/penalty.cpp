#include "ere/penalty.hpp"

#include "ere/error.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ere {

void PenaltyConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("penalty lambda must be finite and >= 0");
  if (kind == PenaltyKind::scad && !(a > 2.0)) throw ConfigError("SCAD requires a > 2");
  if (kind == PenaltyKind::mcp && !(a > 1.0)) throw ConfigError("MCP requires a > 1");
}

double penalty_value(const PenaltyConfig& c, double t) {
  c.validate();
  if (!(t >= 0.0)) throw std::invalid_argument("penalty argument must be >= 0");
  const double lam = c.lambda;
  if (c.kind == PenaltyKind::scad) {
    if (t <= lam) return lam * t;
    const double top = lam * lam * (c.a + 1.0) / 2.0;
    // clamped so rounding cannot break monotonicity at the knots
    if (t < c.a * lam) return std::clamp((2.0 * c.a * lam * t - t * t - lam * lam) / (2.0 * (c.a - 1.0)), lam * lam, top);
    return top;
  }
  const double top = c.a * lam * lam / 2.0;
  if (t < c.a * lam) return std::min(lam * t - t * t / (2.0 * c.a), top);
  return top;
}

double penalty_derivative(const PenaltyConfig& c, double t) {
  c.validate();
  if (!(t >= 0.0)) throw std::invalid_argument("penalty argument must be >= 0");
  const double lam = c.lambda;
  if (c.kind == PenaltyKind::scad) {
    if (t <= lam) return lam;
    return std::max(c.a * lam - t, 0.0) / (c.a - 1.0);
  }
  if (t >= c.a * lam) return 0.0;
  return std::max(lam - t / c.a, 0.0);
}

}  // namespace ere
