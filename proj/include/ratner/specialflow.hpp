// The special flow under a roof: phase points, the flow map and the d1 metric.
#pragma once

#include "ratner/roof.hpp"

namespace ratner {

/// (x, s) with 0 <= s < f(x).
struct FlowPoint {
  u128 x = 0;
  double s = 0;
};

struct FlowResult {
  FlowPoint point;
  std::int64_t n = 0;   ///< base steps taken: f^(n)(x) <= s + t < f^(n+1)(x)
  double radius = 0;    ///< certificate on the new height
  bool exact = false;   ///< decided through exact arithmetic
};

/// T_t(x, s). The new base point is the fixed-point T^n x; its true value lies within |n| ulps.
FlowResult flow_map(const RoofFunction& roof, const RotationContext& ctx, const FlowPoint& p, double t,
                    std::int64_t budget = kDefaultBirkhoffBudget);

/// ||x - y|| + |s - s'|.
double d1(const FlowPoint& p, const FlowPoint& q);

struct ProbeReport {
  int samples = 0;
  int tested = 0;
  int excluded = 0;     ///< within epsilon1 of the floor or the roof
  int violations = 0;   ///< d1 differs from |u - u'| beyond the certificate
  double max_error = 0;
  double excluded_fraction() const { return samples ? static_cast<double>(excluded) / samples : 0.0; }
};

/// Samples phase points from the invariant measure and checks d1(T_u p, T_u' p) = |u - u'| for
/// |u|, |u'| <= epsilon1 on points at least epsilon1 away from the floor and the roof.
ProbeReport almost_continuity_probe(const RoofFunction& roof, const RotationContext& ctx, double epsilon1,
                                    int samples, std::uint64_t seed);

}  // namespace ratner
