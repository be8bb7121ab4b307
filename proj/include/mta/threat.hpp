#ifndef MTA_THREAT_HPP
#define MTA_THREAT_HPP

#include <optional>
#include <variant>
#include <vector>

#include "mta/numerics.hpp"
#include "mta/rng.hpp"

namespace mta {

struct Box {
  Vec lo;
  Vec hi;
};

// l-inf ball around a nominal input, optionally intersected with a
// per-coordinate box (e.g. the valid pixel range).
struct LinfBall {
  Vec center;
  double epsilon = 0.0;
  std::optional<Box> box;

  LinfBall(Vec c, double eps, std::optional<Box> b = std::nullopt);

  // Effective per-coordinate bounds (ball intersected with the box).
  double lo(std::size_t i) const;
  double hi(std::size_t i) const;
};

// Union of axis-aligned boxes; may be non-convex.
struct BoxUnion {
  std::vector<Box> boxes;

  explicit BoxUnion(std::vector<Box> b);
};

using ThreatSet = std::variant<LinfBall, BoxUnion>;

std::size_t set_dim(const ThreatSet& set);

// Euclidean projection onto the set. For LinfBall this is the coordinate
// clamp; for BoxUnion the l2-nearest point over all boxes, ties to the
// lowest box index.
Vec project(const ThreatSet& set, const Vec& point);

// Uniform sample. BoxUnion picks a box proportionally to its volume;
// point-boxes get zero weight unless every box is a point.
Vec sample_uniform(const ThreatSet& set, Rng& rng);

// Membership with 1e-12 tolerance on boundaries.
bool contains(const ThreatSet& set, const Vec& point);

}  // namespace mta

#endif  // MTA_THREAT_HPP
