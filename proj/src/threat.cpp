#include "mta/threat.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "mta/errors.hpp"

namespace mta {

namespace {
constexpr double kBoundaryTol = 1e-12;
}

LinfBall::LinfBall(Vec c, double eps, std::optional<Box> b)
    : center(std::move(c)), epsilon(eps), box(std::move(b)) {
  if (center.empty()) throw InvalidInput("LinfBall: empty center");
  if (!all_finite(center)) throw InvalidInput("LinfBall: non-finite center");
  if (!(epsilon >= 0.0)) throw InvalidInput("LinfBall: epsilon must be >= 0");
  if (box) {
    if (box->lo.size() != center.size() || box->hi.size() != center.size())
      throw InvalidInput("LinfBall: box dimension mismatch");
    for (std::size_t i = 0; i < center.size(); ++i) {
      if (box->lo[i] > box->hi[i])
        throw InvalidInput("LinfBall: box has lo > hi");
      if (box->lo[i] > center[i] + epsilon || box->hi[i] < center[i] - epsilon)
        throw InvalidInput("LinfBall: box does not intersect the ball");
    }
  }
}

double LinfBall::lo(std::size_t i) const {
  double v = center[i] - epsilon;
  if (box) v = std::max(v, box->lo[i]);
  return v;
}

double LinfBall::hi(std::size_t i) const {
  double v = center[i] + epsilon;
  if (box) v = std::min(v, box->hi[i]);
  return v;
}

BoxUnion::BoxUnion(std::vector<Box> b) : boxes(std::move(b)) {
  if (boxes.empty()) throw InvalidInput("BoxUnion: no boxes");
  const std::size_t dim = boxes.front().lo.size();
  if (dim == 0) throw InvalidInput("BoxUnion: zero-dimensional box");
  for (const Box& box : boxes) {
    if (box.lo.size() != dim || box.hi.size() != dim)
      throw InvalidInput("BoxUnion: inconsistent box dimensions");
    if (!all_finite(box.lo) || !all_finite(box.hi))
      throw InvalidInput("BoxUnion: non-finite bounds");
    for (std::size_t i = 0; i < dim; ++i)
      if (box.lo[i] > box.hi[i]) throw InvalidInput("BoxUnion: lo > hi");
  }
}

std::size_t set_dim(const ThreatSet& set) {
  if (const auto* ball = std::get_if<LinfBall>(&set))
    return ball->center.size();
  return std::get<BoxUnion>(set).boxes.front().lo.size();
}

namespace {

Vec clamp_to_box(const Vec& p, const Box& box) {
  Vec out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    out[i] = std::clamp(p[i], box.lo[i], box.hi[i]);
  return out;
}

double dist2(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double box_volume(const Box& box) {
  double v = 1.0;
  for (std::size_t i = 0; i < box.lo.size(); ++i) v *= box.hi[i] - box.lo[i];
  return v;
}

}  // namespace

Vec project(const ThreatSet& set, const Vec& point) {
  if (point.size() != set_dim(set))
    throw InvalidInput("project: dimension mismatch");
  if (const auto* ball = std::get_if<LinfBall>(&set)) {
    Vec out(point.size());
    for (std::size_t i = 0; i < point.size(); ++i)
      out[i] = std::clamp(point[i], ball->lo(i), ball->hi(i));
    return out;
  }
  const BoxUnion& bu = std::get<BoxUnion>(set);
  Vec best = clamp_to_box(point, bu.boxes.front());
  double best_d = dist2(point, best);
  for (std::size_t b = 1; b < bu.boxes.size(); ++b) {
    Vec cand = clamp_to_box(point, bu.boxes[b]);
    const double d = dist2(point, cand);
    // Strictly-better keeps the lowest box index on ties.
    if (d < best_d) {
      best = std::move(cand);
      best_d = d;
    }
  }
  return best;
}

Vec sample_uniform(const ThreatSet& set, Rng& rng) {
  if (const auto* ball = std::get_if<LinfBall>(&set)) {
    Vec out(ball->center.size());
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = rng.uniform(ball->lo(i), ball->hi(i));
    return out;
  }
  const BoxUnion& bu = std::get<BoxUnion>(set);
  std::vector<double> vols(bu.boxes.size());
  double total = 0.0;
  for (std::size_t b = 0; b < bu.boxes.size(); ++b) {
    vols[b] = box_volume(bu.boxes[b]);
    total += vols[b];
  }
  std::size_t chosen = 0;
  if (total > 0.0) {
    const double r = rng.uniform() * total;
    double acc = 0.0;
    for (std::size_t b = 0; b < bu.boxes.size(); ++b) {
      acc += vols[b];
      if (r < acc) {
        chosen = b;
        break;
      }
      chosen = b;
    }
  } else {
    // All boxes are points; pick uniformly by index.
    chosen = static_cast<std::size_t>(rng.next_u64() % bu.boxes.size());
  }
  const Box& box = bu.boxes[chosen];
  Vec out(box.lo.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = rng.uniform(box.lo[i], box.hi[i]);
  return out;
}

bool contains(const ThreatSet& set, const Vec& point) {
  if (point.size() != set_dim(set))
    throw InvalidInput("contains: dimension mismatch");
  if (const auto* ball = std::get_if<LinfBall>(&set)) {
    for (std::size_t i = 0; i < point.size(); ++i)
      if (point[i] < ball->lo(i) - kBoundaryTol ||
          point[i] > ball->hi(i) + kBoundaryTol)
        return false;
    return true;
  }
  const BoxUnion& bu = std::get<BoxUnion>(set);
  for (const Box& box : bu.boxes) {
    bool inside = true;
    for (std::size_t i = 0; i < point.size(); ++i)
      if (point[i] < box.lo[i] - kBoundaryTol ||
          point[i] > box.hi[i] + kBoundaryTol) {
        inside = false;
        break;
      }
    if (inside) return true;
  }
  return false;
}

}  // namespace mta
