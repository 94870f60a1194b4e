#include "signpose/pose/augment.hpp"

#include <cmath>
#include <stdexcept>

namespace signpose {

namespace {

MovingKey blend(const MovingKey& a, const MovingKey& b, double u) {
  double w = 0.5 - 0.5 * std::cos(u * M_PI);
  return {a.angle + (b.angle - a.angle) * w, a.tx + (b.tx - a.tx) * w, a.ty + (b.ty - a.ty) * w,
          a.log_scale + (b.log_scale - a.log_scale) * w};
}

}  // namespace

PoseSequence apply_moving_trajectory(const PoseSequence& seq, const std::vector<MovingKey>& keys) {
  if (keys.size() < 2) throw std::invalid_argument("apply_moving_trajectory: at least 2 keyframes required");
  PoseSequence out = seq;
  std::size_t T = seq.frames.size();
  int segments = static_cast<int>(keys.size()) - 1;
  for (std::size_t t = 0; t < T; ++t) {
    double pos = (T > 1) ? static_cast<double>(t) / static_cast<double>(T - 1) : 0.0;
    double span = pos * segments;
    int k0 = std::min(static_cast<int>(span), segments - 1);
    MovingKey m = blend(keys[static_cast<std::size_t>(k0)], keys[static_cast<std::size_t>(k0 + 1)],
                        span - static_cast<double>(k0));
    double s = std::exp(m.log_scale);
    double ca = std::cos(m.angle), sa = std::sin(m.angle);
    auto apply = [&](Joint2D& j) {
      double x = j.x, y = j.y;
      j.x = s * (ca * x - sa * y) + m.tx;
      j.y = s * (sa * x + ca * y) + m.ty;
    };
    for (Joint2D& j : out.frames[t].left_hand) apply(j);
    for (Joint2D& j : out.frames[t].right_hand) apply(j);
    for (Joint2D& j : out.frames[t].arms) apply(j);
  }
  return out;
}

PoseSequence random_moving_augment(const PoseSequence& seq, double strength, RandomStream& rng) {
  if (strength < 0.0) throw std::invalid_argument("random_moving_augment: strength must be >= 0");
  constexpr int kKeys = 4;
  std::vector<MovingKey> keys(kKeys);
  for (MovingKey& k : keys) {
    k.angle = rng.uniform(-0.3, 0.3) * strength;
    k.tx = rng.uniform(-0.2, 0.2) * strength;
    k.ty = rng.uniform(-0.2, 0.2) * strength;
    k.log_scale = rng.uniform(-0.3, 0.3) * strength;
  }
  return apply_moving_trajectory(seq, keys);
}

}  // namespace signpose
