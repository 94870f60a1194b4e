#include "signpose/pose/normalize.hpp"

#include <stdexcept>

namespace signpose {

namespace {

template <typename Fn>
PoseSequence map_coordinates(const PoseSequence& seq, Fn&& fn) {
  PoseSequence out = seq;
  for (PoseFrame& f : out.frames) {
    for (Joint2D& j : f.left_hand) fn(j);
    for (Joint2D& j : f.right_hand) fn(j);
    for (Joint2D& j : f.arms) fn(j);
  }
  return out;
}

}  // namespace

PoseSequence normalize_sequence(const PoseSequence& seq) {
  if (!(seq.image_width > 0.0) || !(seq.image_height > 0.0)) {
    throw std::invalid_argument("normalize_sequence: image dimensions must be positive, got " +
                                std::to_string(seq.image_width) + "x" + std::to_string(seq.image_height));
  }
  double w = seq.image_width, h = seq.image_height;
  return map_coordinates(seq, [w, h](Joint2D& j) {
    j.x = j.x / w - 0.5;
    j.y = j.y / h - 0.5;
  });
}

PoseSequence denormalize_sequence(const PoseSequence& seq) {
  if (!(seq.image_width > 0.0) || !(seq.image_height > 0.0)) {
    throw std::invalid_argument("denormalize_sequence: image dimensions must be positive");
  }
  double w = seq.image_width, h = seq.image_height;
  return map_coordinates(seq, [w, h](Joint2D& j) {
    j.x = (j.x + 0.5) * w;
    j.y = (j.y + 0.5) * h;
  });
}

}  // namespace signpose
