#pragma once

#include <vector>

#include "signpose/common/random.hpp"
#include "signpose/pose/types.hpp"

namespace signpose {

// One keyframe of the global moving trajectory: p' = s * R(angle) * p + t.
struct MovingKey {
  double angle = 0.0;
  double tx = 0.0;
  double ty = 0.0;
  double log_scale = 0.0;
};

// Applies a cosine-interpolated trajectory of global similarity transforms
// across the sequence. Confidences are untouched.
PoseSequence apply_moving_trajectory(const PoseSequence& seq, const std::vector<MovingKey>& keys);

// Random moving augmentation: samples one smooth global
// rotation/translation/scale trajectory (4 keyframes) and applies it,
// simulating spatial disturbance. Keyframe magnitudes scale linearly with
// `strength`: angle ~ U(-0.3, 0.3)*strength rad, translation components
// ~ U(-0.2, 0.2)*strength, log scale ~ U(-0.3, 0.3)*strength. Strength 0 is
// the identity.
PoseSequence random_moving_augment(const PoseSequence& seq, double strength, RandomStream& rng);

}  // namespace signpose
