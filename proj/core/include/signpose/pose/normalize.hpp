#pragma once

#include "signpose/pose/types.hpp"

namespace signpose {

// Maps pixel coordinates into the zero-centered unit square:
// (x, y) -> (x/width - 0.5, y/height - 0.5). Confidences are untouched.
PoseSequence normalize_sequence(const PoseSequence& seq);

// Inverse map back to pixel coordinates.
PoseSequence denormalize_sequence(const PoseSequence& seq);

}  // namespace signpose
