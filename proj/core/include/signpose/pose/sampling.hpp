#pragma once

#include "signpose/common/random.hpp"
#include "signpose/pose/types.hpp"

namespace signpose {

enum class SampleMode {
  SegmentRandom,   // split into `target` segments, random frame per segment
  SegmentCenter,   // split into `target` segments, center frame per segment
  FractionRandom,  // keep a sorted random subset of ceil(fraction * T) frames
  All,             // identity
};

// Temporal frame selection. `target` is a frame count for the segment modes
// and a fraction in (0, 1] for FractionRandom; it is ignored for All.
//
// Segment modes partition [0, T) into `target` equal spans [i*T/target,
// (i+1)*T/target). When target > T some spans are empty; the nearest frame
// floor((i+0.5)*T/target) is duplicated for them, keeping the output a
// monotone (non-decreasing) sequence of source indices.
PoseSequence temporal_sample(const PoseSequence& seq, SampleMode mode, double target, RandomStream& rng);

// Index-level version (exposed for tests).
std::vector<std::size_t> temporal_sample_indices(std::size_t frame_count, SampleMode mode, double target,
                                                 RandomStream& rng);

}  // namespace signpose
