#include "signpose/pose/sampling.hpp"

#include <cmath>
#include <stdexcept>

namespace signpose {

std::vector<std::size_t> temporal_sample_indices(std::size_t frame_count, SampleMode mode, double target,
                                                 RandomStream& rng) {
  if (frame_count == 0) throw std::invalid_argument("temporal_sample: empty sequence");
  std::vector<std::size_t> idx;
  switch (mode) {
    case SampleMode::All: {
      idx.resize(frame_count);
      for (std::size_t i = 0; i < frame_count; ++i) idx[i] = i;
      break;
    }
    case SampleMode::FractionRandom: {
      if (!(target > 0.0 && target <= 1.0)) {
        throw std::invalid_argument("temporal_sample: fraction must be in (0,1], got " + std::to_string(target));
      }
      std::size_t keep = static_cast<std::size_t>(std::ceil(target * static_cast<double>(frame_count)));
      keep = std::max<std::size_t>(1, std::min(keep, frame_count));
      idx = rng.sample_without_replacement(frame_count, keep);
      break;
    }
    case SampleMode::SegmentRandom:
    case SampleMode::SegmentCenter: {
      if (!(target >= 1.0) || target != std::floor(target)) {
        throw std::invalid_argument("temporal_sample: segment modes need an integer target length >= 1");
      }
      std::size_t n = static_cast<std::size_t>(target);
      idx.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t s = i * frame_count / n;
        std::size_t e = (i + 1) * frame_count / n;
        if (e <= s) {
          // empty span (target > T): duplicate the nearest frame
          std::size_t nearest = static_cast<std::size_t>((2 * i + 1) * frame_count / (2 * n));
          idx.push_back(std::min(nearest, frame_count - 1));
        } else if (mode == SampleMode::SegmentCenter) {
          idx.push_back(s + (e - s) / 2);
        } else {
          idx.push_back(s + static_cast<std::size_t>(rng.uniform_index(e - s)));
        }
      }
      break;
    }
  }
  return idx;
}

PoseSequence temporal_sample(const PoseSequence& seq, SampleMode mode, double target, RandomStream& rng) {
  std::vector<std::size_t> idx = temporal_sample_indices(seq.frames.size(), mode, target, rng);
  PoseSequence out;
  out.source_id = seq.source_id;
  out.image_width = seq.image_width;
  out.image_height = seq.image_height;
  out.fps = seq.fps;
  out.frames.reserve(idx.size());
  for (std::size_t i : idx) out.frames.push_back(seq.frames[i]);
  return out;
}

}  // namespace signpose
