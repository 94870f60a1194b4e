#pragma once

#include <vector>

#include "signpose/common/random.hpp"
#include "signpose/pose/types.hpp"

namespace signpose {

enum class MaskOp { Joint = 0, Frame = 1, Clip = 2, Identity = 3 };

inline const char* mask_op_name(MaskOp op) {
  switch (op) {
    case MaskOp::Joint: return "joint";
    case MaskOp::Frame: return "frame";
    case MaskOp::Clip: return "clip";
    case MaskOp::Identity: return "identity";
  }
  return "?";
}

struct MaskEntry {
  std::size_t frame = 0;
  HandSide hand = HandSide::Left;
  MaskOp op = MaskOp::Identity;
  std::vector<int> joints;        // joint op only
  std::size_t clip_begin = 0;     // clip op only: [clip_begin, clip_end)
  std::size_t clip_end = 0;
};

// The sampled corruption schedule. `entries` holds one record per selected
// (frame, hand) anchor token; `targets` marks every (frame, hand) token whose
// output enters the reconstruction loss (corrupted tokens plus identity
// anchors).
struct MaskPlan {
  std::size_t frame_count = 0;
  std::vector<MaskEntry> entries;
  std::vector<std::array<bool, 2>> targets;  // [frame][hand]

  bool is_target(std::size_t frame, HandSide hand) const {
    return targets[frame][static_cast<std::size_t>(hand)];
  }
  std::size_t target_count() const;
};

struct MaskConfig {
  double mask_ratio = 0.40;       // R
  int clip_span = 8;              // K
  int joints_per_token = 6;       // m
  double disturbance_scale = 0.1; // sigma = scale * hand bbox diagonal
  bool loss_on_identity = true;   // include identity anchors as loss targets
  // restrict the sampled operations (all four by default, equal probability)
  std::vector<MaskOp> ops = {MaskOp::Joint, MaskOp::Frame, MaskOp::Clip, MaskOp::Identity};
};

// Selects floor(R * 2T) (frame, hand) tokens without replacement and assigns
// each an operation uniformly from cfg.ops. Clip anchors start a span of
// uniform length in [2, K], truncated at the sequence end; an anchor on the
// last frame cannot host a span of length >= 2, so its op is redrawn from the
// remaining operations.
MaskPlan sample_mask_plan(std::size_t frame_count, const MaskConfig& cfg, RandomStream& rng);

// Joints actually corrupted by apply_mask_plan, for masked-token evaluation.
struct CorruptionRecord {
  struct Item {
    std::size_t frame;
    HandSide hand;
    int joint;
    MaskOp op;
  };
  std::vector<Item> items;
};

// Applies the plan. The joint op zero-masks or Gaussian-disturbs (p = 1/2
// each) the chosen joints; frame and clip ops zero all 21 joints of the
// chosen hand; identity leaves the input unchanged. Confidences and
// untargeted coordinates are never altered. The caller keeps the original
// sequence as the reconstruction target.
PoseSequence apply_mask_plan(const PoseSequence& seq, const MaskPlan& plan, const MaskConfig& cfg,
                             RandomStream& rng, CorruptionRecord* record = nullptr);

}  // namespace signpose
