#include "signpose/mask/mask.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace signpose {

std::size_t MaskPlan::target_count() const {
  std::size_t n = 0;
  for (const auto& t : targets) n += (t[0] ? 1 : 0) + (t[1] ? 1 : 0);
  return n;
}

MaskPlan sample_mask_plan(std::size_t frame_count, const MaskConfig& cfg, RandomStream& rng) {
  if (!(cfg.mask_ratio >= 0.0 && cfg.mask_ratio <= 1.0)) {
    throw std::invalid_argument("sample_mask_plan: mask_ratio must be in [0,1]");
  }
  if (cfg.clip_span < 2) throw std::invalid_argument("sample_mask_plan: clip_span must be >= 2");
  if (cfg.joints_per_token < 1 || cfg.joints_per_token > kHandJoints) {
    throw std::invalid_argument("sample_mask_plan: joints_per_token must be in [1, 21]");
  }
  if (cfg.ops.empty()) throw std::invalid_argument("sample_mask_plan: op set must not be empty");
  if (frame_count == 0) throw std::invalid_argument("sample_mask_plan: empty sequence");

  MaskPlan plan;
  plan.frame_count = frame_count;
  plan.targets.assign(frame_count, {false, false});

  const std::size_t total_tokens = 2 * frame_count;
  const std::size_t n_select = static_cast<std::size_t>(std::floor(cfg.mask_ratio * static_cast<double>(total_tokens)));
  if (n_select == 0) return plan;

  std::vector<std::size_t> chosen = rng.sample_without_replacement(total_tokens, n_select);
  for (std::size_t token : chosen) {
    MaskEntry e;
    e.frame = token / 2;
    e.hand = token % 2 == 0 ? HandSide::Left : HandSide::Right;
    e.op = cfg.ops[static_cast<std::size_t>(rng.uniform_index(cfg.ops.size()))];

    if (e.op == MaskOp::Clip && e.frame + 2 > frame_count) {
      // span of length >= 2 cannot start at the last frame; redraw among the
      // remaining operations
      std::vector<MaskOp> rest;
      for (MaskOp op : cfg.ops)
        if (op != MaskOp::Clip) rest.push_back(op);
      if (rest.empty()) continue;  // clip-only config on a 1-frame tail: skip
      e.op = rest[static_cast<std::size_t>(rng.uniform_index(rest.size()))];
    }

    switch (e.op) {
      case MaskOp::Joint: {
        std::vector<std::size_t> joints =
            rng.sample_without_replacement(kHandJoints, static_cast<std::size_t>(cfg.joints_per_token));
        e.joints.assign(joints.begin(), joints.end());
        plan.targets[e.frame][static_cast<std::size_t>(e.hand)] = true;
        break;
      }
      case MaskOp::Frame: {
        plan.targets[e.frame][static_cast<std::size_t>(e.hand)] = true;
        break;
      }
      case MaskOp::Clip: {
        std::size_t len = static_cast<std::size_t>(rng.uniform_int(2, cfg.clip_span));
        e.clip_begin = e.frame;
        e.clip_end = std::min(e.frame + len, frame_count);
        for (std::size_t t = e.clip_begin; t < e.clip_end; ++t) {
          plan.targets[t][static_cast<std::size_t>(e.hand)] = true;
        }
        break;
      }
      case MaskOp::Identity: {
        if (cfg.loss_on_identity) plan.targets[e.frame][static_cast<std::size_t>(e.hand)] = true;
        break;
      }
    }
    plan.entries.push_back(std::move(e));
  }
  return plan;
}

namespace {

double hand_bbox_diagonal(const std::array<Joint2D, kHandJoints>& hand) {
  double min_x = hand[0].x, max_x = hand[0].x, min_y = hand[0].y, max_y = hand[0].y;
  for (const Joint2D& j : hand) {
    min_x = std::min(min_x, j.x);
    max_x = std::max(max_x, j.x);
    min_y = std::min(min_y, j.y);
    max_y = std::max(max_y, j.y);
  }
  double dx = max_x - min_x, dy = max_y - min_y;
  return std::sqrt(dx * dx + dy * dy);
}

void zero_hand(PoseFrame& frame, HandSide side, std::size_t t, MaskOp op, CorruptionRecord* record) {
  auto& hand = frame.hand(side);
  for (int j = 0; j < kHandJoints; ++j) {
    hand[static_cast<std::size_t>(j)].x = 0.0;
    hand[static_cast<std::size_t>(j)].y = 0.0;
    if (record != nullptr) record->items.push_back({t, side, j, op});
  }
}

}  // namespace

PoseSequence apply_mask_plan(const PoseSequence& seq, const MaskPlan& plan, const MaskConfig& cfg,
                             RandomStream& rng, CorruptionRecord* record) {
  if (plan.frame_count != seq.frames.size()) {
    throw std::invalid_argument("apply_mask_plan: plan built for " + std::to_string(plan.frame_count) +
                                " frames, sequence has " + std::to_string(seq.frames.size()));
  }
  PoseSequence out = seq;
  for (const MaskEntry& e : plan.entries) {
    switch (e.op) {
      case MaskOp::Identity:
        break;
      case MaskOp::Frame:
        zero_hand(out.frames[e.frame], e.hand, e.frame, MaskOp::Frame, record);
        break;
      case MaskOp::Clip:
        for (std::size_t t = e.clip_begin; t < e.clip_end; ++t) {
          zero_hand(out.frames[t], e.hand, t, MaskOp::Clip, record);
        }
        break;
      case MaskOp::Joint: {
        bool zero_branch = rng.bernoulli(0.5);
        // disturbance magnitude follows the original (uncorrupted) hand extent
        double sigma = cfg.disturbance_scale * hand_bbox_diagonal(seq.frames[e.frame].hand(e.hand));
        auto& hand = out.frames[e.frame].hand(e.hand);
        for (int j : e.joints) {
          Joint2D& joint = hand[static_cast<std::size_t>(j)];
          if (zero_branch) {
            joint.x = 0.0;
            joint.y = 0.0;
          } else {
            joint.x += rng.normal(0.0, sigma);
            joint.y += rng.normal(0.0, sigma);
          }
          if (record != nullptr) record->items.push_back({e.frame, e.hand, j, MaskOp::Joint});
        }
        break;
      }
    }
  }
  return out;
}

}  // namespace signpose
