#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace signpose {

inline constexpr int kHandJoints = 21;
inline constexpr int kArmJoints = 7;

enum class HandSide { Left = 0, Right = 1 };

inline const char* hand_side_name(HandSide s) { return s == HandSide::Left ? "left" : "right"; }

struct Joint2D {
  double x = 0.0;
  double y = 0.0;
  double confidence = 0.0;
};

inline void validate_joint(const Joint2D& j, const std::string& where) {
  if (!(j.confidence >= 0.0 && j.confidence <= 1.0)) {
    throw std::invalid_argument(where + ": confidence must be in [0,1], got " + std::to_string(j.confidence));
  }
  if (!std::isfinite(j.x) || !std::isfinite(j.y)) {
    throw std::invalid_argument(where + ": coordinates must be finite");
  }
}

struct PoseFrame {
  std::array<Joint2D, kHandJoints> left_hand{};
  std::array<Joint2D, kHandJoints> right_hand{};
  std::array<Joint2D, kArmJoints> arms{};

  const std::array<Joint2D, kHandJoints>& hand(HandSide s) const {
    return s == HandSide::Left ? left_hand : right_hand;
  }
  std::array<Joint2D, kHandJoints>& hand(HandSide s) { return s == HandSide::Left ? left_hand : right_hand; }
};

struct PoseSequence {
  std::vector<PoseFrame> frames;
  std::string source_id;
  double image_width = 0.0;
  double image_height = 0.0;
  std::optional<double> fps;

  std::size_t length() const { return frames.size(); }
};

inline void validate_sequence(const PoseSequence& seq) {
  if (seq.frames.empty()) throw std::invalid_argument("pose sequence must contain at least one frame");
  for (std::size_t t = 0; t < seq.frames.size(); ++t) {
    const PoseFrame& f = seq.frames[t];
    std::string at = "frame " + std::to_string(t);
    for (int j = 0; j < kHandJoints; ++j) {
      validate_joint(f.left_hand[static_cast<std::size_t>(j)], at + " left_hand[" + std::to_string(j) + "]");
      validate_joint(f.right_hand[static_cast<std::size_t>(j)], at + " right_hand[" + std::to_string(j) + "]");
    }
    for (int j = 0; j < kArmJoints; ++j) {
      validate_joint(f.arms[static_cast<std::size_t>(j)], at + " arms[" + std::to_string(j) + "]");
    }
  }
}

// A sample with optional supervision for the three downstream tasks.
struct SignSample {
  PoseSequence poses;
  std::optional<int> label;                          // isolated recognition
  std::optional<std::vector<std::string>> glosses;   // continuous recognition
  std::optional<std::vector<std::string>> translation;  // translation

  bool has_supervision() const { return label.has_value() || glosses.has_value() || translation.has_value(); }
};

}  // namespace signpose
