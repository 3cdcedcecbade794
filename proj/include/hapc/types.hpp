#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hapc {

/// Sagittal-plane joint index. Hip flexion and knee flexion are positive.
enum class Joint { Hip = 0, Knee = 1 };
inline constexpr std::size_t kNumJoints = 2;

enum class Side { Left, Right };
enum class Action { Flexor, Extensor };
enum class GaitPhase { Stance, Swing };

/// Per-joint quantity ordered (hip, knee).
using JointVec = std::array<double, kNumJoints>;

constexpr std::size_t index(Joint j) { return static_cast<std::size_t>(j); }

constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Thrown for invalid inputs (bad configuration, malformed files, violated preconditions).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a simulation state becomes NaN or infinite.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string_view to_string(Joint j);
std::string_view to_string(Side s);
std::string_view to_string(Action a);
std::string_view to_string(GaitPhase p);

Joint joint_from_string(std::string_view s);
Side side_from_string(std::string_view s);
Action action_from_string(std::string_view s);

}  // namespace hapc
