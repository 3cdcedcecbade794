#include "hapc/types.hpp"

namespace hapc {

std::string_view to_string(Joint j) { return j == Joint::Hip ? "hip" : "knee"; }
std::string_view to_string(Side s) { return s == Side::Left ? "left" : "right"; }
std::string_view to_string(Action a) { return a == Action::Flexor ? "flexor" : "extensor"; }
std::string_view to_string(GaitPhase p) { return p == GaitPhase::Stance ? "stance" : "swing"; }

Joint joint_from_string(std::string_view s) {
  if (s == "hip") return Joint::Hip;
  if (s == "knee") return Joint::Knee;
  throw ConfigError("unknown joint '" + std::string(s) + "'");
}

Side side_from_string(std::string_view s) {
  if (s == "left") return Side::Left;
  if (s == "right") return Side::Right;
  throw ConfigError("unknown side '" + std::string(s) + "'");
}

Action action_from_string(std::string_view s) {
  if (s == "flexor") return Action::Flexor;
  if (s == "extensor") return Action::Extensor;
  throw ConfigError("unknown action '" + std::string(s) + "'");
}

}  // namespace hapc
