// Obstacle label vocabulary shared by the simulator, datastore and classifier.
#pragma once

#include <array>
#include <string>
#include <string_view>

#include "uasw/config.hpp"

namespace uasw {

enum class Material { glass = 0, concrete = 1, wood = 2, human = 3 };
enum class Surface { dry = 0, wet = 1 };
enum class Movement { static_ = 0, mobile = 1 };

inline constexpr int kMaterialCount = 4;
inline constexpr int kSurfaceCount = 2;
inline constexpr int kMovementCount = 2;
inline constexpr int kLabelCombinations = kMaterialCount * kSurfaceCount * kMovementCount;

struct ObstacleLabel {
  Material material = Material::glass;
  Surface surface = Surface::dry;
  Movement movement = Movement::static_;

  friend bool operator==(const ObstacleLabel&, const ObstacleLabel&) = default;

  /// Dense index in [0, 16): material-major, then surface, then movement.
  [[nodiscard]] int combination() const {
    return (static_cast<int>(material) * kSurfaceCount + static_cast<int>(surface)) *
               kMovementCount +
           static_cast<int>(movement);
  }

  static ObstacleLabel from_combination(int index) {
    if (index < 0 || index >= kLabelCombinations)
      throw InvalidArgument("label combination out of range");
    return {static_cast<Material>(index / (kSurfaceCount * kMovementCount)),
            static_cast<Surface>((index / kMovementCount) % kSurfaceCount),
            static_cast<Movement>(index % kMovementCount)};
  }
};

inline constexpr std::array<std::string_view, kMaterialCount> kMaterialNames{
    "glass", "concrete", "wood", "human"};
inline constexpr std::array<std::string_view, kSurfaceCount> kSurfaceNames{"dry", "wet"};
inline constexpr std::array<std::string_view, kMovementCount> kMovementNames{"static",
                                                                             "mobile"};

inline std::string_view to_string(Material m) { return kMaterialNames[static_cast<int>(m)]; }
inline std::string_view to_string(Surface s) { return kSurfaceNames[static_cast<int>(s)]; }
inline std::string_view to_string(Movement m) { return kMovementNames[static_cast<int>(m)]; }

namespace detail {
template <typename Enum, std::size_t N>
Enum parse_name(std::string_view text, const std::array<std::string_view, N>& names,
                const char* what) {
  for (std::size_t i = 0; i < N; ++i)
    if (names[i] == text) return static_cast<Enum>(i);
  throw FormatError(std::string("unknown ") + what + " '" + std::string(text) + "'");
}
}  // namespace detail

inline Material parse_material(std::string_view s) {
  return detail::parse_name<Material>(s, kMaterialNames, "material");
}
inline Surface parse_surface(std::string_view s) {
  return detail::parse_name<Surface>(s, kSurfaceNames, "surface");
}
inline Movement parse_movement(std::string_view s) {
  return detail::parse_name<Movement>(s, kMovementNames, "movement");
}

}  // namespace uasw
