#pragma once

#include <array>

namespace drowsy {

enum class EyeLabel { Closed, Open };

inline const char* to_string(EyeLabel label) {
  return label == EyeLabel::Closed ? "closed" : "open";
}

// 24x24 single-channel eye crop, pixel/255 normalized into [0, 1].
struct EyeSample {
  std::array<float, 576> pixels{};
  EyeLabel label = EyeLabel::Open;
};

}  // namespace drowsy
