#include "fedsynth/mode.hpp"

namespace fedsynth {

std::string_view mode_name(Mode mode) noexcept {
  switch (mode) {
    case Mode::kNonPrivate: return "non-private";
    case Mode::kCentralized: return "centralized";
    case Mode::kFedConventional: return "fed-conventional";
    case Mode::kFedCape: return "fed-cape";
  }
  return "unknown";
}

std::optional<Mode> parse_mode(std::string_view name) noexcept {
  for (Mode m : {Mode::kNonPrivate, Mode::kCentralized, Mode::kFedConventional, Mode::kFedCape}) {
    if (name == mode_name(m)) return m;
  }
  return std::nullopt;
}

}  // namespace fedsynth
