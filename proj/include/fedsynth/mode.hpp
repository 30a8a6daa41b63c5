#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace fedsynth {

/// How noise is split between clients.
///  - kNonPrivate: no noise at all.
///  - kCentralized: one party holds all data and adds τ_central.
///  - kFedConventional: every client adds independent noise only.
///  - kFedCape: independent local noise plus zero-sum correlated noise.
enum class Mode { kNonPrivate, kCentralized, kFedConventional, kFedCape };

std::string_view mode_name(Mode mode) noexcept;
std::optional<Mode> parse_mode(std::string_view name) noexcept;

}  // namespace fedsynth
