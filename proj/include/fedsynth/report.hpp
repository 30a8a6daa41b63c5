#pragma once

#include <string>

#include "fedsynth/accountant.hpp"

namespace fedsynth {

/// Shortest text that parses back to the same double; "inf" for +infinity.
std::string format_double(double v);

/// Flat "key=value" lines: epsilon, delta, alpha_star, tau_g, tau_e, T and,
/// when present, epsilon_local_p.
std::string format_report(const AccountingReport& report);

/// "alpha,rdp" CSV of the curve; skipped orders carry "inf".
std::string format_rdp_curve(const AccountingReport& report);

}  // namespace fedsynth
