#include "fedsynth/report.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace fedsynth {

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string format_report(const AccountingReport& report) {
  std::string out;
  auto line = [&out](const char* key, const std::string& value) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
  };
  line("epsilon", format_double(report.epsilon_achieved));
  line("delta", format_double(report.delta));
  line("alpha_star", std::to_string(report.alpha_star));
  line("tau_g", format_double(report.tau_g));
  line("tau_e", format_double(report.tau_e));
  line("T", std::to_string(report.T));
  if (report.epsilon_local_p) line("epsilon_local_p", format_double(*report.epsilon_local_p));
  return out;
}

std::string format_rdp_curve(const AccountingReport& report) {
  std::string out = "alpha,rdp\n";
  for (const auto& [alpha, eps] : report.rdp_curve) {
    out += std::to_string(alpha);
    out += ',';
    out += format_double(eps);
    out += '\n';
  }
  return out;
}

}  // namespace fedsynth
