#include "procscore/kde.hpp"

#include <sstream>

namespace procscore {

BandwidthRule parse_bandwidth_rule(const std::string& text) {
  if (text == "sj") return SheatherJones{};
  if (text == "silverman") return Silverman{};
  if (text.rfind("fixed:", 0) == 0) {
    try {
      const double h = std::stod(text.substr(6));
      require(h > 0.0 && std::isfinite(h), ErrorKind::InvalidConfig, "fixed bandwidth must be positive: " + text);
      return FixedBandwidth{h};
    } catch (const std::logic_error&) {
      fail(ErrorKind::InvalidConfig, "malformed fixed bandwidth: " + text);
    }
  }
  fail(ErrorKind::InvalidConfig, "unknown bandwidth rule: " + text);
}

std::string to_string(const BandwidthRule& rule) {
  if (std::holds_alternative<SheatherJones>(rule)) return "sj";
  if (std::holds_alternative<Silverman>(rule)) return "silverman";
  std::ostringstream out;
  out.precision(17);
  out << "fixed:" << std::get<FixedBandwidth>(rule).h;
  return out.str();
}

}  // namespace procscore
