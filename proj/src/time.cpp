// SPDX-License-Identifier: Apache-2.0
#include "migsim/time.hpp"

#include <cctype>

namespace migsim {

Decimal parse_decimal(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty number");
  std::int64_t num = 0;
  std::int64_t den = 1;
  bool seen_dot = false;
  bool seen_digit = false;
  int frac_digits = 0;
  for (char c : text) {
    if (c == '.') {
      if (seen_dot) throw std::invalid_argument("malformed number '" + text + "'");
      seen_dot = true;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw std::invalid_argument("malformed number '" + text + "'");
    seen_digit = true;
    if (seen_dot) {
      if (++frac_digits > 9)
        throw std::invalid_argument("more than 9 fractional digits in '" + text + "'");
      den *= 10;
    }
    num = num * 10 + (c - '0');
    if (num < 0) throw std::invalid_argument("number overflows in '" + text + "'");
  }
  if (!seen_digit) throw std::invalid_argument("malformed number '" + text + "'");
  return Decimal{num, den};
}

Nanos decimal_seconds_to_ns(const Decimal& d) {
  // den divides 1e9 by construction (at most 9 fractional digits).
  return d.num * (kNanosPerSecond / d.den);
}

Nanos scale_duration(Nanos value, const Decimal& d) {
  __int128 wide = static_cast<__int128>(value) * d.num;
  return static_cast<Nanos>(wide / d.den);
}

Nanos transmission_ns(std::int64_t bytes, std::int64_t bandwidth_Bps) {
  if (bytes < 0) throw std::invalid_argument("negative byte count");
  if (bandwidth_Bps <= 0) throw std::invalid_argument("non-positive bandwidth");
  if (bytes == 0) return 0;
  __int128 wide = static_cast<__int128>(bytes) * kNanosPerSecond;
  return static_cast<Nanos>((wide + bandwidth_Bps - 1) / bandwidth_Bps);
}

std::string format_ns(Nanos t) {
  std::int64_t whole = t / kNanosPerSecond;
  std::int64_t frac = t % kNanosPerSecond;
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%lld.%09llds", static_cast<long long>(whole),
                static_cast<long long>(frac));
  return buf;
}

}  // namespace migsim
