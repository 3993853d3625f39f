// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace migsim {

/// Virtual time and durations are integer nanoseconds. All cost arithmetic in
/// the simulator is exact; doubles appear only in end-of-run reporting.
using Nanos = std::int64_t;

constexpr Nanos kNanosPerSecond = 1'000'000'000;

constexpr Nanos seconds(std::int64_t s) { return s * kNanosPerSecond; }
constexpr Nanos millis(std::int64_t ms) { return ms * 1'000'000; }

/// A decimal number kept as num/den with den a power of ten, so values like
/// 1.2 or 2.48 stay exact. den == 1 for integers.
struct Decimal {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double as_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Decimal&) const = default;
};

/// Parses "2.48" / "17" / "0.001". Rejects sign, exponents, and more than nine
/// fractional digits; these never occur in cost tables and permitting them
/// would silently lose nanosecond exactness.
Decimal parse_decimal(const std::string& text);

/// Decimal seconds -> integer nanoseconds, exactly.
Nanos decimal_seconds_to_ns(const Decimal& d);

/// (value * d.num) / d.den using 128-bit intermediates, truncating division.
Nanos scale_duration(Nanos value, const Decimal& d);

/// ceil(bytes * 1e9 / bandwidth_Bps) with 128-bit intermediates.
Nanos transmission_ns(std::int64_t bytes, std::int64_t bandwidth_Bps);

std::string format_ns(Nanos t);

}  // namespace migsim
