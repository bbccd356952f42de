#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace gridfill {

/// Whole hours since 1970-01-01T00:00Z. Timestamps are taken as given; no
/// timezone conversion is applied.
using HourStamp = std::int64_t;

/// Accepts "YYYY-MM-DD HH:MM[:SS]", the same with 'T', and an optional
/// trailing 'Z'. Minutes and seconds must be zero. Throws ValidationError.
HourStamp parse_timestamp(std::string_view text);
/// "YYYY-MM-DDTHH:00:00Z"
std::string format_timestamp(HourStamp t);
/// 0 = Monday ... 6 = Sunday.
int weekday(HourStamp t);

}  // namespace gridfill
