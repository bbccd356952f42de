#include "gridfill/timeutil.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

#include "gridfill/error.hpp"

namespace gridfill {

namespace {

int field(std::string_view text, std::size_t pos, std::size_t len) {
  int v = 0;
  const char* first = text.data() + pos;
  auto [ptr, ec] = std::from_chars(first, first + len, v);
  if (ec != std::errc() || ptr != first + len) {
    throw ValidationError("bad timestamp '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

HourStamp parse_timestamp(std::string_view text) {
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
  if (!text.empty() && text.back() == 'Z') text.remove_suffix(1);
  if (text.size() < 13 || text[4] != '-' || text[7] != '-' || (text[10] != ' ' && text[10] != 'T')) {
    throw ValidationError("bad timestamp '" + std::string(text) + "'");
  }
  const int year = field(text, 0, 4), month = field(text, 5, 2), day = field(text, 8, 2);
  const int hour = field(text, 11, 2);
  int minute = 0, second = 0;
  if (text.size() >= 16) {
    if (text[13] != ':') throw ValidationError("bad timestamp '" + std::string(text) + "'");
    minute = field(text, 14, 2);
  }
  if (text.size() >= 19) {
    if (text[16] != ':') throw ValidationError("bad timestamp '" + std::string(text) + "'");
    second = field(text, 17, 2);
  }
  if (text.size() != 13 && text.size() != 16 && text.size() != 19) {
    throw ValidationError("bad timestamp '" + std::string(text) + "'");
  }
  if (minute != 0 || second != 0) {
    throw ValidationError("timestamp '" + std::string(text) + "' is not on the hour");
  }
  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                           std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok() || hour < 0 || hour > 23) {
    throw ValidationError("invalid date in timestamp '" + std::string(text) + "'");
  }
  return static_cast<HourStamp>(sys_days{ymd}.time_since_epoch().count()) * 24 + hour;
}

std::string format_timestamp(HourStamp t) {
  using namespace std::chrono;
  const auto days_since = t >= 0 ? t / 24 : -((-t + 23) / 24);
  const int hour = static_cast<int>(t - days_since * 24);
  const year_month_day ymd{sys_days{days{days_since}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:00:00Z", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), hour);
  return buf;
}

int weekday(HourStamp t) {
  const auto days_since = t >= 0 ? t / 24 : -((-t + 23) / 24);
  // 1970-01-01 was a Thursday (index 3 with Monday = 0).
  return static_cast<int>(((days_since % 7) + 7 + 3) % 7);
}

}  // namespace gridfill
