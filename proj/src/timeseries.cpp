#include "impactuq/timeseries.hpp"

#include <cmath>
#include <cstdio>

#include "impactuq/errors.hpp"

namespace impactuq {

bool is_leap_year(int year) {
  return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

namespace {

int days_in_month(int year, int month) {
  static constexpr int kDays[12] = {31, 28, 31, 30, 31, 30,
                                    31, 31, 30, 31, 30, 31};
  if (month == 2 && is_leap_year(year)) return 29;
  return kDays[month - 1];
}

}  // namespace

bool is_valid_date(const CalendarDay& d) {
  if (d.month < 1 || d.month > 12) return false;
  if (d.day < 1 || d.day > days_in_month(d.year, d.month)) return false;
  return true;
}

// Civil-days conversion (Howard Hinnant's algorithm).
std::int64_t to_epoch_days(const CalendarDay& d) {
  std::int64_t y = d.year;
  const int m = d.month;
  const int day = d.day;
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + day - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CalendarDay from_epoch_days(std::int64_t days) {
  days += 719468;
  const std::int64_t era = (days >= 0 ? days : days - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(days - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned day = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return CalendarDay{static_cast<int>(y + (m <= 2)), static_cast<int>(m),
                     static_cast<int>(day)};
}

CalendarDay date_add(const CalendarDay& d, std::int64_t offset_days) {
  return from_epoch_days(to_epoch_days(d) + offset_days);
}

int day_of_year(const CalendarDay& d) {
  return static_cast<int>(to_epoch_days(d) -
                          to_epoch_days(CalendarDay{d.year, 1, 1})) +
         1;
}

std::string to_iso(const CalendarDay& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
  return buf;
}

CalendarDay parse_iso(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-')
    throw DataError("malformed date '" + s + "', expected YYYY-MM-DD");
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
    if (s[i] < '0' || s[i] > '9')
      throw DataError("malformed date '" + s + "', expected YYYY-MM-DD");
  CalendarDay d;
  d.year = std::stoi(s.substr(0, 4));
  d.month = std::stoi(s.substr(5, 2));
  d.day = std::stoi(s.substr(8, 2));
  if (!is_valid_date(d)) throw DataError("invalid calendar date '" + s + "'");
  return d;
}

int horizon_for(const CalendarDay& start) {
  if (!is_valid_date(start)) throw DataError("invalid start date");
  if (start.month == 1 && start.day == 1) {
    return static_cast<int>(to_epoch_days(CalendarDay{start.year, 7, 1}) -
                            to_epoch_days(start));
  }
  if (start.month == 7 && start.day == 1) {
    return static_cast<int>(to_epoch_days(CalendarDay{start.year + 1, 1, 1}) -
                            to_epoch_days(start));
  }
  throw DataError("forecast periods must start on January 1 or July 1, got " +
                  to_iso(start));
}

void ForecastEnsemble::validate() const {
  if (members.empty()) throw DataError("ensemble has no members");
  if (member_ids.size() != members.size())
    throw DataError("member id list does not match member count");
  if (!is_valid_date(start)) throw DataError("ensemble start date is invalid");
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (static_cast<int>(members[i].size()) != horizon_days)
      throw DataError("member " + std::to_string(member_ids[i]) +
                      " has length " + std::to_string(members[i].size()) +
                      ", expected horizon " + std::to_string(horizon_days));
    for (const DailyWeather& w : members[i]) {
      if (!std::isfinite(w.temperature_c))
        throw DataError("non-finite temperature in member " +
                        std::to_string(member_ids[i]));
      if (!(w.precipitation_mm >= 0.0) || !std::isfinite(w.precipitation_mm))
        throw DataError("negative or non-finite precipitation in member " +
                        std::to_string(member_ids[i]));
    }
  }
  for (std::size_t i = 1; i < member_ids.size(); ++i)
    if (member_ids[i] <= member_ids[i - 1])
      throw DataError("member ids must be strictly increasing");
}

}  // namespace impactuq
