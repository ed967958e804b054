#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace impactuq {

// Proleptic-Gregorian calendar date. Kept as an explicit (year, month, day)
// triple so that day-of-month and month are directly usable as features.
struct CalendarDay {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31

  auto operator<=>(const CalendarDay&) const = default;
};

bool is_leap_year(int year);
bool is_valid_date(const CalendarDay& d);

// Days since 1970-01-01 (negative before).
std::int64_t to_epoch_days(const CalendarDay& d);
CalendarDay from_epoch_days(std::int64_t days);

// Gregorian-correct date offset; total over valid dates.
CalendarDay date_add(const CalendarDay& d, std::int64_t offset_days);

// 1-based day of year.
int day_of_year(const CalendarDay& d);

std::string to_iso(const CalendarDay& d);
// Parses strict `YYYY-MM-DD`; throws DataError on malformed or invalid dates.
CalendarDay parse_iso(const std::string& s);

// Length in days of the calendar half-year starting at `start`.
// `start` must be January 1 or July 1; throws DataError otherwise.
int horizon_for(const CalendarDay& start);

struct DailyWeather {
  double temperature_c = 0.0;
  double precipitation_mm = 0.0;  // >= 0
};

// N member series over a fixed daily horizon, anchored to a start date.
struct ForecastEnsemble {
  CalendarDay start;
  int horizon_days = 0;
  std::vector<int> member_ids;                      // parallel to `members`
  std::vector<std::vector<DailyWeather>> members;   // [member][day]

  int n_members() const { return static_cast<int>(members.size()); }
  CalendarDay date_at(int day_index) const { return date_add(start, day_index); }

  // Checks the structural invariants (uniform horizon, ids unique, finite
  // temperature, nonnegative precipitation); throws DataError.
  void validate() const;
};

// Daily R0 for one ensemble member.
struct ImpactSeries {
  int member_id = 0;
  std::vector<double> values;  // >= 0, finite
};

}  // namespace impactuq
