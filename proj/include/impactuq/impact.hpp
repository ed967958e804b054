#pragma once

#include <span>
#include <string>
#include <vector>

#include "impactuq/timeseries.hpp"

namespace impactuq {

// Steady-state Ross-Macdonald R0 with degree-day sporogony, a quadratic
// daily-survival scheme and saturating rainfall -> vector-density coupling.
// Drivers are smoothed with trailing windows before entering the formula.
struct TransmissionParams {
  double degree_days = 111.0;          // deg C * day above the threshold
  double temp_threshold_c = 16.0;
  double survival_c0 = -4.4;           // survival argument g = c0 + c1*T + c2*T^2
  double survival_c1 = 1.31;
  double survival_c2 = -0.03;
  double biting_rate = 0.2;            // per day
  double transmission_efficiency = 0.5;
  double recovery_rate = 0.01;         // per day
  double vector_density_max = 20.0;    // mosquitoes per human
  double rain_half_saturation = 2.0;   // mm/day
  int rain_window_days = 30;
  int temp_window_days = 10;

  void validate() const;  // throws ConfigError
};

// Mean of series[max(0, index - window + 1) ..= index]; the window is
// truncated at the start of the series.
double trailing_mean(std::span<const double> series, int window, int index);

// Daily mosquito survival probability: g = c0 + c1*T + c2*T^2; zero when
// g <= 0, otherwise exp(-1/g) clamped strictly below 1.
double daily_survival(double t_mean_c, const TransmissionParams& p);

// Maps one member's weather series to daily R0; total over valid input, any
// non-finite intermediate collapses that day to 0.
ImpactSeries compute_r0(int member_id, std::span<const DailyWeather> weather,
                        const TransmissionParams& p);

// CSV schema: member_id,date,r0 (6 decimals, ISO dates).
void write_impact_csv(const std::vector<ImpactSeries>& series,
                      const CalendarDay& start, const std::string& path);
std::vector<ImpactSeries> load_impact_csv(const std::string& path,
                                          CalendarDay* start_out);

}  // namespace impactuq
