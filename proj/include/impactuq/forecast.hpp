#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "impactuq/timeseries.hpp"

namespace impactuq {

// Synthetic seasonal-forecast generator settings. Defaults approximate
// Nairobi climatology: ~19 C annual mean with bimodal rains peaking around
// mid April (day 105) and mid November (day 315).
struct SynthConfig {
  std::uint64_t seed = 1;
  int n_members = 50;
  double temp_annual_mean = 19.0;        // deg C
  double temp_annual_amplitude = 3.0;    // deg C
  double temp_ar1_coeff = 0.8;           // in [0, 1)
  double temp_noise_sd = 1.2;            // deg C
  double member_bias_sd = 0.5;           // deg C
  std::array<int, 2> rain_season_peaks{105, 315};  // day of year
  double rain_peak_mean = 8.0;            // mm/day added at peak
  double rain_base_mean = 0.8;            // mm/day floor
  double rain_season_width_days = 30.0;
  double rain_dispersion = 1.0;           // lognormal sigma

  void validate() const;  // throws ConfigError
};

// Day of year where the seasonal temperature cycle peaks (mid February).
inline constexpr int kTempPeakDayOfYear = 46;

// Noise-free daily values; the generator adds member noise on top of these.
double seasonal_temperature(const SynthConfig& cfg, const CalendarDay& day);
double seasonal_rain_intensity(const SynthConfig& cfg, const CalendarDay& day);

// Generates n_members x horizon_for(start) days of weather. Fully
// deterministic given (cfg.seed, start); member streams are independent
// (sub-seed = mix64(seed ^ member_id)), so members may be generated in any
// order or in parallel with identical results.
ForecastEnsemble synthesize_ensemble(const SynthConfig& cfg,
                                     const CalendarDay& start);

// CSV schema: member_id,date,temperature_c,precipitation_mm with one row per
// (member, day); dates ISO-8601; writer emits 6 decimal places.
void write_ensemble_csv(const ForecastEnsemble& ensemble,
                        const std::string& path);
ForecastEnsemble load_ensemble_csv(const std::string& path);

// One forecast period restricted to a member subset, with the matching
// impact-model output attached.
struct DatasetPeriod {
  CalendarDay start;
  std::vector<int> member_ids;
  std::vector<std::vector<DailyWeather>> weather;  // [member][day]
  std::vector<std::vector<double>> r0;             // [member][day]

  int horizon_days() const {
    return weather.empty() ? 0 : static_cast<int>(weather.front().size());
  }
};

struct DatasetSplit {
  std::string label;  // "dataset1" | "dataset2"
  std::vector<DatasetPeriod> train;
  std::vector<DatasetPeriod> test;
};

// Single Jan-1 period of 50 members: members 1..35 train, 36..50 test.
DatasetSplit build_dataset1(const ForecastEnsemble& ensemble,
                            const std::vector<ImpactSeries>& impact);

// Ten periods (Jan 1 and Jul 1 of five consecutive years, 50 members each):
// the first four years train, the last year tests.
DatasetSplit build_dataset2(
    const std::vector<std::pair<ForecastEnsemble, std::vector<ImpactSeries>>>&
        periods);

}  // namespace impactuq
