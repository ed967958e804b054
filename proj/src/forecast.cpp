#include "impactuq/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "impactuq/csv.hpp"
#include "impactuq/errors.hpp"
#include "impactuq/rng.hpp"

namespace impactuq {

void SynthConfig::validate() const {
  if (n_members < 1) throw ConfigError("forecast.n_members must be >= 1");
  if (!(temp_ar1_coeff >= 0.0 && temp_ar1_coeff < 1.0))
    throw ConfigError("forecast.temp_ar1_coeff must be in [0, 1)");
  if (temp_annual_amplitude < 0.0 || temp_noise_sd < 0.0 ||
      member_bias_sd < 0.0)
    throw ConfigError("forecast temperature spreads must be >= 0");
  if (rain_peak_mean < 0.0 || rain_base_mean < 0.0 || rain_dispersion < 0.0)
    throw ConfigError("forecast rain parameters must be >= 0");
  if (rain_season_width_days <= 0.0)
    throw ConfigError("forecast.rain_season_width_days must be > 0");
  for (int p : rain_season_peaks)
    if (p < 1 || p > 366)
      throw ConfigError("forecast.rain_season_peaks must be days of year");
}

double seasonal_temperature(const SynthConfig& cfg, const CalendarDay& day) {
  const double doy = static_cast<double>(day_of_year(day));
  const double phase =
      2.0 * 3.14159265358979323846 * (doy - kTempPeakDayOfYear) / 365.25;
  return cfg.temp_annual_mean + cfg.temp_annual_amplitude * std::cos(phase);
}

double seasonal_rain_intensity(const SynthConfig& cfg, const CalendarDay& day) {
  const double doy = static_cast<double>(day_of_year(day));
  double intensity = cfg.rain_base_mean;
  for (int peak : cfg.rain_season_peaks) {
    double dist = std::fabs(doy - peak);
    dist = std::min(dist, 365.0 - dist);  // wrap around the year boundary
    const double z = dist / cfg.rain_season_width_days;
    intensity += cfg.rain_peak_mean * std::exp(-0.5 * z * z);
  }
  return intensity;
}

namespace {

std::vector<DailyWeather> synthesize_member(const SynthConfig& cfg,
                                            const CalendarDay& start,
                                            int horizon, int member_id) {
  // Fixed draw order per member: bias, then one temperature innovation and
  // one rain multiplier per day.
  SplitMix64 rng(mix64(cfg.seed ^ static_cast<std::uint64_t>(member_id)));
  const double bias = rng.normal(0.0, cfg.member_bias_sd);

  // AR(1) noise started from its stationary distribution.
  const double stationary_sd =
      cfg.temp_noise_sd / std::sqrt(1.0 - cfg.temp_ar1_coeff * cfg.temp_ar1_coeff);
  double ar = rng.normal(0.0, stationary_sd);

  std::vector<DailyWeather> series(horizon);
  for (int i = 0; i < horizon; ++i) {
    const CalendarDay day = date_add(start, i);
    if (i > 0) ar = cfg.temp_ar1_coeff * ar + rng.normal(0.0, cfg.temp_noise_sd);
    series[i].temperature_c = seasonal_temperature(cfg, day) + bias + ar;

    // Mean-one lognormal multiplier on the seasonal intensity.
    const double sigma = cfg.rain_dispersion;
    const double mult = std::exp(sigma * rng.normal() - 0.5 * sigma * sigma);
    series[i].precipitation_mm =
        std::max(0.0, seasonal_rain_intensity(cfg, day) * mult);
  }
  return series;
}

}  // namespace

ForecastEnsemble synthesize_ensemble(const SynthConfig& cfg,
                                     const CalendarDay& start) {
  cfg.validate();
  const int horizon = horizon_for(start);
  ForecastEnsemble e;
  e.start = start;
  e.horizon_days = horizon;
  e.member_ids.resize(cfg.n_members);
  e.members.resize(cfg.n_members);
  for (int m = 0; m < cfg.n_members; ++m) {
    e.member_ids[m] = m + 1;
    e.members[m] = synthesize_member(cfg, start, horizon, m + 1);
  }
  return e;
}

void write_ensemble_csv(const ForecastEnsemble& ensemble,
                        const std::string& path) {
  csv::Writer w(path, {"member_id", "date", "temperature_c", "precipitation_mm"});
  for (int m = 0; m < ensemble.n_members(); ++m) {
    for (int i = 0; i < ensemble.horizon_days; ++i) {
      const DailyWeather& d = ensemble.members[m][i];
      w.row({std::to_string(ensemble.member_ids[m]), to_iso(ensemble.date_at(i)),
             csv::format_fixed(d.temperature_c, 6),
             csv::format_fixed(d.precipitation_mm, 6)});
    }
  }
  w.close();
}

ForecastEnsemble load_ensemble_csv(const std::string& path) {
  csv::Reader r(path, {"member_id", "date", "temperature_c", "precipitation_mm"});

  struct Day {
    double temp;
    double precip;
  };
  std::map<int, std::map<std::int64_t, Day>> rows;  // member -> epoch day -> values
  while (auto fields = r.next()) {
    const auto& f = *fields;
    const int member = static_cast<int>(csv::parse_long(r, f[0], "member_id"));
    const CalendarDay date = [&] {
      try {
        return parse_iso(f[1]);
      } catch (const DataError& e) {
        r.fail(e.what());
      }
    }();
    const double temp = csv::parse_double(r, f[2], "temperature_c");
    const double precip = csv::parse_double(r, f[3], "precipitation_mm");
    if (precip < 0.0) r.fail("negative precipitation for member " + f[0]);
    const auto [it, inserted] =
        rows[member].emplace(to_epoch_days(date), Day{temp, precip});
    (void)it;
    if (!inserted) r.fail("duplicate (member " + f[0] + ", " + f[1] + ")");
  }
  if (rows.empty()) throw DataError("'" + path + "' contains no data rows");

  // All members must cover the same contiguous date range.
  const std::int64_t first = rows.begin()->second.begin()->first;
  const std::int64_t last = rows.begin()->second.rbegin()->first;
  ForecastEnsemble e;
  e.start = from_epoch_days(first);
  e.horizon_days = static_cast<int>(last - first + 1);
  for (const auto& [member, days] : rows) {
    if (days.begin()->first != first || days.rbegin()->first != last)
      throw DataError("'" + path + "': member " + std::to_string(member) +
                      " covers " + to_iso(from_epoch_days(days.begin()->first)) +
                      ".." + to_iso(from_epoch_days(days.rbegin()->first)) +
                      " but member " + std::to_string(rows.begin()->first) +
                      " covers " + to_iso(from_epoch_days(first)) + ".." +
                      to_iso(from_epoch_days(last)));
    if (static_cast<std::int64_t>(days.size()) != e.horizon_days) {
      // Find the first missing day to name the gap.
      std::int64_t expect = first;
      for (const auto& [d, v] : days) {
        (void)v;
        if (d != expect) break;
        ++expect;
      }
      throw DataError("'" + path + "': member " + std::to_string(member) +
                      " is missing " + to_iso(from_epoch_days(expect)));
    }
    e.member_ids.push_back(member);
    std::vector<DailyWeather> series;
    series.reserve(days.size());
    for (const auto& [d, v] : days) {
      (void)d;
      series.push_back(DailyWeather{v.temp, v.precip});
    }
    e.members.push_back(std::move(series));
  }
  e.validate();
  return e;
}

namespace {

DatasetPeriod make_period(const ForecastEnsemble& ensemble,
                          const std::vector<ImpactSeries>& impact,
                          const std::vector<int>& member_ids) {
  if (impact.size() != ensemble.members.size())
    throw DataError("impact series count does not match ensemble members");
  DatasetPeriod p;
  p.start = ensemble.start;
  for (int id : member_ids) {
    const auto it = std::find(ensemble.member_ids.begin(),
                              ensemble.member_ids.end(), id);
    if (it == ensemble.member_ids.end())
      throw DataError("member " + std::to_string(id) + " not in ensemble");
    const std::size_t idx = it - ensemble.member_ids.begin();
    if (impact[idx].member_id != id)
      throw DataError("impact series order does not match ensemble members");
    if (impact[idx].values.size() != ensemble.members[idx].size())
      throw DataError("impact series length mismatch for member " +
                      std::to_string(id));
    p.member_ids.push_back(id);
    p.weather.push_back(ensemble.members[idx]);
    p.r0.push_back(impact[idx].values);
  }
  return p;
}

}  // namespace

DatasetSplit build_dataset1(const ForecastEnsemble& ensemble,
                            const std::vector<ImpactSeries>& impact) {
  ensemble.validate();
  if (ensemble.n_members() != 50)
    throw DataError("dataset1 requires a 50-member ensemble, got " +
                    std::to_string(ensemble.n_members()));
  if (ensemble.start.month != 1 || ensemble.start.day != 1)
    throw DataError("dataset1 requires a January 1 start, got " +
                    to_iso(ensemble.start));

  std::vector<int> train_ids, test_ids;
  for (int id = 1; id <= 35; ++id) train_ids.push_back(id);
  for (int id = 36; id <= 50; ++id) test_ids.push_back(id);

  DatasetSplit split;
  split.label = "dataset1";
  split.train.push_back(make_period(ensemble, impact, train_ids));
  split.test.push_back(make_period(ensemble, impact, test_ids));
  return split;
}

DatasetSplit build_dataset2(
    const std::vector<std::pair<ForecastEnsemble, std::vector<ImpactSeries>>>&
        periods) {
  if (periods.size() != 10)
    throw DataError("dataset2 requires 10 forecast periods, got " +
                    std::to_string(periods.size()));

  int first_year = periods.front().first.start.year;
  for (const auto& [e, i] : periods) {
    (void)i;
    first_year = std::min(first_year, e.start.year);
  }

  // Expect Jan 1 and Jul 1 of five consecutive years, each with 50 members.
  std::map<std::pair<int, int>, const std::pair<ForecastEnsemble,
                                                std::vector<ImpactSeries>>*>
      by_key;
  for (const auto& p : periods) {
    p.first.validate();
    if (p.first.n_members() != 50)
      throw DataError("dataset2 periods must have 50 members; " +
                      to_iso(p.first.start) + " has " +
                      std::to_string(p.first.n_members()));
    by_key[{p.first.start.year, p.first.start.month}] = &p;
  }
  std::vector<int> all_ids(50);
  for (int id = 1; id <= 50; ++id) all_ids[id - 1] = id;

  DatasetSplit split;
  split.label = "dataset2";
  for (int year = first_year; year < first_year + 5; ++year) {
    for (int month : {1, 7}) {
      const auto it = by_key.find({year, month});
      if (it == by_key.end())
        throw DataError("dataset2 is missing the period starting " +
                        to_iso(CalendarDay{year, month, 1}));
      const auto& [ensemble, impact] = *it->second;
      DatasetPeriod p = make_period(ensemble, impact, all_ids);
      if (year < first_year + 4)
        split.train.push_back(std::move(p));
      else
        split.test.push_back(std::move(p));
    }
  }
  return split;
}

}  // namespace impactuq
