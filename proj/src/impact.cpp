#include "impactuq/impact.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "impactuq/csv.hpp"
#include "impactuq/errors.hpp"

namespace impactuq {

void TransmissionParams::validate() const {
  if (degree_days <= 0.0) throw ConfigError("impact.degree_days must be > 0");
  if (biting_rate <= 0.0 || transmission_efficiency <= 0.0 ||
      recovery_rate <= 0.0 || vector_density_max <= 0.0 ||
      rain_half_saturation <= 0.0)
    throw ConfigError("impact rates must be > 0");
  if (rain_window_days < 1 || temp_window_days < 1)
    throw ConfigError("impact windows must be >= 1 day");
  if (!std::isfinite(temp_threshold_c))
    throw ConfigError("impact.temp_threshold_c must be finite");
}

double trailing_mean(std::span<const double> series, int window, int index) {
  const int lo = std::max(0, index - window + 1);
  double sum = 0.0;
  for (int i = lo; i <= index; ++i) sum += series[i];
  return sum / static_cast<double>(index - lo + 1);
}

double daily_survival(double t_mean_c, const TransmissionParams& p) {
  const double g = p.survival_c0 + p.survival_c1 * t_mean_c +
                   p.survival_c2 * t_mean_c * t_mean_c;
  if (g <= 0.0) return 0.0;
  const double s = std::exp(-1.0 / g);
  return std::clamp(s, 0.0, 1.0 - 1e-12);
}

ImpactSeries compute_r0(int member_id, std::span<const DailyWeather> weather,
                        const TransmissionParams& p) {
  if (weather.empty()) throw DataError("compute_r0 needs a nonempty series");
  const int n = static_cast<int>(weather.size());
  std::vector<double> temp(n), rain(n);
  for (int i = 0; i < n; ++i) {
    temp[i] = weather[i].temperature_c;
    rain[i] = weather[i].precipitation_mm;
  }

  ImpactSeries out;
  out.member_id = member_id;
  out.values.resize(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double t_mean = trailing_mean(temp, p.temp_window_days, i);
    if (!(t_mean > p.temp_threshold_c)) continue;
    const double s = daily_survival(t_mean, p);
    if (s <= 0.0) continue;
    const double rain_mean = trailing_mean(rain, p.rain_window_days, i);
    const double sporogony_days = p.degree_days / (t_mean - p.temp_threshold_c);
    const double density = p.vector_density_max * rain_mean /
                           (rain_mean + p.rain_half_saturation);
    const double r0 = density * p.biting_rate * p.biting_rate *
                      p.transmission_efficiency *
                      std::pow(s, sporogony_days) /
                      (p.recovery_rate * -std::log(s));
    out.values[i] = std::isfinite(r0) && r0 > 0.0 ? r0 : 0.0;
  }
  return out;
}

void write_impact_csv(const std::vector<ImpactSeries>& series,
                      const CalendarDay& start, const std::string& path) {
  csv::Writer w(path, {"member_id", "date", "r0"});
  for (const ImpactSeries& s : series) {
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      w.row({std::to_string(s.member_id),
             to_iso(date_add(start, static_cast<std::int64_t>(i))),
             csv::format_fixed(s.values[i], 6)});
    }
  }
  w.close();
}

std::vector<ImpactSeries> load_impact_csv(const std::string& path,
                                          CalendarDay* start_out) {
  csv::Reader r(path, {"member_id", "date", "r0"});
  std::map<int, std::map<std::int64_t, double>> rows;
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
    const double r0 = csv::parse_double(r, f[2], "r0");
    if (r0 < 0.0) r.fail("negative r0 for member " + f[0]);
    if (!rows[member].emplace(to_epoch_days(date), r0).second)
      r.fail("duplicate (member " + f[0] + ", " + f[1] + ")");
  }
  if (rows.empty()) throw DataError("'" + path + "' contains no data rows");

  const std::int64_t first = rows.begin()->second.begin()->first;
  const std::int64_t last = rows.begin()->second.rbegin()->first;
  const std::int64_t horizon = last - first + 1;
  std::vector<ImpactSeries> out;
  for (const auto& [member, days] : rows) {
    if (days.begin()->first != first ||
        static_cast<std::int64_t>(days.size()) != horizon)
      throw DataError("'" + path + "': member " + std::to_string(member) +
                      " does not cover the common date range");
    ImpactSeries s;
    s.member_id = member;
    s.values.reserve(days.size());
    for (const auto& [d, v] : days) {
      (void)d;
      s.values.push_back(v);
    }
    out.push_back(std::move(s));
  }
  if (start_out) *start_out = from_epoch_days(first);
  return out;
}

}  // namespace impactuq
