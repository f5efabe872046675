#pragma once

// Sun position, hourly weather, plane-of-array irradiance and the per-sample
// baseline generation table G(c, k).

#include "heliopack/geom.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace heliopack {

/// Local standard time (no daylight saving).
struct LocalTime {
  int year = 2019;
  int month = 1;
  int day = 1;
  int hour = 0;
  int minute = 0;

  friend bool operator==(const LocalTime&, const LocalTime&) = default;
};

/// 1-based day of year; throws InvalidInput for impossible dates.
int day_of_year(const LocalTime& t);

struct SunVector {
  double azimuth = 0.0;    // compass degrees, 0 = north, 90 = east
  double elevation = 0.0;  // degrees above the horizon
  Point3 unit = Point3::UnitZ();  // (east, north, up) toward the sun
};

/// Declination and equation of time from the day-angle Fourier series, then
/// hour angle from true solar time. Geometric elevation, no refraction.
SunVector sun_position(double latitude, double longitude, const LocalTime& t, double utc_offset);

SunVector sun_from_angles(double azimuth, double elevation);

struct WeatherRecord {
  LocalTime time;
  double ghi = 0.0;  // W/m^2
  double dni = 0.0;
  double dhi = 0.0;
  std::optional<double> temperature;
};

struct Weather {
  std::vector<WeatherRecord> records;
  std::vector<std::string> warnings;

  /// First record for the given month/day/hour, ignoring the year.
  const WeatherRecord* find(int month, int day, int hour) const;
};

/// Reads an hourly CSV. Lines before the header row (the first row naming
/// Year, Month, Day, Hour, GHI, DNI and DHI, any case) are skipped; Minute and
/// Temperature columns are optional. Throws DataError on malformed rows.
Weather read_weather_csv(std::istream& in);
Weather read_weather_csv(const std::filesystem::path& path);

/// Clear-sky year of hourly records stamped at half past each hour:
/// DNI = 1361 * 0.7^(AM^0.678) with Kasten-Young air mass, DHI set so that
/// diffuse is 15% of GHI and GHI = DNI cos(z) + DHI holds exactly.
Weather synthetic_weather(double latitude, double longitude, double utc_offset, int year = 2019);

struct TimeSample {
  int k = 0;
  LocalTime time;
  SunVector sun;
  WeatherRecord weather;
};

struct SamplingScheme {
  int day = 14;
  int first_hour = 6;
  int last_hour = 19;  // inclusive
};

struct TimeSampleSet {
  std::vector<TimeSample> samples;
  double annual_scale = 365.0 / 12.0;

  int size() const { return static_cast<int>(samples.size()); }
};

/// One representative day per month, hourly samples in the scheme's window.
/// Sun position is evaluated at each record's own timestamp. Throws
/// DataError listing every missing (month, day, hour).
TimeSampleSet build_time_samples(double latitude, double longitude, double utc_offset, const Weather& weather,
                                 const SamplingScheme& scheme = {});

struct PanelOrientation {
  double azimuth = 180.0;  // compass direction the panel faces
  double tilt = 0.0;       // degrees from horizontal

  /// Upward unit normal in (east, north, up).
  Point3 normal() const;
};

/// Isotropic-sky plane-of-array irradiance in W/m^2; zero when the sun is
/// at or below the horizon.
double poa_irradiance(const SunVector& sun, const PanelOrientation& orient, const WeatherRecord& w,
                      double albedo = 0.2);

struct GenerationTable {
  Eigen::MatrixXd G;  // rows: configurations, cols: samples; Wh, annual-scaled
  double rated_power = 300.0;
  double derate = 0.86;
};

/// G(c, k) = rated_power * derate * poa / 1000 * 1 h * annual_scale.
GenerationTable baseline_generation(std::span<const PanelOrientation> orientations, const TimeSampleSet& samples,
                                    double rated_power = 300.0, double derate = 0.86, double albedo = 0.2);

/// Annual energy (Wh) of one unshaded panel summed over every weather record.
double full_year_energy(const PanelOrientation& orient, const Weather& weather, double latitude, double longitude,
                        double utc_offset, double rated_power = 300.0, double derate = 0.86, double albedo = 0.2);

}  // namespace heliopack
