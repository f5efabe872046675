#include "heliopack/solar.hpp"

#include "heliopack/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace heliopack {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\"");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& cell, int line_no) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (cell.empty() || end != cell.c_str() + cell.size() || !std::isfinite(v))
    throw DataError("weather line " + std::to_string(line_no) + ": bad number '" + cell + "'");
  return v;
}

}  // namespace

int day_of_year(const LocalTime& t) {
  using namespace std::chrono;
  const year_month_day d{year{t.year}, month{static_cast<unsigned>(t.month)}, day{static_cast<unsigned>(t.day)}};
  if (!d.ok()) throw InvalidInput("invalid date");
  const year_month_day jan1{year{t.year}, January, day{1}};
  return static_cast<int>((sys_days{d} - sys_days{jan1}).count()) + 1;
}

SunVector sun_from_angles(double azimuth, double elevation) {
  SunVector s;
  s.azimuth = azimuth;
  s.elevation = elevation;
  const double az = deg2rad(azimuth), el = deg2rad(elevation);
  s.unit = Point3(std::cos(el) * std::sin(az), std::cos(el) * std::cos(az), std::sin(el));
  return s;
}

SunVector sun_position(double latitude, double longitude, const LocalTime& t, double utc_offset) {
  if (std::abs(latitude) > 90.0) throw InvalidInput("latitude out of range");
  const double hours = t.hour + t.minute / 60.0;
  const double gamma = 2.0 * kPi / 365.0 * (day_of_year(t) - 1 + (hours - 12.0) / 24.0);
  const double eqtime = 229.18 * (0.000075 + 0.001868 * std::cos(gamma) - 0.032077 * std::sin(gamma) -
                                  0.014615 * std::cos(2 * gamma) - 0.040849 * std::sin(2 * gamma));
  const double decl = 0.006918 - 0.399912 * std::cos(gamma) + 0.070257 * std::sin(gamma) -
                      0.006758 * std::cos(2 * gamma) + 0.000907 * std::sin(2 * gamma) -
                      0.002697 * std::cos(3 * gamma) + 0.00148 * std::sin(3 * gamma);
  const double true_solar_minutes = hours * 60.0 + eqtime + 4.0 * longitude - 60.0 * utc_offset;
  const double ha = deg2rad(true_solar_minutes / 4.0 - 180.0);
  const double lat = deg2rad(latitude);
  const Point3 v(-std::cos(decl) * std::sin(ha),
                 std::cos(lat) * std::sin(decl) - std::sin(lat) * std::cos(decl) * std::cos(ha),
                 std::sin(lat) * std::sin(decl) + std::cos(lat) * std::cos(decl) * std::cos(ha));
  SunVector s;
  s.unit = v.normalized();
  s.elevation = rad2deg(std::asin(std::clamp(s.unit.z(), -1.0, 1.0)));
  double az = rad2deg(std::atan2(s.unit.x(), s.unit.y()));
  if (az < 0.0) az += 360.0;
  s.azimuth = az;
  return s;
}

const WeatherRecord* Weather::find(int month, int day, int hour) const {
  for (const auto& r : records)
    if (r.time.month == month && r.time.day == day && r.time.hour == hour) return &r;
  return nullptr;
}

Weather read_weather_csv(std::istream& in) {
  Weather w;
  std::string line;
  int line_no = 0;
  std::map<std::string, int> col;
  const std::vector<std::string> required{"year", "month", "day", "hour", "ghi", "dni", "dhi"};
  while (std::getline(in, line)) {
    ++line_no;
    const auto cells = split_csv(line);
    std::map<std::string, int> names;
    for (std::size_t i = 0; i < cells.size(); ++i) names.emplace(lower(cells[i]), static_cast<int>(i));
    if (std::all_of(required.begin(), required.end(), [&](const auto& n) { return names.count(n) > 0; })) {
      col = std::move(names);
      break;
    }
  }
  if (col.empty()) throw DataError("weather file has no Year/Month/Day/Hour/GHI/DNI/DHI header");
  const int minute_col = col.count("minute") ? col["minute"] : -1;
  int temp_col = -1;
  for (const char* name : {"temperature", "temp", "tdry"})
    if (col.count(name)) {
      temp_col = col[name];
      break;
    }
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    auto get = [&](int idx) {
      if (idx < 0 || idx >= static_cast<int>(cells.size()))
        throw DataError("weather line " + std::to_string(line_no) + ": missing column");
      return parse_number(cells[idx], line_no);
    };
    WeatherRecord r;
    r.time.year = static_cast<int>(get(col["year"]));
    r.time.month = static_cast<int>(get(col["month"]));
    r.time.day = static_cast<int>(get(col["day"]));
    r.time.hour = static_cast<int>(get(col["hour"]));
    r.time.minute = minute_col >= 0 ? static_cast<int>(get(minute_col)) : 0;
    r.ghi = get(col["ghi"]);
    r.dni = get(col["dni"]);
    r.dhi = get(col["dhi"]);
    if (temp_col >= 0 && temp_col < static_cast<int>(cells.size()) && !cells[temp_col].empty())
      r.temperature = get(temp_col);
    if (r.time.month < 1 || r.time.month > 12 || r.time.day < 1 || r.time.day > 31 || r.time.hour < 0 ||
        r.time.hour > 23 || r.time.minute < 0 || r.time.minute > 59)
      throw DataError("weather line " + std::to_string(line_no) + ": timestamp out of range");
    if (r.ghi < 0.0 || r.dni < 0.0 || r.dhi < 0.0)
      throw DataError("weather line " + std::to_string(line_no) + ": negative irradiance");
    if (r.ghi > r.dni + r.dhi + 50.0)
      w.warnings.push_back("weather line " + std::to_string(line_no) + ": GHI exceeds DNI + DHI + 50");
    w.records.push_back(r);
  }
  return w;
}

Weather read_weather_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open weather file " + path.string());
  return read_weather_csv(in);
}

Weather synthetic_weather(double latitude, double longitude, double utc_offset, int year) {
  Weather w;
  for (int month = 1; month <= 12; ++month) {
    const int days = static_cast<int>(
        static_cast<unsigned>(std::chrono::year_month_day_last{std::chrono::year{year},
                                                               std::chrono::month_day_last{
                                                                   std::chrono::month{static_cast<unsigned>(month)}}}
                                  .day()));
    for (int day = 1; day <= days; ++day)
      for (int hour = 0; hour < 24; ++hour) {
        WeatherRecord r;
        r.time = {year, month, day, hour, 30};
        const SunVector s = sun_position(latitude, longitude, r.time, utc_offset);
        if (s.elevation > 0.0) {
          const double zenith = 90.0 - s.elevation;
          const double cz = std::cos(deg2rad(zenith));
          const double air_mass = 1.0 / (cz + 0.50572 * std::pow(96.07995 - zenith, -1.6364));
          r.dni = 1361.0 * std::pow(0.7, std::pow(air_mass, 0.678));
          r.dhi = r.dni * cz * 0.15 / 0.85;
          r.ghi = r.dni * cz + r.dhi;
        }
        w.records.push_back(r);
      }
  }
  return w;
}

TimeSampleSet build_time_samples(double latitude, double longitude, double utc_offset, const Weather& weather,
                                 const SamplingScheme& scheme) {
  if (scheme.first_hour < 0 || scheme.last_hour > 23 || scheme.first_hour > scheme.last_hour)
    throw InvalidInput("invalid sampling hours");
  std::map<std::tuple<int, int, int>, const WeatherRecord*> index;
  for (const auto& r : weather.records) index.emplace(std::make_tuple(r.time.month, r.time.day, r.time.hour), &r);
  TimeSampleSet set;
  std::string gaps;
  for (int month = 1; month <= 12; ++month)
    for (int hour = scheme.first_hour; hour <= scheme.last_hour; ++hour) {
      const auto it = index.find({month, scheme.day, hour});
      if (it == index.end()) {
        char buf[48];
        std::snprintf(buf, sizeof buf, "%s%02d-%02d %02d:00", gaps.empty() ? "" : ", ", month, scheme.day, hour);
        gaps += buf;
        continue;
      }
      TimeSample s;
      s.k = set.size();
      s.time = it->second->time;
      s.weather = *it->second;
      s.sun = sun_position(latitude, longitude, s.time, utc_offset);
      set.samples.push_back(s);
    }
  if (!gaps.empty()) throw DataError("weather file is missing sampled hours: " + gaps);
  return set;
}

Point3 PanelOrientation::normal() const {
  const double az = deg2rad(azimuth), t = deg2rad(tilt);
  return {std::sin(t) * std::sin(az), std::sin(t) * std::cos(az), std::cos(t)};
}

double poa_irradiance(const SunVector& sun, const PanelOrientation& orient, const WeatherRecord& w, double albedo) {
  if (sun.elevation <= 0.0) return 0.0;
  const double cos_aoi = orient.normal().dot(sun.unit);
  const double ct = std::cos(deg2rad(orient.tilt));
  const double beam = w.dni * std::max(0.0, cos_aoi);
  const double sky = w.dhi * (1.0 + ct) / 2.0;
  const double ground = w.ghi * albedo * (1.0 - ct) / 2.0;
  return std::max(0.0, beam + sky + ground);
}

GenerationTable baseline_generation(std::span<const PanelOrientation> orientations, const TimeSampleSet& samples,
                                    double rated_power, double derate, double albedo) {
  if (!(rated_power > 0.0) || !(derate > 0.0) || derate > 1.0) throw InvalidInput("invalid panel rating or derate");
  GenerationTable t;
  t.rated_power = rated_power;
  t.derate = derate;
  t.G = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(orientations.size()), samples.size());
  const double scale = rated_power * derate / 1000.0 * samples.annual_scale;
  for (std::size_t c = 0; c < orientations.size(); ++c)
    for (const auto& s : samples.samples)
      t.G(static_cast<Eigen::Index>(c), s.k) = scale * poa_irradiance(s.sun, orientations[c], s.weather, albedo);
  return t;
}

double full_year_energy(const PanelOrientation& orient, const Weather& weather, double latitude, double longitude,
                        double utc_offset, double rated_power, double derate, double albedo) {
  double total = 0.0;
  for (const auto& r : weather.records) {
    const SunVector s = sun_position(latitude, longitude, r.time, utc_offset);
    total += rated_power * derate / 1000.0 * poa_irradiance(s, orient, r, albedo);
  }
  return total;
}

}  // namespace heliopack
