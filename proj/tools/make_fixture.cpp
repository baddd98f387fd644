// Copyright 2026 The qweather Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Writes a SYNTHETIC daily table in the cache/fixture format. The values are
// generated from seasonal cycles plus AR(1) noise and only resemble a tropical
// savanna station; they are not observations. Used for offline tests and CI.
//
//   make_fixture OUT.csv [START END SEED]

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>

#include <json.hpp>

#include "qweather/date.hpp"
#include "qweather/ingest.hpp"

using namespace qweather;

namespace {

// Portable standard normal (std::normal_distribution is not specified
// bit-for-bit across standard libraries).
class Gauss {
 public:
  explicit Gauss(std::uint64_t seed) : rng_(seed) {}
  double operator()() {
    const double u1 = (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 rng_;
};

struct Ar1 {
  double phi;
  double sigma;
  double state{0.0};
  double step(Gauss& g) {
    state = phi * state + sigma * std::sqrt(1.0 - phi * phi) * g();
    return state;
  }
};

double round2(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2 && argc != 5) {
    std::fprintf(stderr, "usage: make_fixture OUT.csv [START END SEED]\n");
    return 2;
  }
  const std::string out = argv[1];
  Date start = parse_iso_date("2022-09-01");
  Date end = parse_iso_date("2024-04-30");
  std::uint64_t seed = 20240430;
  if (argc == 5) {
    start = parse_iso_date(argv[2]);
    end = parse_iso_date(argv[3]);
    seed = std::stoull(argv[4]);
  }

  Gauss g(seed);
  Ar1 temp{0.85, 1.1};
  Ar1 humid{0.8, 6.0};
  Ar1 wind{0.75, 0.45};
  Ar1 press{0.9, 0.12};
  Ar1 dir{0.6, 25.0};
  Ar1 cloud{0.7, 1.0};

  std::vector<Date> dates;
  std::vector<ingest::Column> cols = {
      {"T2M", "C", {}},         {"T2M_MAX", "C", {}},    {"T2M_MIN", "C", {}},   {"RH2M", "%", {}},
      {"T2MDEW", "C", {}},      {"PS", "kPa", {}},       {"WS10M", "m/s", {}},   {"WS10M_MAX", "m/s", {}},
      {"WS10M_MIN", "m/s", {}}, {"WD10M", "Degrees", {}}, {"ALLSKY_SFC_SW_DWN", "MJ/m^2/day", {}},
      {"PRECTOTCORR", "mm/day", {}},
  };
  for (Date d = start; days_between(d, end) >= 0; d = add_days(d, 1)) {
    dates.push_back(d);
    const auto doy = static_cast<double>(
        days_between(std::chrono::year_month_day{d.year(), std::chrono::January, std::chrono::day{1}}, d));
    const double season = std::sin(2.0 * std::numbers::pi * (doy - 190.0) / 365.25);  // peaks in October
    const double wet = 0.5 * (1.0 + std::cos(2.0 * std::numbers::pi * (doy - 15.0) / 365.25));  // peaks in January

    const double c = cloud.step(g);
    const double t = 26.6 + 2.0 * season + temp.step(g) - 0.4 * c;
    const double rh = std::clamp(62.0 + 22.0 * wet - 4.0 * (t - 26.6) + humid.step(g) + 3.0 * c, 12.0, 98.0);
    const double a = 17.625;
    const double b = 243.04;
    const double gamma = std::log(rh / 100.0) + a * t / (b + t);
    const double dew = b * gamma / (a - gamma);
    const double ws = std::max(0.4, 2.0 + 0.7 * (1.0 - wet) - 0.15 * (t - 26.6) + wind.step(g));
    const double rain = wet * std::max(0.0, 6.0 * (c + 0.3) + 2.0 * g()) * (g.uniform() < 0.2 + 0.6 * wet ? 1.0 : 0.0);

    const double row[] = {
        t,
        t + 6.0 - 0.6 * c + 0.5 * g(),
        t - 6.5 + 0.5 * c + 0.5 * g(),
        rh,
        dew,
        94.6 - 0.08 * (t - 26.6) + press.step(g),
        ws,
        ws * 1.7 + std::abs(0.4 * g()),
        ws * 0.35 + std::abs(0.1 * g()),
        std::fmod(100.0 + dir.step(g) + 360.0, 360.0),
        std::max(4.0, 21.0 + 2.5 * season - 3.0 * c - 4.0 * wet + 0.8 * g()),
        rain,
    };
    for (std::size_t j = 0; j < cols.size(); ++j) cols[j].values.emplace_back(round2(row[j]));
  }

  ingest::store_dataset(ingest::DailyDataset(std::move(dates), std::move(cols)), out);
  auto side = nlohmann::json::parse(ingest::read_file(out + ".json"));
  side["source"] = "SYNTHETIC (tools/make_fixture.cpp); not observed data";
  side["seed"] = seed;
  ingest::atomic_write(out + ".json", side.dump(2) + "\n");
  return 0;
}
