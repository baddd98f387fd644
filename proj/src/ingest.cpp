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

#include "qweather/ingest.hpp"

#include <curl/curl.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "qweather/error.hpp"
#include "qweather/util.hpp"

namespace qweather::ingest {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPowerFillValue = -999.0;
constexpr const char* kPowerEndpoint = "https://power.larc.nasa.gov/api/temporal/daily/point";

std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

}  // namespace

void GeoPoint::validate() const {
  if (!(lat_deg >= -90.0 && lat_deg <= 90.0)) throw InvalidArgument("latitude out of range: " + std::to_string(lat_deg));
  if (!(lon_deg >= -180.0 && lon_deg <= 180.0)) {
    throw InvalidArgument("longitude out of range: " + std::to_string(lon_deg));
  }
}

void DateRange::validate() const {
  if (!start.ok() || !end.ok()) throw InvalidArgument("invalid calendar date in range");
  if (days_between(start, end) < 0) throw InvalidArgument("range start " + to_iso(start) + " after end " + to_iso(end));
}

std::size_t DateRange::days() const { return static_cast<std::size_t>(days_between(start, end) + 1); }

DailyDataset::DailyDataset(std::vector<Date> dates, std::vector<Column> columns)
    : dates_(std::move(dates)), columns_(std::move(columns)) {
  for (std::size_t i = 1; i < dates_.size(); ++i) {
    if (days_between(dates_[i - 1], dates_[i]) != 1) {
      throw ValidationError("dates not consecutive at " + to_iso(dates_[i - 1]) + " -> " + to_iso(dates_[i]));
    }
  }
  std::set<std::string> seen;
  for (const auto& c : columns_) {
    if (!seen.insert(c.name).second) throw ValidationError("duplicate column '" + c.name + "'");
    if (c.values.size() != dates_.size()) {
      throw ValidationError("column '" + c.name + "' has " + std::to_string(c.values.size()) + " values for " +
                            std::to_string(dates_.size()) + " dates");
    }
  }
}

DateRange DailyDataset::range() const {
  if (dates_.empty()) throw ValidationError("empty dataset has no range");
  return {dates_.front(), dates_.back()};
}

std::vector<std::string> DailyDataset::names() const {
  std::vector<std::string> out;
  out.reserve(columns_.size());
  for (const auto& c : columns_) out.push_back(c.name);
  return out;
}

bool DailyDataset::has_column(std::string_view name) const noexcept {
  return std::any_of(columns_.begin(), columns_.end(), [&](const Column& c) { return c.name == name; });
}

const Column& DailyDataset::column(std::string_view name) const {
  for (const auto& c : columns_) {
    if (c.name == name) return c;
  }
  throw MissingParameterError(std::string(name), names());
}

std::optional<std::size_t> DailyDataset::index_of(Date d) const {
  if (dates_.empty()) return std::nullopt;
  const long off = days_between(dates_.front(), d);
  if (off < 0 || static_cast<std::size_t>(off) >= dates_.size()) return std::nullopt;
  return static_cast<std::size_t>(off);
}

DailyDataset DailyDataset::with_column(Column c) const {
  auto cols = columns_;
  cols.push_back(std::move(c));
  return DailyDataset(dates_, std::move(cols));
}

DailyDataset DailyDataset::slice(const DateRange& r) const {
  const auto first = index_of(r.start);
  const auto last = index_of(r.end);
  if (!first || !last || *first > *last) {
    throw ValidationError("dataset does not cover " + to_iso(r.start) + ".." + to_iso(r.end));
  }
  std::vector<Date> dates(dates_.begin() + static_cast<long>(*first), dates_.begin() + static_cast<long>(*last) + 1);
  std::vector<Column> cols;
  for (const auto& c : columns_) {
    cols.push_back({c.name, c.unit,
                    Series(c.values.begin() + static_cast<long>(*first), c.values.begin() + static_cast<long>(*last) + 1)});
  }
  return DailyDataset(std::move(dates), std::move(cols));
}

// --- parameter catalog -------------------------------------------------------

ParameterCatalog ParameterCatalog::builtin() {
  ParameterCatalog c;
  c.entries_ = {
      {"temperature", "T2M"},
      {"max_temperature", "T2M_MAX"},
      {"min_temperature", "T2M_MIN"},
      {"relative_humidity", "RH2M"},
      {"dew_point", "T2MDEW"},
      {"pressure", "PS"},
      {"wind_speed", "WS10M"},
      {"max_wind_speed", "WS10M_MAX"},
      {"min_wind_speed", "WS10M_MIN"},
      {"wind_direction", "WD10M"},
      {"solar_radiation", "ALLSKY_SFC_SW_DWN"},
      {"precipitation", "PRECTOTCORR"},
  };
  return c;
}

ParameterCatalog ParameterCatalog::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open parameter catalog " + path.string());
  ParameterCatalog c;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = util::split(t, ',');
    if (fields.size() != 2) throw ParseError("catalog row must be 'quantity,code'", line_no);
    const auto quantity = trim(fields[0]);
    const auto code = trim(fields[1]);
    if (quantity == "quantity" && code == "code") continue;
    if (quantity.empty() || code.empty()) throw ParseError("empty catalog field", line_no);
    c.entries_.push_back({quantity, code});
  }
  return c;
}

std::vector<std::string> ParameterCatalog::codes() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) out.push_back(e.code);
  return out;
}

std::string ParameterCatalog::resolve(std::string_view quantity_or_code) const {
  for (const auto& e : entries_) {
    if (e.quantity == quantity_or_code || e.code == quantity_or_code) return e.code;
  }
  throw MissingParameterError(std::string(quantity_or_code), codes());
}

// --- request -------------------------------------------------------------------

std::string Request::canonical() const {
  return "lat=" + util::format_double(point.lat_deg) + ";lon=" + util::format_double(point.lon_deg) +
         ";start=" + to_compact(range.start) + ";end=" + to_compact(range.end) + ";params=" + [&] {
           std::string s;
           for (std::size_t i = 0; i < params.size(); ++i) s += (i ? "," : "") + params[i];
           return s;
         }();
}

std::string Request::key() const { return util::sha256_hex(canonical()); }

std::string Request::url() const {
  std::string codes;
  for (std::size_t i = 0; i < params.size(); ++i) codes += (i ? "," : "") + params[i];
  return std::string(kPowerEndpoint) + "?parameters=" + codes + "&community=RE&latitude=" +
         util::format_double(point.lat_deg) + "&longitude=" + util::format_double(point.lon_deg) +
         "&start=" + to_compact(range.start) + "&end=" + to_compact(range.end) + "&format=JSON";
}

// --- transport -----------------------------------------------------------------

namespace {

std::once_flag g_curl_init;

std::size_t curl_sink(char* data, std::size_t size, std::size_t nmemb, void* user) {
  static_cast<std::string*>(user)->append(data, size * nmemb);
  return size * nmemb;
}

class CurlTransport final : public HttpTransport {
 public:
  explicit CurlTransport(long timeout) : timeout_(timeout) {
    std::call_once(g_curl_init, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
  }

  std::string get(const std::string& url, const std::string& request_key) override {
    std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> h(curl_easy_init(), &curl_easy_cleanup);
    if (!h) throw TransportError(request_key, "curl_easy_init failed");
    std::string body;
    curl_easy_setopt(h.get(), CURLOPT_URL, url.c_str());
    curl_easy_setopt(h.get(), CURLOPT_FOLLOWLOCATION, 1L);
    curl_easy_setopt(h.get(), CURLOPT_TIMEOUT, timeout_);
    curl_easy_setopt(h.get(), CURLOPT_NOSIGNAL, 1L);
    curl_easy_setopt(h.get(), CURLOPT_WRITEFUNCTION, &curl_sink);
    curl_easy_setopt(h.get(), CURLOPT_WRITEDATA, &body);
    const CURLcode rc = curl_easy_perform(h.get());
    if (rc != CURLE_OK) throw TransportError(request_key, std::string("GET failed: ") + curl_easy_strerror(rc));
    long status = 0;
    curl_easy_getinfo(h.get(), CURLINFO_RESPONSE_CODE, &status);
    if (status != 200) throw TransportError(request_key, "GET returned HTTP " + std::to_string(status));
    return body;
  }

 private:
  long timeout_;
};

}  // namespace

std::unique_ptr<HttpTransport> make_curl_transport(long timeout_seconds) {
  return std::make_unique<CurlTransport>(timeout_seconds);
}

// --- POWER payload -------------------------------------------------------------

DailyDataset parse_power_json(std::string_view payload, const Request& request) {
  json doc;
  try {
    doc = json::parse(payload);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("payload is not JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("properties") || !doc["properties"].is_object()) {
    throw ParseError("payload field 'properties' missing");
  }
  const auto& props = doc["properties"];
  if (!props.contains("parameter") || !props["parameter"].is_object()) {
    throw ParseError("payload field 'properties.parameter' missing");
  }
  const auto& table = props["parameter"];

  double fill = kPowerFillValue;
  if (doc.contains("header") && doc["header"].is_object() && doc["header"].contains("fill_value")) {
    const auto& f = doc["header"]["fill_value"];
    if (!f.is_number()) throw ParseError("payload field 'header.fill_value' is not a number");
    fill = f.get<double>();
  }

  std::vector<std::string> available;
  for (const auto& [code, _] : table.items()) available.push_back(code);

  request.range.validate();
  const std::size_t n = request.range.days();
  std::vector<Date> dates;
  dates.reserve(n);
  for (std::size_t i = 0; i < n; ++i) dates.push_back(add_days(request.range.start, static_cast<long>(i)));

  std::vector<Column> cols;
  for (const auto& code : request.params) {
    if (!table.contains(code)) throw MissingParameterError(code, available);
    const auto& obj = table[code];
    if (!obj.is_object()) throw ParseError("payload field 'properties.parameter." + code + "' is not an object");
    Column col{code, "", Series(n)};
    if (doc.contains("parameters") && doc["parameters"].contains(code) && doc["parameters"][code].contains("units")) {
      const auto& u = doc["parameters"][code]["units"];
      if (u.is_string()) col.unit = u.get<std::string>();
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::string key = to_compact(dates[i]);
      const std::string field = "properties.parameter." + code + "." + key;
      if (!obj.contains(key)) throw ParseError("payload field '" + field + "' missing");
      const auto& v = obj[key];
      if (v.is_null()) continue;
      if (!v.is_number()) throw ParseError("payload field '" + field + "' is not a number");
      const double x = v.get<double>();
      if (x == fill || x == kPowerFillValue) continue;
      col.values[i] = x;
    }
    cols.push_back(std::move(col));
  }
  return DailyDataset(std::move(dates), std::move(cols));
}

// --- cache ---------------------------------------------------------------------

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void atomic_write(const fs::path& path, std::string_view contents) {
  static std::atomic<unsigned long> counter{0};
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ostringstream tag;
  tag << ".tmp." << std::this_thread::get_id() << "." << counter.fetch_add(1);
  const fs::path tmp = path.string() + tag.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorKind::io, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(ErrorKind::io, "rename to " + path.string() + " failed: " + ec.message());
  }
}

fs::path cache_csv_path(const fs::path& cache_dir, const Request& request) {
  return cache_dir / (request.key() + ".csv");
}

fs::path cache_raw_path(const fs::path& cache_dir, const Request& request) {
  return cache_dir / (request.key() + ".raw.json");
}

void store_dataset(const DailyDataset& data, const fs::path& csv_path, const std::optional<Request>& provenance) {
  std::string out = "date";
  for (const auto& c : data.columns()) out += "," + c.name;
  out += "\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    out += to_iso(data.dates()[i]);
    for (const auto& c : data.columns()) {
      out += ",";
      if (c.values[i]) out += util::format_double(*c.values[i]);
    }
    out += "\n";
  }

  json side;
  side["units"] = json::object();
  for (const auto& c : data.columns()) side["units"][c.name] = c.unit;
  if (provenance) {
    side["source"] = "NASA POWER daily point";
    side["url"] = provenance->url();
    side["request_key"] = provenance->key();
    side["latitude"] = provenance->point.lat_deg;
    side["longitude"] = provenance->point.lon_deg;
    side["start"] = to_iso(provenance->range.start);
    side["end"] = to_iso(provenance->range.end);
    side["parameters"] = provenance->params;
  }
  atomic_write(csv_path, out);
  atomic_write(csv_path.string() + ".json", side.dump(2) + "\n");
}

DailyDataset load_fixture(const fs::path& csv_path) {
  const std::string text = read_file(csv_path);
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty file " + csv_path.string(), 1);
  ++line_no;
  if (!line.empty() && line.back() == '\r') throw ParseError("CRLF line endings not allowed", line_no);
  const auto header = util::split(line, ',');
  if (header.empty() || header[0] != "date") throw ParseError("header must start with 'date'", line_no);
  if (header.size() < 2) throw ParseError("header names no data columns", line_no);

  std::vector<Column> cols;
  for (std::size_t j = 1; j < header.size(); ++j) {
    if (header[j].empty()) throw ParseError("empty column name in header", line_no);
    cols.push_back({std::string(header[j]), "", {}});
  }
  std::vector<Date> dates;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) throw ParseError("blank line", line_no);
    if (line.back() == '\r') throw ParseError("CRLF line endings not allowed", line_no);
    const auto fields = util::split(line, ',');
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()),
                       line_no);
    }
    Date d;
    try {
      d = parse_iso_date(fields[0]);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
    if (!dates.empty() && days_between(dates.back(), d) <= 0) {
      throw ValidationError("dates not strictly increasing at line " + std::to_string(line_no) + " (" + to_iso(d) +
                            ")");
    }
    dates.push_back(d);
    for (std::size_t j = 1; j < fields.size(); ++j) {
      if (fields[j].empty()) {
        cols[j - 1].values.emplace_back();
        continue;
      }
      const auto v = util::parse_double(fields[j]);
      if (!v) throw ParseError("non-numeric value '" + std::string(fields[j]) + "'", line_no);
      cols[j - 1].values.emplace_back(*v);
    }
  }

  const fs::path sidecar = csv_path.string() + ".json";
  if (fs::exists(sidecar)) {
    json side;
    try {
      side = json::parse(read_file(sidecar));
    } catch (const json::parse_error& e) {
      throw ParseError("sidecar " + sidecar.string() + " is not JSON: " + e.what());
    }
    if (side.contains("units") && side["units"].is_object()) {
      for (auto& c : cols) {
        if (side["units"].contains(c.name) && side["units"][c.name].is_string()) {
          c.unit = side["units"][c.name].get<std::string>();
        }
      }
    }
  }
  return DailyDataset(std::move(dates), std::move(cols));
}

DailyDataset fetch_daily(const Request& request, const FetchOptions& options) {
  if (request.params.empty()) throw InvalidArgument("fetch_daily needs at least one parameter code");
  request.point.validate();
  request.range.validate();

  const fs::path raw = cache_raw_path(options.cache_dir, request);
  const fs::path csv = cache_csv_path(options.cache_dir, request);
  if (fs::exists(raw)) return parse_power_json(read_file(raw), request);
  if (fs::exists(csv)) return load_fixture(csv);

  if (options.offline) {
    throw TransportError(request.key(), "offline mode and no cache entry at " + csv.string());
  }
  std::unique_ptr<HttpTransport> owned;
  HttpTransport* transport = options.transport;
  if (!transport) {
    owned = make_curl_transport();
    transport = owned.get();
  }
  const std::string body = transport->get(request.url(), request.key());
  DailyDataset data = parse_power_json(body, request);
  atomic_write(raw, body);
  store_dataset(data, csv, request);
  return data;
}

DateRange extend_for_lag(const DateRange& range, int lag_days) {
  if (lag_days < 0) throw InvalidArgument("lag_days must be >= 0");
  return {add_days(range.start, -lag_days), range.end};
}

}  // namespace qweather::ingest
