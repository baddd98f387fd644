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

/**
 * @file ingest.hpp
 * @brief Daily point data from the NASA POWER service, with an on-disk cache
 * that doubles as the offline fixture format.
 */
#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qweather/date.hpp"

namespace qweather::ingest {

struct GeoPoint {
  double lat_deg{-12.15};
  double lon_deg{-44.99};

  /// Throws InvalidArgument outside [-90, 90] x [-180, 180].
  void validate() const;
};

struct DateRange {
  Date start;
  Date end;

  void validate() const;
  /// Inclusive day count.
  [[nodiscard]] std::size_t days() const;
  bool operator==(const DateRange&) const = default;
};

/// A missing observation is an empty optional, never a numeric marker.
using Series = std::vector<std::optional<double>>;

struct Column {
  std::string name;
  std::string unit;
  Series values;

  bool operator==(const Column&) const = default;
};

/// Date-indexed table of daily series. Immutable once built: every "mutating"
/// operation returns a new dataset.
class DailyDataset {
 public:
  DailyDataset() = default;
  /// Validates that dates step by exactly one day, every column has one value
  /// per date and column names are unique. Throws ValidationError otherwise.
  DailyDataset(std::vector<Date> dates, std::vector<Column> columns);

  [[nodiscard]] const std::vector<Date>& dates() const noexcept { return dates_; }
  [[nodiscard]] std::size_t size() const noexcept { return dates_.size(); }
  [[nodiscard]] DateRange range() const;
  [[nodiscard]] std::vector<std::string> names() const;
  [[nodiscard]] bool has_column(std::string_view name) const noexcept;
  /// Throws MissingParameterError naming the available columns.
  [[nodiscard]] const Column& column(std::string_view name) const;
  [[nodiscard]] const std::vector<Column>& columns() const noexcept { return columns_; }
  /// Row index of `d`, or nullopt when outside the table.
  [[nodiscard]] std::optional<std::size_t> index_of(Date d) const;

  [[nodiscard]] DailyDataset with_column(Column c) const;
  /// Rows whose date falls inside `r`; throws ValidationError if `r` is not covered.
  [[nodiscard]] DailyDataset slice(const DateRange& r) const;

  bool operator==(const DailyDataset&) const = default;

 private:
  std::vector<Date> dates_;
  std::vector<Column> columns_;
};

/// Maps the physical quantities named in the study to POWER parameter codes.
/// Loaded from an editable CSV (`quantity,code`); `builtin()` mirrors the
/// shipped configs/parameters.csv.
class ParameterCatalog {
 public:
  struct Entry {
    std::string quantity;
    std::string code;
  };

  static ParameterCatalog builtin();
  static ParameterCatalog load(const std::filesystem::path& path);

  [[nodiscard]] const std::vector<Entry>& entries() const noexcept { return entries_; }
  [[nodiscard]] std::vector<std::string> codes() const;
  /// Code for a quantity name, or the input itself if it is already a known code.
  [[nodiscard]] std::string resolve(std::string_view quantity_or_code) const;

 private:
  std::vector<Entry> entries_;
};

/// Canonical request identity. Equal requests hash to the same key.
struct Request {
  GeoPoint point;
  DateRange range;
  std::vector<std::string> params;

  [[nodiscard]] std::string canonical() const;
  /// Hex SHA-256 of `canonical()`.
  [[nodiscard]] std::string key() const;
  [[nodiscard]] std::string url() const;
};

/// Minimal HTTP GET seam so tests and offline runs never touch the network.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  /// Returns the response body. Throws TransportError on failure.
  virtual std::string get(const std::string& url, const std::string& request_key) = 0;
};

std::unique_ptr<HttpTransport> make_curl_transport(long timeout_seconds = 60);

struct FetchOptions {
  std::filesystem::path cache_dir;
  bool offline{false};
  /// Borrowed; when null a curl transport is created on demand.
  HttpTransport* transport{nullptr};
};

/// Parses a POWER daily-point JSON payload. The -999 fill value (or the
/// payload's declared fill_value) becomes a missing entry.
DailyDataset parse_power_json(std::string_view payload, const Request& request);

/// Fetches (or serves from cache) the requested parameters for every day in
/// range. A cache hit never touches the network. On a miss the raw payload and
/// its CSV + JSON sidecar rendering are written atomically.
DailyDataset fetch_daily(const Request& request, const FetchOptions& options);

/// Path of the cached CSV for a request.
std::filesystem::path cache_csv_path(const std::filesystem::path& cache_dir, const Request& request);
std::filesystem::path cache_raw_path(const std::filesystem::path& cache_dir, const Request& request);

/// Writes `date,<code>...` CSV plus a `<path>.json` units sidecar, each via
/// write-then-rename.
void store_dataset(const DailyDataset& data, const std::filesystem::path& csv_path,
                   const std::optional<Request>& provenance = std::nullopt);

/// Reads the cache CSV schema (and the sidecar, if present, for units).
DailyDataset load_fixture(const std::filesystem::path& csv_path);

/// Start moved `lag_days` earlier; end unchanged.
DateRange extend_for_lag(const DateRange& range, int lag_days);

/// Writes `contents` to `path` through a temporary sibling and rename.
void atomic_write(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace qweather::ingest
