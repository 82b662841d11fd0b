// Copyright 2026 The bevroute Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "bevroute/route_model.hpp"

namespace bevroute {

struct EndpointConfig {
  std::string primary_base_url = "http://localhost:8002";
  std::string fallback_base_url = "https://valhalla1.openstreetmap.de";
  std::size_t batch_size = 100;
  std::size_t max_parallel_requests = 4;
  double timeout_s = 30.0;
  int retry_count = 2;

  void validate() const;
};

// Environment variables that replace the configured base URLs when set.
inline constexpr const char* kPrimaryUrlEnv = "BEVROUTE_VALHALLA_URL";
inline constexpr const char* kFallbackUrlEnv = "BEVROUTE_VALHALLA_FALLBACK_URL";

EndpointConfig apply_env_overrides(EndpointConfig cfg);

enum class AttributeService { Locate, TraceAttributes, Height };

// "/locate", "/trace_attributes" or "/height".
std::string_view endpoint_path(AttributeService service) noexcept;

// One location's attributes as returned by a map service. Nested response
// objects are flattened into dotted keys ("edge.classification.link"); keys
// the merger does not know are kept as-is.
struct RawAttributeRecord {
  double lat = 0.0;
  double lon = 0.0;
  nlohmann::json attributes = nlohmann::json::object();
};

struct FetchDiagnostics {
  std::size_t batches = 0;
  std::size_t requests = 0;
  std::size_t primary_failures = 0;
  std::size_t fallback_batches = 0;
  std::vector<std::string> notes;
};

struct FetchResult {
  std::vector<RawAttributeRecord> records;  // one per input point, same order
  FetchDiagnostics diagnostics;
};

// A source of per-point map attributes.
class AttributeProvider {
 public:
  virtual ~AttributeProvider() = default;
  virtual FetchResult fetch(std::span<const GeoPoint> points, AttributeService service) const = 0;
};

// Splits the points into batches of cfg.batch_size and issues up to
// cfg.max_parallel_requests concurrent POSTs. Each batch gets
// retry_count + 1 attempts on the primary endpoint, then the same on the
// fallback. Blocks until every batch has settled.
FetchResult fetch_attributes(std::span<const GeoPoint> points, AttributeService service,
                             const EndpointConfig& cfg);

class ValhallaClient final : public AttributeProvider {
 public:
  explicit ValhallaClient(EndpointConfig cfg);
  FetchResult fetch(std::span<const GeoPoint> points, AttributeService service) const override;
  const EndpointConfig& config() const noexcept { return cfg_; }

 private:
  EndpointConfig cfg_;
};

// Network-free provider backed by a JSON array of records:
//   [{"lat": .., "lon": .., "attributes": {...}}, ...]
// Every query point receives the attributes of the nearest fixture record
// (which must lie within match_tolerance_m) with the query coordinates.
// The same attributes are served for all three services.
class FixtureProvider final : public AttributeProvider {
 public:
  explicit FixtureProvider(const std::filesystem::path& path, double match_tolerance_m = 25.0);
  FixtureProvider(std::vector<RawAttributeRecord> records, double match_tolerance_m = 25.0);

  FetchResult fetch(std::span<const GeoPoint> points, AttributeService service) const override;
  const std::vector<RawAttributeRecord>& records() const noexcept { return records_; }

 private:
  std::vector<RawAttributeRecord> records_;
  double tolerance_;
};

std::vector<RawAttributeRecord> parse_attribute_records(std::string_view document);
nlohmann::json flatten_json(const nlohmann::json& object);

// Request bodies and response decoding for the three Valhalla services.
nlohmann::json build_request_body(std::span<const GeoPoint> points, AttributeService service);
std::vector<RawAttributeRecord> decode_response(const nlohmann::json& response,
                                                std::span<const GeoPoint> points, AttributeService service);

struct MergedFeatures {
  std::vector<FeatureNode> nodes;
  // Count of records per filled-in field, e.g. {"speed_limit": 3}.
  std::map<std::string, std::size_t> defaults_applied;
};

// Combines the three per-point record streams into road features. Speeds
// arrive in km/h and are converted to m/s. When arc_lengths is empty, arc
// length is accumulated along the record coordinates. The locate and height
// streams may be empty.
MergedFeatures merge_attribute_responses(std::span<const RawAttributeRecord> locate,
                                         std::span<const RawAttributeRecord> trace,
                                         std::span<const RawAttributeRecord> height,
                                         std::span<const double> arc_lengths = {});

}  // namespace bevroute
