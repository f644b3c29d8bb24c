#include "stes/geo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace stes {

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
    constexpr double deg = M_PI / 180.0;
    const double phi1 = lat1 * deg;
    const double phi2 = lat2 * deg;
    const double dphi = (lat2 - lat1) * deg;
    const double dlam = (lon2 - lon1) * deg;
    const double s1 = std::sin(dphi / 2);
    const double s2 = std::sin(dlam / 2);
    const double a = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

double haversine_km(const GeoPoint& a, const GeoPoint& b) {
    return haversine_km(a.lat, a.lon, b.lat, b.lon);
}

void NeighborhoodPolygon::compute_bbox() {
    min_lat = min_lon = 1e300;
    max_lat = max_lon = -1e300;
    for (const auto& ring : rings) {
        for (size_t i = 0; i < ring.lats.size(); ++i) {
            min_lat = std::min(min_lat, ring.lats[i]);
            max_lat = std::max(max_lat, ring.lats[i]);
            min_lon = std::min(min_lon, ring.lons[i]);
            max_lon = std::max(max_lon, ring.lons[i]);
        }
    }
}

bool NeighborhoodPolygon::contains(double lat, double lon) const {
    if (lat < min_lat || lat > max_lat || lon < min_lon || lon > max_lon) return false;
    bool inside = false;
    for (const auto& ring : rings) {
        const size_t n = ring.lats.size();
        for (size_t i = 0, j = n - 1; i < n; j = i++) {
            const double yi = ring.lats[i], xi = ring.lons[i];
            const double yj = ring.lats[j], xj = ring.lons[j];
            if ((yi > lat) != (yj > lat)) {
                const double x_cross = xj + (lat - yj) / (yi - yj) * (xi - xj);
                if (lon < x_cross) inside = !inside;
            }
        }
    }
    return inside;
}

namespace {

PolygonRing ring_from_json(const nlohmann::json& coords) {
    PolygonRing ring;
    ring.lons.reserve(coords.size());
    ring.lats.reserve(coords.size());
    for (const auto& pt : coords) {
        ring.lons.push_back(pt.at(0).get<double>());
        ring.lats.push_back(pt.at(1).get<double>());
    }
    if (!ring.lons.empty() &&
        (ring.lons.front() != ring.lons.back() || ring.lats.front() != ring.lats.back())) {
        throw std::runtime_error("polygon ring is not closed");
    }
    return ring;
}

}  // namespace

NeighborhoodMap NeighborhoodMap::from_geojson_file(const std::string& path,
                                                   const std::string& id_property) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open GeoJSON file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_geojson_text(buf.str(), id_property);
}

NeighborhoodMap NeighborhoodMap::from_geojson_text(const std::string& text,
                                                   const std::string& id_property) {
    nlohmann::json doc = nlohmann::json::parse(text);
    if (doc.value("type", "") != "FeatureCollection") {
        throw std::runtime_error("GeoJSON root is not a FeatureCollection");
    }
    NeighborhoodMap map;
    for (const auto& feature : doc.at("features")) {
        const auto& props = feature.at("properties");
        if (!props.contains(id_property)) {
            throw std::runtime_error("feature lacks id property '" + id_property + "'");
        }
        std::string id = props.at(id_property).is_string()
                             ? props.at(id_property).get<std::string>()
                             : props.at(id_property).dump();
        const auto& geom = feature.at("geometry");
        const std::string gtype = geom.value("type", "");
        const auto& coords = geom.at("coordinates");
        if (gtype == "Polygon") {
            NeighborhoodPolygon poly;
            poly.id = id;
            for (const auto& ring : coords) poly.rings.push_back(ring_from_json(ring));
            poly.compute_bbox();
            map.add(std::move(poly));
        } else if (gtype == "MultiPolygon") {
            // One lookup id, several disjoint parts: keep all rings together,
            // even-odd containment still works per part.
            NeighborhoodPolygon poly;
            poly.id = id;
            for (const auto& part : coords) {
                for (const auto& ring : part) poly.rings.push_back(ring_from_json(ring));
            }
            poly.compute_bbox();
            map.add(std::move(poly));
        } else {
            throw std::runtime_error("unsupported geometry type: " + gtype);
        }
    }
    map.build_index();
    return map;
}

void NeighborhoodMap::add(NeighborhoodPolygon polygon) {
    polygons_.push_back(std::move(polygon));
    indexed_ = false;
}

void NeighborhoodMap::build_index() {
    if (polygons_.empty()) {
        indexed_ = true;
        return;
    }
    double min_lat = 1e300, max_lat = -1e300, min_lon = 1e300, max_lon = -1e300;
    for (const auto& p : polygons_) {
        min_lat = std::min(min_lat, p.min_lat);
        max_lat = std::max(max_lat, p.max_lat);
        min_lon = std::min(min_lon, p.min_lon);
        max_lon = std::max(max_lon, p.max_lon);
    }
    const int target = static_cast<int>(std::sqrt(static_cast<double>(polygons_.size()))) + 1;
    grid_w_ = std::clamp(target, 1, 256);
    grid_h_ = grid_w_;
    origin_lat_ = min_lat;
    origin_lon_ = min_lon;
    cell_lat_ = (max_lat - min_lat) / grid_h_;
    cell_lon_ = (max_lon - min_lon) / grid_w_;
    if (cell_lat_ <= 0) cell_lat_ = 1e-9;
    if (cell_lon_ <= 0) cell_lon_ = 1e-9;
    cells_.assign(static_cast<size_t>(grid_w_) * grid_h_, {});
    for (int idx = 0; idx < static_cast<int>(polygons_.size()); ++idx) {
        const auto& p = polygons_[idx];
        const int x0 = std::clamp(static_cast<int>((p.min_lon - origin_lon_) / cell_lon_), 0, grid_w_ - 1);
        const int x1 = std::clamp(static_cast<int>((p.max_lon - origin_lon_) / cell_lon_), 0, grid_w_ - 1);
        const int y0 = std::clamp(static_cast<int>((p.min_lat - origin_lat_) / cell_lat_), 0, grid_h_ - 1);
        const int y1 = std::clamp(static_cast<int>((p.max_lat - origin_lat_) / cell_lat_), 0, grid_h_ - 1);
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                cells_[static_cast<size_t>(y) * grid_w_ + x].push_back(idx);
            }
        }
    }
    indexed_ = true;
}

std::optional<std::string> NeighborhoodMap::lookup(double lat, double lon) const {
    if (polygons_.empty()) return std::nullopt;
    if (indexed_) {
        const int x = static_cast<int>((lon - origin_lon_) / cell_lon_);
        const int y = static_cast<int>((lat - origin_lat_) / cell_lat_);
        if (x < 0 || x >= grid_w_ || y < 0 || y >= grid_h_) return std::nullopt;
        const auto& candidates = cells_[static_cast<size_t>(y) * grid_w_ + x];
        // Candidate lists preserve file order, so first match wins.
        for (int idx : candidates) {
            if (polygons_[idx].contains(lat, lon)) return polygons_[idx].id;
        }
        return std::nullopt;
    }
    for (const auto& p : polygons_) {
        if (p.contains(lat, lon)) return p.id;
    }
    return std::nullopt;
}

std::string NeighborhoodMap::to_geojson(
    const std::vector<std::pair<std::string, int>>& cluster_of) const {
    nlohmann::json features = nlohmann::json::array();
    auto cluster_for = [&](const std::string& id) -> nlohmann::json {
        for (const auto& [nid, c] : cluster_of) {
            if (nid == id) return c;
        }
        return nullptr;
    };
    for (const auto& p : polygons_) {
        nlohmann::json rings = nlohmann::json::array();
        for (const auto& ring : p.rings) {
            nlohmann::json pts = nlohmann::json::array();
            for (size_t i = 0; i < ring.lats.size(); ++i) {
                pts.push_back({ring.lons[i], ring.lats[i]});
            }
            rings.push_back(std::move(pts));
        }
        nlohmann::json feature = {
            {"type", "Feature"},
            {"properties", {{"GEOID", p.id}, {"cluster", cluster_for(p.id)}}},
            {"geometry", {{"type", "Polygon"}, {"coordinates", std::move(rings)}}},
        };
        features.push_back(std::move(feature));
    }
    nlohmann::json doc = {{"type", "FeatureCollection"}, {"features", std::move(features)}};
    return doc.dump();
}

}  // namespace stes
