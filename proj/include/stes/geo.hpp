#pragma once

#include <optional>
#include <string>
#include <vector>

namespace stes {

inline constexpr double kEarthRadiusKm = 6371.0088;

struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;
};

// Great-circle distance in km.
double haversine_km(double lat1, double lon1, double lat2, double lon2);
double haversine_km(const GeoPoint& a, const GeoPoint& b);

// A ring is a closed sequence of (lon, lat) vertices; first ring is the outer
// boundary, the rest are holes (even-odd rule makes the distinction moot).
struct PolygonRing {
    std::vector<double> lons;
    std::vector<double> lats;
};

struct NeighborhoodPolygon {
    std::string id;
    std::vector<PolygonRing> rings;
    double min_lat = 0.0, max_lat = 0.0, min_lon = 0.0, max_lon = 0.0;

    void compute_bbox();
    bool contains(double lat, double lon) const;  // even-odd ray casting
};

// Polygon set with point lookup. Overlaps resolve to the first polygon in
// file order.
class NeighborhoodMap {
public:
    static NeighborhoodMap from_geojson_file(const std::string& path,
                                             const std::string& id_property = "GEOID");
    static NeighborhoodMap from_geojson_text(const std::string& text,
                                             const std::string& id_property = "GEOID");

    void add(NeighborhoodPolygon polygon);
    void build_index();

    std::optional<std::string> lookup(double lat, double lon) const;
    size_t size() const { return polygons_.size(); }
    const std::vector<NeighborhoodPolygon>& polygons() const { return polygons_; }

    std::string to_geojson(const std::vector<std::pair<std::string, int>>& cluster_of) const;

private:
    std::vector<NeighborhoodPolygon> polygons_;
    // Uniform grid over the overall bbox; cells list candidate polygon indices.
    int grid_w_ = 0, grid_h_ = 0;
    double cell_lat_ = 0.0, cell_lon_ = 0.0;
    double origin_lat_ = 0.0, origin_lon_ = 0.0;
    std::vector<std::vector<int>> cells_;
    bool indexed_ = false;
};

}  // namespace stes
