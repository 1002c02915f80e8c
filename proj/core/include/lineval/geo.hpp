#ifndef LINEVAL_GEO_HPP
#define LINEVAL_GEO_HPP

#include <cmath>

namespace lineval::geo {

inline constexpr double kEarthRadiusM = 6371000.0;
inline constexpr double kPi = 3.14159265358979323846;

/// Great-circle distance in meters between two (lat, lon) points in degrees.
inline double haversine_m(double lat1, double lon1, double lat2, double lon2) {
  const double rad = kPi / 180.0;
  const double dlat = (lat2 - lat1) * rad;
  const double dlon = (lon2 - lon1) * rad;
  const double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(lat1 * rad) * std::cos(lat2 * rad) * std::sin(dlon / 2) *
                       std::sin(dlon / 2);
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(a)));
}

}  // namespace lineval::geo

#endif  // LINEVAL_GEO_HPP
