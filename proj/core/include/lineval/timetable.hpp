#ifndef LINEVAL_TIMETABLE_HPP
#define LINEVAL_TIMETABLE_HPP

#include <string>
#include <unordered_map>
#include <vector>

#include "lineval/gtfs.hpp"

namespace lineval::skim {

/// Router-facing view of a Feed for one service day. Trips active on the
/// given weekday are grouped by stop pattern; each pattern is split into
/// FIFO chains so that "earliest catchable trip" scans are exact even when
/// the feed contains overtaking trips. Immutable once built.
class Timetable {
 public:
  struct TripTimes {
    std::string trip_id;
    std::vector<int> arrival_s;    // one per pattern stop
    std::vector<int> departure_s;
  };

  /// A maximal FIFO chain of same-pattern trips, sorted by departure.
  struct Line {
    std::vector<int> stops;          // stop indices along the line
    std::vector<TripTimes> trips;
  };

  struct StopRef {
    int line = 0;
    int position = 0;  // index into Line::stops
  };

  static Timetable build(const gtfs::Feed& feed, gtfs::Weekday day);

  int stop_count() const { return static_cast<int>(stop_ids_.size()); }
  int stop_index(const std::string& stop_id) const;  // -1 when absent
  const std::string& stop_id(int index) const { return stop_ids_[index]; }
  const std::vector<double>& stop_lats() const { return stop_lats_; }
  const std::vector<double>& stop_lons() const { return stop_lons_; }

  const std::vector<Line>& lines() const { return lines_; }
  const std::vector<std::vector<StopRef>>& lines_at_stop() const { return lines_at_stop_; }

  /// Latest event time in the timetable; journeys cannot arrive later.
  int horizon_s() const { return horizon_s_; }

 private:
  std::vector<std::string> stop_ids_;
  std::vector<double> stop_lats_, stop_lons_;
  std::unordered_map<std::string, int> stop_index_;
  std::vector<Line> lines_;
  std::vector<std::vector<StopRef>> lines_at_stop_;
  int horizon_s_ = 0;
};

}  // namespace lineval::skim

#endif  // LINEVAL_TIMETABLE_HPP
