#include "lineval/timetable.hpp"

#include <algorithm>
#include <map>

#include "lineval/common.hpp"

namespace lineval::skim {

namespace {

// a departs/arrives no later than b at every stop.
bool dominates_below(const Timetable::TripTimes& a, const Timetable::TripTimes& b) {
  for (std::size_t i = 0; i < a.arrival_s.size(); ++i) {
    if (a.arrival_s[i] > b.arrival_s[i] || a.departure_s[i] > b.departure_s[i]) return false;
  }
  return true;
}

}  // namespace

int Timetable::stop_index(const std::string& stop_id) const {
  auto it = stop_index_.find(stop_id);
  return it == stop_index_.end() ? -1 : it->second;
}

Timetable Timetable::build(const gtfs::Feed& feed, gtfs::Weekday day) {
  Timetable tt;
  tt.stop_ids_.reserve(feed.stops.size());
  for (const auto& s : feed.stops) {
    tt.stop_index_[s.id] = static_cast<int>(tt.stop_ids_.size());
    tt.stop_ids_.push_back(s.id);
    tt.stop_lats_.push_back(s.lat);
    tt.stop_lons_.push_back(s.lon);
  }

  std::unordered_map<std::string, const gtfs::Service*> services;
  for (const auto& s : feed.services) services[s.id] = &s;

  // Stop times grouped per active trip, in sequence order (feed is canonical).
  std::unordered_map<std::string, std::vector<const gtfs::StopTime*>> trip_events;
  std::unordered_map<std::string, bool> trip_active;
  for (const auto& t : feed.trips) {
    const auto* svc = services.at(t.service_id);
    trip_active[t.id] = svc->weekdays[static_cast<int>(day)];
  }
  for (const auto& st : feed.stop_times) {
    auto it = trip_active.find(st.trip_id);
    if (it != trip_active.end() && it->second) trip_events[st.trip_id].push_back(&st);
  }

  // Group trips by exact stop pattern. std::map keys give a deterministic
  // line order independent of hash seeding.
  std::map<std::vector<int>, std::vector<TripTimes>> patterns;
  for (auto& [trip_id, events] : trip_events) {
    if (events.size() < 2) continue;
    std::vector<const gtfs::StopTime*> sorted = events;
    std::sort(sorted.begin(), sorted.end(),
              [](const gtfs::StopTime* a, const gtfs::StopTime* b) { return a->seq < b->seq; });
    std::vector<int> stops;
    TripTimes times;
    times.trip_id = trip_id;
    for (const auto* st : sorted) {
      stops.push_back(tt.stop_index_.at(st->stop_id));
      times.arrival_s.push_back(st->arrival_s);
      times.departure_s.push_back(st->departure_s);
      tt.horizon_s_ = std::max(tt.horizon_s_, st->arrival_s);
    }
    patterns[stops].push_back(std::move(times));
  }

  for (auto& [stops, trips] : patterns) {
    std::sort(trips.begin(), trips.end(), [](const TripTimes& a, const TripTimes& b) {
      if (a.departure_s[0] != b.departure_s[0]) return a.departure_s[0] < b.departure_s[0];
      return a.trip_id < b.trip_id;
    });
    // Greedy FIFO chain decomposition: each chain's trips are totally ordered,
    // so a binary search over departures at any stop is exact.
    std::vector<Line> chains;
    for (auto& trip : trips) {
      bool placed = false;
      for (auto& chain : chains) {
        if (dominates_below(chain.trips.back(), trip)) {
          chain.trips.push_back(std::move(trip));
          placed = true;
          break;
        }
      }
      if (!placed) {
        Line line;
        line.stops = stops;
        line.trips.push_back(std::move(trip));
        chains.push_back(std::move(line));
      }
    }
    for (auto& chain : chains) tt.lines_.push_back(std::move(chain));
  }

  tt.lines_at_stop_.assign(tt.stop_ids_.size(), {});
  for (int line = 0; line < static_cast<int>(tt.lines_.size()); ++line) {
    const auto& stops = tt.lines_[line].stops;
    for (int pos = 0; pos < static_cast<int>(stops.size()); ++pos) {
      tt.lines_at_stop_[stops[pos]].push_back({line, pos});
    }
  }
  return tt;
}

}  // namespace lineval::skim
