#ifndef LINEVAL_TESTS_ORACLE_HPP
#define LINEVAL_TESTS_ORACLE_HPP

// Independent journey-time oracle: Dijkstra over an explicit time-expanded
// state graph, used to cross-check the production router. Shares only the
// Timetable input representation, none of the search machinery.

#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <span>
#include <tuple>
#include <vector>

#include "lineval/router.hpp"
#include "lineval/timetable.hpp"

namespace oracle {

/// Minimum door-to-door seconds, or nullopt when unreachable. Journey rules
/// mirror the production definition: access walk, at most max_transfers+1
/// boardings, an optional single transfer walk after each alighting (no
/// chained walks), egress walk from any reached stop.
inline std::optional<int> best_total_time(const lineval::skim::Timetable& tt,
                                          const lineval::skim::FootpathTable& footpaths,
                                          std::span<const lineval::skim::AccessLink> origin,
                                          std::span<const lineval::skim::AccessLink> destination,
                                          int depart_s, int max_transfers) {
  const int max_boardings = max_transfers + 1;

  // Flattened trip legs.
  struct Leg {
    int from_stop, to_stop, dep_s, arr_s;
    int trip_first;  // index of the trip's first leg (to chain ride edges)
    int leg_index;   // position within the trip
    int trip_legs;   // number of legs in the trip
  };
  std::vector<Leg> legs;
  std::vector<std::vector<int>> legs_at_stop(tt.stop_count());
  for (const auto& line : tt.lines()) {
    for (const auto& trip : line.trips) {
      const int first = static_cast<int>(legs.size());
      const int n = static_cast<int>(line.stops.size()) - 1;
      for (int i = 0; i < n; ++i) {
        legs.push_back({line.stops[i], line.stops[i + 1], trip.departure_s[i],
                        trip.arrival_s[i + 1], first, i, n});
        legs_at_stop[line.stops[i]].push_back(static_cast<int>(legs.size()) - 1);
      }
    }
  }

  // State = stop-state (stop, boardings, alighted) or riding-state (leg, boardings).
  // Dijkstra keyed on current time.
  constexpr int kInf = std::numeric_limits<int>::max() / 4;
  const int stop_states = tt.stop_count() * (max_boardings + 1) * 2;
  auto stop_state = [&](int stop, int boardings, bool alighted) {
    return (stop * (max_boardings + 1) + boardings) * 2 + (alighted ? 1 : 0);
  };
  auto ride_state = [&](int leg, int boardings) {
    return stop_states + leg * (max_boardings + 1) + boardings;
  };
  std::vector<int> best(stop_states + legs.size() * (max_boardings + 1), kInf);

  using Item = std::pair<int, int>;  // (time, state)
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> queue;
  auto push = [&](int state, int time) {
    if (time < best[state]) {
      best[state] = time;
      queue.push({time, state});
    }
  };

  std::vector<int> egress_walk(tt.stop_count(), -1);
  for (const auto& link : destination) egress_walk[link.stop] = link.walk_s;

  for (const auto& link : origin) push(stop_state(link.stop, 0, false), depart_s + link.walk_s);

  int best_arrival = kInf;
  while (!queue.empty()) {
    auto [time, state] = queue.top();
    queue.pop();
    if (time != best[state]) continue;

    if (state < stop_states) {
      const bool alighted = state % 2 != 0;
      const int boardings = (state / 2) % (max_boardings + 1);
      const int stop = state / 2 / (max_boardings + 1);

      if (egress_walk[stop] >= 0) best_arrival = std::min(best_arrival, time + egress_walk[stop]);

      if (boardings < max_boardings) {
        for (int leg : legs_at_stop[stop]) {
          if (legs[leg].dep_s >= time) push(ride_state(leg, boardings + 1), legs[leg].dep_s);
        }
      }
      if (alighted) {
        for (const auto& path : footpaths[stop]) {
          push(stop_state(path.stop, boardings, false), time + path.walk_s);
        }
      }
    } else {
      const int idx = state - stop_states;
      const int boardings = idx % (max_boardings + 1);
      const int leg = idx / (max_boardings + 1);
      const Leg& l = legs[leg];
      push(stop_state(l.to_stop, boardings, true), l.arr_s);
      if (l.leg_index + 1 < l.trip_legs) {
        const Leg& next = legs[leg + 1];
        if (next.dep_s >= l.arr_s) push(ride_state(leg + 1, boardings), next.dep_s);
      }
    }
  }

  if (best_arrival >= kInf) return std::nullopt;
  return best_arrival - depart_s;
}

}  // namespace oracle

#endif  // LINEVAL_TESTS_ORACLE_HPP
