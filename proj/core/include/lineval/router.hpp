#ifndef LINEVAL_ROUTER_HPP
#define LINEVAL_ROUTER_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lineval/timetable.hpp"

namespace lineval::skim {

/// Zone-to-stop connector. Walk time is whole seconds.
struct AccessLink {
  int stop = -1;
  int walk_s = 0;
};

/// Stop-to-stop transfer walks, indexed by origin stop. A journey may take
/// one transfer walk after alighting (between rides or before egress);
/// transfer walks do not chain.
using FootpathTable = std::vector<std::vector<AccessLink>>;

/// Door-to-door journey between zone centroids. Initial wait is folded into
/// access; transfer wait and transfer walk into in-vehicle time, so
/// total == access + ivt + egress always holds.
struct Journey {
  int access_s = 0;
  int ivt_s = 0;
  int egress_s = 0;
  int transfers = 0;
  int total_s = 0;
};

/// RAPTOR-style label correction over transfer rounds. One instance holds the
/// scratch state for a single worker; the shared Timetable and footpaths are
/// read-only.
///
/// run() computes labels from one origin and departure; extract() then reads
/// the optimum for any destination link set. The optimum minimizes total
/// door-to-door time, breaking ties by fewer transfers, earlier arrival at
/// the final stop, then the lexicographically smallest trip-id sequence.
class Router {
 public:
  Router(const Timetable& tt, const FootpathTable& footpaths, int max_transfers = 4);
  explicit Router(const Timetable& tt, int max_transfers = 4);

  void run(std::span<const AccessLink> origin, int depart_s);
  std::optional<Journey> extract(std::span<const AccessLink> destination) const;

  std::optional<Journey> plan(std::span<const AccessLink> origin,
                              std::span<const AccessLink> destination, int depart_s);

  int max_transfers() const { return max_transfers_; }

 private:
  enum class Via : char { Access, Ride, Foot };

  // Foot labels embed their ride parent outright (boarding stop, trip and
  // departure), so reconstruction never dereferences a source label that a
  // later relaxation may have replaced.
  struct Label {
    int arrival_s;
    Via via;
    int from_stop;    // boarding stop of the (embedded) ride
    int board_dep_s;  // departure time of that boarding
    int line;
    int trip;
  };

  std::vector<std::string> trip_chain(int round, int stop) const;
  void mark(int stop);

  const Timetable& tt_;
  const FootpathTable* footpaths_;
  int max_transfers_;
  int depart_s_ = 0;
  std::vector<std::vector<Label>> rounds_;  // rounds_[k][stop], k = boardings
  std::vector<int> best_arrival_;
  std::vector<int> marked_;
  std::vector<char> is_marked_;
  std::vector<int> foot_sources_;   // stops ride-improved this round
  std::vector<Label> foot_labels_;  // their labels, snapshotted pre-relaxation
};

}  // namespace lineval::skim

#endif  // LINEVAL_ROUTER_HPP
