#include "lineval/router.hpp"

#include <algorithm>
#include <limits>

namespace lineval::skim {

namespace {

constexpr int kInf = std::numeric_limits<int>::max() / 4;
const FootpathTable kNoFootpaths;

}  // namespace

Router::Router(const Timetable& tt, const FootpathTable& footpaths, int max_transfers)
    : tt_(tt), footpaths_(&footpaths), max_transfers_(max_transfers) {
  const int rounds = max_transfers_ + 2;  // rounds_[k] = labels after <= k boardings
  rounds_.assign(rounds, std::vector<Label>(tt_.stop_count()));
  best_arrival_.assign(tt_.stop_count(), kInf);
  is_marked_.assign(tt_.stop_count(), 0);
}

Router::Router(const Timetable& tt, int max_transfers)
    : Router(tt, kNoFootpaths, max_transfers) {}

void Router::mark(int stop) {
  if (!is_marked_[stop]) {
    is_marked_[stop] = 1;
    marked_.push_back(stop);
  }
}

void Router::run(std::span<const AccessLink> origin, int depart_s) {
  depart_s_ = depart_s;
  const Label unreached{kInf, Via::Access, -1, 0, -1, -1};
  for (auto& round : rounds_) std::fill(round.begin(), round.end(), unreached);
  std::fill(best_arrival_.begin(), best_arrival_.end(), kInf);

  marked_.clear();
  std::fill(is_marked_.begin(), is_marked_.end(), 0);
  for (const auto& link : origin) {
    const int arr = depart_s + link.walk_s;
    Label& l0 = rounds_[0][link.stop];
    if (arr < l0.arrival_s) {
      l0 = Label{arr, Via::Access, -1, 0, -1, -1};
      best_arrival_[link.stop] = arr;
      mark(link.stop);
    }
  }

  // line index -> earliest marked position on that line this round
  std::vector<int> line_min_pos(tt_.lines().size(), -1);
  std::vector<int> touched_lines;

  const int max_rounds = static_cast<int>(rounds_.size()) - 1;
  for (int k = 1; k <= max_rounds && !marked_.empty(); ++k) {
    rounds_[k] = rounds_[k - 1];  // inherit: label k = best with <= k boardings

    touched_lines.clear();
    for (int stop : marked_) {
      for (const auto& ref : tt_.lines_at_stop()[stop]) {
        if (line_min_pos[ref.line] < 0) {
          line_min_pos[ref.line] = ref.position;
          touched_lines.push_back(ref.line);
        } else {
          line_min_pos[ref.line] = std::min(line_min_pos[ref.line], ref.position);
        }
      }
      is_marked_[stop] = 0;
    }
    marked_.clear();
    std::sort(touched_lines.begin(), touched_lines.end());

    for (int line_idx : touched_lines) {
      const auto& line = tt_.lines()[line_idx];
      const int start_pos = line_min_pos[line_idx];
      line_min_pos[line_idx] = -1;

      int active_trip = -1;
      int board_pos = -1;
      const int n_pos = static_cast<int>(line.stops.size());
      for (int pos = start_pos; pos < n_pos; ++pos) {
        const int stop = line.stops[pos];

        if (active_trip >= 0 && pos > board_pos) {
          const int arr = line.trips[active_trip].arrival_s[pos];
          if (arr < rounds_[k][stop].arrival_s) {
            rounds_[k][stop] = Label{arr, Via::Ride, line.stops[board_pos],
                                     line.trips[active_trip].departure_s[board_pos], line_idx,
                                     active_trip};
            if (arr < best_arrival_[stop]) best_arrival_[stop] = arr;
            mark(stop);
          }
        }

        // Hop on the earliest catchable trip; a later stop may allow an
        // earlier trip than the one currently ridden.
        const int ready = rounds_[k - 1][stop].arrival_s;
        if (ready < kInf && pos + 1 < n_pos) {
          const auto& trips = line.trips;
          int lo = 0, hi = static_cast<int>(trips.size());
          while (lo < hi) {  // first trip departing at/after `ready`
            const int mid = (lo + hi) / 2;
            if (trips[mid].departure_s[pos] >= ready) hi = mid;
            else lo = mid + 1;
          }
          if (lo < static_cast<int>(trips.size()) && (active_trip < 0 || lo < active_trip)) {
            active_trip = lo;
            board_pos = pos;
          }
        }
      }
    }

    // One-hop transfer walks from this round's alightings. Sources are
    // snapshotted first so walks cannot chain; the Foot label carries its
    // ride parent so later overwrites of the source stop cannot corrupt
    // reconstruction.
    if (!footpaths_->empty()) {
      foot_sources_.clear();
      for (int stop : marked_) {
        if (rounds_[k][stop].via == Via::Ride) foot_sources_.push_back(stop);
      }
      std::sort(foot_sources_.begin(), foot_sources_.end());
      foot_labels_.clear();
      for (int from : foot_sources_) foot_labels_.push_back(rounds_[k][from]);
      for (std::size_t i = 0; i < foot_sources_.size(); ++i) {
        const Label& src = foot_labels_[i];
        for (const auto& path : (*footpaths_)[foot_sources_[i]]) {
          const int arr = src.arrival_s + path.walk_s;
          if (arr < rounds_[k][path.stop].arrival_s) {
            rounds_[k][path.stop] =
                Label{arr, Via::Foot, src.from_stop, src.board_dep_s, src.line, src.trip};
            if (arr < best_arrival_[path.stop]) best_arrival_[path.stop] = arr;
            mark(path.stop);
          }
        }
      }
    }
  }
}

std::vector<std::string> Router::trip_chain(int round, int stop) const {
  // Foot labels embed their ride parent, so both kinds step the same way.
  std::vector<std::string> chain;
  int k = round, s = stop;
  while (k >= 0) {
    const Label& l = rounds_[k][s];
    if (l.via == Via::Access) break;
    chain.push_back(tt_.lines()[l.line].trips[l.trip].trip_id);
    s = l.from_stop;
    --k;
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

std::optional<Journey> Router::extract(std::span<const AccessLink> destination) const {
  struct Candidate {
    int total_s;
    int transfers;
    int final_arrival_s;
    std::vector<std::string> chain;
    int stop;
    int round;
    int egress_s;
  };
  std::optional<Candidate> best;

  auto consider = [&](Candidate cand) {
    if (!best) {
      best = std::move(cand);
      return;
    }
    const Candidate& b = *best;
    if (cand.total_s != b.total_s) {
      if (cand.total_s < b.total_s) best = std::move(cand);
      return;
    }
    if (cand.transfers != b.transfers) {
      if (cand.transfers < b.transfers) best = std::move(cand);
      return;
    }
    if (cand.final_arrival_s != b.final_arrival_s) {
      if (cand.final_arrival_s < b.final_arrival_s) best = std::move(cand);
      return;
    }
    if (cand.chain != b.chain) {
      if (cand.chain < b.chain) best = std::move(cand);
      return;
    }
    if (cand.stop < b.stop) best = std::move(cand);
  };

  for (const auto& link : destination) {
    for (int k = 0; k < static_cast<int>(rounds_.size()); ++k) {
      const Label& l = rounds_[k][link.stop];
      if (l.arrival_s >= kInf) continue;
      Candidate cand;
      cand.chain = trip_chain(k, link.stop);
      cand.transfers = cand.chain.empty() ? 0 : static_cast<int>(cand.chain.size()) - 1;
      cand.total_s = l.arrival_s + link.walk_s - depart_s_;
      cand.final_arrival_s = l.arrival_s;
      cand.stop = link.stop;
      cand.round = k;
      cand.egress_s = link.walk_s;
      consider(std::move(cand));
    }
  }

  if (!best) return std::nullopt;

  Journey j;
  j.egress_s = best->egress_s;
  j.transfers = best->transfers;
  j.total_s = best->total_s;
  if (best->chain.empty()) {
    // Walk-only: the whole pre-egress span is access.
    j.access_s = best->final_arrival_s - depart_s_;
    j.ivt_s = 0;
  } else {
    // First boarding departure bounds access (walk + initial wait).
    int k = best->round, s = best->stop;
    int first_board_dep = 0;
    while (k >= 0) {
      const Label& l = rounds_[k][s];
      if (l.via == Via::Access) break;
      first_board_dep = l.board_dep_s;
      s = l.from_stop;
      --k;
    }
    j.access_s = first_board_dep - depart_s_;
    j.ivt_s = best->final_arrival_s - first_board_dep;
  }
  return j;
}

std::optional<Journey> Router::plan(std::span<const AccessLink> origin,
                                    std::span<const AccessLink> destination, int depart_s) {
  run(origin, depart_s);
  return extract(destination);
}

}  // namespace lineval::skim
