#pragma once

#include "radalloc/allocation.hpp"
#include "radalloc/geometry.hpp"
#include "radalloc/ids.hpp"
#include "radalloc/tracking.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <vector>

namespace radalloc {

enum class Round { kMain, kOptional };

// A new bid must clear the standing one by more than this; exact ties go
// to the lower radar id. Keeps floating-point noise from causing bid
// oscillation.
inline constexpr double kBidTolerance = 1e-9;

// "Never heard from" timestamp, older than any reachable step.
inline constexpr long kNever = -1000000000L;

inline bool bid_beats(double y_new, RadarId id_new, double y_old,
                      RadarId id_old) {
  if (y_new > y_old + kBidTolerance) return true;
  if (y_new < y_old - kBidTolerance) return false;
  return id_old != kNoRadar && id_new < id_old;
}

namespace detail {

template <typename K, typename V>
V get_or(const std::map<K, V>& m, const K& key, V fallback) {
  auto it = m.find(key);
  return it == m.end() ? fallback : it->second;
}

}  // namespace detail

// One radar's auction knowledge for one round: the winning-bid vector Y,
// the winner vector Z, per-peer contact times S, the winning main ellipses
// E (main round only) and the radar's own ordered bundle.
struct BeliefState {
  Round round = Round::kMain;
  std::map<TargetId, double> y;
  std::map<TargetId, RadarId> z;
  std::map<RadarId, long> s;
  std::map<TargetId, Ellipse> e;
  std::vector<TargetId> bundle;
  std::map<TargetId, double> path_utilities;  // bids this radar placed

  double winning_bid(TargetId j) const { return detail::get_or(y, j, 0.0); }
  RadarId winner(TargetId j) const { return detail::get_or(z, j, kNoRadar); }
  long contact(RadarId k) const { return detail::get_or(s, k, kNever); }
  bool in_bundle(TargetId j) const {
    return std::find(bundle.begin(), bundle.end(), j) != bundle.end();
  }

  void ensure_known(TargetId j) {
    y.try_emplace(j, 0.0);
    z.try_emplace(j, kNoRadar);
  }

  void clear_claim(TargetId j) {
    y[j] = 0.0;
    z[j] = kNoRadar;
    e.erase(j);
    path_utilities.erase(j);
  }

  // Drops every claim this radar holds and empties the bundle; bids are
  // then re-placed from fresh utilities, which is what lets a bid decrease
  // as a target moves away.
  void clear_own_claims(RadarId self) {
    for (auto& [j, winner_id] : z) {
      if (winner_id == self) {
        clear_claim(j);
      }
    }
    bundle.clear();
    path_utilities.clear();
  }

  void forget_target(TargetId j) {
    y.erase(j);
    z.erase(j);
    e.erase(j);
    path_utilities.erase(j);
    bundle.erase(std::remove(bundle.begin(), bundle.end(), j), bundle.end());
  }

  double bundle_cost(double gamma) const {
    return gamma * static_cast<double>(bundle.size());
  }
};

// Wire payload: the sender's post-consensus knowledge for one round.
// Main-round messages also carry the winning ellipses.
struct CbbaMessage {
  RadarId sender = kNoRadar;
  long send_time = 0;
  Round round = Round::kMain;
  std::map<TargetId, double> y;
  std::map<TargetId, RadarId> z;
  std::map<RadarId, long> s;
  std::map<TargetId, Ellipse> e;
};

inline CbbaMessage make_message(const BeliefState& belief, RadarId sender,
                                long now) {
  CbbaMessage msg;
  msg.sender = sender;
  msg.send_time = now;
  msg.round = belief.round;
  msg.y = belief.y;
  msg.z = belief.z;
  msg.s = belief.s;
  msg.s[sender] = now;
  if (belief.round == Round::kMain) {
    msg.e = belief.e;
  }
  return msg;
}

// Conflict-resolution step for one received message: the canonical CBBA
// action table keyed on (sender's winner, receiver's winner), with the
// timestamp vectors deciding staleness for third-party claims. Targets the
// receiver never heard of are created. Losing a bundle task releases it
// and every later bundle entry, since their scores assumed the earlier
// bundle content.
inline BeliefState consensus_update(BeliefState belief, const CbbaMessage& msg,
                                    RadarId self, long now) {
  if (msg.round != belief.round) {
    throw std::invalid_argument("consensus_update: round mismatch");
  }
  if (msg.sender == self) {
    return belief;
  }
  const RadarId k = msg.sender;

  enum class Action { kLeave, kUpdate, kReset };
  std::vector<TargetId> lost;

  for (const auto& [j, zk] : msg.z) {
    // An unclaimed entry about a target we never heard of carries no
    // information; creating it would keep forgotten targets alive.
    if (zk == kNoRadar && belief.y.count(j) == 0) continue;
    belief.ensure_known(j);
    const double yk = detail::get_or(msg.y, j, 0.0);
    const double yi = belief.winning_bid(j);
    const RadarId zi = belief.winner(j);

    // True when the sender's last contact with `about` is fresher than ours.
    auto sender_newer = [&](RadarId about) {
      return detail::get_or(msg.s, about, kNever) > belief.contact(about);
    };

    Action action = Action::kLeave;
    if (zk == k) {
      if (zi == self) {
        if (bid_beats(yk, k, yi, self)) action = Action::kUpdate;
      } else if (zi == k) {
        action = Action::kUpdate;
      } else if (zi == kNoRadar) {
        action = Action::kUpdate;
      } else {  // third party
        if (sender_newer(zi) || bid_beats(yk, k, yi, zi)) {
          action = Action::kUpdate;
        }
      }
    } else if (zk == self) {
      if (zi == self) {
        action = Action::kLeave;
      } else if (zi == k) {
        action = Action::kReset;
      } else if (zi == kNoRadar) {
        action = Action::kLeave;
      } else {
        if (sender_newer(zi)) action = Action::kReset;
      }
    } else if (zk == kNoRadar) {
      if (zi == self) {
        action = Action::kLeave;
      } else if (zi == k) {
        action = Action::kUpdate;
      } else if (zi == kNoRadar) {
        action = Action::kLeave;
      } else {
        if (sender_newer(zi)) action = Action::kUpdate;
      }
    } else {  // sender believes third party m won
      const RadarId m = zk;
      if (zi == self) {
        if (sender_newer(m) && bid_beats(yk, m, yi, self)) {
          action = Action::kUpdate;
        }
      } else if (zi == k) {
        action = sender_newer(m) ? Action::kUpdate : Action::kReset;
      } else if (zi == m) {
        if (sender_newer(m)) action = Action::kUpdate;
      } else if (zi == kNoRadar) {
        if (sender_newer(m)) action = Action::kUpdate;
      } else {  // receiver believes a fourth radar n won
        const RadarId n = zi;
        if (sender_newer(m) && sender_newer(n)) {
          action = Action::kUpdate;
        } else if (sender_newer(m) && bid_beats(yk, m, yi, n)) {
          action = Action::kUpdate;
        } else if (sender_newer(n) && !sender_newer(m)) {
          action = Action::kReset;
        }
      }
    }

    if (action == Action::kLeave) {
      continue;
    }
    const bool held = (zi == self) && belief.in_bundle(j);
    if (action == Action::kUpdate) {
      belief.y[j] = yk;
      belief.z[j] = zk;
      belief.e.erase(j);
      if (belief.round == Round::kMain) {
        auto it = msg.e.find(j);
        if (it != msg.e.end()) {
          belief.e.insert({j, it->second});
        }
      }
      belief.path_utilities.erase(j);
    } else {
      belief.clear_claim(j);
    }
    if (held && belief.winner(j) != self) {
      lost.push_back(j);
    }
  }

  // Bundle truncation: release the earliest lost task and everything
  // added after it.
  if (!lost.empty()) {
    std::size_t cut = belief.bundle.size();
    for (TargetId j : lost) {
      auto it = std::find(belief.bundle.begin(), belief.bundle.end(), j);
      if (it != belief.bundle.end()) {
        cut = std::min(cut, static_cast<std::size_t>(it - belief.bundle.begin()));
      }
    }
    for (std::size_t idx = cut; idx < belief.bundle.size(); ++idx) {
      const TargetId j = belief.bundle[idx];
      if (belief.winner(j) == self) {
        belief.clear_claim(j);
      } else {
        belief.path_utilities.erase(j);
      }
    }
    belief.bundle.resize(cut);
  }

  // Timestamp merge: the sender was just heard from, everyone else at the
  // freshest time either of us knows.
  belief.s[k] = now;
  for (const auto& [peer, t] : msg.s) {
    if (peer == k) continue;
    auto it = belief.s.find(peer);
    if (it == belief.s.end() || it->second < t) {
      belief.s[peer] = t;
    }
  }
  return belief;
}

// Deletes all knowledge of targets unseen (by the whole system, as far as
// this radar can tell) for more than t_stale steps. Removal spreads to the
// neighbors through the absence of the key in later messages.
inline BeliefState forget_stale(BeliefState belief,
                                const std::map<TargetId, long>& last_seen,
                                long now, long t_stale) {
  if (t_stale < 1) {
    throw std::invalid_argument("forget_stale: t_stale must be >= 1");
  }
  std::vector<TargetId> gone;
  for (const auto& [j, y] : belief.y) {
    if (now - detail::get_or(last_seen, j, kNever) > t_stale) {
      gone.push_back(j);
    }
  }
  for (TargetId j : gone) {
    belief.forget_target(j);
  }
  return belief;
}

// Greedy bundle construction for the main round. Repeatedly adds the
// affordable target with the highest biased score that beats the standing
// bid, claiming it in the belief. The budget available to main tasks is
// the free budget plus whatever the optional bundle holds; optional tasks
// are deallocated lowest-bid-first when a main addition needs their share.
struct SelectionParams {
  RadarId self = kNoRadar;
  double budget = 0.0;  // L_t
  double gamma = 1.0;   // cost per task per step
};

inline void select_main(const SelectionParams& sp,
                        const std::map<TargetId, double>& utilities,
                        const std::map<TargetId, Ellipse>& ellipses,
                        BeliefState& main_belief, BeliefState& opt_belief) {
  double main_cost = main_belief.bundle_cost(sp.gamma);
  for (;;) {
    if (main_cost + sp.gamma > sp.budget + 1e-9) {
      break;  // not even full reclaim would fit another task
    }
    TargetId pick = -1;
    double pick_score = 0.0;
    for (const auto& [j, utility] : utilities) {
      if (utility <= 0.0 || main_belief.in_bundle(j)) continue;
      const double score =
          cbba_score(utility, static_cast<int>(main_belief.bundle.size()));
      if (!bid_beats(score, sp.self, main_belief.winning_bid(j),
                     main_belief.winner(j))) {
        continue;
      }
      if (pick < 0 || score > pick_score + kBidTolerance ||
          (score > pick_score - kBidTolerance && j < pick)) {
        pick = j;
        pick_score = score;
      }
    }
    if (pick < 0) {
      break;
    }

    // Same target may not be held in both roles; drop the optional claim.
    if (opt_belief.in_bundle(pick)) {
      opt_belief.clear_claim(pick);
      opt_belief.bundle.erase(
          std::remove(opt_belief.bundle.begin(), opt_belief.bundle.end(), pick),
          opt_belief.bundle.end());
    }

    // Reclaim budget from the optional round if the free share is spent.
    while (main_cost + opt_belief.bundle_cost(sp.gamma) + sp.gamma >
           sp.budget + 1e-9) {
      TargetId victim = -1;
      double victim_bid = 0.0;
      for (TargetId l : opt_belief.bundle) {
        const double bid = detail::get_or(opt_belief.path_utilities, l, 0.0);
        if (victim < 0 || bid < victim_bid - kBidTolerance ||
            (bid < victim_bid + kBidTolerance && l < victim)) {
          victim = l;
          victim_bid = bid;
        }
      }
      if (victim < 0) break;
      opt_belief.clear_claim(victim);
      opt_belief.bundle.erase(
          std::remove(opt_belief.bundle.begin(), opt_belief.bundle.end(),
                      victim),
          opt_belief.bundle.end());
    }

    main_belief.ensure_known(pick);
    main_belief.y[pick] = pick_score;
    main_belief.z[pick] = sp.self;
    main_belief.e.erase(pick);
    main_belief.e.insert({pick, ellipses.at(pick)});
    main_belief.path_utilities[pick] = pick_score;
    main_belief.bundle.push_back(pick);
    main_cost += sp.gamma;
  }
}

// Greedy bundle construction for the optional round: bids the pairing
// bonus alone on targets someone else mains, using the winning main
// ellipse from the beliefs. Spends only the budget left after the main
// round.
inline void select_optional(const SelectionParams& sp,
                            const std::map<TargetId, double>& bonuses,
                            BeliefState& opt_belief,
                            const BeliefState& main_belief) {
  double opt_cost = opt_belief.bundle_cost(sp.gamma);
  const double main_cost = main_belief.bundle_cost(sp.gamma);
  for (;;) {
    if (main_cost + opt_cost + sp.gamma > sp.budget + 1e-9) {
      break;
    }
    TargetId pick = -1;
    double pick_score = 0.0;
    for (const auto& [j, bonus] : bonuses) {
      if (bonus <= 0.0 || opt_belief.in_bundle(j)) continue;
      if (main_belief.winner(j) == sp.self || main_belief.e.find(j) == main_belief.e.end()) {
        continue;
      }
      const double score =
          cbba_score(bonus, static_cast<int>(opt_belief.bundle.size()));
      if (!bid_beats(score, sp.self, opt_belief.winning_bid(j),
                     opt_belief.winner(j))) {
        continue;
      }
      if (pick < 0 || score > pick_score + kBidTolerance ||
          (score > pick_score - kBidTolerance && j < pick)) {
        pick = j;
        pick_score = score;
      }
    }
    if (pick < 0) {
      break;
    }
    opt_belief.ensure_known(pick);
    opt_belief.y[pick] = pick_score;
    opt_belief.z[pick] = sp.self;
    opt_belief.path_utilities[pick] = pick_score;
    opt_belief.bundle.push_back(pick);
    opt_cost += sp.gamma;
  }
}

// Per-radar protocol agent: owns the tracks, both belief states and the
// radar's deterministic noise stream. One call to step() runs the whole
// per-time-step loop: selection as main, selection as optional, the two
// consensus stages, then the tracking measurements for the won tasks.
class RadarAgent {
public:
  struct Config {
    RadarId id = 0;
    RadarParams params;
    UtilityParams utility;
    double gamma = 1.0;
    double ellipse_scale = 2.0;
    long t_stale = 10;
    double dt = 1.0;
    double v_radial_min = 0.0;  // eligibility floor, 0 disables
  };

  struct StepOutput {
    CbbaMessage main_msg;
    CbbaMessage optional_msg;
    std::vector<TargetId> tracked;
  };

  RadarAgent(const Config& cfg, const Rng& rng) : cfg_(cfg), rng_(rng) {
    main_belief_.round = Round::kMain;
    opt_belief_.round = Round::kOptional;
  }

  const Config& config() const { return cfg_; }
  const BeliefState& main_belief() const { return main_belief_; }
  const BeliefState& optional_belief() const { return opt_belief_; }
  const std::map<TargetId, Ellipse>& candidate_ellipses() const {
    return candidate_ellipses_;
  }
  const std::map<TargetId, double>& candidate_utilities() const {
    return candidate_utilities_;
  }
  const std::map<TargetId, TrackState>& tracks() const { return tracks_; }
  const std::map<TargetId, long>& last_seen() const { return last_seen_; }

  bool knows(TargetId j) const { return main_belief_.y.count(j) > 0; }

  double load() const {
    return (main_belief_.bundle_cost(cfg_.gamma) +
            opt_belief_.bundle_cost(cfg_.gamma)) /
           cfg_.params.budget;
  }

  // Holds candidate ellipses and utilities fixed after the first step;
  // used by static-consensus tests where exact belief agreement is
  // asserted.
  void set_frozen(bool frozen) { frozen_ = frozen; }

  StepOutput step(const std::vector<CbbaMessage>& inbox,
                  const std::map<TargetId, Vec2>& truth, long now) {
    perceive(truth, now);

    // Stale-target forgetting before new bids are placed; tracks and
    // bookkeeping go with the belief entries.
    main_belief_ = forget_stale(main_belief_, last_seen_, now, cfg_.t_stale);
    opt_belief_ = forget_stale(opt_belief_, last_seen_, now, cfg_.t_stale);
    for (auto it = last_seen_.begin(); it != last_seen_.end();) {
      if (now - it->second > cfg_.t_stale) {
        tracks_.erase(it->first);
        candidate_ellipses_.erase(it->first);
        candidate_utilities_.erase(it->first);
        it = last_seen_.erase(it);
      } else {
        ++it;
      }
    }

    // Step 1: selection as main radar, from scratch against the standing
    // bids of the others, so own bids can decrease.
    main_belief_.clear_own_claims(cfg_.id);
    SelectionParams sp{cfg_.id, cfg_.params.budget, cfg_.gamma};
    select_main(sp, candidate_utilities_, candidate_ellipses_, main_belief_,
                opt_belief_);

    // Step 2: selection as optional radar on the remaining budget.
    opt_belief_.clear_own_claims(cfg_.id);
    std::map<TargetId, double> bonuses;
    for (const auto& [j, own_ellipse] : candidate_ellipses_) {
      if (main_belief_.winner(j) == cfg_.id) continue;
      auto it = main_belief_.e.find(j);
      if (it == main_belief_.e.end()) continue;
      const double bonus = pair_bonus(it->second, own_ellipse, cfg_.utility);
      if (bonus > 0.0) {
        bonuses.emplace(j, bonus);
      }
    }
    select_optional(sp, bonuses, opt_belief_, main_belief_);

    // Steps 3 and 4: consensus per round over the inbox, then emit.
    std::vector<const CbbaMessage*> sorted;
    for (const auto& m : inbox) sorted.push_back(&m);
    std::sort(sorted.begin(), sorted.end(),
              [](const CbbaMessage* a, const CbbaMessage* b) {
                if (a->round != b->round) return a->round < b->round;
                return a->sender < b->sender;
              });
    for (const CbbaMessage* m : sorted) {
      note_claim_evidence(*m);
      if (m->round == Round::kMain) {
        main_belief_ = consensus_update(main_belief_, *m, cfg_.id, now);
      } else {
        opt_belief_ = consensus_update(opt_belief_, *m, cfg_.id, now);
      }
    }
    for (const auto& [j, y] : main_belief_.y) {
      last_seen_.try_emplace(j, now);
    }
    for (const auto& [j, y] : opt_belief_.y) {
      last_seen_.try_emplace(j, now);
    }

    StepOutput out;
    out.main_msg = make_message(main_belief_, cfg_.id, now);
    out.optional_msg = make_message(opt_belief_, cfg_.id, now);

    // Step 5: perform the won tasks; each tracked target gets a fresh
    // measurement folded into its filter.
    for (TargetId j : main_belief_.bundle) out.tracked.push_back(j);
    for (TargetId j : opt_belief_.bundle) out.tracked.push_back(j);
    std::sort(out.tracked.begin(), out.tracked.end());
    if (!frozen_) {
      for (TargetId j : out.tracked) {
        auto t = truth.find(j);
        auto trk = tracks_.find(j);
        if (t == truth.end() || trk == tracks_.end()) continue;
        if (auto m = measure(cfg_.params, t->second, rng_)) {
          trk->second = update(trk->second, m->z, m->cov, now);
          last_seen_[j] = now;
        }
      }
    }
    return out;
  }

private:
  // Perception sweep: predict existing tracks forward, start or refresh
  // plots for perceivable targets, and cache the candidate ellipse and
  // utility per target. The candidate ellipse is the anticipated posterior
  // uncertainty, i.e. the predicted covariance with this step's
  // measurement covariance already folded in: what tracking the target
  // this step would achieve.
  void perceive(const std::map<TargetId, Vec2>& truth, long now) {
    if (frozen_ && !candidate_utilities_.empty()) {
      for (const auto& [j, pos] : truth) {
        if ((pos - cfg_.params.position).norm() <= cfg_.params.range_max) {
          last_seen_[j] = now;
        }
      }
      return;
    }
    for (auto& [j, track] : tracks_) {
      track = predict(track, cfg_.dt, cfg_.params.process_noise_intensity);
    }
    candidate_ellipses_.clear();
    candidate_utilities_.clear();

    for (const auto& [j, pos] : truth) {
      const double range = (pos - cfg_.params.position).norm();
      if (range > cfg_.params.range_max) continue;
      last_seen_[j] = now;

      const Mat2 fresh_cov = measurement_covariance(
          range, azimuth_of(pos - cfg_.params.position),
          effective_noise(cfg_.params));

      auto trk = tracks_.find(j);
      bool initialized_now = false;
      const bool held = main_belief_.in_bundle(j) || opt_belief_.in_bundle(j);
      if (trk == tracks_.end()) {
        if (auto m = measure(cfg_.params, pos, rng_)) {
          trk = tracks_.emplace(j, init_track(*m, now)).first;
          initialized_now = true;
        } else {
          continue;
        }
      } else if (!held) {
        // A coasted track whose prediction got worse than a plain sweep
        // plot is restarted from the plot, keeping the center honest.
        const double fresh_area =
            Ellipse(pos, fresh_cov, cfg_.ellipse_scale).area();
        const double coasted_area =
            prediction_ellipse(trk->second, cfg_.ellipse_scale).area();
        if (fresh_area < coasted_area) {
          if (auto m = measure(cfg_.params, pos, rng_)) {
            trk->second = init_track(*m, now);
            initialized_now = true;
          }
        }
      }

      if (cfg_.v_radial_min > 0.0) {
        const Vec2 dir = (pos - cfg_.params.position).normalized();
        if (std::fabs(trk->second.velocity().dot(dir)) < cfg_.v_radial_min) {
          continue;
        }
      }
      // Covariance-only Kalman step at the predicted position. A track
      // started from this step's plot already contains the measurement.
      const TrackState anticipated =
          initialized_now
              ? trk->second
              : update(trk->second, trk->second.position(), fresh_cov);
      const Ellipse ell = prediction_ellipse(anticipated, cfg_.ellipse_scale);
      candidate_ellipses_.insert({j, ell});
      candidate_utilities_.emplace(j, utility_main(ell, cfg_.utility));
    }
  }

  // A claimed target in a message is evidence the claimant saw it around
  // the sender's last contact with the claimant; that keeps knowledge of
  // tracked targets alive at radars that cannot see them.
  void note_claim_evidence(const CbbaMessage& msg) {
    for (const auto& [j, winner] : msg.z) {
      if (winner == kNoRadar) continue;
      long evidence = detail::get_or(msg.s, winner, msg.send_time);
      evidence = std::min(evidence, msg.send_time);
      auto it = last_seen_.find(j);
      if (it == last_seen_.end() || it->second < evidence) {
        last_seen_[j] = evidence;
      }
    }
  }

  Config cfg_;
  Rng rng_;
  bool frozen_ = false;
  std::map<TargetId, TrackState> tracks_;
  std::map<TargetId, long> last_seen_;
  std::map<TargetId, Ellipse> candidate_ellipses_;
  std::map<TargetId, double> candidate_utilities_;
  BeliefState main_belief_;
  BeliefState opt_belief_;
};

}  // namespace radalloc
