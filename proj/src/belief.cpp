#include "landsite/belief.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace landsite {

double LikelihoodModel::ell(double x, double scale) const { return std::max(std::exp(-x / scale), floor); }

void LikelihoodModel::validate() const {
  if (w_f < 0 || w_s < 0 || w_o < 0) throw std::invalid_argument("cue weights must be non-negative");
  if (scale_f <= 0 || scale_s <= 0 || scale_o <= 0) throw std::invalid_argument("likelihood scales must be > 0");
  if (!(floor > 0 && floor < 1)) throw std::invalid_argument("likelihood floor must be in (0,1)");
}

double combine_safe(double lf, double ls, double lo, const LikelihoodModel& m) {
  const double p = std::pow(lf, m.w_f) * std::pow(ls, m.w_s) * std::pow(lo, m.w_o);
  return std::clamp(p, m.floor, 1.0);
}

double combine_unsafe(double lf, double ls, double lo, const LikelihoodModel& m) {
  const double p = std::pow(1.0 - lf, m.w_f) * std::pow(1.0 - ls, m.w_s) * std::pow(1.0 - lo, m.w_o);
  return std::clamp(p, m.floor, 1.0);
}

double likelihood_safe(const CueVector& cues, const LikelihoodModel& m) {
  return combine_safe(m.ell_f(cues.flatness), m.ell_s(cues.slope), m.ell_o(cues.obstacle), m);
}

double likelihood_unsafe(const CueVector& cues, const LikelihoodModel& m) {
  return combine_unsafe(m.ell_f(cues.flatness), m.ell_s(cues.slope), m.ell_o(cues.obstacle), m);
}

void BeliefConfig::validate() const {
  likelihood.validate();
  if (!(alpha > 0.5 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0.5,1)");
  if (!(b0 > 0.0 && b0 < 1.0)) throw std::invalid_argument("b0 must be in (0,1)");
  if (!(min_iou > 0.0 && min_iou <= 1.0)) throw std::invalid_argument("min_iou must be in (0,1]");
  if (max_missed < 0) throw std::invalid_argument("max_missed must be >= 0");
}

Association associate(const std::vector<RegionTrack>& tracks, const std::vector<RegionMask>& regions, double min_iou) {
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    for (std::size_t j = 0; j < regions.size(); ++j) {
      const double iou = footprint_iou(tracks[i].mask.footprint, regions[j].footprint);
      if (iou >= min_iou) pairs.emplace_back(iou, i, j);
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
    return std::get<2>(a) < std::get<2>(b);
  });

  Association out;
  std::vector<bool> track_used(tracks.size(), false);
  std::vector<bool> region_used(regions.size(), false);
  for (const auto& [iou, i, j] : pairs) {
    if (track_used[i] || region_used[j]) continue;
    track_used[i] = true;
    region_used[j] = true;
    out.matches.emplace_back(i, j);
  }
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    if (!track_used[i]) out.unmatched_tracks.push_back(i);
  }
  for (std::size_t j = 0; j < regions.size(); ++j) {
    if (!region_used[j]) out.unmatched_regions.push_back(j);
  }
  return out;
}

void step(std::vector<RegionTrack>& tracks, const std::vector<TrackEvidence>& evidence, double alpha, int t,
          std::size_t history_length) {
  if (evidence.size() != tracks.size()) throw std::invalid_argument("evidence must be parallel to tracks");
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    auto& track = tracks[i];
    const double b_bar = predict(track.belief, alpha);
    TrackSample sample{t, 0.0, 0.0, b_bar, false};
    if (evidence[i]) {
      const auto [l1, l0] = *evidence[i];
      track.belief = update(b_bar, l1, l0);
      sample = {t, l1, l0, track.belief, true};
    } else {
      track.belief = b_bar;
    }
    if (history_length > 0) {
      track.history.push_back(sample);
      while (track.history.size() > history_length) track.history.pop_front();
    }
  }
}

TrackStore::TrackStore(BeliefConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

const RegionTrack* TrackStore::find(int id) const {
  for (const auto& track : tracks_) {
    if (track.id == id) return &track;
  }
  return nullptr;
}

std::vector<int> TrackStore::observe(int t, std::vector<RegionObservation> observations) {
  std::vector<RegionMask> masks;
  masks.reserve(observations.size());
  for (const auto& o : observations) masks.push_back(o.mask);
  const Association assoc = associate(tracks_, masks, cfg_.min_iou);

  std::vector<TrackEvidence> evidence(tracks_.size());
  auto evidence_for = [&](const RegionObservation& o) -> TrackEvidence {
    if (!o.cues) return std::nullopt;
    return std::make_pair(likelihood_safe(*o.cues, cfg_.likelihood), likelihood_unsafe(*o.cues, cfg_.likelihood));
  };

  std::vector<int> observed;
  for (const auto& [ti, ri] : assoc.matches) {
    auto& track = tracks_[ti];
    auto& obs = observations[ri];
    evidence[ti] = evidence_for(obs);
    if (obs.cues) track.cues = *obs.cues;
    track.mask = std::move(obs.mask);
    track.last_seen = t;
    track.missed = 0;
    observed.push_back(track.id);
  }
  for (std::size_t ti : assoc.unmatched_tracks) ++tracks_[ti].missed;
  for (std::size_t ri : assoc.unmatched_regions) {
    auto& obs = observations[ri];
    RegionTrack track;
    track.id = next_id_++;
    track.belief = cfg_.b0;
    track.last_seen = t;
    if (obs.cues) track.cues = *obs.cues;
    evidence.push_back(evidence_for(obs));
    track.mask = std::move(obs.mask);
    observed.push_back(track.id);
    tracks_.push_back(std::move(track));
  }

  step(tracks_, evidence, cfg_.alpha, t, cfg_.history_length);

  std::erase_if(tracks_, [&](const RegionTrack& track) { return track.missed > cfg_.max_missed; });
  std::sort(observed.begin(), observed.end());
  return observed;
}

}  // namespace landsite
