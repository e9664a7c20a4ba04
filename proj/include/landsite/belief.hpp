#pragma once

// Two-hypothesis likelihoods, region tracks and the Markov-prior Bayes
// recursion on the per-track safety belief.

#include <deque>
#include <optional>
#include <utility>
#include <vector>

#include "landsite/perception.hpp"

namespace landsite {

/// Per-cue likelihoods ell(x) = max(exp(-x / scale), floor), combined as a
/// weighted product. The unsafe hypothesis uses the complements 1 - ell.
struct LikelihoodModel {
  double w_f = 0.4;
  double w_s = 0.2;
  double w_o = 0.4;
  double scale_f = 1.0;   // on normalized flatness
  double scale_s = 0.15;  // rad
  double scale_o = 0.5;   // on the obstacle score
  double floor = 0.05;    // epsilon_L

  double ell(double x, double scale) const;
  double ell_f(double f) const { return ell(f, scale_f); }
  double ell_s(double s) const { return ell(s, scale_s); }
  double ell_o(double o) const { return ell(o, scale_o); }

  void validate() const;
};

/// L1 = clamp(ell_f^w_f * ell_s^w_s * ell_o^w_o, floor, 1).
double likelihood_safe(const CueVector& cues, const LikelihoodModel& model);
/// L0 = clamp((1-ell_f)^w_f * (1-ell_s)^w_s * (1-ell_o)^w_o, floor, 1).
double likelihood_unsafe(const CueVector& cues, const LikelihoodModel& model);

/// Same products, starting from already-evaluated per-cue likelihoods.
double combine_safe(double lf, double ls, double lo, const LikelihoodModel& model);
double combine_unsafe(double lf, double ls, double lo, const LikelihoodModel& model);

/// b_bar = alpha * b + (1 - alpha) * (1 - b)
inline double predict(double b_prev, double alpha) { return alpha * b_prev + (1.0 - alpha) * (1.0 - b_prev); }

/// b = L1 * b_bar / (L1 * b_bar + L0 * (1 - b_bar))
inline double update(double b_bar, double l1, double l0) {
  const double num = l1 * b_bar;
  return num / (num + l0 * (1.0 - b_bar));
}

struct TrackSample {
  int t = 0;
  double l1 = 0.0;
  double l0 = 0.0;
  double belief = 0.0;
  bool observed = false;
};

struct RegionTrack {
  int id = 0;
  RegionMask mask;
  CueVector cues;
  double belief = 0.5;
  int last_seen = 0;
  int missed = 0;  // consecutive frames without a matching region
  std::deque<TrackSample> history;
};

struct BeliefConfig {
  LikelihoodModel likelihood;
  double alpha = 0.95;
  double b0 = 0.5;
  double min_iou = 0.3;
  int max_missed = 5;       // G
  std::size_t history_length = 64;

  void validate() const;
};

struct Association {
  std::vector<std::pair<std::size_t, std::size_t>> matches;  // (track index, region index)
  std::vector<std::size_t> unmatched_tracks;
  std::vector<std::size_t> unmatched_regions;
};

/// Greedy max-IoU matching on ground footprints; pairs below `min_iou` never
/// match. Ties are broken by track index, then region index.
Association associate(const std::vector<RegionTrack>& tracks, const std::vector<RegionMask>& regions, double min_iou);

/// Evidence for one track this frame; nullopt means predict-only.
using TrackEvidence = std::optional<std::pair<double, double>>;  // (L1, L0)

/// Predict every track; update those with evidence. `evidence` is parallel
/// to `tracks`.
void step(std::vector<RegionTrack>& tracks, const std::vector<TrackEvidence>& evidence, double alpha, int t,
          std::size_t history_length = 64);

struct RegionObservation {
  RegionMask mask;
  std::optional<CueVector> cues;  // nullopt when the plane fit failed
};

/// Owns the live tracks for one episode: association, spawning, retirement
/// and the belief recursion.
class TrackStore {
 public:
  explicit TrackStore(BeliefConfig cfg);

  /// Processes one frame. Returns ids of tracks matched to a region this frame.
  std::vector<int> observe(int t, std::vector<RegionObservation> observations);

  const std::vector<RegionTrack>& tracks() const { return tracks_; }
  const RegionTrack* find(int id) const;
  const BeliefConfig& config() const { return cfg_; }

 private:
  BeliefConfig cfg_;
  std::vector<RegionTrack> tracks_;
  int next_id_ = 1;
};

}  // namespace landsite
