#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <span>
#include <vector>

#include "entroute/link_model.hpp"
#include "entroute/random.hpp"
#include "entroute/topology.hpp"

namespace entroute {

/// Sample mean and standard error of a per-slot quantity (ebits per slot).
struct RateEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(trials)
  std::uint64_t trials = 0;
};

struct SimParams {
  LinkModel link = LinkModel::direct(1.0);
  double q = 1.0;  // BSM success probability
  std::uint64_t trials = 100000;
  std::uint64_t seed = 0;
  /// Stop once output 0 reaches this relative standard error (checked every
  /// 16384 trials); `trials` stays the cap.
  std::optional<double> target_rel_stderr;
  /// Worker threads; 0 reads ENTROUTE_WORKERS, then hardware concurrency.
  unsigned workers = 0;

  void validate() const;  // throws std::invalid_argument
};

/// External-phase outcome for one slot: one up/down flag per edge.
///
/// Either holds explicit states or is a view over a counter-based stream,
/// where edge e is up iff element e of the stream falls below the edge's
/// Bernoulli threshold. The view evaluates lazily, so searches that touch few
/// edges never pay for the whole graph.
class LinkInstance {
 public:
  explicit LinkInstance(std::vector<bool> states)
      : states_(std::move(states)), explicit_(true), size_(states_.size()) {}
  LinkInstance(std::span<const std::uint64_t> thresholds, std::uint64_t key) noexcept
      : thresholds_(thresholds), key_(key), size_(thresholds.size()) {}

  bool up(EdgeId e) const noexcept {
    if (explicit_) return states_[e];
    return bernoulli_hit(mix64(key_ + (std::uint64_t{e} + 1) * kGoldenGamma), thresholds_[e]);
  }
  std::size_t size() const noexcept { return size_; }
  std::vector<bool> materialize() const;

 private:
  std::vector<bool> states_;
  std::span<const std::uint64_t> thresholds_;
  std::uint64_t key_ = 0;
  bool explicit_ = false;
  std::size_t size_ = 0;
};

/// Per-edge Bernoulli thresholds for one (topology, link model) pair.
class LinkSampler {
 public:
  LinkSampler(const Topology& topology, const LinkModel& model);

  /// Lazy instance keyed by a trial key; valid while this sampler lives.
  LinkInstance view(std::uint64_t key) const noexcept { return {thresholds_, key}; }
  std::span<const double> probabilities() const noexcept { return probs_; }

 private:
  std::vector<double> probs_;
  std::vector<std::uint64_t> thresholds_;
};

/// Materialized instance drawn from `stream`: edge e reads element e.
LinkInstance sample_external_phase(const Topology& topology, const LinkModel& model,
                                   const Stream& stream);

/// Everything a trial evaluator may depend on. All randomness is a function
/// of (seed, trial index), so results do not depend on scheduling.
struct Trial {
  std::uint64_t index = 0;
  std::uint64_t key = 0;
  const LinkInstance& links;

  /// Trial-level stream for decisions not tied to a node (e.g. slot owner).
  Stream aux() const noexcept { return Stream(derive_key(key, 0xa0c5)); }
  /// Independent coin stream for repeater `n`.
  Stream coins(NodeId n) const noexcept { return Stream(derive_key(derive_key(key, 0xc017), n)); }
};

constexpr std::uint64_t trial_key(std::uint64_t seed, std::uint64_t index) noexcept {
  return derive_key(seed, index);
}

/// Writes one value per output for a trial.
using TrialFn = std::function<void(const Trial&, std::span<double>)>;
/// Called once per worker, so each evaluator may own scratch space.
using TrialFnFactory = std::function<TrialFn()>;

/// Runs `params.trials` independent trials and returns one estimate per
/// output. Output is bit-identical for a given seed whatever the worker count.
std::vector<RateEstimate> run_trials(const Topology& topology, const SimParams& params,
                                     std::size_t outputs, const TrialFnFactory& factory);

/// Single-output convenience; `per_trial` is shared by all workers.
RateEstimate run_trials(const Topology& topology, const SimParams& params,
                        const std::function<double(const Trial&)>& per_trial);

/// Pr[A and B connected through up edges].
RateEstimate connectivity_probability(const Topology& topology, const SimParams& params,
                                      NodeId alice, NodeId bob);

unsigned default_worker_count();

}  // namespace entroute
