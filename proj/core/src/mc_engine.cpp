#include "entroute/mc_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

namespace entroute {

namespace {

constexpr std::uint64_t kBlockTrials = 1024;
constexpr std::uint64_t kStopRuleBlocks = 16;

struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) noexcept {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

struct Moments {
  KahanSum values;
  KahanSum squares;
};

RateEstimate finish(const Moments& m, std::uint64_t n) {
  RateEstimate est;
  est.trials = n;
  if (n == 0) return est;
  const double dn = static_cast<double>(n);
  est.mean = m.values.sum / dn;
  if (n > 1) {
    const double var = std::max(0.0, (m.squares.sum - m.values.sum * est.mean) / (dn - 1.0));
    est.std_error = std::sqrt(var / dn);
  }
  return est;
}

}  // namespace

void SimParams::validate() const {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("q must lie in [0, 1]");
  if (trials == 0) throw std::invalid_argument("trials must be positive");
  if (target_rel_stderr && !(*target_rel_stderr > 0.0)) {
    throw std::invalid_argument("target relative stderr must be positive");
  }
}

std::vector<bool> LinkInstance::materialize() const {
  std::vector<bool> out(size_);
  for (EdgeId e = 0; e < size_; ++e) out[e] = up(e);
  return out;
}

LinkSampler::LinkSampler(const Topology& topology, const LinkModel& model)
    : probs_(model.edge_probs(topology)) {
  thresholds_.reserve(probs_.size());
  for (double p : probs_) thresholds_.push_back(bernoulli_threshold(p));
}

LinkInstance sample_external_phase(const Topology& topology, const LinkModel& model,
                                   const Stream& stream) {
  std::vector<bool> up(topology.edge_count());
  for (EdgeId e = 0; e < up.size(); ++e) {
    up[e] = bernoulli_hit(stream.at(e), bernoulli_threshold(model.edge_prob(topology, e)));
  }
  return LinkInstance(std::move(up));
}

unsigned default_worker_count() {
  if (const char* env = std::getenv("ENTROUTE_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<RateEstimate> run_trials(const Topology& topology, const SimParams& params,
                                     std::size_t outputs, const TrialFnFactory& factory) {
  params.validate();
  if (outputs == 0) throw std::invalid_argument("run_trials needs at least one output");

  const LinkSampler sampler(topology, params.link);
  const std::uint64_t n_blocks = (params.trials + kBlockTrials - 1) / kBlockTrials;
  const std::uint64_t round_blocks = params.target_rel_stderr ? kStopRuleBlocks : n_blocks;
  const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(
      params.workers ? params.workers : default_worker_count(), round_blocks));

  std::vector<TrialFn> fns;
  fns.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) fns.push_back(factory());

  std::vector<Moments> totals(outputs);
  std::uint64_t done = 0;

  for (std::uint64_t first = 0; first < n_blocks; first += round_blocks) {
    const std::uint64_t last = std::min(n_blocks, first + round_blocks);
    std::vector<std::vector<Moments>> blocks(last - first, std::vector<Moments>(outputs));
    std::atomic<std::uint64_t> next{first};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto work = [&](unsigned w) {
      std::vector<double> out(outputs);
      try {
        for (std::uint64_t b = next++; b < last && !failed; b = next++) {
          auto& acc = blocks[b - first];
          const std::uint64_t end = std::min(params.trials, (b + 1) * kBlockTrials);
          for (std::uint64_t t = b * kBlockTrials; t < end; ++t) {
            const std::uint64_t key = trial_key(params.seed, t);
            const LinkInstance links = sampler.view(key);
            std::fill(out.begin(), out.end(), 0.0);
            fns[w](Trial{t, key, links}, out);
            for (std::size_t k = 0; k < outputs; ++k) {
              acc[k].values.add(out[k]);
              acc[k].squares.add(out[k] * out[k]);
            }
          }
        }
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    };

    if (workers == 1) {
      work(0);
    } else {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    }
    if (error) std::rethrow_exception(error);

    for (const auto& block : blocks) {
      for (std::size_t k = 0; k < outputs; ++k) {
        totals[k].values.add(block[k].values.sum);
        totals[k].squares.add(block[k].squares.sum);
      }
    }
    done = std::min(params.trials, last * kBlockTrials);

    if (params.target_rel_stderr) {
      const RateEstimate head = finish(totals[0], done);
      if (head.mean > 0.0 && head.std_error <= *params.target_rel_stderr * head.mean) break;
    }
  }

  std::vector<RateEstimate> result;
  result.reserve(outputs);
  for (const auto& m : totals) result.push_back(finish(m, done));
  return result;
}

RateEstimate run_trials(const Topology& topology, const SimParams& params,
                        const std::function<double(const Trial&)>& per_trial) {
  auto factory = [&per_trial]() -> TrialFn {
    return [&per_trial](const Trial& trial, std::span<double> out) { out[0] = per_trial(trial); };
  };
  return run_trials(topology, params, 1, factory).front();
}

RateEstimate connectivity_probability(const Topology& topology, const SimParams& params,
                                      NodeId alice, NodeId bob) {
  if (alice == bob) throw std::invalid_argument("connectivity needs two distinct nodes");
  if (alice >= topology.node_count() || bob >= topology.node_count()) {
    throw std::invalid_argument("connectivity endpoint out of range");
  }
  auto factory = [&]() -> TrialFn {
    struct Scratch {
      std::vector<std::uint64_t> seen;
      std::vector<NodeId> queue;
      std::uint64_t stamp = 0;
    };
    auto scratch = std::make_shared<Scratch>();
    scratch->seen.assign(topology.node_count(), 0);
    scratch->queue.reserve(topology.node_count());
    return [&topology, alice, bob, scratch](const Trial& trial, std::span<double> out) {
      Scratch& s = *scratch;
      const std::uint64_t stamp = ++s.stamp;
      s.queue.clear();
      s.queue.push_back(alice);
      s.seen[alice] = stamp;
      for (std::size_t head = 0; head < s.queue.size(); ++head) {
        for (const Incidence& inc : topology.incident(s.queue[head])) {
          if (s.seen[inc.neighbor] == stamp || !trial.links.up(inc.edge)) continue;
          if (inc.neighbor == bob) {
            out[0] = 1.0;
            return;
          }
          s.seen[inc.neighbor] = stamp;
          s.queue.push_back(inc.neighbor);
        }
      }
    };
  };
  return run_trials(topology, params, 1, factory).front();
}

}  // namespace entroute
