#include "slnlink/generator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "slnlink/rng.hpp"

namespace slnlink {

namespace {

constexpr int kMaxRepliesPerThread = 50;

// Weighted student sampler over rank-based power-law weights.
class StudentSampler {
 public:
  StudentSampler(int n, double exponent) : cumulative_(n) {
    double total = 0.0;
    for (int r = 0; r < n; ++r) {
      total += std::pow(double(r + 1), -exponent);
      cumulative_[r] = total;
    }
    for (double& c : cumulative_) c /= total;
    cumulative_.back() = 1.0;
  }

  int sample(Rng& rng) const {
    double u = rng.uniform();
    auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
    return int(it - cumulative_.begin());
  }

 private:
  std::vector<double> cumulative_;
};

// Sorted strictly-increasing times in (t0, 1]. Collisions are measure-zero
// but nudged apart anyway so the within-thread ordering is strict.
std::vector<double> strict_times(Rng& rng, double t0, int count) {
  std::vector<double> times(count);
  for (double& t : times) t = t0 + (1.0 - t0) * rng.uniform();
  std::sort(times.begin(), times.end());
  for (int i = 0; i < count; ++i) {
    if (times[i] <= t0) times[i] = std::nextafter(t0, 2.0);
    if (i > 0 && times[i] <= times[i - 1]) times[i] = std::nextafter(times[i - 1], 2.0);
  }
  for (int i = count - 1; i >= 0; --i) {
    double cap = i + 1 < count ? times[i + 1] : std::nextafter(1.0, 2.0);
    if (times[i] >= cap) times[i] = std::nextafter(cap, -1.0);
  }
  return times;
}

}  // namespace

TemporalGraph generate_synthetic_sln(const GeneratorConfig& cfg) {
  if (cfg.n_students < 2) throw std::invalid_argument("generator needs at least 2 students");
  if (cfg.n_threads < 1) throw std::invalid_argument("n_threads must be >= 1");
  if (cfg.duration_weeks <= 0.0) throw std::invalid_argument("duration_weeks must be positive");
  if (cfg.activity_exponent <= 0.0) throw std::invalid_argument("activity_exponent must be positive");
  if (cfg.replies_per_thread_mean <= 0.0) {
    throw std::invalid_argument("replies_per_thread_mean must be positive");
  }
  if (cfg.participation_window < 1) throw std::invalid_argument("participation_window must be >= 1");

  StudentSampler sampler(cfg.n_students, cfg.activity_exponent);

  std::vector<EdgeEvent> events;
  for (int t = 0; t < cfg.n_threads; ++t) {
    // One RNG stream per thread, so a thread's draws are independent of
    // how many events earlier threads produced.
    Rng rng(mix_seed(cfg.seed, std::uint64_t(t)));
    const double opened_at = rng.uniform();
    const int creator = sampler.sample(rng);
    const int replies = std::min(rng.poisson(cfg.replies_per_thread_mean), kMaxRepliesPerThread);

    // Distinct participants in recency order, most recent last.
    std::vector<int> participants{creator};
    std::vector<Edge> thread_links;
    for (int r = 0; r < replies; ++r) {
      const int replier = sampler.sample(rng);
      int linked = 0;
      for (auto it = participants.rbegin();
           it != participants.rend() && linked < cfg.participation_window; ++it) {
        if (*it == replier) continue;
        thread_links.push_back(make_edge(replier, *it));
        ++linked;
      }
      auto pos = std::find(participants.begin(), participants.end(), replier);
      if (pos != participants.end()) participants.erase(pos);
      participants.push_back(replier);
    }

    const std::vector<double> times = strict_times(rng, opened_at, int(thread_links.size()));
    for (std::size_t i = 0; i < thread_links.size(); ++i) {
      events.push_back(EdgeEvent{thread_links[i].u, thread_links[i].v, times[i]});
    }
  }

  return build_graph(cfg.n_students, std::move(events), cfg.duration_weeks,
                     cfg.tag.empty() ? "synthetic" : cfg.tag);
}

GeneratorConfig preset_config(const std::string& name, std::uint64_t seed) {
  GeneratorConfig cfg;
  cfg.tag = name;
  cfg.seed = seed;
  if (name == "vs-like") {
    cfg.n_students = 677;
    cfg.n_threads = 1210;
    cfg.duration_weeks = 5;
    cfg.activity_exponent = 0.72;
    cfg.replies_per_thread_mean = 3.6;
    cfg.participation_window = 2;
  } else if (name == "ml-like") {
    cfg.n_students = 3290;
    cfg.n_threads = 7000;
    cfg.duration_weeks = 12;
    cfg.activity_exponent = 0.55;
    cfg.replies_per_thread_mean = 2.4;
    cfg.participation_window = 2;
  } else if (name == "al-like") {
    cfg.n_students = 1165;
    cfg.n_threads = 1400;
    cfg.duration_weeks = 13;
    cfg.activity_exponent = 0.95;
    cfg.replies_per_thread_mean = 5.2;
    cfg.participation_window = 3;
  } else if (name == "cp-like") {
    cfg.n_students = 900;
    cfg.n_threads = 860;
    cfg.duration_weeks = 8;
    cfg.activity_exponent = 0.95;
    cfg.replies_per_thread_mean = 4.3;
    cfg.participation_window = 3;
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  return cfg;
}

std::vector<std::string> preset_names() { return {"vs-like", "ml-like", "al-like", "cp-like"}; }

}  // namespace slnlink
