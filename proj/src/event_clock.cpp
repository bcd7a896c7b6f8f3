#include "quasar/event_clock.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace quasar {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_stream(std::uint64_t config_id, std::uint64_t run_index) {
  return splitmix64(config_id ^ splitmix64(run_index + 1));
}

SeededRng::SeededRng(std::uint64_t master_seed, std::uint64_t stream_id)
    : master_seed_(master_seed),
      stream_id_(stream_id),
      engine_(splitmix64(master_seed) ^ splitmix64(~stream_id)) {}

double SeededRng::uniform_open0() {
  // (m + 1) / 2^53 with m in [0, 2^53) lies in (0, 1].
  const std::uint64_t m = engine_() >> 11;
  return static_cast<double>(m + 1) * 0x1.0p-53;
}

std::size_t SeededRng::index(std::size_t n) {
  require(n > 0, "SeededRng::index: n must be positive");
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return static_cast<std::size_t>(r % bound);
}

double SeededRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform_open0();
  const double u2 = uniform_open0();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

Vec SeededRng::normal_vector(Eigen::Index d) {
  Vec v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = normal();
  return v;
}

double exponential_inverse_cdf(double u) {
  require(u >= 0.0 && u < 1.0, "exponential_inverse_cdf: u must lie in [0, 1)");
  return -std::log1p(-u);
}

double sample_increment(SeededRng& rng) { return -std::log(rng.uniform_open0()); }

JumpSchedule::JumpSchedule(std::vector<double> times) : times_(std::move(times)) {
  double prev = 0.0;
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!(times_[i] > prev) || !std::isfinite(times_[i]))
      throw InvalidArgument("JumpSchedule: times must be finite and strictly increasing from 0");
    prev = times_[i];
  }
}

JumpSchedule JumpSchedule::shifted(double offset) const {
  require(offset >= 0.0, "JumpSchedule::shifted: offset must be nonnegative");
  std::vector<double> t(times_);
  for (double& x : t) x += offset;
  return JumpSchedule(std::move(t));
}

JumpSchedule build_schedule(SeededRng& rng, std::size_t k_max) {
  if (k_max == 0) throw InvalidArgument("build_schedule: empty schedule (k_max == 0)");
  std::vector<double> times;
  times.reserve(k_max);
  double t = 0.0;
  for (std::size_t k = 0; k < k_max; ++k) {
    double dt = sample_increment(rng);
    // -ln(1) == 0 occurs with probability 2^-53; redraw to keep times strict.
    while (dt == 0.0) dt = sample_increment(rng);
    t += dt;
    times.push_back(t);
  }
  return JumpSchedule(std::move(times));
}

}  // namespace quasar
