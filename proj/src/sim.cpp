#include "occfluct/sim.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <thread>

#include "occfluct/errors.hpp"

namespace occfluct {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

RandomStream RandomStream::split(std::uint64_t seed, std::uint64_t index) {
  return RandomStream(derive_seed(seed, index));
}

Trajectory::Trajectory(StateSpace space, std::size_t initial, std::vector<double> jump_times,
                       std::vector<std::size_t> states, double horizon)
    : space_(std::move(space)),
      initial_(initial),
      jump_times_(std::move(jump_times)),
      states_(std::move(states)),
      horizon_(horizon) {
  if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) throw Error(ErrorKind::InvalidInput, "horizon must be > 0");
  if (initial_ >= space_.size()) throw Error(ErrorKind::InvalidInput, "initial state out of range");
  if (jump_times_.size() != states_.size()) throw Error(ErrorKind::InvalidInput, "jump times and states differ in length");
  double last = 0.0;
  std::size_t current = initial_;
  for (std::size_t i = 0; i < states_.size(); ++i) {
    if (!(jump_times_[i] > last))
      throw Error(ErrorKind::InvalidInput, "jump times must increase strictly");
    if (!(jump_times_[i] < horizon_)) throw Error(ErrorKind::InvalidInput, "jump after the horizon");
    if (states_[i] >= space_.size() || states_[i] == current)
      throw Error(ErrorKind::InvalidInput, "invalid jump target");
    last = jump_times_[i];
    current = states_[i];
  }
}

namespace {

// y with probability k(x,y) / exit.
std::size_t jump_target(const RateMatrix& k, std::size_t x, double exit, RandomStream& stream) {
  const double target = stream.uniform() * exit;
  double cumulative = 0.0;
  std::size_t next = x;
  for (std::size_t y = 0; y < k.size(); ++y) {
    if (y == x || k(x, y) == 0.0) continue;
    cumulative += k(x, y);
    next = y;
    if (target < cumulative) break;
  }
  return next;
}

}  // namespace

Trajectory gillespie(const RateMatrix& k, std::size_t x0, double horizon, std::uint64_t seed) {
  RandomStream stream(seed);
  if (x0 >= k.size()) throw Error(ErrorKind::InvalidInput, "initial state out of range");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw Error(ErrorKind::InvalidInput, "horizon must be > 0");
  std::vector<double> times;
  std::vector<std::size_t> states;
  std::size_t x = x0;
  double t = 0.0;
  while (true) {
    const double exit = k.exit_rate(x);
    if (exit == 0.0) break;
    t += stream.exponential(exit);
    if (!(t < horizon)) break;
    const std::size_t next = jump_target(k, x, exit, stream);
    times.push_back(t);
    states.push_back(next);
    x = next;
  }
  return Trajectory(k.space(), x0, std::move(times), std::move(states), horizon);
}

OccupationRecord occupation(const Trajectory& trajectory) {
  const auto n = static_cast<Eigen::Index>(trajectory.space().size());
  // Neumaier-compensated sums per state.
  Vector sum = Vector::Zero(n);
  Vector comp = Vector::Zero(n);
  const auto add = [&](std::size_t state, double value) {
    const auto i = static_cast<Eigen::Index>(state);
    const double t = sum(i) + value;
    comp(i) += std::abs(sum(i)) >= std::abs(value) ? (sum(i) - t) + value : (value - t) + sum(i);
    sum(i) = t;
  };
  double start = 0.0;
  std::size_t state = trajectory.initial();
  for (std::size_t i = 0; i < trajectory.jump_count(); ++i) {
    add(state, trajectory.jump_times()[i] - start);
    start = trajectory.jump_times()[i];
    state = trajectory.states()[i];
  }
  add(state, trajectory.horizon() - start);
  return OccupationRecord{ProbDist::normalized(trajectory.space(), sum + comp), trajectory.horizon()};
}

namespace {

template <class Task>
void parallel_for(std::size_t count, Task task) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::vector<std::jthread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([=, &task] {
      for (std::size_t i = w; i < count; i += workers) task(i);
    });
  }
}

std::size_t sample_categorical(RandomStream& stream, const Vector& p) {
  const double target = stream.uniform();
  double cumulative = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    cumulative += p(i);
    if (target < cumulative) return static_cast<std::size_t>(i);
  }
  return static_cast<std::size_t>(p.size() - 1);
}

}  // namespace

std::vector<OccupationRecord> occupation_samples(const RateMatrix& k, std::size_t x0, double horizon,
                                                 std::size_t n_samples, std::uint64_t seed) {
  std::vector<std::optional<OccupationRecord>> slots(n_samples);
  parallel_for(n_samples, [&](std::size_t i) {
    slots[i] = occupation(gillespie(k, x0, horizon, derive_seed(seed, i)));
  });
  std::vector<OccupationRecord> out;
  out.reserve(n_samples);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (const double v : values) s += v;
    return s;
  }
  const auto half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

FeynmanKacEstimate feynman_kac_estimate(const RateMatrix& k, const Vector& potential, double horizon,
                                        std::size_t n_samples, std::uint64_t seed) {
  if (potential.size() != static_cast<Eigen::Index>(k.size()))
    throw Error(ErrorKind::InvalidInput, "potential length does not match the state space");
  if (!potential.allFinite()) throw Error(ErrorKind::InvalidInput, "potential must be finite");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw Error(ErrorKind::InvalidInput, "horizon must be > 0");
  if (n_samples < 2) throw Error(ErrorKind::InvalidInput, "need at least two samples");

  const Vector rho = stationary_distribution(k).vector();
  const double top = potential.maxCoeff();
  const Vector shifted = potential.array() - top;

  std::vector<double> exponents(n_samples);
  parallel_for(n_samples, [&](std::size_t i) {
    RandomStream stream = RandomStream::split(seed, i);
    std::size_t x = sample_categorical(stream, rho);
    double t = 0.0;
    double integral = 0.0;
    while (true) {
      const double exit = k.exit_rate(x);
      const double dt = exit > 0.0 ? stream.exponential(exit) : horizon;
      if (!(t + dt < horizon)) {
        integral += shifted(static_cast<Eigen::Index>(x)) * (horizon - t);
        break;
      }
      integral += shifted(static_cast<Eigen::Index>(x)) * dt;
      t += dt;
      x = jump_target(k, x, exit, stream);
    }
    exponents[i] = integral;
  });

  const auto [lo, hi] = std::minmax_element(exponents.begin(), exponents.end());
  if (*hi - *lo > 700.0) throw Error(ErrorKind::OverflowGuard, "path exponents spread beyond double range; rescale V");
  const double peak = *hi;

  std::vector<double> weights(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) weights[i] = std::exp(exponents[i] - peak);
  const double n = static_cast<double>(n_samples);
  const double mean = pairwise_sum(weights) / n;
  std::vector<double> squares(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) squares[i] = (weights[i] - mean) * (weights[i] - mean);
  const double variance = pairwise_sum(squares) / (n - 1.0);

  FeynmanKacEstimate out{};
  out.lambda = top + (peak + std::log(mean)) / horizon;
  out.standard_error = std::sqrt(variance / n) / mean / horizon;
  out.n_samples = n_samples;
  return out;
}

}  // namespace occfluct
