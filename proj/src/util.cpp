#include "ucplab/optimize.hpp"
#include "ucplab/parallel.hpp"
#include "ucplab/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

namespace ucplab {

std::uint64_t site_seed(std::uint64_t master, std::uint64_t stream,
                        std::span<const long> site) noexcept {
  std::uint64_t h = mix64(master) ^ stream;
  for (long c : site) h = mix64(h ^ static_cast<std::uint64_t>(c));
  return mix64(h);
}

double Rng::normal() noexcept {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

unsigned default_thread_count() {
  if (const char* env = std::getenv("UCPLAB_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body) {
  threads = std::max(1u, threads);
  if (threads == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  const auto n = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  std::vector<std::jthread> pool;
  pool.reserve(n);
  for (unsigned k = 0; k < n; ++k) pool.emplace_back(worker);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

ScalarMinimum golden_section(const std::function<double(double)>& f, double lo,
                             double hi, double x_tol, int max_iter) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < max_iter; ++it) {
    if (b - a <= x_tol + 1e-15 * (std::abs(a) + std::abs(b)) + 1e-300) break;
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  ScalarMinimum best{c, fc};
  if (fd < best.value) best = {d, fd};
  for (double x : {a, b}) {
    const double fx = f(x);
    if (fx < best.value) best = {x, fx};
  }
  return best;
}

ScalarMinimum scan_and_refine(const std::function<double(double)>& f, double lo,
                              double hi, int samples) {
  if (!(hi > lo)) return {lo, f(lo)};
  samples = std::max(samples, 3);
  const double step = (hi - lo) / (samples - 1);
  int best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    const double x = (i == samples - 1) ? hi : lo + i * step;
    const double v = f(x);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  const double a = lo + std::max(best - 1, 0) * step;
  const double b = std::min(hi, lo + std::min(best + 1, samples - 1) * step);
  ScalarMinimum refined = golden_section(f, a, b);
  const double x_best = (best == samples - 1) ? hi : lo + best * step;
  if (best_value < refined.value) return {x_best, best_value};
  return refined;
}

}  // namespace ucplab
