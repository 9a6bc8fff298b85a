#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace mixest {

// ---------------------------------------------------------------------------
// Hashing

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);
// FNV-1a of a file's bytes, hex encoded. Throws InputError when unreadable.
std::string hash_file(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Random streams
//
// Every random draw in the pipeline comes from a std::mt19937_64 seeded from a
// named substream of the user seed, so that changing one stage (e.g. the
// number of bootstrap replicates) never perturbs another stage's draws.

using Engine = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t substream_seed(std::uint64_t seed, std::string_view name, std::uint64_t i = 0,
                             std::uint64_t j = 0);

// ---------------------------------------------------------------------------
// Numerics

// Shortest text that round-trips is not enough for canonical files; this
// always prints 17 significant digits.
std::string format_double(double value);

// Round half to even, independent of the current FP rounding mode.
long long round_half_even(double value);

// ---------------------------------------------------------------------------
// Logging (stderr by default; tests swap the sink)

using LogSink = std::function<void(std::string_view level, std::string_view message)>;
void set_log_sink(LogSink sink);  // nullptr restores the stderr sink
void log_info(std::string_view message);
void log_warn(std::string_view message);

// ---------------------------------------------------------------------------
// Parallel loop over [0, n). Results must be written to per-index slots so the
// output is independent of the schedule. The first exception thrown by any
// worker is rethrown on the calling thread.

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        if (failed.load(std::memory_order_relaxed)) return;
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace mixest
