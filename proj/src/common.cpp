#include "mixest/common.hpp"

#include "mixest/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <system_error>

namespace mixest {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xf];
    value >>= 4;
  }
  return out;
}

std::string hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path.string() + "'");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    h = fnv1a64(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
  }
  return hex64(h);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t substream_seed(std::uint64_t seed, std::string_view name, std::uint64_t i,
                             std::uint64_t j) {
  std::uint64_t s = splitmix64(seed ^ fnv1a64(name));
  s = splitmix64(s ^ i);
  return splitmix64(s ^ (j * 0x9e3779b97f4a7c15ULL));
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

long long round_half_even(double value) {
  const double fl = std::floor(value);
  const double diff = value - fl;
  long long base = static_cast<long long>(fl);
  if (diff > 0.5) return base + 1;
  if (diff < 0.5) return base;
  return (base % 2 == 0) ? base : base + 1;
}

namespace {

std::mutex& log_mutex() {
  static std::mutex m;
  return m;
}

void stderr_sink(std::string_view level, std::string_view message) {
  std::cerr << "[" << level << "] " << message << '\n';
}

LogSink& sink() {
  static LogSink s = stderr_sink;
  return s;
}

void emit(std::string_view level, std::string_view message) {
  std::lock_guard lock(log_mutex());
  if (sink()) sink()(level, message);
}

}  // namespace

void set_log_sink(LogSink s) {
  std::lock_guard lock(log_mutex());
  sink() = s ? std::move(s) : LogSink(stderr_sink);
}

void log_info(std::string_view message) { emit("info", message); }
void log_warn(std::string_view message) { emit("warn", message); }

}  // namespace mixest
