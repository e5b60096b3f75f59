#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fabula {

uint64_t fnv1a64(std::string_view data);
uint64_t splitmix64(uint64_t x);

// Deterministic generator behind every sampling decision in the project.
// All draws are spelled out here rather than delegated to std:: distributions,
// so a (seed, input) pair maps to the same output on every platform.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64();
  double next_unit();               // [0, 1)
  size_t next_below(size_t bound);  // [0, bound), bound > 0

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[next_below(i)]);
    }
  }

  // Child stream keyed by label; independent of how much the parent was used.
  Rng derive(std::string_view label) const;

 private:
  uint64_t state_;
};

std::string lower_ascii(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_whitespace(std::string_view s);
std::string_view trim(std::string_view s);
std::string format_real(double v);

// Runs fn(first, last) over contiguous chunks of [0, n). Callers write results
// into preallocated slots, so the chunking never changes output.
void parallel_for(size_t n, const std::function<void(size_t, size_t)>& fn);

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::string& path);

// Calls fn(line_number, line) for every line, 1-based, '\r' stripped.
void for_each_line(const std::string& path,
                   const std::function<void(size_t, const std::string&)>& fn);
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace fabula
