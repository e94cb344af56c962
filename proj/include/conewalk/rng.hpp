#pragma once

#include <array>
#include <cstdint>

namespace conewalk {

/// Counter-based random stream (Philox4x32-10).
///
/// A stream is the triple (key, stream id, position). Draw k of a stream is a
/// pure function of that triple, so streams can be split and skipped without
/// any shared state: `child(i)` derives an independent stream for path or
/// trial i, and `advanced(n)` is the continuation after n draws.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0) noexcept;

  [[nodiscard]] std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  [[nodiscard]] double uniform() noexcept;
  /// Uniform on (0, 1).
  [[nodiscard]] double uniform_open() noexcept;
  /// Standard normal via Box-Muller (two uniforms per call; portable bit-for-bit).
  [[nodiscard]] double normal() noexcept;

  [[nodiscard]] RngStream child(std::uint64_t index) const noexcept;
  [[nodiscard]] RngStream advanced(std::uint64_t n) const noexcept;

  [[nodiscard]] std::uint64_t position() const noexcept { return position_; }
  [[nodiscard]] std::uint64_t stream_id() const noexcept { return stream_id_; }

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  RngStream(std::array<std::uint32_t, 2> key, std::uint64_t stream_id, std::uint64_t position) noexcept
      : key_(key), stream_id_(stream_id), position_(position) {}

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_id_;
  std::uint64_t position_ = 0;
};

/// Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace conewalk
