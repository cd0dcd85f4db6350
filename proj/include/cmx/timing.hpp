#pragma once

#include <chrono>
#include <cstdint>
#include <string>

namespace cmx {

/// Monotonic clock reading paired with a stage label.
struct TimerStamp {
  std::string stage;
  std::chrono::steady_clock::time_point at;
};

inline TimerStamp timer_stamp(std::string stage) {
  return {std::move(stage), std::chrono::steady_clock::now()};
}

inline std::uint64_t micros_between(const TimerStamp& from,
                                    const TimerStamp& to) {
  const auto us =
      std::chrono::duration_cast<std::chrono::microseconds>(to.at - from.at)
          .count();
  return us < 0 ? 0 : static_cast<std::uint64_t>(us);
}

/// Per-stage durations and byte counts for one full exchange. Stages that
/// did not run stay zero with their absent flag set.
struct TransactionTiming {
  std::uint64_t transaction_id = 0;
  std::string mode;  // "plain" or "compressed"
  std::uint64_t record_count = 0;

  std::uint64_t t_generate_us = 0;
  std::uint64_t t_compress_us = 0;
  std::uint64_t t_publish_send_us = 0;
  std::uint64_t t_lookup_us = 0;
  std::uint64_t t_invoke_us = 0;
  std::uint64_t t_decompress_us = 0;
  std::uint64_t t_consume_us = 0;

  bool compress_absent = true;
  bool decompress_absent = true;
  bool provider_stages_present = false;

  std::uint64_t payload_bytes = 0;
  std::uint64_t wire_bytes = 0;
  std::uint64_t digest = 0;

  std::string outcome = "ok";  // "ok" or "failed(<stage>)"

  bool ok() const { return outcome == "ok"; }

  /// Wall-clock path through the consumer: lookup + invoke + decompress +
  /// consume.
  std::uint64_t end_to_end_us() const {
    return t_lookup_us + t_invoke_us + t_decompress_us + t_consume_us;
  }
};

}  // namespace cmx
