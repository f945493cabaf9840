#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace rsamp::sampling {

using SampleId = std::uint32_t;

// Per-sample bookkeeping: how often each sample fed an optimizer step and the
// loss it had the last time it was scored.
class SampleLedger {
 public:
  SampleLedger() = default;
  explicit SampleLedger(std::size_t n);

  std::size_t size() const noexcept { return usage_.size(); }

  // One optimizer slot consumed by `id` with the given pre-update loss.
  void record(SampleId id, double loss);

  // Overwrites one entry wholesale; used when reloading a saved ledger.
  void restore(SampleId id, std::uint64_t usage, std::optional<double> last_loss);

  std::uint64_t usage(SampleId id) const;
  std::optional<double> last_loss(SampleId id) const;
  std::span<const std::uint64_t> usage_counts() const noexcept { return usage_; }
  // Equals the sum of usage counts.
  std::uint64_t total_consumed() const noexcept { return total_; }
  std::uint64_t max_usage() const noexcept;

  bool operator==(const SampleLedger& other) const;

 private:
  void check_id(SampleId id) const;

  std::vector<std::uint64_t> usage_;
  std::vector<double> last_loss_;  // NaN = never scored
  std::uint64_t total_ = 0;
};

// usage count -> number of samples with that count. Sums to ledger.size().
using RepetitionHistogram = std::map<std::uint64_t, std::uint64_t>;

RepetitionHistogram repetition_histogram(const SampleLedger& ledger);

}  // namespace rsamp::sampling
