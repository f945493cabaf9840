#include "rsamp/ledger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rsamp/errors.hpp"

namespace rsamp::sampling {

SampleLedger::SampleLedger(std::size_t n)
    : usage_(n, 0), last_loss_(n, std::numeric_limits<double>::quiet_NaN()) {}

void SampleLedger::check_id(SampleId id) const {
  if (id >= usage_.size()) {
    throw ArgumentError("sample id " + std::to_string(id) + " outside ledger of size " +
                        std::to_string(usage_.size()));
  }
}

void SampleLedger::record(SampleId id, double loss) {
  check_id(id);
  ++usage_[id];
  ++total_;
  last_loss_[id] = loss;
}

void SampleLedger::restore(SampleId id, std::uint64_t usage, std::optional<double> last_loss) {
  check_id(id);
  total_ = total_ - usage_[id] + usage;
  usage_[id] = usage;
  last_loss_[id] = last_loss.value_or(std::numeric_limits<double>::quiet_NaN());
}

std::uint64_t SampleLedger::usage(SampleId id) const {
  check_id(id);
  return usage_[id];
}

std::optional<double> SampleLedger::last_loss(SampleId id) const {
  check_id(id);
  if (std::isnan(last_loss_[id])) {
    return std::nullopt;
  }
  return last_loss_[id];
}

std::uint64_t SampleLedger::max_usage() const noexcept {
  return usage_.empty() ? 0 : *std::max_element(usage_.begin(), usage_.end());
}

bool SampleLedger::operator==(const SampleLedger& other) const {
  if (usage_ != other.usage_ || total_ != other.total_) {
    return false;
  }
  for (std::size_t i = 0; i < last_loss_.size(); ++i) {
    const double a = last_loss_[i];
    const double b = other.last_loss_[i];
    if (!(a == b || (std::isnan(a) && std::isnan(b)))) {
      return false;
    }
  }
  return true;
}

RepetitionHistogram repetition_histogram(const SampleLedger& ledger) {
  RepetitionHistogram hist;
  for (const auto count : ledger.usage_counts()) {
    ++hist[count];
  }
  return hist;
}

}  // namespace rsamp::sampling
