#include "rsamp/scheduler.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_map>

#include "rsamp/errors.hpp"

namespace rsamp::sampling {

std::string_view variant_name(Variant v) noexcept {
  switch (v) {
    case Variant::baseline:
      return "baseline";
    case Variant::vr_m:
      return "vr-m";
    case Variant::vr_e:
      return "vr-e";
    case Variant::pvr_m:
      return "pvr-m";
    case Variant::pvr_e:
      return "pvr-e";
  }
  return "baseline";
}

std::optional<Variant> parse_variant(std::string_view name) noexcept {
  std::string lower(name);
  for (char& c : lower) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  for (const Variant v :
       {Variant::baseline, Variant::vr_m, Variant::vr_e, Variant::pvr_m, Variant::pvr_e}) {
    if (lower == variant_name(v)) {
      return v;
    }
  }
  return std::nullopt;
}

bool is_minibatch_family(Variant v) noexcept {
  return v == Variant::vr_m || v == Variant::pvr_m;
}

bool is_epoch_family(Variant v) noexcept {
  return v == Variant::vr_e || v == Variant::pvr_e;
}

bool is_probabilistic(Variant v) noexcept {
  return v == Variant::pvr_m || v == Variant::pvr_e;
}

std::size_t repetition_count(double epsilon, std::size_t total) noexcept {
  if (epsilon <= 0.0 || total == 0) {
    return 0;
  }
  const double raw = std::ceil(epsilon * static_cast<double>(total) - 1e-9);
  return std::min(total, static_cast<std::size_t>(std::max(raw, 0.0)));
}

std::size_t MiniBatchPlan::carried_count() const noexcept {
  return static_cast<std::size_t>(std::count(carried.begin(), carried.end(), true));
}

std::vector<SampleId> select_worst(std::span<const SampleId> ids, std::span<const double> losses,
                                   std::size_t k) {
  if (ids.size() != losses.size()) {
    throw ArgumentError("select_worst: " + std::to_string(ids.size()) + " ids but " +
                        std::to_string(losses.size()) + " losses");
  }
  std::unordered_map<SampleId, double> latest;
  latest.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    latest[ids[i]] = losses[i];
  }
  std::vector<std::pair<SampleId, double>> ranked(latest.begin(), latest.end());
  k = std::min(k, ranked.size());
  const auto worse = [](const auto& a, const auto& b) {
    if (a.second != b.second) {
      return a.second > b.second;
    }
    return a.first < b.first;
  };
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k), ranked.end(),
                    worse);
  std::vector<SampleId> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    out.push_back(ranked[i].first);
  }
  return out;
}

std::vector<SampleId> pvr_subsample(std::span<const SampleId> pool, Rng& rng) {
  if (pool.size() < 2) {
    throw ArgumentError("pvr_subsample: pool needs at least 2 ids, got " +
                        std::to_string(pool.size()));
  }
  if (pool.size() % 2 != 0) {
    throw ArgumentError("pvr_subsample: pool size must be even, got " +
                        std::to_string(pool.size()));
  }
  // Partial Fisher-Yates: the first k slots end up a uniform k-subset.
  std::vector<SampleId> work(pool.begin(), pool.end());
  const std::size_t k = work.size() / 2;
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.uniform_below(work.size() - i));
    std::swap(work[i], work[j]);
  }
  work.resize(k);
  return work;
}

namespace {

// Worst half of a doubled pool, clamped to what is available.
std::vector<SampleId> probabilistic_pick(std::span<const SampleId> ids,
                                         std::span<const double> losses, std::size_t k,
                                         std::size_t distinct, Rng& rng) {
  std::size_t pool_size = std::min(2 * k, distinct);
  pool_size -= pool_size % 2;
  if (pool_size < 2) {
    return select_worst(ids, losses, std::min(k, distinct));
  }
  const auto pool = select_worst(ids, losses, pool_size);
  return pvr_subsample(pool, rng);
}

std::size_t count_distinct(std::span<const SampleId> ids) {
  std::vector<SampleId> sorted(ids.begin(), ids.end());
  std::sort(sorted.begin(), sorted.end());
  return static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
}

}  // namespace

Scheduler::Scheduler(Variant variant, double epsilon, Rng shuffle_rng, Rng pvr_rng)
    : variant_(variant),
      epsilon_(epsilon),
      shuffle_rng_(std::move(shuffle_rng)),
      pvr_rng_(std::move(pvr_rng)) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    throw ArgumentError("epsilon must lie in [0, 1), got " + std::to_string(epsilon));
  }
}

void Scheduler::begin_epoch(std::size_t n) {
  if (n == 0) {
    throw ArgumentError("begin_epoch: training set is empty");
  }
  if (n > std::numeric_limits<SampleId>::max()) {
    throw ArgumentError("begin_epoch: training set too large for 32-bit sample ids");
  }
  if (in_epoch_) {
    throw StateError("begin_epoch: previous epoch has not ended");
  }
  if (n_ != 0 && n != n_) {
    throw ArgumentError("begin_epoch: training set size changed from " + std::to_string(n_) +
                        " to " + std::to_string(n));
  }
  n_ = n;
  const auto perm = rng_shuffle(shuffle_rng_, n);
  order_.assign(perm.begin(), perm.end());
  if (is_epoch_family(variant_) && !plan_.empty()) {
    if (plan_.size() > n) {
      throw ArgumentError("substitution plan larger than the training set");
    }
    for (std::size_t i = 0; i < plan_.size(); ++i) {
      if (plan_[i] >= n) {
        throw ArgumentError("substitution plan id " + std::to_string(plan_[i]) +
                            " outside the training set");
      }
      order_[i] = plan_[i];
    }
    // Spread the duplicates over the epoch instead of front-loading them.
    shuffle_rng_.shuffle(std::span(order_));
  }
  cursor_ = 0;
  carry_.clear();
  pending_.reset();
  epoch_losses_.assign(n, std::numeric_limits<double>::quiet_NaN());
  in_epoch_ = true;
  ++epochs_begun_;
}

std::optional<MiniBatchPlan> Scheduler::next_batch(std::size_t batch_size) {
  if (!in_epoch_) {
    throw StateError("next_batch: no epoch in progress");
  }
  if (batch_size == 0) {
    throw ArgumentError("next_batch: batch size must be positive");
  }
  if (pending_) {
    throw StateError("next_batch: losses of the previous batch were not recorded");
  }
  if (cursor_ >= order_.size()) {
    return std::nullopt;
  }
  const std::size_t take = std::min(batch_size, order_.size() - cursor_);
  MiniBatchPlan plan;
  plan.ids.assign(order_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                  order_.begin() + static_cast<std::ptrdiff_t>(cursor_ + take));
  plan.carried.assign(take, false);
  cursor_ += take;

  if (is_minibatch_family(variant_) && !carry_.empty()) {
    // The displaced stream ids are skipped for the rest of this epoch.
    const std::size_t slots = std::min(carry_.size(), take);
    for (std::size_t i = 0; i < slots; ++i) {
      plan.ids[take - slots + i] = carry_[i];
      plan.carried[take - slots + i] = true;
    }
  }
  pending_ = plan;
  pending_batch_size_ = batch_size;
  return plan;
}

void Scheduler::record_losses(const MiniBatchPlan& plan, std::span<const double> losses,
                              SampleLedger& ledger) {
  if (!pending_) {
    throw StateError("record_losses: no batch awaiting losses");
  }
  if (plan.ids != pending_->ids) {
    throw ArgumentError("record_losses: plan does not match the last issued batch");
  }
  if (losses.size() != plan.size()) {
    throw ArgumentError("record_losses: " + std::to_string(losses.size()) + " losses for a batch of " +
                        std::to_string(plan.size()));
  }
  if (ledger.size() < n_) {
    throw ArgumentError("record_losses: ledger smaller than the training set");
  }
  for (const double l : losses) {
    if (!std::isfinite(l)) {
      throw NumericalError("record_losses: non-finite loss");
    }
  }
  for (std::size_t i = 0; i < plan.size(); ++i) {
    ledger.record(plan.ids[i], losses[i]);
    epoch_losses_[plan.ids[i]] = losses[i];
  }

  if (is_minibatch_family(variant_)) {
    const std::size_t k = repetition_count(epsilon_, pending_batch_size_);
    const std::size_t distinct = count_distinct(plan.ids);
    if (variant_ == Variant::vr_m) {
      carry_ = select_worst(plan.ids, losses, k);
    } else {
      carry_ = probabilistic_pick(plan.ids, losses, k, distinct, pvr_rng_);
    }
  }
  pending_.reset();
}

void Scheduler::end_epoch() {
  const std::vector<double> snapshot = epoch_losses_;
  end_epoch(snapshot);
}

void Scheduler::end_epoch(std::span<const double> losses_by_id) {
  if (!in_epoch_) {
    throw StateError("end_epoch: no epoch in progress");
  }
  if (pending_ || cursor_ < order_.size()) {
    throw StateError("end_epoch: called mid-epoch (" + std::to_string(order_.size() - cursor_) +
                     " slots left)");
  }
  if (losses_by_id.size() != n_) {
    throw ArgumentError("end_epoch: expected " + std::to_string(n_) + " per-id losses, got " +
                        std::to_string(losses_by_id.size()));
  }
  rank_epoch(losses_by_id);
  carry_.clear();
  in_epoch_ = false;
}

void Scheduler::rank_epoch(std::span<const double> losses_by_id) {
  if (!is_epoch_family(variant_)) {
    return;
  }
  std::vector<SampleId> scored_ids;
  std::vector<double> scored_losses;
  for (std::size_t id = 0; id < losses_by_id.size(); ++id) {
    if (!std::isnan(losses_by_id[id])) {
      scored_ids.push_back(static_cast<SampleId>(id));
      scored_losses.push_back(losses_by_id[id]);
    }
  }
  const std::size_t k = repetition_count(epsilon_, n_);
  if (variant_ == Variant::vr_e) {
    plan_ = select_worst(scored_ids, scored_losses, k);
  } else {
    plan_ = k == 0 ? std::vector<SampleId>{}
                   : probabilistic_pick(scored_ids, scored_losses, k, scored_ids.size(), pvr_rng_);
  }
}

void Scheduler::set_substitution_plan(std::vector<SampleId> plan) {
  if (!is_epoch_family(variant_)) {
    throw StateError("set_substitution_plan: only the per-epoch variants use a plan");
  }
  if (in_epoch_) {
    throw StateError("set_substitution_plan: epoch in progress");
  }
  plan_ = std::move(plan);
}

}  // namespace rsamp::sampling
