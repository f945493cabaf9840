#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rsamp/ledger.hpp"
#include "rsamp/rng.hpp"

namespace rsamp::sampling {

// baseline : uniform reshuffle every epoch.
// vr_m     : carry the worst ceil(eps*B) samples of each batch into the next one.
// vr_e     : seed the next epoch with ceil(eps*n) duplicates of this epoch's worst samples.
// pvr_m/e  : as above, but draw half of a twice-as-large worst pool uniformly.
enum class Variant { baseline, vr_m, vr_e, pvr_m, pvr_e };

std::string_view variant_name(Variant v) noexcept;
std::optional<Variant> parse_variant(std::string_view name) noexcept;
bool is_minibatch_family(Variant v) noexcept;
bool is_epoch_family(Variant v) noexcept;
bool is_probabilistic(Variant v) noexcept;

// ceil(epsilon * total), ignoring floating-point fuzz below 1e-9 so that
// e.g. 0.15 * 20 counts as exactly 3.
std::size_t repetition_count(double epsilon, std::size_t total) noexcept;

struct MiniBatchPlan {
  std::vector<SampleId> ids;
  // carried[i] marks a position re-injected from the previous batch.
  std::vector<bool> carried;

  std::size_t size() const noexcept { return ids.size(); }
  std::size_t carried_count() const noexcept;

  bool operator==(const MiniBatchPlan&) const = default;
};

// The k ids with the highest loss, worst first; ties go to the lowest id.
// When an id appears several times its last loss is the one ranked.
std::vector<SampleId> select_worst(std::span<const SampleId> ids, std::span<const double> losses,
                                   std::size_t k);

// Half of `pool` drawn uniformly without replacement, in draw order.
// The pool must hold an even number (>= 2) of ids.
std::vector<SampleId> pvr_subsample(std::span<const SampleId> pool, Rng& rng);

// Drives the order in which training samples reach the optimizer.
//
// Lifecycle per epoch: begin_epoch -> (next_batch -> record_losses)* -> end_epoch.
// Every plan handed out by next_batch must be recorded before the next one is
// requested, so the ledger always reflects every consumed slot.
class Scheduler {
 public:
  // shuffle_rng drives epoch orders; pvr_rng drives the probabilistic
  // subsampling. Keeping them apart makes VR and PVR runs share shuffles.
  Scheduler(Variant variant, double epsilon, Rng shuffle_rng, Rng pvr_rng);

  Variant variant() const noexcept { return variant_; }
  double epsilon() const noexcept { return epsilon_; }

  void begin_epoch(std::size_t n);
  // std::nullopt once the epoch order is exhausted.
  std::optional<MiniBatchPlan> next_batch(std::size_t batch_size);
  void record_losses(const MiniBatchPlan& plan, std::span<const double> losses,
                     SampleLedger& ledger);
  // Ranks the losses gathered by record_losses during this epoch.
  void end_epoch();
  // Same, with explicit per-id losses (NaN = not scored this epoch).
  void end_epoch(std::span<const double> losses_by_id);

  bool epoch_in_progress() const noexcept { return in_epoch_; }
  std::size_t epochs_begun() const noexcept { return epochs_begun_; }
  std::span<const SampleId> epoch_order() const noexcept { return order_; }
  std::span<const SampleId> carryover() const noexcept { return carry_; }
  std::span<const SampleId> substitution_plan() const noexcept { return plan_; }
  // Latest loss per id this epoch, NaN where unscored.
  std::span<const double> epoch_losses() const noexcept { return epoch_losses_; }

  // Replaces the plan applied by the next begin_epoch (E-family only).
  void set_substitution_plan(std::vector<SampleId> plan);

 private:
  void rank_epoch(std::span<const double> losses_by_id);

  Variant variant_;
  double epsilon_;
  Rng shuffle_rng_;
  Rng pvr_rng_;

  bool in_epoch_ = false;
  std::size_t epochs_begun_ = 0;
  std::size_t n_ = 0;
  std::vector<SampleId> order_;
  std::size_t cursor_ = 0;
  std::optional<MiniBatchPlan> pending_;
  std::size_t pending_batch_size_ = 0;
  std::vector<SampleId> carry_;
  std::vector<SampleId> plan_;
  std::vector<double> epoch_losses_;
};

}  // namespace rsamp::sampling
