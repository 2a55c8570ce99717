#pragma once

// Time-frequency grid with primary-user occupancy, channel cost model, and a
// ledger of reserved blocks. Slots are numbered 1..T, channels 0..C-1.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace specres {

class GridError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CapacityExceeded : public GridError {
 public:
  using GridError::GridError;
};

class UnknownBooking : public GridError {
 public:
  using GridError::GridError;
};

class AlreadyReleased : public GridError {
 public:
  using GridError::GridError;
};

class TFGrid {
 public:
  TFGrid(std::uint32_t horizon, std::uint32_t channels, std::uint64_t seed,
         std::vector<bool> occupancy);

  [[nodiscard]] std::uint32_t horizon() const noexcept { return horizon_; }
  [[nodiscard]] std::uint32_t channels() const noexcept { return channels_; }
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

  /// True when a primary user occupies the block. Slot is 1-based.
  [[nodiscard]] bool occupied(std::uint32_t slot, std::uint32_t channel) const;
  /// Channels not used by primary users at the slot.
  [[nodiscard]] std::uint32_t free_channels(std::uint32_t slot) const;

  bool operator==(const TFGrid&) const = default;

 private:
  void check_slot(std::uint32_t slot) const;

  std::uint32_t horizon_;
  std::uint32_t channels_;
  std::uint64_t seed_;
  std::vector<bool> occupancy_;  // row-major, slot-1 then channel
};

/// i.i.d. Bernoulli(occupancy_prob) occupancy per block, deterministic in seed.
TFGrid generate_grid(std::uint32_t horizon, std::uint32_t channels, double occupancy_prob,
                     std::uint64_t seed);

enum class CostKind { Inverse, LinearDecreasing, Constant };

std::string to_string(CostKind k);
CostKind parse_cost_kind(const std::string& text);

/// g(n): inverse a/n, linear max(0, a - b n), or constant a. g(0) is the
/// configured maximum cost (defaults to g(1)).
struct ChannelCostModel {
  CostKind kind = CostKind::Constant;
  double a = 0.1;
  double b = 0.0;
  std::optional<double> max_cost;

  [[nodiscard]] double cost_at_zero() const;
  void validate() const;

  static ChannelCostModel constant(double a) { return {CostKind::Constant, a, 0.0, std::nullopt}; }
  static ChannelCostModel inverse(double a, std::optional<double> max_cost = std::nullopt) {
    return {CostKind::Inverse, a, 0.0, max_cost};
  }
  static ChannelCostModel linear(double a, double b, std::optional<double> max_cost = std::nullopt) {
    return {CostKind::LinearDecreasing, a, b, max_cost};
  }
};

double channel_cost(std::uint32_t free_channels, const ChannelCostModel& model);

/// (1/T) sum_t g(n_t).
double time_average_cost(const TFGrid& grid, const ChannelCostModel& model);

struct DemandModel {
  std::uint32_t mc_period = 1;
  std::uint32_t nonmc_period = 10;
  std::uint64_t mc_count = 20;
  std::uint64_t nonmc_count = 80;

  void validate() const;
};

struct SlotProportion {
  double pi_c = 0.0;
  /// No application of either type is active at the slot; pi_c is 0 by convention.
  bool empty = false;
};

SlotProportion per_slot_proportions(const DemandModel& demand, std::uint32_t slot);

enum class BookingState { Held, Released };

struct Booking {
  std::uint64_t id = 0;
  std::uint32_t slot = 0;
  std::uint32_t channel = 0;
  std::uint64_t app = 0;
  BookingState state = BookingState::Held;

  bool operator==(const Booking&) const = default;
};

class ReservationLedger {
 public:
  /// Lowest-index channel at `slot` that is neither primary-occupied nor held.
  std::uint64_t reserve_block(const TFGrid& grid, std::uint32_t slot, std::uint64_t app = 0);
  void release_block(std::uint64_t booking_id);

  [[nodiscard]] const std::vector<Booking>& bookings() const noexcept { return bookings_; }
  [[nodiscard]] const Booking& booking(std::uint64_t id) const;
  [[nodiscard]] std::uint32_t held_at(std::uint32_t slot) const;
  [[nodiscard]] bool is_held(std::uint32_t slot, std::uint32_t channel) const;

  /// Rebuilds a ledger from records; rejects duplicate ids or double holds.
  static ReservationLedger from_bookings(std::vector<Booking> bookings);

  bool operator==(const ReservationLedger& other) const { return bookings_ == other.bookings_; }

 private:
  std::vector<Booking> bookings_;  // ordered by id; ids are 1-based positions
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> active_;
};

// Text format: header "T C seed", then T lines of C '0'/'1' characters.
void write_grid(std::ostream& os, const TFGrid& grid);
TFGrid read_grid(std::istream& is);

// One record per line: id,slot,channel,app,state (state is held|released).
void write_ledger(std::ostream& os, const ReservationLedger& ledger);
ReservationLedger read_ledger(std::istream& is);

}  // namespace specres
