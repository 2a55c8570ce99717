#include "specres/spectrum_grid.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "specres/contract_core.hpp"
#include "specres/market_sim.hpp"

namespace specres {

TFGrid::TFGrid(std::uint32_t horizon, std::uint32_t channels, std::uint64_t seed,
               std::vector<bool> occupancy)
    : horizon_(horizon), channels_(channels), seed_(seed), occupancy_(std::move(occupancy)) {
  if (horizon < 1 || channels < 1) throw DomainError("grid needs T >= 1 and C >= 1");
  if (occupancy_.size() != static_cast<std::size_t>(horizon) * channels) {
    throw DomainError("occupancy size does not match T x C");
  }
}

void TFGrid::check_slot(std::uint32_t slot) const {
  if (slot < 1 || slot > horizon_) {
    std::ostringstream os;
    os << "slot " << slot << " outside horizon 1.." << horizon_;
    throw DomainError(os.str());
  }
}

bool TFGrid::occupied(std::uint32_t slot, std::uint32_t channel) const {
  check_slot(slot);
  if (channel >= channels_) throw DomainError("channel index out of range");
  return occupancy_[static_cast<std::size_t>(slot - 1) * channels_ + channel];
}

std::uint32_t TFGrid::free_channels(std::uint32_t slot) const {
  check_slot(slot);
  const auto row = occupancy_.begin() + static_cast<std::ptrdiff_t>(slot - 1) * channels_;
  return channels_ - static_cast<std::uint32_t>(std::count(row, row + channels_, true));
}

TFGrid generate_grid(std::uint32_t horizon, std::uint32_t channels, double occupancy_prob,
                     std::uint64_t seed) {
  if (!(occupancy_prob >= 0.0 && occupancy_prob <= 1.0)) {
    throw DomainError("occupancy_prob must lie in [0, 1]");
  }
  if (horizon < 1 || channels < 1) throw DomainError("grid needs T >= 1 and C >= 1");
  std::vector<bool> occ(static_cast<std::size_t>(horizon) * channels);
  for (std::uint32_t t = 0; t < horizon; ++t) {
    AgentStream rng(seed, t);
    for (std::uint32_t c = 0; c < channels; ++c) {
      occ[static_cast<std::size_t>(t) * channels + c] = rng.uniform() < occupancy_prob;
    }
  }
  return {horizon, channels, seed, std::move(occ)};
}

std::string to_string(CostKind k) {
  switch (k) {
    case CostKind::Inverse: return "inverse";
    case CostKind::LinearDecreasing: return "linear";
    case CostKind::Constant: return "constant";
  }
  return "?";
}

CostKind parse_cost_kind(const std::string& text) {
  if (text == "inverse") return CostKind::Inverse;
  if (text == "linear" || text == "linear-decreasing") return CostKind::LinearDecreasing;
  if (text == "constant") return CostKind::Constant;
  throw DomainError("unknown cost model '" + text + "' (expected inverse|linear|constant)");
}

namespace {

double cost_positive(std::uint32_t n, const ChannelCostModel& m) {
  switch (m.kind) {
    case CostKind::Inverse: return m.a / static_cast<double>(n);
    case CostKind::LinearDecreasing: return std::max(0.0, m.a - m.b * static_cast<double>(n));
    case CostKind::Constant: return m.a;
  }
  return 0.0;
}

}  // namespace

double ChannelCostModel::cost_at_zero() const { return max_cost.value_or(cost_positive(1, *this)); }

void ChannelCostModel::validate() const {
  if (!(a >= 0.0) || !(b >= 0.0)) throw DomainError("cost coefficients must be nonnegative");
  if (max_cost && *max_cost < cost_positive(1, *this)) {
    throw DomainError("max_cost must be at least g(1) so cost stays nonincreasing");
  }
}

double channel_cost(std::uint32_t free_channels, const ChannelCostModel& model) {
  if (free_channels == 0) return model.cost_at_zero();
  return cost_positive(free_channels, model);
}

double time_average_cost(const TFGrid& grid, const ChannelCostModel& model) {
  model.validate();
  double sum = 0.0;
  for (std::uint32_t t = 1; t <= grid.horizon(); ++t) sum += channel_cost(grid.free_channels(t), model);
  return sum / grid.horizon();
}

void DemandModel::validate() const {
  if (mc_period < 1 || nonmc_period < 1) throw DomainError("demand periods must be >= 1");
}

SlotProportion per_slot_proportions(const DemandModel& demand, std::uint32_t slot) {
  demand.validate();
  if (slot < 1) throw DomainError("slot index starts at 1");
  const std::uint64_t mc = slot % demand.mc_period == 0 ? demand.mc_count : 0;
  const std::uint64_t nonmc = slot % demand.nonmc_period == 0 ? demand.nonmc_count : 0;
  if (mc + nonmc == 0) return {0.0, true};
  return {static_cast<double>(mc) / static_cast<double>(mc + nonmc), false};
}

std::uint64_t ReservationLedger::reserve_block(const TFGrid& grid, std::uint32_t slot,
                                               std::uint64_t app) {
  for (std::uint32_t c = 0; c < grid.channels(); ++c) {
    if (grid.occupied(slot, c) || active_.contains({slot, c})) continue;
    const std::uint64_t id = bookings_.size() + 1;
    bookings_.push_back({id, slot, c, app, BookingState::Held});
    active_.emplace(std::pair{slot, c}, id);
    return id;
  }
  std::ostringstream os;
  os << "no free unoccupied channel at slot " << slot;
  throw CapacityExceeded(os.str());
}

const Booking& ReservationLedger::booking(std::uint64_t id) const {
  if (id < 1 || id > bookings_.size()) {
    throw UnknownBooking("unknown booking id " + std::to_string(id));
  }
  return bookings_[id - 1];
}

void ReservationLedger::release_block(std::uint64_t booking_id) {
  (void)booking(booking_id);  // throws UnknownBooking
  Booking& b = bookings_[booking_id - 1];
  if (b.state == BookingState::Released) {
    throw AlreadyReleased("booking " + std::to_string(booking_id) + " already released");
  }
  b.state = BookingState::Released;
  active_.erase({b.slot, b.channel});
}

std::uint32_t ReservationLedger::held_at(std::uint32_t slot) const {
  std::uint32_t n = 0;
  for (auto it = active_.lower_bound({slot, 0}); it != active_.end() && it->first.first == slot; ++it) ++n;
  return n;
}

bool ReservationLedger::is_held(std::uint32_t slot, std::uint32_t channel) const {
  return active_.contains({slot, channel});
}

ReservationLedger ReservationLedger::from_bookings(std::vector<Booking> bookings) {
  ReservationLedger ledger;
  for (std::size_t i = 0; i < bookings.size(); ++i) {
    const Booking& b = bookings[i];
    if (b.id != i + 1) throw GridError("booking ids must be 1..N in order");
    if (b.state == BookingState::Held && !ledger.active_.emplace(std::pair{b.slot, b.channel}, b.id).second) {
      throw GridError("two held bookings share a block");
    }
  }
  ledger.bookings_ = std::move(bookings);
  return ledger;
}

void write_grid(std::ostream& os, const TFGrid& grid) {
  os << grid.horizon() << ' ' << grid.channels() << ' ' << grid.seed() << '\n';
  for (std::uint32_t t = 1; t <= grid.horizon(); ++t) {
    for (std::uint32_t c = 0; c < grid.channels(); ++c) os << (grid.occupied(t, c) ? '1' : '0');
    os << '\n';
  }
}

TFGrid read_grid(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw GridError("grid file: missing header");
  std::istringstream hs(header);
  std::uint64_t horizon = 0, channels = 0, seed = 0;
  std::string extra;
  if (!(hs >> horizon >> channels >> seed) || (hs >> extra)) {
    throw GridError("grid file: header must be 'T C seed'");
  }
  if (horizon < 1 || channels < 1 || horizon > UINT32_MAX || channels > UINT32_MAX) {
    throw GridError("grid file: invalid dimensions");
  }
  std::vector<bool> occ;
  occ.reserve(horizon * channels);
  std::string line;
  for (std::uint64_t t = 0; t < horizon; ++t) {
    if (!std::getline(is, line) || line.size() != channels) {
      throw GridError("grid file: slot row " + std::to_string(t + 1) + " malformed");
    }
    for (char ch : line) {
      if (ch != '0' && ch != '1') throw GridError("grid file: occupancy must be 0/1");
      occ.push_back(ch == '1');
    }
  }
  return {static_cast<std::uint32_t>(horizon), static_cast<std::uint32_t>(channels), seed, std::move(occ)};
}

void write_ledger(std::ostream& os, const ReservationLedger& ledger) {
  for (const Booking& b : ledger.bookings()) {
    os << b.id << ',' << b.slot << ',' << b.channel << ',' << b.app << ','
       << (b.state == BookingState::Held ? "held" : "released") << '\n';
  }
}

ReservationLedger read_ledger(std::istream& is) {
  std::vector<Booking> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string fields[5];
    for (int i = 0; i < 5; ++i) {
      if (!std::getline(ls, fields[i], i < 4 ? ',' : '\n')) throw GridError("ledger: malformed record '" + line + "'");
    }
    Booking b;
    try {
      b.id = std::stoull(fields[0]);
      b.slot = static_cast<std::uint32_t>(std::stoul(fields[1]));
      b.channel = static_cast<std::uint32_t>(std::stoul(fields[2]));
      b.app = std::stoull(fields[3]);
    } catch (const std::exception&) {
      throw GridError("ledger: malformed record '" + line + "'");
    }
    if (fields[4] == "held") {
      b.state = BookingState::Held;
    } else if (fields[4] == "released") {
      b.state = BookingState::Released;
    } else {
      throw GridError("ledger: unknown state '" + fields[4] + "'");
    }
    out.push_back(b);
  }
  return ReservationLedger::from_bookings(std::move(out));
}

}  // namespace specres
