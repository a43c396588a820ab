#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "cats/rational.hpp"

namespace cats {

enum class BanReason { none, resource_exhaustion, credit_exhaustion };

/// Per-driver account. Resources accumulate across periods and may go
/// negative (fines are never refused); credit is capped at l0 and resets
/// every period. Ban flags latch until the next grant.
struct Ledger {
  Rational resources{0};
  Rational credit{0};
  bool banned = false;
  BanReason ban_reason = BanReason::none;
};

struct EconomyConstants {
  Rational p0{10};              // periodic resource grant
  Rational p_min{2};            // resource floor: at or below -> banned
  Rational p_floor_norm{2};     // normalization floor in sigma's resource term
  Rational l0{10};              // per-period credit grant (also the cap)
  int delta_T = 7;              // allocation period, days
  Rational congestion_fee{2};

  bool valid() const {
    return Rational{0} < p_min && p_min < p0 && l0 > Rational{0} && delta_T >= 1 &&
           congestion_fee >= Rational{0} && p_floor_norm < p0;
  }
};

/// Tariff for one violation type: resources paid and credit forfeited.
struct TariffEntry {
  Rational f_res{2};
  Rational f_cre{2};
};

/// Indexed by violation type k. Replication mode uses a single type.
using ViolationTariff = std::vector<TariffEntry>;

enum class TransferCause { fine, congestion_fee, grant };

/// One resource movement. payee = kSink means the amount leaves the system
/// (congestion fees always; fines too when there are no reporters).
struct Transfer {
  int payer = 0;
  int payee = 0;
  Rational amount{0};
  TransferCause cause = TransferCause::fine;
};

inline constexpr int kSink = -1;
inline constexpr int kSource = -2;  // payer of grants

inline std::vector<Ledger> init_ledgers(std::size_t n, const EconomyConstants& c) {
  if (n == 0) throw std::invalid_argument("init_ledgers: empty population");
  if (!c.valid()) throw std::invalid_argument("init_ledgers: invalid economy constants");
  return std::vector<Ledger>(n, Ledger{c.p0, c.l0, false, BanReason::none});
}

/// Credit <= 0 or resources <= p_min bans the driver; the flag latches (a
/// later reward cannot un-ban) and the first cause wins.
inline void reevaluate_ban(Ledger& l, const EconomyConstants& c) {
  if (l.banned) return;
  if (l.credit <= Rational{0}) {
    l.banned = true;
    l.ban_reason = BanReason::credit_exhaustion;
  } else if (l.resources <= c.p_min) {
    l.banned = true;
    l.ban_reason = BanReason::resource_exhaustion;
  }
}

/// Period boundary: resources accumulate, credit resets to the cap, and
/// both ban causes end.
inline void periodic_grant(Ledger& l, const EconomyConstants& c) {
  l.resources = l.resources + c.p0;
  l.credit = c.l0;
  l.banned = false;
  l.ban_reason = BanReason::none;
}

/// Fine an offender and split the resource part evenly across the reporter
/// set. The split is exact rational arithmetic, so the conservation
/// invariant (offender loss == sum of reporter gains) holds bit-for-bit
/// even for thirds.
inline std::vector<Transfer> apply_fine(int offender_id, Ledger& offender,
                                        std::span<const int> reporter_ids,
                                        std::span<Ledger* const> reporters, int k,
                                        const ViolationTariff& tariff,
                                        const EconomyConstants& c) {
  if (reporters.empty()) throw std::invalid_argument("apply_fine: empty reporter set");
  if (reporters.size() != reporter_ids.size())
    throw std::invalid_argument("apply_fine: reporter id/ledger mismatch");
  const TariffEntry& t = tariff.at(static_cast<std::size_t>(k));
  offender.resources = offender.resources - t.f_res;
  offender.credit = offender.credit - t.f_cre;
  Rational share = t.f_res / Rational{static_cast<std::int64_t>(reporters.size())};
  std::vector<Transfer> transfers;
  transfers.reserve(reporters.size());
  for (std::size_t i = 0; i < reporters.size(); ++i) {
    reporters[i]->resources = reporters[i]->resources + share;
    transfers.push_back({offender_id, reporter_ids[i], share, TransferCause::fine});
  }
  reevaluate_ban(offender, c);
  return transfers;
}

/// Baseline enforcement: the offender pays the same tariff but the resource
/// part leaves the system (no reporters to reward).
inline Transfer apply_fine_sunk(int offender_id, Ledger& offender, int k,
                                const ViolationTariff& tariff, const EconomyConstants& c) {
  const TariffEntry& t = tariff.at(static_cast<std::size_t>(k));
  offender.resources = offender.resources - t.f_res;
  offender.credit = offender.credit - t.f_cre;
  reevaluate_ban(offender, c);
  return {offender_id, kSink, t.f_res, TransferCause::fine};
}

/// Edge-triggered on entering a congested segment; the fee is sunk.
inline Transfer charge_congestion(int vehicle_id, Ledger& l, const EconomyConstants& c) {
  l.resources = l.resources - c.congestion_fee;
  reevaluate_ban(l, c);
  return {vehicle_id, kSink, c.congestion_fee, TransferCause::congestion_fee};
}

inline bool is_allowed_to_drive(const Ledger& l) { return !l.banned; }

}  // namespace cats
