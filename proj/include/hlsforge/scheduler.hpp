#pragma once

// List scheduling under I/O timing and memory-port constraints, plus an
// exhaustive oracle for tiny instances.
//
// Each control step the scheduler builds the ready list, drops operations
// whose memory operands cannot all be read in time (accessibility), and
// places the rest in priority order: lowest remaining mobility first, then
// smallest margin (alap - step), then operations continuing a burst on some
// port, then lowest id. An operation out of margin gets a new operator
// instance if operators are the bottleneck; if a memory port is, scheduling
// fails with a diagnosis.

#include <map>
#include <optional>
#include <variant>

#include "hlsforge/constraints.hpp"
#include "hlsforge/memory.hpp"
#include "hlsforge/sfg.hpp"

namespace hlsforge {

struct MemRead {
  std::string data;
  std::string bank;
  int port = 0;
  int cycle = 0;
  int span = 1;
};

struct ScheduleEntry {
  int op = -1;
  int start = 0;
  int end = 0;  // start + latency
  int instance = 0;
  std::vector<MemRead> reads;
};

struct Schedule {
  std::map<int, ScheduleEntry> entries;    // op id -> entry
  std::map<std::string, int> io_times;     // I/O node name -> cycle
  std::map<OpKind, int> operator_pool;     // instances per kind
  std::map<std::string, AccessTable> access;  // bank id -> final timeline
  int latency = 0;

  bool empty() const { return entries.empty(); }
};

enum class InfeasibilityCause { MemoryConflict, Timing };

struct InfeasibilityReport {
  int op = -1;
  int step = 0;
  InfeasibilityCause cause = InfeasibilityCause::MemoryConflict;
  std::string suggestion;
};

using ScheduleResult = std::variant<Schedule, InfeasibilityReport>;

struct PriorityKey {
  int mobility = 0;
  int margin = 0;
  int burst_rank = 1;  // 0 when the op continues an address burst
  int op = -1;

  auto operator<=>(const PriorityKey &) const = default;
};

PriorityKey priority_key(int op, const TimingSolution &ts, int step,
                         int remaining_mobility, bool burst_preferred);

// Steps the scheduler may iterate (exclusive upper bound on control steps).
int default_horizon(const Sfg &sfg, const Gcg &gcg, const TimingSolution &ts,
                    const MemoryMapping &mapping);

ScheduleResult list_schedule(const Sfg &sfg, const Gcg &gcg,
                             const TimingSolution &ts,
                             const MemoryMapping &mapping,
                             const OperatorLibrary &lib,
                             std::optional<int> horizon = std::nullopt);

// Exhaustive minimum-latency search over operation start times and memory
// access orderings; nullopt when no valid schedule exists within the
// horizon. Guarded to <= 8 operations and horizon <= 16. Deterministic:
// returns the lexicographically smallest optimum (start times by op id).
std::optional<Schedule> brute_force_schedule(const Sfg &sfg, const Gcg &gcg,
                                             const MemoryMapping &mapping,
                                             const OperatorLibrary &lib,
                                             int horizon);

}  // namespace hlsforge
