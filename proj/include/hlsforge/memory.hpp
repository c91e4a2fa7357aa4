#pragma once

// Memory-side models: the memory table extracted from the SFG, the
// designer-supplied bank mapping, the per-bank access-conflict graph (Mcg)
// and the per-port access tables the scheduler reserves reads on.
//
// Access timing rule: an access reserved at cycle c with span k occupies the
// port for cycles [c, c+k). Its data is available at the end of the span;
// the consuming operation may start in the span's final cycle, i.e.
// op.start >= c + k - 1. Spans are w_seq when the access follows the
// temporally preceding access on that port at the next address, w_rand
// otherwise (and always w_rand from idle).

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hlsforge/sfg.hpp"

namespace hlsforge {

struct MemoryBank {
  std::string id;
  int ports = 1;
  int w_seq = 1;
  int w_rand = 2;
};

struct Placement {
  int bank = -1;  // index into MemoryMapping::banks
  int address = 0;
};

struct MemoryMapping {
  std::vector<MemoryBank> banks;
  std::map<std::string, Placement> placement;
  std::set<std::string> unplaced;  // register-resident data

  int bank_index(const std::string &id) const;
};

struct MemoryRow {
  std::string data;
  int node = -1;
  int size = 1;  // words
  std::vector<int> readers;  // op ids, ascending
  std::vector<int> writers;  // always empty: memory data has in-degree 0
};

struct MemoryTable {
  std::vector<MemoryRow> rows;
  const MemoryRow *row(const std::string &data) const;
};

// Conflict graph of one bank: every datum plus the idle pole, with the
// complete directed edge set weighted w_seq/w_rand by address adjacency.
class Mcg {
 public:
  static constexpr int kIdle = -1;  // pole: "no previous access"

  Mcg(std::string bank_id, int w_seq, int w_rand,
      std::vector<std::pair<std::string, int>> data_addresses);

  const std::string &bank() const { return bank_; }
  int vertex_count() const { return static_cast<int>(data_.size()) + 1; }
  const std::vector<std::pair<std::string, int>> &data() const { return data_; }

  int address_of(const std::string &data) const;

  // Port occupancy of an access to `to_addr` when the previous access on the
  // port touched `from_addr` (kIdle for none).
  int weight(int from_addr, int to_addr) const;
  int w_seq() const { return w_seq_; }
  int w_rand() const { return w_rand_; }

 private:
  std::string bank_;
  int w_seq_;
  int w_rand_;
  std::vector<std::pair<std::string, int>> data_;  // (name, address)
};

struct Reservation {
  int cycle = 0;
  int span = 1;
  int address = 0;
  std::string data;
};

struct ProbeResult {
  int cycle = 0;
  int span = 1;
};

// One bank's port timelines. Value semantics: the scheduler copies tables
// to trial-place the reads of a candidate operation.
class AccessTable {
 public:
  AccessTable() = default;
  explicit AccessTable(int ports) : ports_(ports) {}

  int ports() const { return static_cast<int>(ports_.size()); }
  const std::vector<Reservation> &reservations(int port) const {
    return ports_.at(port);
  }

  // Address of the temporally last access on the port, or Mcg::kIdle.
  int last_address(int port) const;

  bool is_free(int port, int cycle, int span) const;

  static AccessTable for_bank(const MemoryBank &bank);

  void reserve(int port, const std::string &data, int address, int cycle,
               int span);

 private:
  std::vector<std::vector<Reservation>> ports_;  // sorted by cycle
};

MemoryTable extract_memory_table(const Sfg &sfg);

// Line-oriented mapping file:
//   bank bank0 ports 1 wseq 1 wrand 2
//   place v1 bank0 0
MemoryMapping parse_mapping(const std::string &text, const MemoryTable &table);

Mcg build_mcg(const MemoryMapping &mapping, const std::string &bank_id);

// Earliest cycle >= earliest where the port can take the access. The span is
// derived from the access that would precede it in time; a placement is only
// admissible if it keeps the span of the access following it valid. Pure.
ProbeResult probe_access(const AccessTable &at, const Mcg &mcg, int port,
                         const std::string &data, int earliest);

// Latest admissible start whose span completes by `deadline` (last busy
// cycle <= deadline), or nullopt. Used for as-late-as-possible read packing.
std::optional<ProbeResult> probe_latest(const AccessTable &at, const Mcg &mcg,
                                        int port, const std::string &data,
                                        int deadline);

void reserve_access(AccessTable &at, int port, const std::string &data,
                    int address, int cycle, int span);

}  // namespace hlsforge
