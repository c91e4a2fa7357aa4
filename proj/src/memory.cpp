#include "hlsforge/memory.hpp"

#include <algorithm>
#include <sstream>

namespace hlsforge {

int MemoryMapping::bank_index(const std::string &id) const {
  for (size_t i = 0; i < banks.size(); ++i)
    if (banks[i].id == id) return static_cast<int>(i);
  return -1;
}

const MemoryRow *MemoryTable::row(const std::string &data) const {
  for (const auto &r : rows)
    if (r.data == data) return &r;
  return nullptr;
}

Mcg::Mcg(std::string bank_id, int w_seq, int w_rand,
         std::vector<std::pair<std::string, int>> data_addresses)
    : bank_(std::move(bank_id)),
      w_seq_(w_seq),
      w_rand_(w_rand),
      data_(std::move(data_addresses)) {
  std::sort(data_.begin(), data_.end(),
            [](const auto &a, const auto &b) { return a.second < b.second; });
}

int Mcg::address_of(const std::string &data) const {
  for (const auto &[name, addr] : data_)
    if (name == data) return addr;
  throw std::runtime_error("datum '" + data + "' is not in bank " + bank_);
}

int Mcg::weight(int from_addr, int to_addr) const {
  if (from_addr == kIdle) return w_rand_;
  return to_addr == from_addr + 1 ? w_seq_ : w_rand_;
}

int AccessTable::last_address(int port) const {
  const auto &res = ports_.at(port);
  return res.empty() ? Mcg::kIdle : res.back().address;
}

bool AccessTable::is_free(int port, int cycle, int span) const {
  for (const auto &r : ports_.at(port))
    if (cycle < r.cycle + r.span && r.cycle < cycle + span) return false;
  return true;
}

AccessTable AccessTable::for_bank(const MemoryBank &bank) {
  return AccessTable(bank.ports);
}

void AccessTable::reserve(int port, const std::string &data, int address,
                          int cycle, int span) {
  if (cycle < 0 || span < 1)
    throw std::invalid_argument("reservation must start at cycle >= 0 with span >= 1");
  if (!is_free(port, cycle, span))
    throw std::runtime_error("port " + std::to_string(port) +
                             " busy: overlapping reservation for " + data);
  auto &res = ports_.at(port);
  Reservation r{cycle, span, address, data};
  res.insert(std::upper_bound(res.begin(), res.end(), r,
                              [](const Reservation &a, const Reservation &b) {
                                return a.cycle < b.cycle;
                              }),
             r);
}

MemoryTable extract_memory_table(const Sfg &sfg) {
  MemoryTable t;
  for (const auto &n : sfg.nodes()) {
    if (n.type != NodeType::MemData) continue;
    MemoryRow row;
    row.data = n.name;
    row.node = n.id;
    for (const auto &e : sfg.out_edges(n.id))
      if (sfg.node(e.to).type == NodeType::Op) row.readers.push_back(e.to);
    std::sort(row.readers.begin(), row.readers.end());
    t.rows.push_back(std::move(row));
  }
  return t;
}

namespace {

std::vector<std::string> tokenize(const std::string &line) {
  std::vector<std::string> toks;
  std::istringstream ss(line);
  std::string t;
  while (ss >> t) {
    if (t[0] == '#') break;
    toks.push_back(t);
  }
  return toks;
}

int parse_int(const std::string &s, int line, const char *what) {
  try {
    size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception &) {
    throw ParseError(line, std::string("bad ") + what + " '" + s + "'");
  }
}

}  // namespace

MemoryMapping parse_mapping(const std::string &text, const MemoryTable &table) {
  MemoryMapping m;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::set<std::pair<int, int>> used;  // (bank index, address)

  while (std::getline(in, line)) {
    ++lineno;
    auto toks = tokenize(line);
    if (toks.empty()) continue;

    if (toks[0] == "bank") {
      // bank <id> ports <n> wseq <n> wrand <n>
      if (toks.size() != 8 || toks[2] != "ports" || toks[4] != "wseq" ||
          toks[6] != "wrand")
        throw ParseError(lineno, "bank takes: bank <id> ports N wseq N wrand N");
      MemoryBank b;
      b.id = toks[1];
      if (m.bank_index(b.id) >= 0)
        throw ParseError(lineno, "bank '" + b.id + "' declared twice");
      b.ports = parse_int(toks[3], lineno, "port count");
      b.w_seq = parse_int(toks[5], lineno, "wseq");
      b.w_rand = parse_int(toks[7], lineno, "wrand");
      if (b.ports < 1) throw ParseError(lineno, "port count must be >= 1");
      if (b.w_seq < 1 || b.w_rand < b.w_seq)
        throw ParseError(lineno, "weights must satisfy 1 <= wseq <= wrand");
      m.banks.push_back(b);
    } else if (toks[0] == "place") {
      // place <data> <bank> <address>
      if (toks.size() != 4)
        throw ParseError(lineno, "place takes: place <data> <bank> <address>");
      const std::string &data = toks[1];
      if (!table.row(data))
        throw ParseError(lineno, "unknown data name '" + data + "'");
      if (m.placement.count(data))
        throw ParseError(lineno, "datum '" + data + "' placed twice");
      int bank = m.bank_index(toks[2]);
      if (bank < 0)
        throw ParseError(lineno, "unknown bank '" + toks[2] + "'");
      int addr = parse_int(toks[3], lineno, "address");
      if (addr < 0) throw ParseError(lineno, "addresses must be >= 0");
      if (!used.insert({bank, addr}).second)
        throw ParseError(lineno, "address @" + std::to_string(addr) +
                                     " in bank " + toks[2] + " used twice");
      m.placement[data] = {bank, addr};
    } else {
      throw ParseError(lineno, "unknown directive '" + toks[0] + "'");
    }
  }

  for (const auto &row : table.rows)
    if (!m.placement.count(row.data)) m.unplaced.insert(row.data);
  return m;
}

Mcg build_mcg(const MemoryMapping &mapping, const std::string &bank_id) {
  int idx = mapping.bank_index(bank_id);
  if (idx < 0) throw std::runtime_error("unknown bank '" + bank_id + "'");
  const MemoryBank &b = mapping.banks[idx];
  std::vector<std::pair<std::string, int>> data;
  for (const auto &[name, pl] : mapping.placement)
    if (pl.bank == idx) data.emplace_back(name, pl.address);
  return Mcg(b.id, b.w_seq, b.w_rand, std::move(data));
}

namespace {

// Span of an access starting at `cycle`, given the reservations sorted by
// time, and whether inserting it there keeps the next access's span valid.
struct Fit {
  int span = 0;
  bool consistent = false;
};

Fit fit_at(const std::vector<Reservation> &res, const Mcg &mcg, int address,
           int cycle) {
  const Reservation *before = nullptr, *after = nullptr;
  for (const auto &r : res) {
    if (r.cycle <= cycle) before = &r;
    if (r.cycle > cycle && !after) after = &r;
  }
  Fit f;
  f.span = mcg.weight(before ? before->address : Mcg::kIdle, address);
  // An access slotted in front of an existing one changes that access's
  // temporal predecessor; its recorded span must still be the right one.
  f.consistent = !after || after->span == mcg.weight(address, after->address);
  return f;
}

}  // namespace

ProbeResult probe_access(const AccessTable &at, const Mcg &mcg, int port,
                         const std::string &data, int earliest) {
  int address = mcg.address_of(data);
  const auto &res = at.reservations(port);
  for (int cycle = std::max(0, earliest);; ++cycle) {
    Fit f = fit_at(res, mcg, address, cycle);
    if (f.consistent && at.is_free(port, cycle, f.span))
      return {cycle, f.span};
  }
}

std::optional<ProbeResult> probe_latest(const AccessTable &at, const Mcg &mcg,
                                        int port, const std::string &data,
                                        int deadline) {
  int address = mcg.address_of(data);
  const auto &res = at.reservations(port);
  for (int cycle = deadline; cycle >= 0; --cycle) {
    Fit f = fit_at(res, mcg, address, cycle);
    if (cycle + f.span - 1 > deadline) continue;
    if (f.consistent && at.is_free(port, cycle, f.span))
      return ProbeResult{cycle, f.span};
  }
  return std::nullopt;
}

void reserve_access(AccessTable &at, int port, const std::string &data,
                    int address, int cycle, int span) {
  at.reserve(port, data, address, cycle, span);
}

}  // namespace hlsforge
