#include "hlsforge/constraints.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace hlsforge {

int Iocg::event_index(const std::string &name) const {
  for (size_t i = 0; i < events.size(); ++i)
    if (events[i].name == name) return static_cast<int>(i);
  return -1;
}

int InfeasibilityWitness::total_weight() const {
  int sum = 0;
  for (const auto &e : cycle) sum += e.weight;
  return sum;
}

Acg build_acg(const Sfg &sfg, const OperatorLibrary &lib) {
  Acg acg;
  acg.num_vertices = sfg.size();
  for (const auto &e : sfg.edges()) {
    const SfgNode &p = sfg.node(e.from);
    int w = 0;
    if (p.type == NodeType::Op) {
      int lat = lib.latency_of(p.op);
      // The consumer of an output edge is the transfer event itself, which
      // shares the producer's final execution cycle.
      w = sfg.node(e.to).type == NodeType::Output ? lat - 1 : lat;
    }
    acg.edges.push_back({e.from, e.to, w});
  }
  return acg;
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

Iocg parse_io_spec(const std::string &text, const Sfg &sfg) {
  Iocg io;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::set<std::pair<std::string, int>> used_slots;  // (bus, slot)

  auto require_event = [&](const std::string &name, int ln) {
    int idx = io.event_index(name);
    if (idx < 0)
      throw ParseError(ln, "unknown event '" + name + "' (declare it on a bus first)");
    return idx;
  };

  while (std::getline(in, line)) {
    ++lineno;
    auto toks = tokenize(line);
    if (toks.empty()) continue;
    const std::string &kw = toks[0];

    if (kw == "bus") {
      if (toks.size() < 3)
        throw ParseError(lineno, "bus takes: bus <id> <in|out> <name@slot>...");
      const std::string &bus = toks[1];
      IoDirection dir;
      if (toks[2] == "in")
        dir = IoDirection::In;
      else if (toks[2] == "out")
        dir = IoDirection::Out;
      else
        throw ParseError(lineno, "bus direction must be 'in' or 'out'");

      for (size_t i = 3; i < toks.size(); ++i) {
        const std::string &spec = toks[i];
        auto at = spec.find('@');
        if (at == std::string::npos)
          throw ParseError(lineno, "event '" + spec + "' needs @slot or @?");
        IoEvent ev;
        ev.name = spec.substr(0, at);
        ev.bus = bus;
        ev.direction = dir;
        std::string slot = spec.substr(at + 1);
        if (slot != "?") {
          int s = parse_int(slot, lineno, "slot");
          if (s < 0) throw ParseError(lineno, "slots must be >= 0");
          if (!used_slots.insert({bus, s}).second)
            throw ParseError(lineno, "slot " + std::to_string(s) +
                                         " on bus " + bus + " used twice");
          ev.slot = s;
        }
        auto id = sfg.find(ev.name);
        NodeType want = dir == IoDirection::In ? NodeType::Input : NodeType::Output;
        if (!id || sfg.node(*id).type != want)
          throw ParseError(lineno, "'" + ev.name + "' is not an " +
                                       (dir == IoDirection::In ? "input" : "output") +
                                       " of the graph");
        if (io.event_index(ev.name) >= 0)
          throw ParseError(lineno, "event '" + ev.name + "' declared twice");
        io.events.push_back(ev);
      }
    } else if (kw == "equal") {
      if (toks.size() != 3) throw ParseError(lineno, "equal takes: equal e1 e2");
      int a = require_event(toks[1], lineno);
      int b = require_event(toks[2], lineno);
      io.relations.push_back({a, b, RelationKind::Equal, 0});
    } else if (kw == "min" || kw == "max" || kw == "latency") {
      if (toks.size() != 4)
        throw ParseError(lineno, kw + " takes: " + kw + " e1 e2 cycles");
      int a = require_event(toks[1], lineno);
      int b = require_event(toks[2], lineno);
      int w = parse_int(toks[3], lineno, "cycle count");
      if (kw == "min") {
        io.relations.push_back({a, b, RelationKind::Min, w});
      } else {
        io.relations.push_back({a, b, RelationKind::Max, w});
        if (kw == "latency") {
          if (io.latency_relation)
            throw ParseError(lineno, "latency bound given twice");
          if (io.events[b].direction != IoDirection::Out)
            throw ParseError(lineno, "latency target must be an output event");
          io.latency_relation = static_cast<int>(io.relations.size()) - 1;
        }
      }
    } else if (kw == "period") {
      if (toks.size() != 2) throw ParseError(lineno, "period takes one value");
      int p = parse_int(toks[1], lineno, "period");
      if (p < 1) throw ParseError(lineno, "period must be >= 1");
      io.frame_period = p;
    } else {
      throw ParseError(lineno, "unknown directive '" + kw + "'");
    }
  }
  return io;
}

Gcg merge_gcg(const Acg &acg, const Iocg &iocg, const Sfg &sfg) {
  Gcg g;
  g.num_vertices = acg.num_vertices;
  g.lower_bound.assign(g.num_vertices, 0);
  for (const auto &e : acg.edges)
    g.edges.push_back({e.from, e.to, e.weight, ConstraintKind::Min,
                       EdgeSource::Dependency});

  std::vector<int> vertex_of(iocg.events.size(), -1);
  for (size_t i = 0; i < iocg.events.size(); ++i) {
    auto id = sfg.find(iocg.events[i].name);
    if (!id)
      throw std::runtime_error("I/O event '" + iocg.events[i].name +
                               "' has no SFG vertex");
    vertex_of[i] = *id;
  }

  auto add_min = [&](int u, int v, int w) {
    g.edges.push_back({u, v, w, ConstraintKind::Min, EdgeSource::Io});
  };
  // t(v) <= t(u) + w, normalized to the reverse min edge.
  auto add_max = [&](int u, int v, int w) {
    g.edges.push_back({v, u, -w, ConstraintKind::Max, EdgeSource::Io});
    g.has_explicit_deadline = true;
  };

  for (size_t i = 0; i < iocg.events.size(); ++i) {
    const IoEvent &ev = iocg.events[i];
    if (!ev.slot) continue;
    int v = vertex_of[i];
    if (ev.direction == IoDirection::In) {
      // Arrival is pinned: raise the origin lower bound and add the
      // matching deadline so t(v) == slot.
      g.lower_bound[v] = std::max(g.lower_bound[v], *ev.slot);
      add_max(g.origin(), v, *ev.slot);
    } else {
      // The environment samples the port at the slot; production must be
      // done by then (min transfer date -> max production date).
      add_max(g.origin(), v, *ev.slot);
    }
  }

  for (size_t r = 0; r < iocg.relations.size(); ++r) {
    const IoRelation &rel = iocg.relations[r];
    int u = vertex_of[rel.from], v = vertex_of[rel.to];
    switch (rel.kind) {
      case RelationKind::Equal:
        add_min(v, u, rel.offset);   // t(u) >= t(v) + offset
        add_min(u, v, -rel.offset);  // t(v) >= t(u) - offset
        break;
      case RelationKind::Min:
        if (iocg.events[rel.to].direction == IoDirection::Out) {
          // Earliest-transfer on an output becomes latest-production.
          add_max(u, v, rel.offset);
        } else {
          add_min(u, v, rel.offset);
        }
        break;
      case RelationKind::Max:
        add_max(u, v, rel.offset);
        if (iocg.latency_relation && *iocg.latency_relation == static_cast<int>(r))
          g.latency_constraint = LatencyBound{u, v, rel.offset};
        break;
    }
  }

  if (iocg.frame_period) {
    int p = *iocg.frame_period;
    // Chain consecutive events per (bus, direction) in declaration order.
    std::map<std::pair<std::string, int>, int> prev;
    for (size_t i = 0; i < iocg.events.size(); ++i) {
      const IoEvent &ev = iocg.events[i];
      auto key = std::make_pair(ev.bus, static_cast<int>(ev.direction));
      auto it = prev.find(key);
      if (it != prev.end()) {
        int u = vertex_of[it->second], v = vertex_of[i];
        if (ev.direction == IoDirection::In) {
          add_min(u, v, p);
          add_max(u, v, p);
        } else {
          // Output cadence only deadlines production; it may run ahead.
          add_max(u, v, p);
        }
      }
      prev[key] = static_cast<int>(i);
    }
  }

  return g;
}

namespace {

constexpr int kInf = std::numeric_limits<int>::max() / 4;

}  // namespace

FeasibilityResult check_feasibility(const Gcg &gcg) {
  const int n = gcg.num_vertices;
  const int origin = gcg.origin();
  const int total = n + 1;

  // Longest path by Bellman-Ford; implicit edges origin -> v with weight
  // lower_bound[v] are pre-relaxed into the initial distances and re-swept
  // in case some constraint lifts the origin itself.
  std::vector<int> dist(total, 0);
  std::vector<int> pred(total, -1);
  for (int v = 0; v < n; ++v) dist[v] = gcg.lower_bound[v];

  auto sweep = [&](bool record) {
    bool changed = false;
    for (int v = 0; v < n; ++v) {
      int cand = dist[origin] + gcg.lower_bound[v];
      if (cand > dist[v]) {
        dist[v] = cand;
        if (record) pred[v] = origin;
        changed = true;
      }
    }
    for (const auto &e : gcg.edges) {
      int cand = dist[e.from] + e.weight;
      if (cand > dist[e.to]) {
        dist[e.to] = cand;
        if (record) pred[e.to] = e.from;
        changed = true;
      }
    }
    return changed;
  };

  bool changed = false;
  for (int round = 0; round < total; ++round) {
    changed = sweep(true);
    if (!changed) break;
  }

  if (changed) {
    // Positive cycle. Keep relaxing so the predecessor pointers of the
    // cycle's vertices settle onto the cycle itself, then walk them.
    for (int round = 0; round < total; ++round) sweep(true);
    int probe = -1;
    {
      for (int v = 0; v < n; ++v)
        if (dist[origin] + gcg.lower_bound[v] > dist[v]) probe = v;
      for (const auto &e : gcg.edges)
        if (dist[e.from] + e.weight > dist[e.to]) probe = e.to;
    }
    for (int i = 0; i < total && pred[probe] >= 0; ++i) probe = pred[probe];

    std::vector<int> path;
    std::set<int> seen;
    int v = probe;
    while (v >= 0 && !seen.count(v)) {
      seen.insert(v);
      path.push_back(v);
      v = pred[v];
    }
    InfeasibilityWitness w;
    if (v >= 0) {
      // v closes the cycle; drop the tail that merely leads into it.
      std::vector<int> cycle_vertices(std::find(path.begin(), path.end(), v),
                                      path.end());
      std::reverse(cycle_vertices.begin(), cycle_vertices.end());
      for (size_t i = 0; i < cycle_vertices.size(); ++i) {
        int a = cycle_vertices[i];
        int b = cycle_vertices[(i + 1) % cycle_vertices.size()];
        // Recover the tightest edge a -> b (implicit origin edges included).
        int best = -kInf;
        if (a == origin && b != origin) best = gcg.lower_bound[b];
        for (const auto &e : gcg.edges)
          if (e.from == a && e.to == b) best = std::max(best, e.weight);
        w.cycle.push_back({a, b, best});
      }
    }
    return w;
  }

  TimingSolution ts;
  ts.asap.assign(dist.begin(), dist.end() - 1);

  // ALAP: greatest solution under the explicit deadlines, with deadline-free
  // vertices capped at the ASAP makespan.
  std::vector<int> ub(total, kInf);
  ub[origin] = 0;
  auto back_sweep = [&]() {
    bool any = false;
    for (const auto &e : gcg.edges) {
      if (ub[e.to] >= kInf) continue;
      int cand = ub[e.to] - e.weight;
      if (cand < ub[e.from]) {
        ub[e.from] = cand;
        any = true;
      }
    }
    for (int v = 0; v < n; ++v) {
      if (ub[v] >= kInf) continue;
      int cand = ub[v] - gcg.lower_bound[v];
      if (cand < ub[origin]) {
        ub[origin] = cand;
        any = true;
      }
    }
    return any;
  };
  for (int round = 0; round < total && back_sweep(); ++round) {
  }

  int makespan = 0;
  for (int v = 0; v < n; ++v) makespan = std::max(makespan, ts.asap[v]);
  bool capped = false;
  for (int v = 0; v < n; ++v)
    if (ub[v] >= kInf) {
      ub[v] = makespan;
      capped = true;
    }
  if (capped) {
    for (int round = 0; round < total && back_sweep(); ++round) {
    }
  }

  ts.alap.assign(ub.begin(), ub.end() - 1);
  return ts;
}

std::vector<int> compute_mobility(const TimingSolution &ts) {
  std::vector<int> m(ts.asap.size());
  for (size_t i = 0; i < m.size(); ++i) m[i] = ts.alap[i] - ts.asap[i];
  return m;
}

}  // namespace hlsforge
