#pragma once

// Timing-constraint graphs and their analysis.
//
// The dependency graph (Acg) carries one vertex per SFG node and one edge per
// data dependency, weighted by producer latency. Bus-level I/O requirements
// (Iocg) are merged on top of it into the global constraint graph (Gcg),
// a difference-constraint system solved by longest paths from a virtual
// frame origin. The solution yields ASAP/ALAP times and mobility; an
// unsatisfiable system yields a positive-weight cycle as witness.
//
// Conventions (shared with the scheduler and the validator):
//   * t(op) is the operation's start cycle.
//   * An op -> op dependency costs the producer's full latency.
//   * An op -> output edge costs latency - 1: the output event is the
//     producer's final execution cycle, and the transfer happens in that
//     same production cycle.
//   * Non-operation producers (inputs, constants, memory data) cost 0.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hlsforge/sfg.hpp"

namespace hlsforge {

enum class IoDirection { In, Out };
enum class RelationKind { Min, Max, Equal };

struct IoEvent {
  std::string name;  // matches an INPUT or OUTPUT node of the Sfg
  std::string bus;
  IoDirection direction = IoDirection::In;
  std::optional<int> slot;  // fixed cycle offset within the frame, or unfixed
};

struct IoRelation {
  int from = -1;  // event indices
  int to = -1;
  RelationKind kind = RelationKind::Min;
  int offset = 0;
};

struct Iocg {
  std::vector<IoEvent> events;
  std::vector<IoRelation> relations;
  std::optional<int> frame_period;
  // Index into relations of the designated latency bound, if one was given.
  std::optional<int> latency_relation;

  int event_index(const std::string &name) const;
};

struct AcgEdge {
  int from = -1;
  int to = -1;
  int weight = 0;  // t(to) >= t(from) + weight
};

struct Acg {
  int num_vertices = 0;  // vertex ids coincide with SFG node ids
  std::vector<AcgEdge> edges;
};

enum class ConstraintKind { Min, Max };
enum class EdgeSource { Dependency, Io };

// Normalized min-form edge: t(to) >= t(from) + weight. A max constraint
// t(v) <= t(u) + w is stored as the reverse edge (v, u, -w) tagged Max.
struct GcgEdge {
  int from = -1;
  int to = -1;
  int weight = 0;
  ConstraintKind kind = ConstraintKind::Min;
  EdgeSource source = EdgeSource::Dependency;
};

struct LatencyBound {
  int input_vertex = -1;
  int output_vertex = -1;
  int cycles = 0;
};

struct Gcg {
  int num_vertices = 0;  // SFG vertices; origin() is appended internally
  std::vector<GcgEdge> edges;
  // Per-vertex lower bound relative to the frame origin (>= 0 everywhere,
  // raised to the slot for fixed input events).
  std::vector<int> lower_bound;
  std::optional<LatencyBound> latency_constraint;
  bool has_explicit_deadline = false;

  int origin() const { return num_vertices; }
};

struct TimingSolution {
  std::vector<int> asap;
  std::vector<int> alap;
};

struct WitnessEdge {
  int from = -1;
  int to = -1;
  int weight = 0;
};

// A positive-weight cycle in the normalized constraint system. Vertices may
// include the virtual origin (id == gcg.origin()).
struct InfeasibilityWitness {
  std::vector<WitnessEdge> cycle;
  int total_weight() const;
};

using FeasibilityResult = std::variant<TimingSolution, InfeasibilityWitness>;

Acg build_acg(const Sfg &sfg, const OperatorLibrary &lib);

// Line-oriented I/O spec:
//   bus B0 in  a@0 b@1
//   bus B0 out c@?
//   equal a b
//   min a c 2
//   max a c 7
//   latency a c 5
//   period 1
Iocg parse_io_spec(const std::string &text, const Sfg &sfg);

// Maps every event onto its SFG I/O vertex and encodes the constraints:
// fixed input slots anchor the event to the frame origin (lower bound plus a
// max edge), fixed output slots are production deadlines, equalities become
// opposing min edges, and min relations targeting outputs flip into max
// (latest-production) constraints. A frame period chains consecutive events
// of each bus.
Gcg merge_gcg(const Acg &acg, const Iocg &iocg, const Sfg &sfg);

// Longest paths from the virtual origin. Feasible iff the system has no
// positive-weight cycle; then asap is the least solution and alap the
// greatest one under the explicit deadlines (vertices without any deadline
// are capped at the ASAP makespan).
FeasibilityResult check_feasibility(const Gcg &gcg);

std::vector<int> compute_mobility(const TimingSolution &ts);

}  // namespace hlsforge
