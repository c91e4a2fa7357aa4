#pragma once

// Signal Flow Graph: the dataflow IR every other stage consumes.
// A graph is a DAG of input ports, output ports, constants, memory-resident
// data and binary arithmetic operations. Graphs are immutable once built
// (builders append, analyses only read), so they can be shared freely.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hlsforge {

enum class OpKind { Add, Sub, Mul };

enum class NodeType { Input, Output, Const, MemData, Op };

const char *to_string(OpKind k);
const char *to_string(NodeType t);
std::optional<OpKind> op_kind_from_string(const std::string &s);

struct SfgNode {
  int id = -1;
  NodeType type = NodeType::Input;
  OpKind op = OpKind::Add;  // meaningful only when type == Op
  std::string name;
  double value = 0.0;  // meaningful only when type == Const
};

struct SfgEdge {
  int from = -1;
  int to = -1;
  int pos = 0;  // operand position at the consumer (0 or 1; 0 for outputs)
};

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string &what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line(line) {}
  int line;
};

class Sfg {
 public:
  int add_input(const std::string &name);
  int add_output(const std::string &name, int producer);
  int add_const(const std::string &name, double value);
  int add_mem(const std::string &name);
  int add_op(const std::string &name, OpKind kind, int lhs, int rhs);

  const std::vector<SfgNode> &nodes() const { return nodes_; }
  const std::vector<SfgEdge> &edges() const { return edges_; }
  const SfgNode &node(int id) const { return nodes_.at(id); }
  int size() const { return static_cast<int>(nodes_.size()); }

  std::optional<int> find(const std::string &name) const;

  // Edges entering / leaving a node, ordered by operand position resp. id.
  const std::vector<SfgEdge> &in_edges(int id) const { return in_.at(id); }
  const std::vector<SfgEdge> &out_edges(int id) const { return out_.at(id); }

  std::vector<int> node_ids_of(NodeType t) const;
  int count_ops(OpKind k) const;

  bool operator==(const Sfg &other) const;

 private:
  int add_node(NodeType type, const std::string &name);
  void add_edge(int from, int to, int pos);

  std::vector<SfgNode> nodes_;
  std::vector<SfgEdge> edges_;
  std::vector<std::vector<SfgEdge>> in_, out_;
  std::map<std::string, int> by_name_;
};

// Per-operation latencies in clock cycles, plus the (informational) clock.
struct OperatorLibrary {
  std::map<OpKind, int> latency;
  double clock_mhz = 0.0;

  int latency_of(OpKind k) const;

  static OperatorLibrary unit();  // add/sub/mul all 1 cycle
  static OperatorLibrary parse(const std::string &json_text);
  static OperatorLibrary load(const std::string &path);
};

struct Diagnostic {
  int node = -1;
  std::string message;
};

// Text format, one declaration per line, '#' comments:
//   input a | output c s1 | mem v1 | const z 0 | op m1 mul a v1
Sfg parse_sfg(const std::string &text);
std::string render_sfg(const Sfg &sfg);

// Empty result iff all structural invariants hold; one entry per violation,
// ordered by node id.
std::vector<Diagnostic> validate_sfg(const Sfg &sfg);

// Fixed 12-node example: c = (a*v1 + v3) - (b*v2 + v4).
Sfg gen_toy();

struct FftOptions {
  // When set, multiplications by the trivial twiddles (W = 1, W = -j) and
  // arithmetic against known-zero values are folded away. Off by default so
  // graph sizes stay predictable.
  bool fold_trivial = false;
};

// Radix-2 decimation-in-time FFT over n real inputs Xr_<k>; butterflies are
// expanded into real add/sub/mul nodes, twiddle factors become memory data
// Wr_<i> / Wi_<i>, imaginary input parts are constant zeros.
Sfg gen_fft(int n, const FftOptions &opt = {});

}  // namespace hlsforge
