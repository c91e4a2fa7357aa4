#include "hlsforge/sfg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace hlsforge {

const char *to_string(OpKind k) {
  switch (k) {
    case OpKind::Add: return "add";
    case OpKind::Sub: return "sub";
    case OpKind::Mul: return "mul";
  }
  return "?";
}

const char *to_string(NodeType t) {
  switch (t) {
    case NodeType::Input: return "input";
    case NodeType::Output: return "output";
    case NodeType::Const: return "const";
    case NodeType::MemData: return "mem";
    case NodeType::Op: return "op";
  }
  return "?";
}

std::optional<OpKind> op_kind_from_string(const std::string &s) {
  if (s == "add") return OpKind::Add;
  if (s == "sub") return OpKind::Sub;
  if (s == "mul") return OpKind::Mul;
  return std::nullopt;
}

int Sfg::add_node(NodeType type, const std::string &name) {
  if (by_name_.count(name))
    throw std::invalid_argument("duplicate node name: " + name);
  SfgNode n;
  n.id = static_cast<int>(nodes_.size());
  n.type = type;
  n.name = name;
  nodes_.push_back(n);
  in_.emplace_back();
  out_.emplace_back();
  by_name_[name] = n.id;
  return n.id;
}

void Sfg::add_edge(int from, int to, int pos) {
  if (from < 0 || from >= size() || to < 0 || to >= size())
    throw std::invalid_argument("edge endpoint out of range");
  SfgEdge e{from, to, pos};
  edges_.push_back(e);
  in_[to].push_back(e);
  out_[from].push_back(e);
}

int Sfg::add_input(const std::string &name) {
  return add_node(NodeType::Input, name);
}

int Sfg::add_const(const std::string &name, double value) {
  int id = add_node(NodeType::Const, name);
  nodes_[id].value = value;
  return id;
}

int Sfg::add_mem(const std::string &name) {
  return add_node(NodeType::MemData, name);
}

int Sfg::add_op(const std::string &name, OpKind kind, int lhs, int rhs) {
  int id = add_node(NodeType::Op, name);
  nodes_[id].op = kind;
  add_edge(lhs, id, 0);
  add_edge(rhs, id, 1);
  return id;
}

int Sfg::add_output(const std::string &name, int producer) {
  int id = add_node(NodeType::Output, name);
  add_edge(producer, id, 0);
  return id;
}

std::optional<int> Sfg::find(const std::string &name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::vector<int> Sfg::node_ids_of(NodeType t) const {
  std::vector<int> ids;
  for (const auto &n : nodes_)
    if (n.type == t) ids.push_back(n.id);
  return ids;
}

int Sfg::count_ops(OpKind k) const {
  int c = 0;
  for (const auto &n : nodes_)
    if (n.type == NodeType::Op && n.op == k) ++c;
  return c;
}

bool Sfg::operator==(const Sfg &other) const {
  if (nodes_.size() != other.nodes_.size() ||
      edges_.size() != other.edges_.size())
    return false;
  for (size_t i = 0; i < nodes_.size(); ++i) {
    const auto &a = nodes_[i], &b = other.nodes_[i];
    if (a.type != b.type || a.name != b.name) return false;
    if (a.type == NodeType::Op && a.op != b.op) return false;
    if (a.type == NodeType::Const && a.value != b.value) return false;
  }
  for (size_t i = 0; i < edges_.size(); ++i) {
    const auto &a = edges_[i], &b = other.edges_[i];
    if (a.from != b.from || a.to != b.to || a.pos != b.pos) return false;
  }
  return true;
}

int OperatorLibrary::latency_of(OpKind k) const {
  auto it = latency.find(k);
  if (it == latency.end())
    throw std::runtime_error(std::string("operator library has no latency for '") +
                             to_string(k) + "'");
  return it->second;
}

OperatorLibrary OperatorLibrary::unit() {
  OperatorLibrary lib;
  lib.latency = {{OpKind::Add, 1}, {OpKind::Sub, 1}, {OpKind::Mul, 1}};
  lib.clock_mhz = 200.0;
  return lib;
}

OperatorLibrary OperatorLibrary::parse(const std::string &json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error &e) {
    throw std::runtime_error(std::string("operator library: ") + e.what());
  }
  OperatorLibrary lib;
  lib.clock_mhz = j.value("clock_mhz", 0.0);
  if (!j.contains("latency") || !j["latency"].is_object())
    throw std::runtime_error("operator library: missing \"latency\" object");
  for (auto &[key, val] : j["latency"].items()) {
    auto kind = op_kind_from_string(key);
    if (!kind)
      throw std::runtime_error("operator library: unknown operator '" + key + "'");
    int lat = val.get<int>();
    if (lat < 1)
      throw std::runtime_error("operator library: latency for '" + key +
                               "' must be >= 1");
    lib.latency[*kind] = lat;
  }
  return lib;
}

OperatorLibrary OperatorLibrary::load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open operator library: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
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

struct PendingDecl {
  int line;
  std::string kind;
  std::vector<std::string> args;
};

}  // namespace

Sfg parse_sfg(const std::string &text) {
  // Two passes: declare every name first so operands may reference nodes
  // declared later in the file, then wire edges.
  std::istringstream in(text);
  std::string line;
  std::vector<PendingDecl> decls;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto toks = tokenize(line);
    if (toks.empty()) continue;
    PendingDecl d;
    d.line = lineno;
    d.kind = toks[0];
    d.args.assign(toks.begin() + 1, toks.end());
    if (d.kind == "input" || d.kind == "mem") {
      if (d.args.size() != 1)
        throw ParseError(lineno, d.kind + " takes exactly one name");
    } else if (d.kind == "const") {
      if (d.args.size() != 1 && d.args.size() != 2)
        throw ParseError(lineno, "const takes a name and an optional value");
    } else if (d.kind == "op") {
      if (d.args.size() != 4)
        throw ParseError(lineno, "op takes: name kind lhs rhs");
      if (!op_kind_from_string(d.args[1]))
        throw ParseError(lineno, "unknown operator kind '" + d.args[1] + "'");
    } else if (d.kind == "output") {
      if (d.args.size() != 2)
        throw ParseError(lineno, "output takes: name producer");
    } else {
      throw ParseError(lineno, "unknown declaration '" + d.kind + "'");
    }
    decls.push_back(std::move(d));
  }

  // Validate const values and collect names; operands may reference nodes
  // declared later in the file, so name resolution happens afterwards.
  std::map<std::string, int> declared_at;  // name -> decl index
  for (size_t i = 0; i < decls.size(); ++i) {
    const auto &d = decls[i];
    if (d.kind == "const" && d.args.size() == 2) {
      try {
        std::stod(d.args[1]);
      } catch (const std::exception &) {
        throw ParseError(d.line, "bad const value '" + d.args[1] + "'");
      }
    }
    if (!declared_at.emplace(d.args[0], static_cast<int>(i)).second)
      throw ParseError(d.line, "duplicate node name: " + d.args[0]);
  }

  auto operand_names = [](const PendingDecl &d) -> std::vector<std::string> {
    if (d.kind == "op") return {d.args[2], d.args[3]};
    if (d.kind == "output") return {d.args[1]};
    return {};
  };

  // Cycle detection over the name-reference graph (self-references included).
  {
    enum State { White, Grey, Black };
    std::vector<State> state(decls.size(), White);
    std::vector<std::pair<int, size_t>> stack;  // (decl index, next operand)
    for (size_t root = 0; root < decls.size(); ++root) {
      if (state[root] != White) continue;
      stack.push_back({static_cast<int>(root), 0});
      state[root] = Grey;
      while (!stack.empty()) {
        auto &[di, oi] = stack.back();
        auto ops = operand_names(decls[di]);
        if (oi >= ops.size()) {
          state[di] = Black;
          stack.pop_back();
          continue;
        }
        const std::string &ref = ops[oi++];
        auto it = declared_at.find(ref);
        if (it == declared_at.end())
          throw ParseError(decls[di].line, "unknown operand '" + ref + "'");
        int target = it->second;
        if (state[target] == Grey)
          throw ParseError(decls[di].line,
                           "cycle detected through '" + ref + "'");
        if (state[target] == White) {
          state[target] = Grey;
          stack.push_back({target, 0});
        }
      }
    }
  }

  // Emit nodes in dependency order but preserve declaration order for ids:
  // since the reference graph is acyclic and operands may be forward
  // references, build ids by declaration order of a topological sort that
  // keeps the original order among independent nodes (stable Kahn).
  std::vector<int> indeg(decls.size(), 0);
  std::vector<std::vector<int>> dependents(decls.size());
  for (size_t i = 0; i < decls.size(); ++i) {
    for (const auto &ref : operand_names(decls[i])) {
      int j = declared_at.at(ref);
      dependents[j].push_back(static_cast<int>(i));
      ++indeg[i];
    }
  }
  std::vector<int> order;
  {
    // min-heap on declaration index keeps output deterministic
    std::vector<int> ready;
    for (size_t i = 0; i < decls.size(); ++i)
      if (indeg[i] == 0) ready.push_back(static_cast<int>(i));
    std::make_heap(ready.begin(), ready.end(), std::greater<>());
    while (!ready.empty()) {
      std::pop_heap(ready.begin(), ready.end(), std::greater<>());
      int i = ready.back();
      ready.pop_back();
      order.push_back(i);
      for (int dep : dependents[i]) {
        if (--indeg[dep] == 0) {
          ready.push_back(dep);
          std::push_heap(ready.begin(), ready.end(), std::greater<>());
        }
      }
    }
  }

  Sfg out;
  std::map<std::string, int> ids;
  for (int i : order) {
    const auto &d = decls[i];
    const std::string &name = d.args[0];
    if (d.kind == "input") {
      ids[name] = out.add_input(name);
    } else if (d.kind == "mem") {
      ids[name] = out.add_mem(name);
    } else if (d.kind == "const") {
      double v = d.args.size() == 2 ? std::stod(d.args[1]) : 0.0;
      ids[name] = out.add_const(name, v);
    } else if (d.kind == "op") {
      ids[name] = out.add_op(name, *op_kind_from_string(d.args[1]),
                             ids.at(d.args[2]), ids.at(d.args[3]));
    } else {
      ids[name] = out.add_output(name, ids.at(d.args[1]));
    }
  }
  return out;
}

std::string render_sfg(const Sfg &sfg) {
  std::ostringstream out;
  for (const auto &n : sfg.nodes()) {
    switch (n.type) {
      case NodeType::Input:
        out << "input " << n.name << "\n";
        break;
      case NodeType::MemData:
        out << "mem " << n.name << "\n";
        break;
      case NodeType::Const: {
        std::ostringstream v;
        v << n.value;
        out << "const " << n.name << " " << v.str() << "\n";
        break;
      }
      case NodeType::Op: {
        const auto &ins = sfg.in_edges(n.id);
        const SfgEdge *lhs = nullptr, *rhs = nullptr;
        for (const auto &e : ins) (e.pos == 0 ? lhs : rhs) = &e;
        out << "op " << n.name << " " << to_string(n.op) << " "
            << (lhs ? sfg.node(lhs->from).name : "?") << " "
            << (rhs ? sfg.node(rhs->from).name : "?") << "\n";
        break;
      }
      case NodeType::Output: {
        const auto &ins = sfg.in_edges(n.id);
        out << "output " << n.name << " "
            << (ins.empty() ? "?" : sfg.node(ins[0].from).name) << "\n";
        break;
      }
    }
  }
  return out.str();
}

std::vector<Diagnostic> validate_sfg(const Sfg &sfg) {
  std::vector<Diagnostic> diags;
  auto report = [&](int id, const std::string &msg) {
    diags.push_back({id, msg});
  };

  for (const auto &n : sfg.nodes()) {
    int indeg = static_cast<int>(sfg.in_edges(n.id).size());
    int outdeg = static_cast<int>(sfg.out_edges(n.id).size());
    switch (n.type) {
      case NodeType::Input:
      case NodeType::Const:
      case NodeType::MemData:
        if (indeg != 0)
          report(n.id, "source node '" + n.name + "' has in-degree " +
                           std::to_string(indeg));
        break;
      case NodeType::Output:
        if (indeg != 1)
          report(n.id, "output '" + n.name + "' has in-degree " +
                           std::to_string(indeg) + " (expected 1)");
        if (outdeg != 0)
          report(n.id, "output '" + n.name + "' has out-degree " +
                           std::to_string(outdeg) + " (expected 0)");
        break;
      case NodeType::Op: {
        if (indeg != 2)
          report(n.id, "operation '" + n.name + "' has in-degree " +
                           std::to_string(indeg) + " (expected 2)");
        bool pos0 = false, pos1 = false;
        for (const auto &e : sfg.in_edges(n.id)) {
          if (e.pos == 0) pos0 = true;
          if (e.pos == 1) pos1 = true;
        }
        if (indeg == 2 && (!pos0 || !pos1))
          report(n.id, "operation '" + n.name + "' operand positions invalid");
        break;
      }
    }
  }

  // Acyclicity via Kahn. Builder-produced graphs are acyclic by
  // construction; this guards hand-assembled ones.
  std::vector<int> indeg(sfg.size(), 0);
  for (const auto &e : sfg.edges()) ++indeg[e.to];
  std::vector<int> queue;
  for (int i = 0; i < sfg.size(); ++i)
    if (indeg[i] == 0) queue.push_back(i);
  size_t seen = 0;
  while (seen < queue.size()) {
    int u = queue[seen++];
    for (const auto &e : sfg.out_edges(u))
      if (--indeg[e.to] == 0) queue.push_back(e.to);
  }
  if (static_cast<int>(seen) != sfg.size()) {
    for (int i = 0; i < sfg.size(); ++i)
      if (indeg[i] > 0) {
        report(i, "node '" + sfg.node(i).name + "' lies on a cycle");
        break;  // one witness is enough
      }
  }

  std::sort(diags.begin(), diags.end(),
            [](const Diagnostic &a, const Diagnostic &b) { return a.node < b.node; });
  return diags;
}

Sfg gen_toy() {
  Sfg g;
  int a = g.add_input("a");
  int b = g.add_input("b");
  int v1 = g.add_mem("v1");
  int v2 = g.add_mem("v2");
  int v3 = g.add_mem("v3");
  int v4 = g.add_mem("v4");
  int m1 = g.add_op("m1", OpKind::Mul, a, v1);
  int m2 = g.add_op("m2", OpKind::Mul, b, v2);
  int a1 = g.add_op("a1", OpKind::Add, m1, v3);
  int a2 = g.add_op("a2", OpKind::Add, m2, v4);
  int s1 = g.add_op("s1", OpKind::Sub, a1, a2);
  g.add_output("c", s1);
  return g;
}

namespace {

// One complex value during FFT construction: a node reference per component
// plus a known-zero flag used by the folding rules.
struct CVal {
  int re = -1;
  int im = -1;
  bool re_zero = false;
  bool im_zero = false;
};

class FftBuilder {
 public:
  FftBuilder(int n, bool fold) : n_(n), fold_(fold) {}

  Sfg build() {
    for (int k = 0; k < n_; ++k) g_.add_input("Xr_" + std::to_string(k));
    std::vector<int> xi(n_);
    for (int k = 0; k < n_; ++k)
      xi[k] = fold_ ? -1 : g_.add_const("Xi_" + std::to_string(k), 0.0);

    int stages = 0;
    for (int m = 1; m < n_; m <<= 1) ++stages;

    std::vector<CVal> slot(n_);
    for (int k = 0; k < n_; ++k) {
      int src = bit_reverse(k, stages);
      slot[k].re = *g_.find("Xr_" + std::to_string(src));
      slot[k].im = xi[src];
      slot[k].im_zero = true;
    }

    for (int s = 1; s <= stages; ++s) {
      int m = 1 << s;
      for (int base = 0; base < n_; base += m) {
        for (int j = 0; j < m / 2; ++j) {
          int tw = j * (n_ / m);  // global twiddle index, W = e^{-2*pi*i*tw/n}
          CVal t = complex_mul(tw, slot[base + j + m / 2]);
          CVal u = slot[base + j];
          slot[base + j] = bf_combine(u, t, /*sub=*/false);
          slot[base + j + m / 2] = bf_combine(u, t, /*sub=*/true);
        }
      }
    }

    for (int k = 0; k < n_; ++k)
      g_.add_output("Yr_" + std::to_string(k), materialize(slot[k].re, slot[k].re_zero));
    for (int k = 0; k < n_; ++k)
      g_.add_output("Yi_" + std::to_string(k), materialize(slot[k].im, slot[k].im_zero));
    return std::move(g_);
  }

 private:
  static int bit_reverse(int x, int bits) {
    int r = 0;
    for (int i = 0; i < bits; ++i)
      if (x & (1 << i)) r |= 1 << (bits - 1 - i);
    return r;
  }

  int twiddle_re(int idx) { return twiddle(idx, "Wr_", tw_re_); }
  int twiddle_im(int idx) { return twiddle(idx, "Wi_", tw_im_); }

  int twiddle(int idx, const char *prefix, std::map<int, int> &cache) {
    auto it = cache.find(idx);
    if (it != cache.end()) return it->second;
    int id = g_.add_mem(prefix + std::to_string(idx));
    cache[idx] = id;
    return id;
  }

  int zero_const() {
    if (zero_ < 0) zero_ = g_.add_const("zero", 0.0);
    return zero_;
  }

  struct Wire {
    int id = -1;
    bool zero = false;
  };

  Wire mul(Wire a, Wire b) {
    if (fold_ && (a.zero || b.zero)) return {-1, true};
    return {g_.add_op(fresh("t"), OpKind::Mul, resolve(a), resolve(b)), false};
  }

  Wire add(Wire a, Wire b) {
    if (fold_) {
      if (a.zero && b.zero) return {-1, true};
      if (a.zero) return b;
      if (b.zero) return a;
    }
    return {g_.add_op(fresh("t"), OpKind::Add, resolve(a), resolve(b)), false};
  }

  Wire sub(Wire a, Wire b) {
    if (fold_) {
      if (a.zero && b.zero) return {-1, true};
      if (b.zero) return a;
      // 0 - x stays a subtraction against the materialized zero
    }
    return {g_.add_op(fresh("t"), OpKind::Sub, resolve(a), resolve(b)), false};
  }

  int resolve(Wire w) { return w.zero && w.id < 0 ? zero_const() : w.id; }

  int materialize(int id, bool zero) { return zero && id < 0 ? zero_const() : id; }

  CVal complex_mul(int tw, const CVal &b) {
    Wire br{b.re, b.re_zero}, bi{b.im, b.im_zero};
    if (fold_ && tw == 0) return b;  // W = 1
    if (fold_ && 4 * tw == n_) {     // W = -j: (re, im) -> (im, -re)
      Wire nre = bi;
      Wire nim = br.zero ? Wire{-1, true} : sub(Wire{-1, true}, br);
      CVal out;
      out.re = nre.id;
      out.re_zero = nre.zero;
      out.im = nim.id;
      out.im_zero = nim.zero;
      return out;
    }
    Wire wr{twiddle_re(tw), false}, wi{twiddle_im(tw), false};
    Wire tr = sub(mul(wr, br), mul(wi, bi));
    Wire ti = add(mul(wr, bi), mul(wi, br));
    CVal out;
    out.re = tr.id;
    out.re_zero = tr.zero;
    out.im = ti.id;
    out.im_zero = ti.zero;
    return out;
  }

  CVal bf_combine(const CVal &u, const CVal &t, bool is_sub) {
    Wire ur{u.re, u.re_zero}, ui{u.im, u.im_zero};
    Wire tr{t.re, t.re_zero}, ti{t.im, t.im_zero};
    Wire re = is_sub ? sub(ur, tr) : add(ur, tr);
    Wire im = is_sub ? sub(ui, ti) : add(ui, ti);
    CVal out;
    out.re = re.id;
    out.re_zero = re.zero;
    out.im = im.id;
    out.im_zero = im.zero;
    return out;
  }

  std::string fresh(const char *stem) {
    return std::string(stem) + std::to_string(counter_++);
  }

  int n_;
  bool fold_;
  Sfg g_;
  std::map<int, int> tw_re_, tw_im_;
  int zero_ = -1;
  int counter_ = 0;
};

}  // namespace

Sfg gen_fft(int n, const FftOptions &opt) {
  if (n < 2) throw std::invalid_argument("fft size must be >= 2");
  if (n & (n - 1))
    throw std::invalid_argument("fft size must be a power of two");
  return FftBuilder(n, opt.fold_trivial).build();
}

}  // namespace hlsforge
