#include "probisim/automaton.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <map>
#include <queue>
#include <unordered_map>
#include <unordered_set>

namespace probisim::automata {

namespace {

struct VecHash {
  std::size_t operator()(const std::vector<State>& v) const {
    std::size_t h = 1469598103934665603ull;
    for (State s : v) {
      h ^= s + 0x9e3779b97f4a7c15ull;
      h *= 1099511628211ull;
    }
    return h;
  }
};

std::uint64_t pair_key(State a, State b) {
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

} // namespace

void Budget::check_states(std::size_t n) const {
  if (n > max_states)
    fail(ErrorCode::ResourceExceeded, "state budget exceeded (" + std::to_string(n) + ")");
}

void Budget::check_transitions(std::size_t n) const {
  if (n > max_transitions)
    fail(ErrorCode::ResourceExceeded,
         "transition budget exceeded (" + std::to_string(n) + ")");
}

const Budget& default_budget() {
  static const Budget b{};
  return b;
}

RelationAutomaton RelationAutomaton::make_sparse(TapedAlphabet ta, State num_states,
                                                 std::vector<State> initial,
                                                 std::vector<bool> finals,
                                                 std::vector<Transition> transitions) {
  RelationAutomaton a;
  a.ta_ = std::move(ta);
  a.num_states_ = num_states;
  a.finals_ = std::move(finals);
  if (a.finals_.size() != num_states) fail(ErrorCode::Internal, "finals size mismatch");
  std::sort(initial.begin(), initial.end());
  initial.erase(std::unique(initial.begin(), initial.end()), initial.end());
  a.initial_ = std::move(initial);
  for (State s : a.initial_)
    if (s >= num_states) fail(ErrorCode::Internal, "initial state out of range");
  std::sort(transitions.begin(), transitions.end());
  transitions.erase(std::unique(transitions.begin(), transitions.end()),
                    transitions.end());
  for (const Transition& t : transitions) {
    if (t.from >= num_states || t.to >= num_states)
      fail(ErrorCode::Internal, "transition state out of range");
    if (t.sym >= a.ta_.num_symbols()) fail(ErrorCode::Internal, "symbol out of range");
  }
  a.trans_ = std::move(transitions);
  a.row_begin_.assign(num_states + 1, 0);
  for (const Transition& t : a.trans_) a.row_begin_[t.from + 1]++;
  for (State s = 0; s < num_states; ++s) a.row_begin_[s + 1] += a.row_begin_[s];
  return a;
}

RelationAutomaton RelationAutomaton::make_dense(TapedAlphabet ta, State num_states,
                                                State initial, std::vector<bool> finals,
                                                std::vector<Symbol> occ,
                                                std::vector<State> table,
                                                std::vector<State> pattern_default) {
  RelationAutomaton a;
  a.ta_ = std::move(ta);
  a.dense_ = true;
  a.num_states_ = num_states;
  a.dense_initial_ = initial;
  a.finals_ = std::move(finals);
  a.occ_ = std::move(occ);
  a.table_ = std::move(table);
  a.pattern_default_ = std::move(pattern_default);
  if (num_states == 0 || initial >= num_states)
    fail(ErrorCode::Internal, "dense automaton needs a valid initial state");
  if (a.table_.size() != a.occ_.size() * num_states ||
      a.pattern_default_.size() != a.ta_.num_pad_patterns() * num_states ||
      a.finals_.size() != num_states)
    fail(ErrorCode::Internal, "dense table shape mismatch");
  assert(std::is_sorted(a.occ_.begin(), a.occ_.end()));
  return a;
}

RelationAutomaton RelationAutomaton::empty(TapedAlphabet ta) {
  return make_sparse(std::move(ta), 0, {}, {}, {});
}

RelationAutomaton RelationAutomaton::universe(TapedAlphabet ta) {
  // One state per pad pattern, all accepting.
  std::uint32_t npat = ta.num_pad_patterns();
  std::vector<Transition> trans;
  std::vector<bool> finals(npat, true);
  // State id = pad mask so far. Enumerate symbols once.
  for (std::uint64_t s = 0; s < ta.num_symbols(); ++s) {
    std::uint32_t pm = ta.pad_pattern(static_cast<Symbol>(s));
    for (std::uint32_t m = 0; m < npat; ++m)
      if ((pm & m) == m) trans.push_back({m, static_cast<Symbol>(s), pm});
  }
  return make_sparse(std::move(ta), npat, {0}, std::move(finals), std::move(trans));
}

RelationAutomaton RelationAutomaton::single_word(TapedAlphabet ta, const ConvWord& w) {
  State n = static_cast<State>(w.size()) + 1;
  std::vector<bool> finals(n, false);
  finals[n - 1] = true;
  std::vector<Transition> trans;
  for (State i = 0; i < w.size(); ++i) trans.push_back({i, w[i], i + 1});
  return make_sparse(std::move(ta), n, {0}, std::move(finals), std::move(trans));
}

std::span<const Transition> RelationAutomaton::row(State s) const {
  return {trans_.data() + row_begin_[s], trans_.data() + row_begin_[s + 1]};
}

State RelationAutomaton::dense_step(State s, Symbol a) const {
  auto base = occ_.begin();
  auto it = std::lower_bound(base, occ_.end(), a);
  if (it != occ_.end() && *it == a)
    return table_[s * occ_.size() + static_cast<std::size_t>(it - base)];
  return pattern_default(s, ta_.pad_pattern(a));
}

bool RelationAutomaton::accepts(const ConvWord& w) const {
  if (dense_) {
    State s = dense_initial_;
    for (Symbol a : w) s = dense_step(s, a);
    return finals_[s];
  }
  std::vector<State> cur = initial_;
  for (Symbol a : w) {
    std::vector<State> next;
    for (State s : cur) {
      auto r = row(s);
      auto it = std::lower_bound(r.begin(), r.end(), a,
                                 [](const Transition& t, Symbol x) { return t.sym < x; });
      for (; it != r.end() && it->sym == a; ++it) next.push_back(it->to);
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    cur = std::move(next);
    if (cur.empty()) return false;
  }
  for (State s : cur)
    if (finals_[s]) return true;
  return false;
}

namespace {

// Number of symbols having the given pad pattern.
std::uint64_t pattern_size(const TapedAlphabet& ta, std::uint32_t pattern) {
  std::uint64_t n = 1;
  for (int t = 0; t < ta.tapes(); ++t)
    if (!(pattern & (1u << t))) n *= static_cast<std::uint64_t>(ta.base().size());
  return n;
}

// Enumerates, in ascending symbol order, the symbols of the given pad
// pattern that are not in `occ` (sorted); stops when fn returns false.
void for_each_free_symbol(const TapedAlphabet& ta, std::uint32_t pattern,
                          const std::vector<Symbol>& occ,
                          const std::function<bool(Symbol)>& fn) {
  int k = ta.tapes();
  std::vector<int> comp(static_cast<size_t>(k));
  for (int t = 0; t < k; ++t) comp[static_cast<size_t>(t)] = (pattern & (1u << t)) ? ta.pad() : 0;
  int nbase = ta.base().size();
  if (nbase == 0) return;
  while (true) {
    Symbol s = ta.encode(comp);
    if (!std::binary_search(occ.begin(), occ.end(), s)) {
      if (!fn(s)) return;
    }
    // odometer over non-pad components, last tape fastest
    int t = k - 1;
    for (; t >= 0; --t) {
      if (pattern & (1u << t)) continue;
      if (++comp[static_cast<size_t>(t)] < nbase) break;
      comp[static_cast<size_t>(t)] = 0;
    }
    if (t < 0) return;
  }
}

// True when every symbol of the pattern is an occ column (so the stored
// default for that pattern can never fire).
bool pattern_phantom(const TapedAlphabet& ta, std::uint32_t pattern,
                     const std::vector<std::uint64_t>& occ_per_pattern) {
  return occ_per_pattern[pattern] == pattern_size(ta, pattern);
}

std::vector<std::uint64_t> count_occ_per_pattern(const TapedAlphabet& ta,
                                                 const std::vector<Symbol>& occ) {
  std::vector<std::uint64_t> n(ta.num_pad_patterns(), 0);
  for (Symbol s : occ) n[ta.pad_pattern(s)]++;
  return n;
}

} // namespace

RelationAutomaton materialize(const RelationAutomaton& a, const Budget& bud) {
  if (!a.deterministic_complete()) return a;
  const TapedAlphabet& ta = a.taped_alphabet();
  std::vector<Transition> trans;
  auto occ_counts = count_occ_per_pattern(ta, a.occ());
  std::uint64_t per_state = 0;
  for (std::uint32_t p = 0; p < ta.num_pad_patterns(); ++p)
    per_state += pattern_size(ta, p) - occ_counts[p];
  per_state += a.occ().size();
  bud.check_transitions(per_state * a.num_states());
  for (State s = 0; s < a.num_states(); ++s) {
    for (std::size_t c = 0; c < a.occ().size(); ++c)
      trans.push_back({s, a.occ()[c], a.dense_step(s, a.occ()[c])});
    for (std::uint32_t p = 0; p < ta.num_pad_patterns(); ++p) {
      State tgt = a.pattern_default(s, p);
      for_each_free_symbol(ta, p, a.occ(), [&](Symbol sym) {
        trans.push_back({s, sym, tgt});
        return true;
      });
    }
  }
  return RelationAutomaton::make_sparse(ta, a.num_states(), {a.dense_initial()},
                                        a.finals(), std::move(trans));
}

RelationAutomaton trim(const RelationAutomaton& a0, const Budget& bud) {
  RelationAutomaton a = a0;
  if (a.deterministic_complete()) {
    // Drop non-coaccessible parts first so only the live region is expanded.
    const TapedAlphabet& ta = a.taped_alphabet();
    State n = a.num_states();
    std::vector<std::vector<State>> rev(n);
    auto occ_counts = count_occ_per_pattern(ta, a.occ());
    for (State s = 0; s < n; ++s) {
      for (std::size_t c = 0; c < a.occ().size(); ++c)
        rev[a.dense_step(s, a.occ()[c])].push_back(s);
      for (std::uint32_t p = 0; p < ta.num_pad_patterns(); ++p)
        if (!pattern_phantom(ta, p, occ_counts))
          rev[a.pattern_default(s, p)].push_back(s);
    }
    std::vector<bool> coacc(n, false);
    std::deque<State> work;
    for (State s = 0; s < n; ++s)
      if (a.finals()[s]) {
        coacc[s] = true;
        work.push_back(s);
      }
    while (!work.empty()) {
      State s = work.front();
      work.pop_front();
      for (State p : rev[s])
        if (!coacc[p]) {
          coacc[p] = true;
          work.push_back(p);
        }
    }
    std::vector<Transition> trans;
    for (State s = 0; s < n; ++s) {
      if (!coacc[s]) continue;
      for (std::size_t c = 0; c < a.occ().size(); ++c) {
        State t = a.dense_step(s, a.occ()[c]);
        if (coacc[t]) trans.push_back({s, a.occ()[c], t});
      }
      for (std::uint32_t p = 0; p < ta.num_pad_patterns(); ++p) {
        State t = a.pattern_default(s, p);
        if (!coacc[t] || pattern_phantom(ta, p, occ_counts)) continue;
        bool ok = true;
        for_each_free_symbol(ta, p, a.occ(), [&](Symbol sym) {
          trans.push_back({s, sym, t});
          ok = trans.size() <= bud.max_transitions;
          return ok;
        });
        if (!ok) fail(ErrorCode::ResourceExceeded, "trim: transition budget");
      }
    }
    a = RelationAutomaton::make_sparse(ta, n, {a.dense_initial()}, a.finals(),
                                       std::move(trans));
  }
  State n = a.num_states();
  std::vector<bool> reach(n, false), coacc(n, false);
  std::deque<State> work;
  for (State s : a.initial_states()) {
    reach[s] = true;
    work.push_back(s);
  }
  while (!work.empty()) {
    State s = work.front();
    work.pop_front();
    for (const Transition& t : a.row(s))
      if (!reach[t.to]) {
        reach[t.to] = true;
        work.push_back(t.to);
      }
  }
  std::vector<std::vector<State>> rev(n);
  for (const Transition& t : a.transitions()) rev[t.to].push_back(t.from);
  for (State s = 0; s < n; ++s)
    if (a.finals()[s]) {
      coacc[s] = true;
      work.push_back(s);
    }
  while (!work.empty()) {
    State s = work.front();
    work.pop_front();
    for (State p : rev[s])
      if (!coacc[p]) {
        coacc[p] = true;
        work.push_back(p);
      }
  }
  std::vector<State> renum(n, 0);
  State m = 0;
  for (State s = 0; s < n; ++s)
    if (reach[s] && coacc[s]) renum[s] = m++;
  std::vector<State> initial;
  std::vector<bool> finals(m, false);
  std::vector<Transition> trans;
  for (State s : a.initial_states())
    if (reach[s] && coacc[s]) initial.push_back(renum[s]);
  for (State s = 0; s < n; ++s)
    if (reach[s] && coacc[s]) finals[renum[s]] = a.finals()[s];
  for (const Transition& t : a.transitions())
    if (reach[t.from] && coacc[t.from] && reach[t.to] && coacc[t.to])
      trans.push_back({renum[t.from], t.sym, renum[t.to]});
  return RelationAutomaton::make_sparse(a.taped_alphabet(), m, std::move(initial),
                                        std::move(finals), std::move(trans));
}

RelationAutomaton normalize_validity(const RelationAutomaton& a, const Budget& bud) {
  const TapedAlphabet& ta = a.taped_alphabet();
  std::uint32_t npat = ta.num_pad_patterns();
  if (a.deterministic_complete()) {
    // Product with the pad-discipline tracker; output stays dense. A reject
    // sink absorbs discipline violations.
    std::unordered_map<std::uint64_t, State> id;
    std::vector<std::pair<State, std::uint32_t>> states;
    std::deque<State> work;
    auto get = [&](State s, std::uint32_t mask) {
      auto [it, fresh] = id.emplace(pair_key(s, mask), static_cast<State>(states.size()));
      if (fresh) {
        states.emplace_back(s, mask);
        bud.check_states(states.size());
        work.push_back(it->second);
      }
      return it->second;
    };
    State init = get(a.dense_initial(), 0);
    std::vector<std::vector<State>> rows;
    std::vector<std::vector<State>> defs;
    State sink = static_cast<State>(-1);
    auto get_sink = [&]() {
      if (sink == static_cast<State>(-1)) {
        sink = static_cast<State>(states.size());
        states.emplace_back(static_cast<State>(-1), 0);
      }
      return sink;
    };
    while (!work.empty()) {
      State q = work.front();
      work.pop_front();
      auto [s, mask] = states[q];
      std::vector<State> row(a.occ().size());
      for (std::size_t c = 0; c < a.occ().size(); ++c) {
        std::uint32_t pm = ta.pad_pattern(a.occ()[c]);
        row[c] = ((pm & mask) == mask) ? get(a.dense_step(s, a.occ()[c]), pm) : get_sink();
      }
      std::vector<State> def(npat);
      for (std::uint32_t p = 0; p < npat; ++p)
        def[p] = ((p & mask) == mask) ? get(a.pattern_default(s, p), p) : get_sink();
      if (rows.size() <= q) {
        rows.resize(q + 1);
        defs.resize(q + 1);
      }
      rows[q] = std::move(row);
      defs[q] = std::move(def);
    }
    State m = static_cast<State>(states.size());
    rows.resize(m);
    defs.resize(m);
    if (sink != static_cast<State>(-1)) {
      rows[sink].assign(a.occ().size(), sink);
      defs[sink].assign(npat, sink);
    }
    std::vector<bool> finals(m, false);
    for (State q = 0; q < m; ++q)
      finals[q] = states[q].first != static_cast<State>(-1) && a.finals()[states[q].first];
    std::vector<State> table(static_cast<std::size_t>(m) * a.occ().size());
    std::vector<State> pdef(static_cast<std::size_t>(m) * npat);
    for (State q = 0; q < m; ++q) {
      std::copy(rows[q].begin(), rows[q].end(), table.begin() + q * a.occ().size());
      std::copy(defs[q].begin(), defs[q].end(), pdef.begin() + q * npat);
    }
    return RelationAutomaton::make_dense(ta, m, init, std::move(finals), a.occ(),
                                         std::move(table), std::move(pdef));
  }
  std::unordered_map<std::uint64_t, State> id;
  std::vector<std::pair<State, std::uint32_t>> states;
  std::deque<State> work;
  auto get = [&](State s, std::uint32_t mask) {
    auto [it, fresh] = id.emplace(pair_key(s, mask), static_cast<State>(states.size()));
    if (fresh) {
      states.emplace_back(s, mask);
      bud.check_states(states.size());
      work.push_back(it->second);
    }
    return it->second;
  };
  std::vector<State> initial;
  for (State s : a.initial_states()) initial.push_back(get(s, 0));
  std::vector<Transition> trans;
  while (!work.empty()) {
    State q = work.front();
    work.pop_front();
    auto [s, mask] = states[q];
    for (const Transition& t : a.row(s)) {
      std::uint32_t pm = ta.pad_pattern(t.sym);
      if ((pm & mask) != mask) continue;
      trans.push_back({q, t.sym, get(t.to, pm)});
      bud.check_transitions(trans.size());
    }
  }
  State m = static_cast<State>(states.size());
  std::vector<bool> finals(m, false);
  for (State q = 0; q < m; ++q) finals[q] = a.finals()[states[q].first];
  return trim(RelationAutomaton::make_sparse(ta, m, std::move(initial), std::move(finals),
                                             std::move(trans)),
              bud);
}

RelationAutomaton validity_automaton(const TapedAlphabet& ta) {
  std::uint32_t npat = ta.num_pad_patterns();
  std::vector<Transition> trans;
  std::vector<bool> finals(npat, true);
  for (std::uint64_t sv = 0; sv < ta.num_symbols(); ++sv) {
    Symbol s = static_cast<Symbol>(sv);
    std::uint32_t pm = ta.pad_pattern(s);
    for (std::uint32_t m = 0; m < npat; ++m)
      if ((pm & m) == m) trans.push_back({m, s, pm});
  }
  return RelationAutomaton::make_sparse(ta, npat, {0}, std::move(finals), std::move(trans));
}

RelationAutomaton determinize(const RelationAutomaton& a, const Budget& bud) {
  if (a.deterministic_complete()) return a;
  const TapedAlphabet& ta = a.taped_alphabet();
  std::uint32_t npat = ta.num_pad_patterns();
  std::unordered_map<std::vector<State>, State, VecHash> id;
  std::vector<std::vector<State>> subsets;
  std::deque<State> work;
  auto get = [&](std::vector<State> subset) {
    auto [it, fresh] = id.emplace(std::move(subset), static_cast<State>(subsets.size()));
    if (fresh) {
      subsets.push_back(it->first);
      bud.check_states(subsets.size());
      work.push_back(it->second);
    }
    return it->second;
  };
  State sink = get({});
  State init = get(a.initial_states());
  // Global occurring-symbol set.
  std::vector<Symbol> occ;
  occ.reserve(a.transitions().size());
  for (const Transition& t : a.transitions()) occ.push_back(t.sym);
  std::sort(occ.begin(), occ.end());
  occ.erase(std::unique(occ.begin(), occ.end()), occ.end());

  std::vector<std::vector<State>> rows;
  while (!work.empty()) {
    State q = work.front();
    work.pop_front();
    const std::vector<State> subset = subsets[q];
    // Merge member rows grouped by symbol.
    std::map<Symbol, std::vector<State>> next;
    for (State s : subset)
      for (const Transition& t : a.row(s)) next[t.sym].push_back(t.to);
    std::vector<State> row(occ.size(), sink);
    for (auto& [sym, targets] : next) {
      std::sort(targets.begin(), targets.end());
      targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
      auto it = std::lower_bound(occ.begin(), occ.end(), sym);
      row[static_cast<std::size_t>(it - occ.begin())] = get(std::move(targets));
    }
    while (rows.size() <= q) rows.emplace_back();
    rows[q] = std::move(row);
    bud.check_transitions(rows.size() * occ.size());
  }
  State m = static_cast<State>(subsets.size());
  std::vector<bool> finals(m, false);
  for (State q = 0; q < m; ++q)
    for (State s : subsets[q])
      if (a.finals()[s]) {
        finals[q] = true;
        break;
      }
  std::vector<State> table(static_cast<std::size_t>(m) * occ.size());
  for (State q = 0; q < m; ++q) {
    if (rows[q].empty() && !occ.empty()) rows[q].assign(occ.size(), sink);
    std::copy(rows[q].begin(), rows[q].end(), table.begin() + q * occ.size());
  }
  std::vector<State> pdef(static_cast<std::size_t>(m) * npat, sink);
  return RelationAutomaton::make_dense(ta, m, init, std::move(finals), std::move(occ),
                                       std::move(table), std::move(pdef));
}

namespace {

// Moore minimization of a dense automaton plus canonical renumbering.
RelationAutomaton minimize_dense(const RelationAutomaton& a, const Budget& bud) {
  const TapedAlphabet& ta = a.taped_alphabet();
  std::uint32_t npat = ta.num_pad_patterns();
  State n = a.num_states();
  auto occ_counts = count_occ_per_pattern(ta, a.occ());
  std::vector<bool> phantom(npat);
  for (std::uint32_t p = 0; p < npat; ++p)
    phantom[p] = pattern_phantom(ta, p, occ_counts);

  // Restrict to reachable states.
  std::vector<State> order;
  std::vector<State> renum(n, static_cast<State>(-1));
  {
    std::deque<State> work;
    auto visit = [&](State s) {
      if (renum[s] == static_cast<State>(-1)) {
        renum[s] = static_cast<State>(order.size());
        order.push_back(s);
        work.push_back(s);
      }
    };
    visit(a.dense_initial());
    while (!work.empty()) {
      State s = work.front();
      work.pop_front();
      for (std::size_t c = 0; c < a.occ().size(); ++c) visit(a.dense_step(s, a.occ()[c]));
      for (std::uint32_t p = 0; p < npat; ++p)
        if (!phantom[p]) visit(a.pattern_default(s, p));
    }
  }
  State nr = static_cast<State>(order.size());

  // Refinement to a fixpoint of row signatures. Classes only ever split, so
  // a stable class count means a stable partition.
  std::vector<State> cls(nr, 0);
  State count = 1;
  for (State q = 0; q < nr; ++q)
    if (a.finals()[order[q]]) {
      cls[q] = 1;
      count = 2;
    }
  if (count == 2 && std::all_of(cls.begin(), cls.end(), [](State c) { return c == 1; })) {
    for (State q = 0; q < nr; ++q) cls[q] = 0;
    count = 1;
  }
  std::vector<State> sig;
  while (true) {
    std::unordered_map<std::vector<State>, State, VecHash> next_id;
    std::vector<State> next(nr);
    for (State q = 0; q < nr; ++q) {
      State s = order[q];
      sig.assign(1, cls[q]);
      for (std::size_t c = 0; c < a.occ().size(); ++c)
        sig.push_back(cls[renum[a.dense_step(s, a.occ()[c])]]);
      for (std::uint32_t p = 0; p < npat; ++p)
        sig.push_back(phantom[p] ? 0 : cls[renum[a.pattern_default(s, p)]] + 1);
      auto [it, fresh] = next_id.emplace(sig, static_cast<State>(next_id.size()));
      (void)fresh;
      next[q] = it->second;
    }
    State new_count = static_cast<State>(next_id.size());
    cls = std::move(next);
    if (new_count == count) break;
    count = new_count;
  }
  State m = count;

  // Representative row per class, over class targets.
  std::vector<std::vector<State>> crow0(m);
  std::vector<std::vector<State>> cdef0(m);
  std::vector<bool> cfin0(m, false);
  for (State q = 0; q < nr; ++q) {
    State c = cls[q];
    if (!crow0[c].empty() && (a.occ().size() > 0 || !cdef0[c].empty())) continue;
    State s = order[q];
    crow0[c].assign(a.occ().size(), 0);
    for (std::size_t col = 0; col < a.occ().size(); ++col)
      crow0[c][col] = cls[renum[a.dense_step(s, a.occ()[col])]];
    cdef0[c].assign(npat, 0);
    for (std::uint32_t p = 0; p < npat; ++p)
      cdef0[c][p] = phantom[p] ? 0 : cls[renum[a.pattern_default(s, p)]];
    cfin0[c] = a.finals()[s];
  }

  // Canonical class numbering: breadth-first from the initial class,
  // discovering targets in tuple order. The first symbol reaching a target
  // is a function of the transition function alone, so this numbering is
  // independent of the input's column/default split.
  std::vector<State> canon_of(m, static_cast<State>(-1));
  {
    std::vector<Symbol> min_free(npat, 0);
    std::vector<bool> has_free(npat, false);
    for (std::uint32_t p = 0; p < npat; ++p) {
      if (phantom[p]) continue;
      for_each_free_symbol(ta, p, a.occ(), [&](Symbol s) {
        min_free[p] = s;
        has_free[p] = true;
        return false;
      });
    }
    std::deque<State> bfs;
    State next_id = 0;
    auto visit = [&](State c) {
      if (canon_of[c] == static_cast<State>(-1)) {
        canon_of[c] = next_id++;
        bfs.push_back(c);
      }
    };
    visit(cls[renum[a.dense_initial()]]);
    std::vector<std::pair<std::uint64_t, State>> opts;
    while (!bfs.empty()) {
      State c = bfs.front();
      bfs.pop_front();
      opts.clear();
      for (std::size_t col = 0; col < a.occ().size(); ++col)
        opts.emplace_back(a.occ()[col], crow0[c][col]);
      for (std::uint32_t p = 0; p < npat; ++p)
        if (has_free[p]) opts.emplace_back(min_free[p], cdef0[c][p]);
      std::sort(opts.begin(), opts.end());
      for (auto& [sym, tgt] : opts) visit(tgt);
    }
    if (next_id != m) fail(ErrorCode::Internal, "minimize: unreachable class");
  }
  // Relabel everything into canonical ids.
  std::vector<std::vector<State>> crow(m), cdef(m);
  std::vector<bool> cfin(m, false);
  for (State c = 0; c < m; ++c) {
    State cc = canon_of[c];
    crow[cc].resize(a.occ().size());
    for (std::size_t col = 0; col < a.occ().size(); ++col)
      crow[cc][col] = canon_of[crow0[c][col]];
    cdef[cc].resize(npat);
    for (std::uint32_t p = 0; p < npat; ++p)
      cdef[cc][p] = phantom[p] ? 0 : canon_of[cdef0[c][p]];
    cfin[cc] = cfin0[c];
  }

  // Canonical per-pattern defaults: for each pattern pick the most frequent
  // column vector over that pattern's symbols (non-occ symbols vote for the
  // stored default), ties to the lexicographically smallest vector. This
  // makes the representation a function of the language alone.
  std::vector<Symbol> new_occ;
  std::vector<std::vector<State>> new_cols; // per kept column: class targets
  std::vector<std::vector<State>> new_def(npat);
  // Group columns by pattern.
  std::vector<std::vector<std::size_t>> cols_of(npat);
  for (std::size_t col = 0; col < a.occ().size(); ++col)
    cols_of[ta.pad_pattern(a.occ()[col])].push_back(col);
  for (std::uint32_t p = 0; p < npat; ++p) {
    // Semantic multiset of column vectors over this pattern's symbols: each
    // explicit column counts once, the free symbols all carry the stored
    // default. The canonical default is the most frequent vector (ties to
    // the lexicographically smallest), which is a function of the language
    // alone; symbols whose vector differs become explicit columns.
    std::map<std::vector<State>, std::uint64_t> freq;
    std::uint64_t free_count = pattern_size(ta, p) - occ_counts[p];
    std::vector<State> stored(m);
    for (State c = 0; c < m; ++c) stored[c] = cdef[c][p];
    if (free_count > 0) freq[stored] += free_count;
    for (std::size_t col : cols_of[p]) {
      std::vector<State> v(m);
      for (State c = 0; c < m; ++c) v[c] = crow[c][col];
      freq[v] += 1;
    }
    if (freq.empty()) {
      new_def[p].assign(m, 0);
      continue;
    }
    auto best = freq.begin();
    for (auto it = freq.begin(); it != freq.end(); ++it)
      if (it->second > best->second) best = it;
    new_def[p] = best->first;
    for (std::size_t col : cols_of[p]) {
      std::vector<State> v(m);
      for (State c = 0; c < m; ++c) v[c] = crow[c][col];
      if (v != new_def[p]) {
        new_occ.push_back(a.occ()[col]);
        new_cols.push_back(std::move(v));
      }
    }
    if (free_count > 0 && new_def[p] != stored) {
      // The free symbols disagree with the chosen default; they must become
      // explicit. This can only happen when free_count < #columns, so the
      // expansion is bounded by the existing column count.
      std::vector<Symbol> old_cols;
      for (std::size_t col : cols_of[p]) old_cols.push_back(a.occ()[col]);
      std::sort(old_cols.begin(), old_cols.end());
      for_each_free_symbol(ta, p, old_cols, [&](Symbol s) {
        new_occ.push_back(s);
        new_cols.push_back(stored);
        return true;
      });
    }
  }
  // Keep columns sorted by symbol.
  std::vector<std::size_t> perm(new_occ.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::sort(perm.begin(), perm.end(),
            [&](std::size_t x, std::size_t y) { return new_occ[x] < new_occ[y]; });
  std::vector<Symbol> occ2;
  std::vector<std::vector<State>> cols2;
  for (std::size_t i : perm) {
    occ2.push_back(new_occ[i]);
    cols2.push_back(std::move(new_cols[i]));
  }

  bud.check_states(m);
  std::vector<State> table2(static_cast<std::size_t>(m) * occ2.size());
  std::vector<State> pdef2(static_cast<std::size_t>(m) * npat);
  for (State q = 0; q < m; ++q) {
    for (std::size_t col = 0; col < occ2.size(); ++col)
      table2[q * occ2.size() + col] = cols2[col][q];
    for (std::uint32_t p = 0; p < npat; ++p) pdef2[q * npat + p] = new_def[p][q];
  }
  return RelationAutomaton::make_dense(ta, m, 0, std::move(cfin), std::move(occ2),
                                       std::move(table2), std::move(pdef2));
}

} // namespace

RelationAutomaton determinize_minimize(const RelationAutomaton& a, const Budget& bud) {
  return minimize_dense(determinize(a, bud), bud);
}

RelationAutomaton complement(const RelationAutomaton& a, const Budget& bud) {
  RelationAutomaton d = determinize(a, bud);
  std::vector<State> table(static_cast<std::size_t>(d.num_states()) * d.occ().size());
  for (State s = 0; s < d.num_states(); ++s)
    for (std::size_t c = 0; c < d.occ().size(); ++c)
      table[s * d.occ().size() + c] = d.dense_step(s, d.occ()[c]);
  std::uint32_t npat = d.taped_alphabet().num_pad_patterns();
  std::vector<State> pdef(static_cast<std::size_t>(d.num_states()) * npat);
  for (State s = 0; s < d.num_states(); ++s)
    for (std::uint32_t p = 0; p < npat; ++p) pdef[s * npat + p] = d.pattern_default(s, p);
  std::vector<bool> fin(d.num_states());
  for (State s = 0; s < d.num_states(); ++s) fin[s] = !d.finals()[s];
  RelationAutomaton flipped = RelationAutomaton::make_dense(
      d.taped_alphabet(), d.num_states(), d.dense_initial(), std::move(fin), d.occ(),
      std::move(table), std::move(pdef));
  return minimize_dense(normalize_validity(flipped, bud), bud);
}

namespace {

RelationAutomaton intersect_dense_dense(const RelationAutomaton& a,
                                        const RelationAutomaton& b, bool union_mode,
                                        const Budget& bud) {
  const TapedAlphabet& ta = a.taped_alphabet();
  std::uint32_t npat = ta.num_pad_patterns();
  std::vector<Symbol> occ;
  std::set_union(a.occ().begin(), a.occ().end(), b.occ().begin(), b.occ().end(),
                 std::back_inserter(occ));
  std::unordered_map<std::uint64_t, State> id;
  std::vector<std::pair<State, State>> states;
  std::deque<State> work;
  auto get = [&](State x, State y) {
    auto [it, fresh] = id.emplace(pair_key(x, y), static_cast<State>(states.size()));
    if (fresh) {
      states.emplace_back(x, y);
      bud.check_states(states.size());
      bud.check_transitions(states.size() * (occ.size() + npat));
      work.push_back(it->second);
    }
    return it->second;
  };
  State init = get(a.dense_initial(), b.dense_initial());
  std::vector<std::vector<State>> rows, defs;
  while (!work.empty()) {
    State q = work.front();
    work.pop_front();
    auto [x, y] = states[q];
    std::vector<State> row(occ.size());
    for (std::size_t c = 0; c < occ.size(); ++c)
      row[c] = get(a.dense_step(x, occ[c]), b.dense_step(y, occ[c]));
    std::vector<State> def(npat);
    for (std::uint32_t p = 0; p < npat; ++p)
      def[p] = get(a.pattern_default(x, p), b.pattern_default(y, p));
    while (rows.size() <= q) {
      rows.emplace_back();
      defs.emplace_back();
    }
    rows[q] = std::move(row);
    defs[q] = std::move(def);
  }
  State m = static_cast<State>(states.size());
  std::vector<bool> finals(m);
  for (State q = 0; q < m; ++q) {
    bool fa = a.finals()[states[q].first], fb = b.finals()[states[q].second];
    finals[q] = union_mode ? (fa || fb) : (fa && fb);
  }
  std::vector<State> table(static_cast<std::size_t>(m) * occ.size());
  std::vector<State> pdef(static_cast<std::size_t>(m) * npat);
  for (State q = 0; q < m; ++q) {
    std::copy(rows[q].begin(), rows[q].end(), table.begin() + q * occ.size());
    std::copy(defs[q].begin(), defs[q].end(), pdef.begin() + q * npat);
  }
  return RelationAutomaton::make_dense(ta, m, init, std::move(finals), std::move(occ),
                                       std::move(table), std::move(pdef));
}

RelationAutomaton intersect_sparse_dense(const RelationAutomaton& a,
                                         const RelationAutomaton& b, const Budget& bud) {
  // a sparse drives; b complete answers by lookup.
  std::unordered_map<std::uint64_t, State> id;
  std::vector<std::pair<State, State>> states;
  std::deque<State> work;
  auto get = [&](State x, State y) {
    auto [it, fresh] = id.emplace(pair_key(x, y), static_cast<State>(states.size()));
    if (fresh) {
      states.emplace_back(x, y);
      bud.check_states(states.size());
      work.push_back(it->second);
    }
    return it->second;
  };
  std::vector<State> initial;
  for (State s : a.initial_states()) initial.push_back(get(s, b.dense_initial()));
  std::vector<Transition> trans;
  while (!work.empty()) {
    State q = work.front();
    work.pop_front();
    auto [x, y] = states[q];
    for (const Transition& t : a.row(x)) {
      trans.push_back({q, t.sym, get(t.to, b.dense_step(y, t.sym))});
      bud.check_transitions(trans.size());
    }
  }
  State m = static_cast<State>(states.size());
  std::vector<bool> finals(m);
  for (State q = 0; q < m; ++q)
    finals[q] = a.finals()[states[q].first] && b.finals()[states[q].second];
  return trim(RelationAutomaton::make_sparse(a.taped_alphabet(), m, std::move(initial),
                                             std::move(finals), std::move(trans)),
              bud);
}

RelationAutomaton intersect_sparse_sparse(const RelationAutomaton& a,
                                          const RelationAutomaton& b, const Budget& bud) {
  std::unordered_map<std::uint64_t, State> id;
  std::vector<std::pair<State, State>> states;
  std::deque<State> work;
  auto get = [&](State x, State y) {
    auto [it, fresh] = id.emplace(pair_key(x, y), static_cast<State>(states.size()));
    if (fresh) {
      states.emplace_back(x, y);
      bud.check_states(states.size());
      work.push_back(it->second);
    }
    return it->second;
  };
  std::vector<State> initial;
  for (State s : a.initial_states())
    for (State t : b.initial_states()) initial.push_back(get(s, t));
  std::vector<Transition> trans;
  while (!work.empty()) {
    State q = work.front();
    work.pop_front();
    auto [x, y] = states[q];
    auto ra = a.row(x);
    auto rb = b.row(y);
    std::size_t i = 0, j = 0;
    while (i < ra.size() && j < rb.size()) {
      if (ra[i].sym < rb[j].sym) {
        ++i;
        continue;
      }
      if (rb[j].sym < ra[i].sym) {
        ++j;
        continue;
      }
      Symbol sym = ra[i].sym;
      std::size_t i2 = i, j2 = j;
      while (i2 < ra.size() && ra[i2].sym == sym) ++i2;
      while (j2 < rb.size() && rb[j2].sym == sym) ++j2;
      for (std::size_t x2 = i; x2 < i2; ++x2)
        for (std::size_t y2 = j; y2 < j2; ++y2) {
          trans.push_back({q, sym, get(ra[x2].to, rb[y2].to)});
          bud.check_transitions(trans.size());
        }
      i = i2;
      j = j2;
    }
  }
  State m = static_cast<State>(states.size());
  std::vector<bool> finals(m);
  for (State q = 0; q < m; ++q)
    finals[q] = a.finals()[states[q].first] && b.finals()[states[q].second];
  return trim(RelationAutomaton::make_sparse(a.taped_alphabet(), m, std::move(initial),
                                             std::move(finals), std::move(trans)),
              bud);
}

} // namespace

RelationAutomaton intersect(const RelationAutomaton& a, const RelationAutomaton& b,
                            const Budget& bud) {
  if (a.taped_alphabet() != b.taped_alphabet())
    fail(ErrorCode::AlphabetMismatch, "intersect: different taped alphabets");
  if (a.deterministic_complete() && b.deterministic_complete())
    return intersect_dense_dense(a, b, false, bud);
  if (a.deterministic_complete()) return intersect_sparse_dense(b, a, bud);
  if (b.deterministic_complete()) return intersect_sparse_dense(a, b, bud);
  return intersect_sparse_sparse(a, b, bud);
}

RelationAutomaton unite(const RelationAutomaton& a, const RelationAutomaton& b,
                        const Budget& bud) {
  if (a.taped_alphabet() != b.taped_alphabet())
    fail(ErrorCode::AlphabetMismatch, "unite: different taped alphabets");
  if (a.deterministic_complete() && b.deterministic_complete())
    return intersect_dense_dense(a, b, true, bud);
  RelationAutomaton sa = materialize(a, bud);
  RelationAutomaton sb = materialize(b, bud);
  State n = sa.num_states() + sb.num_states();
  std::vector<State> initial = sa.initial_states();
  for (State s : sb.initial_states()) initial.push_back(s + sa.num_states());
  std::vector<bool> finals(n);
  for (State s = 0; s < sa.num_states(); ++s) finals[s] = sa.finals()[s];
  for (State s = 0; s < sb.num_states(); ++s) finals[s + sa.num_states()] = sb.finals()[s];
  std::vector<Transition> trans = sa.transitions();
  for (const Transition& t : sb.transitions())
    trans.push_back({t.from + sa.num_states(), t.sym, t.to + sa.num_states()});
  return RelationAutomaton::make_sparse(a.taped_alphabet(), n, std::move(initial),
                                        std::move(finals), std::move(trans));
}

RelationAutomaton product(const RelationAutomaton& a, const RelationAutomaton& b,
                          ProductMode mode, const Budget& bud) {
  return mode == ProductMode::Intersect ? intersect(a, b, bud) : unite(a, b, bud);
}

namespace {

struct AlignedSide {
  const RelationAutomaton* aut;
  const std::vector<int>* map; // input tape -> result tape
  std::vector<int> shared_pos; // positions (in this side's tape order) shared with other
};

} // namespace

RelationAutomaton intersect_aligned(const RelationAutomaton& a0,
                                    const std::vector<int>& tape_map_a,
                                    const RelationAutomaton& b0,
                                    const std::vector<int>& tape_map_b,
                                    const TapedAlphabet& result_ta, const Budget& bud) {
  if (a0.taped_alphabet().base() != result_ta.base() ||
      b0.taped_alphabet().base() != result_ta.base())
    fail(ErrorCode::AlphabetMismatch, "intersect_aligned: base alphabet mismatch");
  if (static_cast<int>(tape_map_a.size()) != a0.tapes() ||
      static_cast<int>(tape_map_b.size()) != b0.tapes())
    fail(ErrorCode::BadTapeIndex, "intersect_aligned: tape map arity mismatch");
  int k = result_ta.tapes();
  std::vector<int> covered_by(static_cast<std::size_t>(k), 0); // bit1 = a, bit2 = b
  for (int t : tape_map_a) covered_by[static_cast<std::size_t>(t)] |= 1;
  for (int t : tape_map_b) covered_by[static_cast<std::size_t>(t)] |= 2;
  for (int r = 0; r < k; ++r)
    if (!covered_by[static_cast<std::size_t>(r)])
      fail(ErrorCode::BadTapeIndex, "intersect_aligned: uncovered result tape");

  // Fast path: one dense operand whose tapes are covered by the other's.
  bool a_covers_b = true;
  for (int r = 0; r < k; ++r)
    if ((covered_by[static_cast<std::size_t>(r)] & 2) && !(covered_by[static_cast<std::size_t>(r)] & 1))
      a_covers_b = false;
  bool b_covers_a = true;
  for (int r = 0; r < k; ++r)
    if ((covered_by[static_cast<std::size_t>(r)] & 1) && !(covered_by[static_cast<std::size_t>(r)] & 2))
      b_covers_a = false;

  RelationAutomaton a = a0, b = b0;
  bool lookup_b = false;
  if (b.deterministic_complete() && a_covers_b && !a.deterministic_complete()) {
    lookup_b = true;
  } else if (a.deterministic_complete() && b_covers_a && !b.deterministic_complete()) {
    return intersect_aligned(b0, tape_map_b, a0, tape_map_a, result_ta, bud);
  } else {
    if (a.deterministic_complete()) a = materialize(a, bud);
    if (b.deterministic_complete()) b = materialize(b, bud);
  }

  const int ka = a.tapes(), kb = b.tapes();
  // Positions of b's tapes inside the result, and the shared result tapes.
  std::vector<int> comp_r(static_cast<std::size_t>(k));
  std::vector<int> comp_a(static_cast<std::size_t>(ka)), comp_b(static_cast<std::size_t>(kb));
  std::vector<int> shared; // result tapes carried by both
  for (int r = 0; r < k; ++r)
    if (covered_by[static_cast<std::size_t>(r)] == 3) shared.push_back(r);

  if (lookup_b) {
    // Drive with sparse `a`; feed the projected letter to dense `b`.
    // b's tape i sits at result tape tape_map_b[i], which is also one of
    // a's tapes; precompute for each b tape the a-tape carrying it.
    std::vector<int> b_from_a(static_cast<std::size_t>(kb), -1);
    for (int i = 0; i < kb; ++i)
      for (int j = 0; j < ka; ++j)
        if (tape_map_a[static_cast<std::size_t>(j)] == tape_map_b[static_cast<std::size_t>(i)])
          b_from_a[static_cast<std::size_t>(i)] = j;
    const int REJ = -2, FIN = -1; // b-side pseudo states
    auto b_ext_step = [&](long bs, Symbol sa) -> long {
      // Extract b's letter from a's letter.
      bool all_pad = true;
      for (int i = 0; i < kb; ++i) {
        comp_b[static_cast<std::size_t>(i)] =
            a.taped_alphabet().component(sa, b_from_a[static_cast<std::size_t>(i)]);
        if (comp_b[static_cast<std::size_t>(i)] != a.taped_alphabet().pad()) all_pad = false;
      }
      if (all_pad) {
        if (bs == FIN) return FIN;
        if (bs == REJ) return REJ;
        return b.finals()[static_cast<State>(bs)] ? FIN : REJ;
      }
      if (bs == FIN || bs == REJ) return REJ;
      return b.dense_step(static_cast<State>(bs), b.taped_alphabet().encode(comp_b));
    };
    std::unordered_map<std::uint64_t, State> id;
    std::vector<std::pair<State, long>> states;
    std::deque<State> work;
    auto get = [&](State x, long y) {
      std::uint64_t key = (static_cast<std::uint64_t>(x) << 34) |
                          static_cast<std::uint64_t>(y + 2);
      auto [it, fresh] = id.emplace(key, static_cast<State>(states.size()));
      if (fresh) {
        states.emplace_back(x, y);
        bud.check_states(states.size());
        work.push_back(it->second);
      }
      return it->second;
    };
    std::vector<State> initial;
    for (State s : a.initial_states()) initial.push_back(get(s, b.dense_initial()));
    std::vector<Transition> trans;
    // Map an a-letter to the result letter (a covers all result tapes).
    std::vector<int> a_at_result(static_cast<std::size_t>(k), -1);
    for (int j = 0; j < ka; ++j) a_at_result[static_cast<std::size_t>(tape_map_a[static_cast<std::size_t>(j)])] = j;
    while (!work.empty()) {
      State q = work.front();
      work.pop_front();
      auto [x, yb] = states[q];
      for (const Transition& t : a.row(x)) {
        long y2 = b_ext_step(yb, t.sym);
        if (y2 == REJ) continue;
        for (int r = 0; r < k; ++r)
          comp_r[static_cast<std::size_t>(r)] =
              a.taped_alphabet().component(t.sym, a_at_result[static_cast<std::size_t>(r)]);
        trans.push_back({q, result_ta.encode(comp_r), get(t.to, y2)});
        bud.check_transitions(trans.size());
      }
    }
    State m = static_cast<State>(states.size());
    std::vector<bool> finals(m, false);
    for (State q = 0; q < m; ++q) {
      auto [x, yb] = states[q];
      bool fb = yb == FIN || (yb >= 0 && b.finals()[static_cast<State>(yb)]);
      finals[q] = a.finals()[x] && fb;
    }
    return trim(RelationAutomaton::make_sparse(result_ta, m, std::move(initial),
                                               std::move(finals), std::move(trans)),
                bud);
  }

  // General sparse x sparse join with virtual all-pad extension letters.
  const Symbol ALLPAD = static_cast<Symbol>(-1);
  // Index b's rows by the shared-component key.
  std::vector<int> shared_in_a, shared_in_b; // tape index on each side per shared tape
  for (int r : shared) {
    for (int j = 0; j < ka; ++j)
      if (tape_map_a[static_cast<std::size_t>(j)] == r) shared_in_a.push_back(j);
    for (int j = 0; j < kb; ++j)
      if (tape_map_b[static_cast<std::size_t>(j)] == r) shared_in_b.push_back(j);
  }
  auto key_of = [&](const RelationAutomaton& aut, Symbol s, const std::vector<int>& pos) {
    std::uint64_t key = 0;
    for (int j : pos) {
      int c = s == ALLPAD ? aut.taped_alphabet().pad()
                          : aut.taped_alphabet().component(s, j);
      key = key * (static_cast<std::uint64_t>(result_ta.base().size()) + 2) +
            static_cast<std::uint64_t>(c) + 1;
    }
    return key;
  };
  struct Opt {
    Symbol sym; // ALLPAD for the extension letter
    long to;    // state, or -1 for the "finished" pseudo state
  };
  const long BFIN = -1;
  // Cache of per-b-state option index.
  std::unordered_map<long, std::unordered_map<std::uint64_t, std::vector<Opt>>> bindex;
  auto b_options = [&](long bs) -> const std::unordered_map<std::uint64_t, std::vector<Opt>>& {
    auto it = bindex.find(bs);
    if (it != bindex.end()) return it->second;
    std::unordered_map<std::uint64_t, std::vector<Opt>> m;
    if (bs == BFIN) {
      m[key_of(b, ALLPAD, shared_in_b)].push_back({ALLPAD, BFIN});
    } else {
      for (const Transition& t : b.row(static_cast<State>(bs)))
        m[key_of(b, t.sym, shared_in_b)].push_back({t.sym, t.to});
      if (b.finals()[static_cast<State>(bs)])
        m[key_of(b, ALLPAD, shared_in_b)].push_back({ALLPAD, BFIN});
    }
    auto [it2, fresh] = bindex.emplace(bs, std::move(m));
    (void)fresh;
    return it2->second;
  };

  std::unordered_map<std::uint64_t, State> id;
  std::vector<std::pair<long, long>> states;
  std::deque<State> work;
  auto get = [&](long x, long y) {
    std::uint64_t key = (static_cast<std::uint64_t>(x + 1) << 32) |
                        static_cast<std::uint64_t>(y + 1);
    auto [it, fresh] = id.emplace(key, static_cast<State>(states.size()));
    if (fresh) {
      states.emplace_back(x, y);
      bud.check_states(states.size());
      work.push_back(it->second);
    }
    return it->second;
  };
  const long AFIN = -1;
  std::vector<State> initial;
  for (State s : a.initial_states())
    for (State t : b.initial_states()) initial.push_back(get(s, t));
  std::vector<Transition> trans;
  while (!work.empty()) {
    State q = work.front();
    work.pop_front();
    auto [x, y] = states[q];
    std::vector<Opt> aopts;
    if (x == AFIN) {
      aopts.push_back({ALLPAD, AFIN});
    } else {
      for (const Transition& t : a.row(static_cast<State>(x)))
        aopts.push_back({t.sym, t.to});
      if (a.finals()[static_cast<State>(x)]) aopts.push_back({ALLPAD, AFIN});
    }
    const auto& bmap = b_options(y);
    for (const Opt& oa : aopts) {
      auto itb = bmap.find(key_of(a, oa.sym, shared_in_a));
      if (itb == bmap.end()) continue;
      for (const Opt& ob : itb->second) {
        if (oa.sym == ALLPAD && ob.sym == ALLPAD) continue; // would be all-pad
        for (int r = 0; r < k; ++r) comp_r[static_cast<std::size_t>(r)] = -1;
        for (int j = 0; j < ka; ++j)
          comp_r[static_cast<std::size_t>(tape_map_a[static_cast<std::size_t>(j)])] =
              oa.sym == ALLPAD ? a.taped_alphabet().pad()
                               : a.taped_alphabet().component(oa.sym, j);
        for (int j = 0; j < kb; ++j)
          comp_r[static_cast<std::size_t>(tape_map_b[static_cast<std::size_t>(j)])] =
              ob.sym == ALLPAD ? b.taped_alphabet().pad()
                               : b.taped_alphabet().component(ob.sym, j);
        trans.push_back({q, result_ta.encode(comp_r), get(oa.to, ob.to)});
        bud.check_transitions(trans.size());
      }
    }
  }
  State m = static_cast<State>(states.size());
  std::vector<bool> finals(m, false);
  for (State q = 0; q < m; ++q) {
    auto [x, y] = states[q];
    bool fa = x == AFIN || a.finals()[static_cast<State>(x)];
    bool fb = y == BFIN || b.finals()[static_cast<State>(y)];
    finals[q] = fa && fb;
  }
  return trim(RelationAutomaton::make_sparse(result_ta, m, std::move(initial),
                                             std::move(finals), std::move(trans)),
              bud);
}

RelationAutomaton cylindrify(const RelationAutomaton& a0, const std::vector<int>& tape_map,
                             const TapedAlphabet& result_ta, const Budget& bud) {
  RelationAutomaton a = materialize(a0, bud);
  if (static_cast<int>(tape_map.size()) != a.tapes())
    fail(ErrorCode::BadTapeIndex, "cylindrify: map arity mismatch");
  int k = result_ta.tapes();
  std::vector<bool> used(static_cast<std::size_t>(k), false);
  for (int t : tape_map) used[static_cast<std::size_t>(t)] = true;
  std::vector<int> free_tapes;
  for (int r = 0; r < k; ++r)
    if (!used[static_cast<std::size_t>(r)]) free_tapes.push_back(r);

  // Result = aligned intersection with the universe over the free tapes; a
  // direct expansion is simpler and the free tapes are few in practice.
  std::uint64_t combos = 1;
  for (std::size_t i = 0; i < free_tapes.size(); ++i)
    combos *= static_cast<std::uint64_t>(result_ta.base().size()) + 1;
  bud.check_transitions((a.transitions().size() + a.num_states()) * combos);

  State fin_state = a.num_states(); // pad-extension state
  std::vector<Transition> trans;
  std::vector<int> comp(static_cast<std::size_t>(k));
  auto expand = [&](State from, Symbol sym, bool allpad, State to) {
    for (int j = 0; j < a.tapes(); ++j)
      comp[static_cast<std::size_t>(tape_map[static_cast<std::size_t>(j)])] =
          allpad ? result_ta.pad() : a.taped_alphabet().component(sym, j);
    // odometer over free tapes, values 0..B (B = pad)
    std::vector<int> v(free_tapes.size(), 0);
    while (true) {
      bool all_pad = allpad;
      for (std::size_t i = 0; i < free_tapes.size(); ++i) {
        comp[static_cast<std::size_t>(free_tapes[i])] = v[i];
        if (v[i] != result_ta.pad()) all_pad = false;
      }
      if (!all_pad) trans.push_back({from, result_ta.encode(comp), to});
      std::size_t i = 0;
      for (; i < free_tapes.size(); ++i) {
        if (++v[i] <= result_ta.pad()) break;
        v[i] = 0;
      }
      if (i == free_tapes.size()) break;
    }
  };
  for (const Transition& t : a.transitions()) expand(t.from, t.sym, false, t.to);
  for (State s = 0; s < a.num_states(); ++s)
    if (a.finals()[s]) expand(s, 0, true, fin_state);
  if (!free_tapes.empty()) expand(fin_state, 0, true, fin_state);
  std::vector<bool> finals(a.num_states() + 1, false);
  for (State s = 0; s < a.num_states(); ++s) finals[s] = a.finals()[s];
  finals[fin_state] = true;
  RelationAutomaton out = RelationAutomaton::make_sparse(
      result_ta, a.num_states() + 1, a.initial_states(), std::move(finals),
      std::move(trans));
  return trim(normalize_validity(out, bud), bud);
}

RelationAutomaton project_tape(const RelationAutomaton& a0, int tape, const Budget& bud) {
  if (a0.tapes() < 2)
    fail(ErrorCode::BadTapeIndex, "project_tape: need at least 2 tapes");
  if (tape < 0 || tape >= a0.tapes())
    fail(ErrorCode::BadTapeIndex, "project_tape: tape out of range");
  RelationAutomaton a = materialize(a0, bud);
  TapedAlphabet out_ta(a.taped_alphabet().base(), a.tapes() - 1);
  std::vector<Transition> trans;
  std::vector<std::pair<State, State>> eps;
  std::vector<int> comp(static_cast<std::size_t>(a.tapes()));
  std::vector<int> comp2(static_cast<std::size_t>(a.tapes() - 1));
  for (const Transition& t : a.transitions()) {
    a.taped_alphabet().decode(t.sym, comp);
    bool all_pad = true;
    int j = 0;
    for (int i = 0; i < a.tapes(); ++i) {
      if (i == tape) continue;
      comp2[static_cast<std::size_t>(j++)] = comp[static_cast<std::size_t>(i)];
      if (comp[static_cast<std::size_t>(i)] != a.taped_alphabet().pad()) all_pad = false;
    }
    if (all_pad)
      eps.emplace_back(t.from, t.to);
    else
      trans.push_back({t.from, out_ta.encode(comp2), t.to});
  }
  // Epsilon elimination.
  State n = a.num_states();
  std::vector<std::vector<State>> eadj(n);
  for (auto& [s, t] : eps) eadj[s].push_back(t);
  std::vector<std::vector<State>> closure(n);
  for (State s = 0; s < n; ++s) {
    std::vector<bool> seen(n, false);
    std::deque<State> work{s};
    seen[s] = true;
    while (!work.empty()) {
      State u = work.front();
      work.pop_front();
      closure[s].push_back(u);
      for (State v : eadj[u])
        if (!seen[v]) {
          seen[v] = true;
          work.push_back(v);
        }
    }
  }
  std::vector<Transition> trans2;
  for (const Transition& t : trans)
    for (State u : closure[t.to]) {
      trans2.push_back({t.from, t.sym, u});
      bud.check_transitions(trans2.size());
    }
  std::vector<bool> finals(n, false);
  for (State s = 0; s < n; ++s)
    for (State u : closure[s])
      if (a.finals()[u]) {
        finals[s] = true;
        break;
      }
  std::vector<State> initial;
  for (State s : a.initial_states())
    for (State u : closure[s]) initial.push_back(u);
  // Initial closure only matters for the initial set itself.
  RelationAutomaton out = RelationAutomaton::make_sparse(out_ta, n, std::move(initial),
                                                         std::move(finals),
                                                         std::move(trans2));
  return trim(normalize_validity(out, bud), bud);
}

bool is_empty(const RelationAutomaton& a) {
  if (a.deterministic_complete()) return !shortest_member(a).has_value();
  // After trimming, every surviving initial state reaches a final state.
  return trim(a).initial_states().empty();
}

namespace {

// Per-state outgoing options with, for dense automata, each pattern default
// represented by the smallest free symbol of its pattern.
std::vector<std::pair<Symbol, State>> min_options(const RelationAutomaton& a, State s) {
  std::vector<std::pair<Symbol, State>> opts;
  if (!a.deterministic_complete()) {
    for (const Transition& t : a.row(s)) opts.emplace_back(t.sym, t.to);
    return opts;
  }
  const TapedAlphabet& ta = a.taped_alphabet();
  for (std::size_t c = 0; c < a.occ().size(); ++c)
    opts.emplace_back(a.occ()[c], a.dense_step(s, a.occ()[c]));
  auto counts = count_occ_per_pattern(ta, a.occ());
  for (std::uint32_t p = 0; p < ta.num_pad_patterns(); ++p) {
    if (pattern_phantom(ta, p, counts)) continue;
    Symbol first = 0;
    bool found = false;
    for_each_free_symbol(ta, p, a.occ(), [&](Symbol sym) {
      first = sym;
      found = true;
      return false;
    });
    if (found) opts.emplace_back(first, a.pattern_default(s, p));
  }
  std::sort(opts.begin(), opts.end());
  return opts;
}

} // namespace

std::optional<ConvWord> shortest_member(const RelationAutomaton& a0) {
  RelationAutomaton a = a0.deterministic_complete() ? a0 : trim(a0);
  // Identify states that can reach a final state.
  State n = a.num_states();
  if (n == 0) return std::nullopt;
  std::vector<std::vector<std::pair<Symbol, State>>> rows(n);
  std::vector<std::vector<State>> rev(n);
  for (State s = 0; s < n; ++s) {
    rows[s] = min_options(a, s);
    for (auto& [sym, t] : rows[s]) rev[t].push_back(s);
  }
  std::vector<bool> coacc(n, false);
  std::deque<State> work;
  for (State s = 0; s < n; ++s)
    if (a.finals()[s]) {
      coacc[s] = true;
      work.push_back(s);
    }
  while (!work.empty()) {
    State s = work.front();
    work.pop_front();
    for (State p : rev[s])
      if (!coacc[p]) {
        coacc[p] = true;
        work.push_back(p);
      }
  }
  std::vector<State> inits =
      a.deterministic_complete() ? std::vector<State>{a.dense_initial()} : a.initial_states();
  for (State s : inits)
    if (a.finals()[s]) return ConvWord{};
  // Level-synchronous search carrying a dense rank of the lexicographically
  // minimal word reaching each frontier state.
  struct Entry {
    State state;
    std::uint32_t rank;
  };
  struct Parent {
    State state;
    Symbol sym;
  };
  std::vector<std::vector<std::pair<State, Parent>>> levels; // per level: (state,parent)
  std::vector<Entry> frontier;
  {
    std::vector<State> sorted = inits;
    std::sort(sorted.begin(), sorted.end());
    for (State s : sorted)
      if (coacc[s]) frontier.push_back({s, 0});
  }
  for (std::size_t len = 1; len <= n + 1; ++len) {
    // candidates: target -> best (rank, sym, parent)
    std::unordered_map<State, std::tuple<std::uint32_t, Symbol, State>> best;
    for (const Entry& e : frontier) {
      for (auto& [sym, t] : rows[e.state]) {
        if (!coacc[t]) continue;
        auto it = best.find(t);
        std::tuple<std::uint32_t, Symbol, State> cand{e.rank, sym, e.state};
        if (it == best.end() || cand < it->second) {
          if (it == best.end())
            best.emplace(t, cand);
          else
            it->second = cand;
        }
      }
    }
    if (best.empty()) return std::nullopt;
    // Rank compression by (rank, sym) and record parents.
    std::vector<std::pair<std::tuple<std::uint32_t, Symbol, State>, State>> items;
    for (auto& [t, cand] : best) items.emplace_back(cand, t);
    std::sort(items.begin(), items.end());
    levels.emplace_back();
    frontier.clear();
    std::uint32_t rank = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i > 0 && std::get<0>(items[i].first) == std::get<0>(items[i - 1].first) &&
          std::get<1>(items[i].first) == std::get<1>(items[i - 1].first)) {
        // same word as previous
      } else if (i > 0) {
        ++rank;
      }
      State t = items[i].second;
      levels.back().push_back({t, {std::get<2>(items[i].first), std::get<1>(items[i].first)}});
      frontier.push_back({t, rank});
    }
    // Accepting state reached? pick the minimal-rank one.
    State hit = static_cast<State>(-1);
    std::uint32_t hit_rank = 0;
    for (const Entry& e : frontier)
      if (a.finals()[e.state] && (hit == static_cast<State>(-1) || e.rank < hit_rank)) {
        hit = e.state;
        hit_rank = e.rank;
      }
    if (hit != static_cast<State>(-1)) {
      ConvWord w(len);
      State cur = hit;
      for (std::size_t l = len; l-- > 0;) {
        const auto& lev = levels[l];
        auto it = std::find_if(lev.begin(), lev.end(),
                               [&](const auto& p) { return p.first == cur; });
        w[l] = it->second.sym;
        cur = it->second.state;
      }
      return w;
    }
  }
  return std::nullopt;
}

SubsetResult is_subset(const RelationAutomaton& a, const RelationAutomaton& b,
                       const Budget& bud) {
  if (a.taped_alphabet() != b.taped_alphabet())
    fail(ErrorCode::AlphabetMismatch, "is_subset: different taped alphabets");
  RelationAutomaton diff = intersect(a, complement(b, bud), bud);
  auto w = shortest_member(diff);
  if (!w) return {true, std::nullopt};
  return {false, std::move(w)};
}

bool equal_language(const RelationAutomaton& a, const RelationAutomaton& b,
                    const Budget& bud) {
  return is_subset(a, b, bud).holds && is_subset(b, a, bud).holds;
}

bool structurally_equal(const RelationAutomaton& a, const RelationAutomaton& b) {
  if (a.taped_alphabet() != b.taped_alphabet()) return false;
  if (a.deterministic_complete() != b.deterministic_complete()) return false;
  if (a.num_states() != b.num_states() || a.finals() != b.finals()) return false;
  if (a.deterministic_complete()) {
    if (a.dense_initial() != b.dense_initial() || a.occ() != b.occ()) return false;
    for (State s = 0; s < a.num_states(); ++s) {
      for (Symbol c : a.occ())
        if (a.dense_step(s, c) != b.dense_step(s, c)) return false;
      for (std::uint32_t p = 0; p < a.taped_alphabet().num_pad_patterns(); ++p)
        if (a.pattern_default(s, p) != b.pattern_default(s, p)) return false;
    }
    return true;
  }
  return a.initial_states() == b.initial_states() && a.transitions() == b.transitions();
}

void enumerate_language(const RelationAutomaton& a0, std::size_t max_len,
                        const std::function<bool(const ConvWord&)>& fn) {
  RelationAutomaton a = trim(a0);
  if (a.num_states() == 0) return;
  ConvWord word;
  bool stop = false;
  std::function<void(const std::vector<State>&, std::size_t)> rec_exact =
      [&](const std::vector<State>& cur, std::size_t remaining) {
        if (stop) return;
        if (remaining == 0) {
          for (State s : cur)
            if (a.finals()[s]) {
              if (!fn(word)) stop = true;
              return;
            }
          return;
        }
        std::map<Symbol, std::vector<State>> next;
        for (State s : cur)
          for (const Transition& t : a.row(s)) next[t.sym].push_back(t.to);
        for (auto& [sym, targets] : next) {
          std::sort(targets.begin(), targets.end());
          targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
          word.push_back(sym);
          rec_exact(targets, remaining - 1);
          word.pop_back();
          if (stop) return;
        }
      };
  std::vector<State> init = a.initial_states();
  std::sort(init.begin(), init.end());
  for (std::size_t len = 0; len <= max_len && !stop; ++len) {
    word.clear();
    rec_exact(init, len);
  }
}

} // namespace probisim::automata
