#include "probisim/partition.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <unordered_map>

namespace probisim::bisim {

void Partition::canonicalize() {
  std::vector<int> first_seen(block_of.size(), -1);
  int next = 0;
  std::vector<int> renum(num_blocks, -1);
  for (std::size_t s = 0; s < block_of.size(); ++s) {
    int b = block_of[s];
    if (b < 0) continue;
    if (renum[static_cast<std::size_t>(b)] < 0) renum[static_cast<std::size_t>(b)] = next++;
  }
  for (auto& b : block_of)
    if (b >= 0) b = renum[static_cast<std::size_t>(b)];
  num_blocks = next;
  (void)first_seen;
}

std::vector<std::vector<int>> Partition::blocks() const {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(num_blocks));
  for (std::size_t s = 0; s < block_of.size(); ++s)
    if (block_of[s] >= 0) out[static_cast<std::size_t>(block_of[s])].push_back(static_cast<int>(s));
  return out;
}

std::string Partition::serialize(const FinitePts& f) const {
  std::ostringstream out;
  auto bs = blocks();
  for (std::size_t b = 0; b < bs.size(); ++b) {
    out << "block " << b << ":";
    for (int s : bs[b])
      out << ' ' << f.base.format_word(f.configs[static_cast<std::size_t>(s)]);
    out << '\n';
  }
  return out.str();
}

namespace {

struct SigHash {
  std::size_t operator()(const std::vector<std::uint64_t>& v) const {
    std::size_t h = 1469598103934665603ull;
    for (std::uint64_t x : v) {
      h ^= x + 0x9e3779b97f4a7c15ull;
      h *= 1099511628211ull;
    }
    return h;
  }
};

Partition refine_to_fixpoint(const FinitePts& f, std::vector<int> block_of, int num_blocks) {
  std::size_t n = f.configs.size();
  while (true) {
    std::unordered_map<std::vector<std::uint64_t>, int, SigHash> ids;
    std::vector<int> next(n, -1);
    // Signature: current block, then per action the sorted (block, weight
    // sum) pairs of the out-row.
    std::vector<std::uint64_t> sig;
    for (std::size_t s = 0; s < n; ++s) {
      if (block_of[s] < 0) continue;
      sig.clear();
      sig.push_back(static_cast<std::uint64_t>(block_of[s]));
      for (std::size_t a = 0; a < f.rows.size(); ++a) {
        std::map<int, std::uint64_t> mass;
        for (auto& [to, w] : f.rows[a][s]) {
          int tb = block_of[static_cast<std::size_t>(to)];
          mass[tb] += w;
        }
        sig.push_back(~0ull); // action separator
        for (auto& [b, w] : mass) {
          sig.push_back(static_cast<std::uint64_t>(b) + 1);
          sig.push_back(w);
        }
      }
      auto [it, fresh] = ids.emplace(sig, static_cast<int>(ids.size()));
      (void)fresh;
      next[s] = it->second;
    }
    int new_count = static_cast<int>(ids.size());
    block_of = std::move(next);
    if (new_count == num_blocks) break;
    num_blocks = new_count;
  }
  Partition p;
  p.block_of = std::move(block_of);
  p.num_blocks = num_blocks;
  p.canonicalize();
  return p;
}

} // namespace

Partition greatest_bisimulation(const FinitePts& f) {
  std::vector<bool> all(f.configs.size(), true);
  return greatest_bisimulation_within(f, all, std::nullopt);
}

Partition greatest_bisimulation_within(const FinitePts& f, const std::vector<bool>& inv,
                                       const std::optional<std::vector<int>>& terminal_seed) {
  std::size_t n = f.configs.size();
  std::vector<int> block_of(n, -1);
  int blocks = 0;
  if (terminal_seed) {
    const std::vector<int>& seed = *terminal_seed;
    if (seed.size() != n)
      fail(ErrorCode::SeedNotOnTerminals, "seed size does not match the slice");
    // Seed classes partition exactly the terminal carrier states.
    std::map<int, int> renum;
    for (std::size_t s = 0; s < n; ++s) {
      if (!inv[s]) {
        if (seed[s] >= 0)
          fail(ErrorCode::SeedNotOnTerminals, "seed includes a state outside the invariant");
        continue;
      }
      bool dead = f.dead(static_cast<int>(s));
      if (dead != (seed[s] >= 0))
        fail(ErrorCode::SeedNotOnTerminals,
             "seed must cover exactly the terminal states of the invariant");
      if (dead) {
        auto [it, fresh] = renum.emplace(seed[s], blocks);
        if (fresh) ++blocks;
        block_of[s] = it->second;
      }
    }
    int live_block = blocks++;
    for (std::size_t s = 0; s < n; ++s)
      if (inv[s] && block_of[s] < 0) block_of[s] = live_block;
  } else {
    for (std::size_t s = 0; s < n; ++s)
      if (inv[s]) block_of[s] = 0;
    blocks = 1;
  }
  return refine_to_fixpoint(f, std::move(block_of), blocks);
}

Partition naive_oracle(const FinitePts& f, std::size_t cap) {
  std::size_t n = f.configs.size();
  if (n > cap) fail(ErrorCode::CapExceeded, "naive_oracle: state cap exceeded");
  std::vector<bool> related(n * n, true);
  auto rel = [&](std::size_t a, std::size_t b) -> std::vector<bool>::reference {
    return related[a * n + b];
  };
  while (true) {
    // induced partition = connected components of the relation
    std::vector<int> comp(n, -1);
    int ncomp = 0;
    for (std::size_t s = 0; s < n; ++s) {
      if (comp[s] >= 0) continue;
      comp[s] = ncomp;
      std::vector<std::size_t> stack{s};
      while (!stack.empty()) {
        std::size_t u = stack.back();
        stack.pop_back();
        for (std::size_t v = 0; v < n; ++v)
          if ((rel(u, v) || rel(v, u)) && comp[v] < 0) {
            comp[v] = ncomp;
            stack.push_back(v);
          }
      }
      ++ncomp;
    }
    // delete pairs that violate the per-class weight condition
    bool changed = false;
    for (std::size_t pq = 0; pq < n * n; ++pq) {
      if (!related[pq]) continue;
      std::size_t p = pq / n, q = pq % n;
      if (p == q) continue;
      bool ok = true;
      for (std::size_t a = 0; a < f.rows.size() && ok; ++a) {
        std::map<int, long long> diff;
        for (auto& [to, w] : f.rows[a][p]) diff[comp[static_cast<std::size_t>(to)]] += static_cast<long long>(w);
        for (auto& [to, w] : f.rows[a][q]) diff[comp[static_cast<std::size_t>(to)]] -= static_cast<long long>(w);
        for (auto& [b, d] : diff)
          if (d != 0) ok = false;
      }
      if (!ok) {
        related[pq] = false;
        changed = true;
      }
    }
    if (!changed) {
      Partition out;
      out.block_of = std::move(comp);
      out.num_blocks = ncomp;
      out.canonicalize();
      return out;
    }
  }
}

bool is_probabilistic_bisimulation(const FinitePts& f, const Partition& p) {
  std::size_t n = f.configs.size();
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t t = s + 1; t < n; ++t) {
      if (!p.same_block(static_cast<int>(s), static_cast<int>(t))) continue;
      for (std::size_t a = 0; a < f.rows.size(); ++a) {
        std::map<int, long long> diff;
        for (auto& [to, w] : f.rows[a][s]) diff[p.block_of[static_cast<std::size_t>(to)]] += static_cast<long long>(w);
        for (auto& [to, w] : f.rows[a][t]) diff[p.block_of[static_cast<std::size_t>(to)]] -= static_cast<long long>(w);
        for (auto& [b, d] : diff)
          if (d != 0) return false;
      }
    }
  return true;
}

} // namespace probisim::bisim
