#ifndef PROBISIM_PARTITION_HPP
#define PROBISIM_PARTITION_HPP

#include <optional>
#include <string>
#include <vector>

#include "probisim/pts.hpp"

namespace probisim::bisim {

using pts::FinitePts;

// Block assignment over FinitePts states. Blocks are numbered by their
// smallest member index; states outside the carrier (when restricted to an
// invariant) get block -1.
struct Partition {
  std::vector<int> block_of;
  int num_blocks = 0;

  bool same_block(int a, int b) const {
    return block_of[static_cast<std::size_t>(a)] >= 0 &&
           block_of[static_cast<std::size_t>(a)] == block_of[static_cast<std::size_t>(b)];
  }
  // Renumber blocks canonically (by smallest member).
  void canonicalize();
  std::vector<std::vector<int>> blocks() const;
  std::string serialize(const FinitePts& f) const;

  friend bool operator==(const Partition&, const Partition&) = default;
};

// Coarsest partition where same-block states assign equal summed weight to
// every block under every action; signature refinement to a fixpoint.
Partition greatest_bisimulation(const FinitePts& f);

// Restriction to a state subset with an optional seed partition of the
// terminal states (terminal = dead for every action). The result refines the
// seed on terminals; non-carrier states stay at block -1.
Partition greatest_bisimulation_within(const FinitePts& f, const std::vector<bool>& inv,
                                       const std::optional<std::vector<int>>& terminal_seed);

// Independent oracle: start from the total relation and delete pairs
// violating the bisimulation condition against the induced partition until
// a fixpoint is reached.
Partition naive_oracle(const FinitePts& f, std::size_t cap = 200);

// Direct check of the probabilistic bisimulation condition for a partition.
bool is_probabilistic_bisimulation(const FinitePts& f, const Partition& p);

} // namespace probisim::bisim

#endif
