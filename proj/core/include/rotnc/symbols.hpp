#pragma once

#include <array>
#include <string>
#include <vector>

#include "rotnc/geometry.hpp"

namespace rotnc {

/// Unordered split of the N centres into two non-empty groups, stored canonically:
/// side_a is the side containing centre 1.  Indices are 1-based to match labels.
struct Partition {
  int label = 0;  // j in "P_j"; the first N labels isolate one centre
  int n = 0;
  std::vector<int> side_a;  // contains 1, sorted
  std::vector<int> side_b;  // sorted

  /// Index of the isolated centre when one side is a singleton, else -1.
  int isolated_centre() const;
  bool is_singleton() const { return isolated_centre() > 0; }
  std::string name() const;       // "P3"
  std::string sides_text() const; // "13|24"
};

bool operator==(const Partition& a, const Partition& b);
inline bool operator!=(const Partition& a, const Partition& b) { return !(a == b); }

/// All 2^(N-1) - 1 partitions; labels 1..N isolate centre 1..N, the rest follow in a
/// fixed enumeration order.
std::vector<Partition> enumerate_partitions(int n);

/// Build the canonical partition for a pair of sides (validates the cover).
Partition make_partition(int n, std::vector<int> one_side);

/// Parity of the winding number about each centre, in Z_2^N.
struct WindingVector {
  std::vector<int> parities;  // entries 0/1

  /// Admissible when two centres carry different parities.
  bool admissible() const;
};

bool operator==(const WindingVector& a, const WindingVector& b);

struct SymbolSequence {
  std::vector<Partition> symbols;

  int size() const { return static_cast<int>(symbols.size()); }
};

/// Cyclic right shift: (P1, ..., Pn) -> (Pn, P1, ..., P(n-1)).
SymbolSequence right_shift(const SymbolSequence& seq);

/// True when some power of the right shift maps one sequence onto the other.
bool equivalent(const SymbolSequence& a, const SymbolSequence& b);

struct WindingOptions {
  double guard_factor = 1e-6;  // guard radius as a fraction of the circle radius
};

/// Winding parities of a polygonal path about every centre.  Paths with both endpoints on
/// the circle of the problem are closed with the counterclockwise boundary arc from the
/// arrival angle to the departure angle (a full turn when the two coincide); paths that are
/// already closed away from the circle are taken as they are.
WindingVector winding_vector(const std::vector<Vec2>& path, const RescaledProblem& problem,
                             const WindingOptions& opt = {});

/// Partition induced by a winding vector: centres with even parity vs centres with odd parity.
Partition partition_of(const WindingVector& l, int n);

/// The two 4-blocks whose compositions stay collision-free for three centres.
enum class GSymbol { G1, G2 };

std::array<SymbolSequence, 2> g_alphabet();
SymbolSequence compose(const std::vector<GSymbol>& blocks);

/// Reflection-symmetric collision pattern on a window of 5 consecutive symbols:
/// the middle symbol isolates centre i and the window reads the same backwards.
bool collision_symmetry_present(const std::array<Partition, 5>& window, int centre);

/// All windows of 5 consecutive symbols; cyclically when `periodic` is set.
std::vector<std::array<Partition, 5>> five_windows(const SymbolSequence& seq, bool periodic);

}  // namespace rotnc
