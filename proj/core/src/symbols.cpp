#include "rotnc/symbols.hpp"

#include <algorithm>
#include <cmath>

namespace rotnc {

int Partition::isolated_centre() const {
  if (side_a.size() == 1) return side_a[0];
  if (side_b.size() == 1) return side_b[0];
  return -1;
}

std::string Partition::name() const { return "P" + std::to_string(label); }

std::string Partition::sides_text() const {
  std::string s;
  for (int k : side_a) s += std::to_string(k);
  s += '|';
  for (int k : side_b) s += std::to_string(k);
  return s;
}

bool operator==(const Partition& a, const Partition& b) {
  return a.n == b.n && a.side_a == b.side_a && a.side_b == b.side_b;
}

Partition make_partition(int n, std::vector<int> one_side) {
  if (n < 3) throw Error("partitions need at least 3 centres");
  std::sort(one_side.begin(), one_side.end());
  one_side.erase(std::unique(one_side.begin(), one_side.end()), one_side.end());
  if (one_side.empty() || static_cast<int>(one_side.size()) >= n)
    throw Error("partition sides must both be non-empty");
  std::vector<int> other;
  for (int k = 1; k <= n; ++k)
    if (!std::binary_search(one_side.begin(), one_side.end(), k)) other.push_back(k);
  for (int k : one_side)
    if (k < 1 || k > n) throw Error("partition index out of range");

  Partition p;
  p.n = n;
  if (one_side.front() == 1) {
    p.side_a = std::move(one_side);
    p.side_b = std::move(other);
  } else {
    p.side_a = std::move(other);
    p.side_b = std::move(one_side);
  }

  // Label: singleton partitions come first (P_j isolates centre j), the remaining
  // partitions follow in increasing bitmask order of the side not containing centre 1.
  int iso = p.isolated_centre();
  if (iso > 0) {
    p.label = iso;
  } else {
    unsigned mask = 0;
    for (int k : p.side_b) mask |= 1u << (k - 2);
    int rank = 0;
    for (unsigned m = 1; m < mask; ++m) {
      int bits = __builtin_popcount(m);
      if (bits != 1 && bits != n - 1) ++rank;
    }
    p.label = n + 1 + rank;
  }
  return p;
}

std::vector<Partition> enumerate_partitions(int n) {
  if (n < 3) throw Error("enumerate_partitions requires N >= 3");
  std::vector<Partition> out;
  for (int j = 1; j <= n; ++j) out.push_back(make_partition(n, {j}));
  for (unsigned mask = 1; mask < (1u << (n - 1)); ++mask) {
    int bits = __builtin_popcount(mask);
    if (bits == 1 || bits == n - 1) continue;  // singleton cases already listed
    std::vector<int> side;
    for (int b = 0; b < n - 1; ++b)
      if (mask & (1u << b)) side.push_back(b + 2);
    out.push_back(make_partition(n, std::move(side)));
  }
  return out;
}

bool WindingVector::admissible() const {
  for (size_t k = 1; k < parities.size(); ++k)
    if (parities[k] != parities[0]) return true;
  return false;
}

bool operator==(const WindingVector& a, const WindingVector& b) {
  return a.parities == b.parities;
}

SymbolSequence right_shift(const SymbolSequence& seq) {
  SymbolSequence out = seq;
  if (out.symbols.size() > 1)
    std::rotate(out.symbols.begin(), out.symbols.end() - 1, out.symbols.end());
  return out;
}

bool equivalent(const SymbolSequence& a, const SymbolSequence& b) {
  if (a.symbols.size() != b.symbols.size()) return false;
  SymbolSequence shifted = a;
  for (size_t m = 0; m < a.symbols.size(); ++m) {
    if (shifted.symbols == b.symbols) return true;
    shifted = right_shift(shifted);
  }
  return a.symbols.empty();
}

namespace {

double segment_distance(Vec2 a, Vec2 b, Vec2 p) {
  Vec2 d = b - a;
  double len2 = norm2(d);
  if (len2 == 0.0) return norm(p - a);
  double t = std::clamp(dot(p - a, d) / len2, 0.0, 1.0);
  return norm(p - (a + t * d));
}

// Signed angle swept about `c` by the closed polygon, divided by 2*pi.
int winding_of_polygon(const std::vector<Vec2>& poly, Vec2 c, double guard, int centre_index) {
  double total = 0.0;
  for (size_t i = 0; i + 1 < poly.size(); ++i) {
    if (segment_distance(poly[i], poly[i + 1], c) < guard)
      throw AmbiguousWindingError(centre_index,
                                  "ambiguous winding: path within guard radius of centre " +
                                      std::to_string(centre_index + 1));
    Vec2 a = poly[i] - c, b = poly[i + 1] - c;
    total += std::atan2(cross(a, b), dot(a, b));
  }
  double turns = total / (2.0 * M_PI);
  double rounded = std::round(turns);
  if (std::abs(total - rounded * 2.0 * M_PI) > 1e-6)
    throw Error("winding sum is not an integer multiple of 2*pi");
  return static_cast<int>(rounded);
}

}  // namespace

WindingVector winding_vector(const std::vector<Vec2>& path, const RescaledProblem& problem,
                             const WindingOptions& opt) {
  if (path.size() < 2) throw Error("winding_vector needs a path with at least 2 nodes");
  const double R = problem.radius;
  const double on_circle_tol = 1e-9 * R;

  std::vector<Vec2> poly = path;
  bool start_on = std::abs(norm(path.front()) - R) <= on_circle_tol;
  bool end_on = std::abs(norm(path.back()) - R) <= on_circle_tol;

  if (start_on && end_on) {
    // Close with the counterclockwise boundary arc from the arrival angle back to the
    // departure angle; a coincident pair gets the full circle.
    double theta1 = angle_of(path.front());
    double theta2 = angle_of(path.back());
    double span = wrap_angle(theta1 - theta2);
    if (span == 0.0) span = 2.0 * M_PI;
    int segs = std::max(64, static_cast<int>(std::ceil(span / (M_PI / 128.0))));
    for (int s = 1; s <= segs; ++s)
      poly.push_back(from_polar(R, theta2 + span * s / segs));
    poly.back() = path.front();
  } else if (norm(path.front() - path.back()) <= on_circle_tol) {
    // already closed
  } else {
    throw Error("winding_vector: open path with endpoints off the boundary circle");
  }

  const double guard = opt.guard_factor * R;
  WindingVector l;
  l.parities.resize(problem.system.size());
  for (int k = 0; k < problem.system.size(); ++k) {
    int w = winding_of_polygon(poly, problem.system.centres[k], guard, k);
    l.parities[k] = ((w % 2) + 2) % 2;
  }
  return l;
}

Partition partition_of(const WindingVector& l, int n) {
  if (static_cast<int>(l.parities.size()) != n) throw Error("winding vector size mismatch");
  if (!l.admissible())
    throw Error("inadmissible winding vector: all parities equal");
  std::vector<int> odd;
  for (int k = 0; k < n; ++k)
    if (l.parities[k] % 2 != 0) odd.push_back(k + 1);
  return make_partition(n, std::move(odd));
}

std::array<SymbolSequence, 2> g_alphabet() {
  auto parts = enumerate_partitions(3);
  const Partition& p1 = parts[0];
  const Partition& p2 = parts[1];
  const Partition& p3 = parts[2];
  SymbolSequence g1{{p1, p1, p2, p3}};
  SymbolSequence g2{{p2, p2, p3, p1}};
  return {g1, g2};
}

SymbolSequence compose(const std::vector<GSymbol>& blocks) {
  if (blocks.empty()) throw Error("compose needs at least one block");
  auto alphabet = g_alphabet();
  SymbolSequence out;
  for (GSymbol g : blocks) {
    const SymbolSequence& block = alphabet[g == GSymbol::G1 ? 0 : 1];
    out.symbols.insert(out.symbols.end(), block.symbols.begin(), block.symbols.end());
  }
  return out;
}

bool collision_symmetry_present(const std::array<Partition, 5>& window, int centre) {
  return window[2].isolated_centre() == centre && window[0] == window[4] &&
         window[1] == window[3];
}

std::vector<std::array<Partition, 5>> five_windows(const SymbolSequence& seq, bool periodic) {
  std::vector<std::array<Partition, 5>> out;
  const int n = seq.size();
  if (periodic) {
    if (n < 1) return out;
    for (int i = 0; i < n; ++i) {
      std::array<Partition, 5> w{seq.symbols[i % n], seq.symbols[(i + 1) % n],
                                 seq.symbols[(i + 2) % n], seq.symbols[(i + 3) % n],
                                 seq.symbols[(i + 4) % n]};
      out.push_back(w);
    }
  } else {
    for (int i = 0; i + 5 <= n; ++i) {
      std::array<Partition, 5> w{seq.symbols[i], seq.symbols[i + 1], seq.symbols[i + 2],
                                 seq.symbols[i + 3], seq.symbols[i + 4]};
      out.push_back(w);
    }
  }
  return out;
}

}  // namespace rotnc
