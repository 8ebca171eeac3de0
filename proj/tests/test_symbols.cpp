#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "rotnc/symbols.hpp"

using namespace rotnc;

namespace {

std::string window_text(const std::array<Partition, 5>& w) {
  std::string s;
  for (const Partition& p : w) s += std::to_string(p.label);
  return s;
}

// the sixteen admissible groups of five consecutive symbols, straight from the source
const std::set<std::string> kSixteen = {
    "11231", "11232", "12311", "12322", "23112", "23223", "31123", "32231",
    "22311", "22312", "23111", "23122", "31112", "31223", "11123", "12231"};

RescaledProblem cfgA(double eps = 0.05, double nu = 0.0) {
  return make_rescaled(fixtures::equilateral3(), eps, nu);
}

}  // namespace

TEST_CASE("enumerate_partitions: counts and singleton flags") {
  auto p3 = enumerate_partitions(3);
  CHECK(p3.size() == 3);
  for (const Partition& p : p3) CHECK(p.is_singleton());

  auto p4 = enumerate_partitions(4);
  CHECK(p4.size() == 7);
  int singles = 0;
  for (const Partition& p : p4) singles += p.is_singleton() ? 1 : 0;
  CHECK(singles == 4);

  CHECK(enumerate_partitions(5).size() == 15);
  for (int n = 3; n <= 8; ++n)
    CHECK(enumerate_partitions(n).size() == (1u << (n - 1)) - 1);
  CHECK_THROWS_AS(enumerate_partitions(2), Error);
}

TEST_CASE("enumerate_partitions: labels are stable and sides canonical") {
  auto p4 = enumerate_partitions(4);
  for (size_t i = 0; i < p4.size(); ++i) {
    CHECK(p4[i].label == static_cast<int>(i + 1));
    CHECK(p4[i].side_a.front() == 1);
  }
  CHECK(p4[0].sides_text() == "1|234");
  CHECK(p4[6].sides_text() == "12|34");
  // no duplicates under side swap
  std::set<std::string> seen;
  for (const Partition& p : p4) CHECK(seen.insert(p.sides_text()).second);
}

TEST_CASE("right shift and equivalence") {
  auto p = enumerate_partitions(3);
  SymbolSequence seq{{p[0], p[1], p[2]}};
  SymbolSequence shifted = right_shift(seq);
  CHECK(shifted.symbols[0] == p[2]);
  CHECK(shifted.symbols[1] == p[0]);
  CHECK(shifted.symbols[2] == p[1]);

  SymbolSequence cycle = seq;
  for (int i = 0; i < 3; ++i) cycle = right_shift(cycle);
  CHECK(cycle.symbols == seq.symbols);

  CHECK(equivalent(SymbolSequence{{p[0], p[1]}}, SymbolSequence{{p[1], p[0]}}));
  CHECK_FALSE(equivalent(SymbolSequence{{p[0], p[1]}}, SymbolSequence{{p[0], p[2]}}));
  CHECK_FALSE(equivalent(SymbolSequence{{p[0]}}, SymbolSequence{{p[0], p[0]}}));
}

TEST_CASE("right shift properties on random sequences") {
  std::mt19937 rng(3);
  auto parts = enumerate_partitions(4);
  std::uniform_int_distribution<int> pick(0, 6), len(1, 9);
  for (int trial = 0; trial < 50; ++trial) {
    SymbolSequence a;
    int n = len(rng);
    for (int i = 0; i < n; ++i) a.symbols.push_back(parts[pick(rng)]);
    SymbolSequence b = right_shift(a);
    CHECK(b.size() == a.size());
    auto key = [](const SymbolSequence& s) {
      std::multiset<int> k;
      for (const Partition& p : s.symbols) k.insert(p.label);
      return k;
    };
    CHECK(key(a) == key(b));
    CHECK(equivalent(a, a));        // reflexive
    CHECK(equivalent(a, b));        // symmetric both ways
    CHECK(equivalent(b, a));
    SymbolSequence c = right_shift(right_shift(b));
    CHECK((equivalent(a, c) && equivalent(b, c)));  // transitive sample
  }
}

TEST_CASE("winding vector: closed loop around one centre") {
  RescaledProblem p = cfgA();
  std::vector<Vec2> circle;
  for (int s = 0; s <= 64; ++s)
    circle.push_back(p.system.centres[0] + from_polar(0.02, 2.0 * M_PI * s / 64.0));
  circle.back() = circle.front();
  WindingVector l = winding_vector(circle, p);
  CHECK(l.parities == std::vector<int>{1, 0, 0});
  CHECK(oracles::winding_parity_raycast(circle, p.system.centres[0]) == 1);
  CHECK(oracles::winding_parity_raycast(circle, p.system.centres[1]) == 0);
}

TEST_CASE("winding vector: constant boundary path closes to a full turn") {
  RescaledProblem p = cfgA();
  Vec2 q = from_polar(p.radius, 0.3);
  std::vector<Vec2> path{q, q};
  WindingVector l = winding_vector(path, p);
  CHECK(l.parities == std::vector<int>{1, 1, 1});
}

TEST_CASE("winding vector: chord separating one centre, against the raycast oracle") {
  RescaledProblem p = cfgA();
  // c1 sits at angle pi/2 and radius eps; a chord at height eps/4 passes between
  // c1 and the lower pair
  double y0 = p.eps / 4.0;
  double th = std::asin(y0 / p.radius);
  Vec2 a = from_polar(p.radius, M_PI - th), b = from_polar(p.radius, th);
  std::vector<Vec2> path;
  for (int s = 0; s <= 32; ++s) path.push_back(a + (double(s) / 32.0) * (b - a));
  WindingVector l = winding_vector(path, p);
  CHECK(l.parities[0] != l.parities[1]);
  CHECK(l.parities[1] == l.parities[2]);

  // oracle on the explicitly closed polygon (chord + ccw boundary arc)
  std::vector<Vec2> closed = path;
  double th2 = angle_of(b), th1 = angle_of(a);
  double span = wrap_angle(th1 - th2);
  for (int s = 1; s <= 256; ++s) closed.push_back(from_polar(p.radius, th2 + span * s / 256));
  closed.push_back(closed.front());
  for (int k = 0; k < 3; ++k)
    CHECK(oracles::winding_parity_raycast(closed, p.system.centres[k]) == l.parities[k]);
}

TEST_CASE("winding vector: invariance under refinement and reparametrization") {
  RescaledProblem p = cfgA();
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vec2 a = from_polar(p.radius, 2.2), b = from_polar(p.radius, -0.4);
  std::vector<Vec2> base{a, {0.3, 0.4}, {-0.2, 0.1}, {0.1, -0.3}, b};
  WindingVector l0 = winding_vector(base, p);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec2> refined;
    for (size_t i = 0; i + 1 < base.size(); ++i) {
      refined.push_back(base[i]);
      int extra = static_cast<int>(unif(rng) * 4);
      std::vector<double> ts;
      for (int e = 0; e < extra; ++e) ts.push_back(unif(rng));
      std::sort(ts.begin(), ts.end());
      for (double t : ts) refined.push_back(base[i] + t * (base[i + 1] - base[i]));
    }
    refined.push_back(base.back());
    CHECK(winding_vector(refined, p) == l0);
  }
}

TEST_CASE("winding vector: guard radius violation is ambiguous") {
  RescaledProblem p = cfgA();
  std::vector<Vec2> through{from_polar(p.radius, angle_of(p.system.centres[0])),
                            Vec2{0, 0} - p.system.centres[0],
                            from_polar(p.radius, angle_of(p.system.centres[0]) + 0.1)};
  // the first segment runs straight over centre 1
  CHECK_THROWS_AS(winding_vector(through, p), AmbiguousWindingError);
}

TEST_CASE("partition_of: parity grouping and admissibility") {
  Partition p1 = partition_of(WindingVector{{1, 0, 0}}, 3);
  CHECK(p1.label == 1);
  CHECK(p1.sides_text() == "1|23");

  Partition p12 = partition_of(WindingVector{{1, 1, 0, 0}}, 4);
  CHECK(p12.sides_text() == "12|34");

  CHECK_THROWS_AS(partition_of(WindingVector{{0, 0, 0}}, 3), Error);
}

TEST_CASE("partition_of: surjective over admissible winding vectors for N <= 6") {
  for (int n = 3; n <= 6; ++n) {
    std::set<int> labels;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      WindingVector l;
      for (int k = 0; k < n; ++k) l.parities.push_back((mask >> k) & 1);
      if (!l.admissible()) continue;
      labels.insert(partition_of(l, n).label);
    }
    CHECK(labels.size() == (1u << (n - 1)) - 1);
  }
}

TEST_CASE("G alphabet and composition") {
  auto g = g_alphabet();
  CHECK(g[0].symbols[0].label == 1);
  CHECK(g[0].symbols[1].label == 1);
  CHECK(g[0].symbols[2].label == 2);
  CHECK(g[0].symbols[3].label == 3);
  CHECK(g[1].symbols[0].label == 2);
  CHECK(g[1].symbols[1].label == 2);
  CHECK(g[1].symbols[2].label == 3);
  CHECK(g[1].symbols[3].label == 1);

  CHECK(compose({GSymbol::G1}).size() == 4);
  CHECK(compose({GSymbol::G1, GSymbol::G2}).size() == 8);
}

TEST_CASE("collision symmetry pattern") {
  auto parts = enumerate_partitions(3);
  auto P = [&](int j) { return parts[j - 1]; };
  std::array<Partition, 5> symmetric{P(2), P(3), P(1), P(3), P(2)};
  CHECK(collision_symmetry_present(symmetric, 1));
  CHECK_FALSE(collision_symmetry_present(symmetric, 2));

  std::array<Partition, 5> group1{P(1), P(1), P(2), P(3), P(1)};
  CHECK_FALSE(collision_symmetry_present(group1, 1));

  // every one of the sixteen groups fails the pattern for every centre
  for (const std::string& text : kSixteen) {
    std::array<Partition, 5> w{P(text[0] - '0'), P(text[1] - '0'), P(text[2] - '0'),
                               P(text[3] - '0'), P(text[4] - '0')};
    for (int c = 1; c <= 3; ++c) CHECK_FALSE(collision_symmetry_present(w, c));
  }
}

TEST_CASE("five windows of G-compositions stay inside the sixteen groups") {
  auto w1 = five_windows(compose({GSymbol::G1}), true);
  CHECK(w1.size() == 4);
  std::set<std::string> distinct;
  for (const auto& w : w1) {
    CHECK(kSixteen.count(window_text(w)) == 1);
    distinct.insert(window_text(w));
  }
  CHECK(distinct.size() == 4);

  auto w2 = five_windows(compose({GSymbol::G1, GSymbol::G2}), true);
  CHECK(w2.size() == 8);
  std::set<std::string> d2;
  for (const auto& w : w2) {
    CHECK(kSixteen.count(window_text(w)) == 1);
    d2.insert(window_text(w));
  }
  CHECK(d2.size() == 8);

  // exhaustive over all compositions of up to 4 blocks
  for (int n = 1; n <= 4; ++n) {
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      std::vector<GSymbol> blocks;
      for (int b = 0; b < n; ++b)
        blocks.push_back((mask >> b) & 1 ? GSymbol::G2 : GSymbol::G1);
      SymbolSequence seq = compose(blocks);
      for (const auto& w : five_windows(seq, true)) {
        CHECK(kSixteen.count(window_text(w)) == 1);
        for (int c = 1; c <= 3; ++c) CHECK_FALSE(collision_symmetry_present(w, c));
      }
    }
  }
}

TEST_CASE("five windows: non-periodic window count") {
  SymbolSequence seq = compose({GSymbol::G1});
  seq.symbols.push_back(seq.symbols[0]);  // length 5
  CHECK(five_windows(seq, false).size() == 1);
}
