#ifndef TREESOBOL_RANKING_HPP
#define TREESOBOL_RANKING_HPP

#include <span>
#include <vector>

namespace treesobol {

// Standard-competition ranking: tied items share the minimum rank and
// the following ranks skip by the tie-group size ("1224" style).
// Rank 1 is most active.
struct Ranking {
  std::vector<int> ranks;

  int size() const { return static_cast<int>(ranks.size()); }
  bool operator==(const Ranking&) const = default;
};

// Throws unless `ranks` is attainable by competition-ranking some real
// vector: each rank r with multiplicity u is followed by rank r + u.
void validate_ranking(const Ranking& ranking);

// Rank by value, larger = more active. Values whose consecutive sorted
// gaps are within tie_tol are chained into one tie group.
Ranking competition_rank(std::span<const double> values, double tie_tol = 0.0);

// Multi-stage discordances of `other` against reference `truth`:
// at each stage the items tied for most active in `truth` among those
// remaining are located inside `other` (restricted to the remaining
// items); W_k is the best such position minus one, and one item
// achieving it is removed (lowest item index; the choice provably does
// not matter).
std::vector<int> discordances(const Ranking& truth, const Ranking& other);

// d_r = 2 * sum of discordances; equals the Kemeny-Snell distance when
// neither ranking has ties.
int d_r(const Ranking& truth, const Ranking& other);

// Kemeny-Snell distance 0.5 * sum_ij |A_ij - B_ij| with pairwise
// preference entries in {-1, 0, 1}.
double kemeny_snell(const Ranking& a, const Ranking& b);

}  // namespace treesobol

#endif  // TREESOBOL_RANKING_HPP
