#ifndef TREESOBOL_LHD_HPP
#define TREESOBOL_LHD_HPP

#include <cstdint>
#include <vector>

namespace treesobol {

// n x p design on [0,1]^p, row-major. Each column holds one jittered
// point per stratum [k/n, (k+1)/n). Candidates are drawn from a single
// stream seeded by `seed`; the one with the largest minimum pairwise
// distance wins, so more restarts never yield a worse design for the
// same seed.
std::vector<double> maximin_lhd(int n, int p, std::uint64_t seed, int restarts = 100);

// smallest pairwise squared euclidean distance of a row-major design
double min_pairwise_sq_distance(const std::vector<double>& design, int n, int p);

}  // namespace treesobol

#endif  // TREESOBOL_LHD_HPP
