#ifndef SUPNORM_SRC_PATCH_HPP
#define SUPNORM_SRC_PATCH_HPP

#include <utility>
#include <vector>

#include "supnorm/grid.hpp"
#include "supnorm/hamiltonian.hpp"

namespace supnorm::detail {

// Compact subgraph over an intrinsic ball, with scratch buffers that persist
// across patches so repeated local solves stay O(patch size).
class PatchWorkspace {
  public:
    explicit PatchWorkspace(const GridDomain& dom);

    // Rebuilds the patch as the intrinsic ball of the given radius.
    void build_ball(int center, double radius);

    const GridDomain& domain() const { return *dom_; }
    int size() const { return static_cast<int>(nodes_.size()); }
    const std::vector<int>& nodes() const { return nodes_; }  // local -> global
    int local_of(int g) const { return local_id_[g]; }
    double center_dist(int li) const { return ball_[li]; }
    // Domain-boundary node, or has a stencil edge leaving the patch.
    bool on_patch_boundary(int li) const { return bdry_[li] != 0; }

    int edge_count() const { return static_cast<int>(eto_.size()); }
    void set_lambda(const HamiltonianSpec& ham, double lambda);

    // Multi-seed Dijkstra on the local subgraph at the current lambda.
    // Seeds are (local node, start value); reverse relaxes along reversed
    // edges so dist[v] = min over seeds s of value(s) + d(v, s).
    void solve(const std::vector<std::pair<int, double>>& seeds, bool reverse,
               double stop_key, std::vector<double>& dist) const;

  private:
    const GridDomain* dom_;
    std::vector<int> local_id_;   // per global node, -1 outside the patch
    std::vector<double> gdist_;   // ball scratch, +inf when idle
    std::vector<int> touched_;

    std::vector<int> nodes_;
    std::vector<double> ball_;
    std::vector<char> bdry_;
    std::vector<int> ebegin_;
    std::vector<int> efrom_;
    std::vector<int> eto_;
    std::vector<int> erev_;
    std::vector<double> w_;
};

}  // namespace supnorm::detail

#endif
