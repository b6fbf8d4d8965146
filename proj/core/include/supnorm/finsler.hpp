#ifndef SUPNORM_FINSLER_HPP
#define SUPNORM_FINSLER_HPP

#include <functional>
#include <limits>
#include <map>
#include <vector>

#include "supnorm/grid.hpp"
#include "supnorm/hamiltonian.hpp"

namespace supnorm {

struct Seed {
    int node = -1;
    double value = 0.0;
};

// Forward: field(x) = min over seeds y of value(y) + d_lambda(y, x).
// Reverse: field(x) = min over seeds y of value(y) + d_lambda(x, y).
enum class Dir { Forward, Reverse };

struct DistanceField {
    double lambda = 0.0;
    Dir dir = Dir::Forward;
    std::vector<double> dist;
    std::vector<int> pred;
};

struct SolveOptions {
    // Restrict propagation to nodes with allowed[n] != 0 (nullptr: all inside).
    const std::vector<char>* allowed = nullptr;
    // Stop once every listed node is settled.
    const std::vector<int>* stop_targets = nullptr;
    // Stop once the smallest tentative key exceeds this value; entries that
    // finish at or below it are exact.
    double stop_key = std::numeric_limits<double>::infinity();
};

// Quadrature weight of the directed edge a -> b under the gauge of
// H(., .) <= lambda. Near-boundary edges of spatially varying Hamiltonians
// use a refined rule.
double edge_weight(const GridDomain& dom, const HamiltonianSpec& ham,
                   double lambda, int a, int b);

// Weights of all directed edges at a fixed lambda, memoized per lambda.
class EdgeWeightTable {
  public:
    EdgeWeightTable(const GridDomain& dom, const HamiltonianSpec& ham)
        : dom_(&dom), ham_(&ham) {}

    const std::vector<double>& at(double lambda) const;
    const GridDomain& domain() const { return *dom_; }
    const HamiltonianSpec& hamiltonian() const { return *ham_; }
    void clear() const { cache_.clear(); }

  private:
    const GridDomain* dom_;
    const HamiltonianSpec* ham_;
    mutable std::map<double, std::vector<double>> cache_;
};

DistanceField shortest_paths(const GridDomain& dom,
                             const std::vector<double>& edge_w,
                             const std::vector<Seed>& seeds, Dir dir,
                             double lambda, const SolveOptions& opts = {});

// Same solve with weights produced on demand; eid indexes directed edges.
DistanceField shortest_paths_fn(const GridDomain& dom,
                                const std::function<double(int)>& edge_w,
                                const std::vector<Seed>& seeds, Dir dir,
                                double lambda, const SolveOptions& opts = {});

double pairwise_distance(const GridDomain& dom, const std::vector<double>& edge_w,
                         int a, int b);

// Node path from the seed that realizes field.dist[node] up to node itself.
std::vector<int> extract_geodesic(const DistanceField& field, int node);

}  // namespace supnorm

#endif
