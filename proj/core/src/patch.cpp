#include "patch.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <stdexcept>

#include "supnorm/finsler.hpp"

namespace supnorm::detail {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

PatchWorkspace::PatchWorkspace(const GridDomain& dom) : dom_(&dom) {
    local_id_.assign(dom.node_count(), -1);
    gdist_.assign(dom.node_count(), kInf);
}

void PatchWorkspace::build_ball(int center, double radius) {
    const GridDomain& dom = *dom_;
    for (int g : nodes_) local_id_[g] = -1;
    nodes_.clear();
    ball_.clear();
    bdry_.clear();
    ebegin_.clear();
    efrom_.clear();
    eto_.clear();
    erev_.clear();
    w_.clear();

    if (center < 0 || center >= dom.node_count() || !dom.inside[center])
        throw std::invalid_argument("patch center must be an inside node");

    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    gdist_[center] = 0.0;
    touched_.push_back(center);
    heap.emplace(0.0, center);
    while (!heap.empty()) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (d > gdist_[u]) continue;
        if (d > radius) break;
        for (int e = dom.edge_begin[u]; e < dom.edge_begin[u + 1]; ++e) {
            const int v = dom.edge_to[e];
            const double alt = d + dom.edge_len[e];
            if (alt < gdist_[v]) {
                if (gdist_[v] == kInf) touched_.push_back(v);
                gdist_[v] = alt;
                heap.emplace(alt, v);
            }
        }
    }

    for (int g : touched_)
        if (gdist_[g] <= radius + 1e-12) nodes_.push_back(g);
    std::sort(nodes_.begin(), nodes_.end());

    const int k = static_cast<int>(nodes_.size());
    for (int li = 0; li < k; ++li) local_id_[nodes_[li]] = li;
    ball_.resize(k);
    bdry_.assign(k, 0);
    ebegin_.assign(k + 1, 0);

    for (int li = 0; li < k; ++li) {
        const int g = nodes_[li];
        ball_[li] = gdist_[g];
        bool b = dom.is_boundary[g] != 0;
        int deg = 0;
        for (int e = dom.edge_begin[g]; e < dom.edge_begin[g + 1]; ++e) {
            if (local_id_[dom.edge_to[e]] >= 0)
                ++deg;
            else
                b = true;
        }
        bdry_[li] = b ? 1 : 0;
        ebegin_[li + 1] = deg;
    }
    for (int li = 0; li < k; ++li) ebegin_[li + 1] += ebegin_[li];

    const int m = ebegin_[k];
    efrom_.resize(m);
    eto_.resize(m);
    for (int li = 0; li < k; ++li) {
        const int g = nodes_[li];
        int at = ebegin_[li];
        for (int e = dom.edge_begin[g]; e < dom.edge_begin[g + 1]; ++e) {
            const int lv = local_id_[dom.edge_to[e]];
            if (lv < 0) continue;
            efrom_[at] = li;
            eto_[at] = lv;
            ++at;
        }
    }
    erev_.assign(m, -1);
    for (int e = 0; e < m; ++e) {
        const int b = eto_[e];
        for (int r = ebegin_[b]; r < ebegin_[b + 1]; ++r)
            if (eto_[r] == efrom_[e]) {
                erev_[e] = r;
                break;
            }
        if (erev_[e] < 0) throw std::logic_error("patch edge graph is not symmetric");
    }
    w_.assign(m, 0.0);

    for (int g : touched_) gdist_[g] = kInf;
    touched_.clear();
}

void PatchWorkspace::set_lambda(const HamiltonianSpec& ham, double lambda) {
    for (int e = 0; e < edge_count(); ++e)
        w_[e] = edge_weight(*dom_, ham, lambda, nodes_[efrom_[e]], nodes_[eto_[e]]);
}

void PatchWorkspace::solve(const std::vector<std::pair<int, double>>& seeds,
                           bool reverse, double stop_key,
                           std::vector<double>& dist) const {
    const int k = size();
    dist.assign(k, kInf);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    for (const auto& [li, val] : seeds)
        if (val < dist[li]) {
            dist[li] = val;
            heap.emplace(val, li);
        }
    std::vector<char> settled(k, 0);
    while (!heap.empty()) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (settled[u] || d > dist[u]) continue;
        settled[u] = 1;
        if (d > stop_key) break;
        for (int e = ebegin_[u]; e < ebegin_[u + 1]; ++e) {
            const int v = eto_[e];
            if (settled[v]) continue;
            const double alt = d + (reverse ? w_[erev_[e]] : w_[e]);
            if (alt < dist[v]) {
                dist[v] = alt;
                heap.emplace(alt, v);
            }
        }
    }
}

}  // namespace supnorm::detail
