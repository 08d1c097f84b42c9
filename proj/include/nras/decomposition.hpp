#pragma once

/** @file
    @brief Partitioning of the unknowns into subdomains, overlap extension, and the
    restriction / prolongation / restricted-prolongation transfers.
*/

#include "nras/mesh.hpp"
#include "nras/objective.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

namespace nras {

/// Owner subdomain of every unknown.
using Assignment = std::vector<Index>;

namespace detail {

    inline void bisect(std::vector<Index> ids, Index parts, Index first_part, const std::vector<Point2>& coords,
                       Assignment& owner)
    {
        if (parts == 1) {
            for (const Index i : ids) owner[std::size_t(i)] = first_part;
            return;
        }
        double lo[2] = {infinity, infinity}, hi[2] = {-infinity, -infinity};
        for (const Index i : ids)
            for (int a = 0; a < 2; ++a) {
                lo[a] = std::min(lo[a], coords[std::size_t(i)][a]);
                hi[a] = std::max(hi[a], coords[std::size_t(i)][a]);
            }
        const int axis = (hi[1] - lo[1]) > (hi[0] - lo[0]) ? 1 : 0;
        std::sort(ids.begin(), ids.end(), [&](Index a, Index b) {
            const auto& pa = coords[std::size_t(a)];
            const auto& pb = coords[std::size_t(b)];
            if (pa[axis] != pb[axis]) return pa[axis] < pb[axis];
            if (pa[1 - axis] != pb[1 - axis]) return pa[1 - axis] < pb[1 - axis];
            return a < b;
        });
        const Index left_parts = parts / 2;
        const auto split = std::size_t(std::llround(double(ids.size()) * double(left_parts) / double(parts)));
        std::vector<Index> left(ids.begin(), ids.begin() + std::ptrdiff_t(split));
        std::vector<Index> right(ids.begin() + std::ptrdiff_t(split), ids.end());
        bisect(std::move(left), left_parts, first_part, coords, owner);
        bisect(std::move(right), parts - left_parts, first_part + left_parts, coords, owner);
    }

} // namespace detail

/**
   @brief Recursive coordinate bisection of points into n parts.

   Each level cuts the longer coordinate extent (x on ties) so that the part
   counts on both sides stay proportional to their point counts.
*/
inline Assignment partition(const std::vector<Point2>& coords, Index n)
{
    require(n >= 1, "partition: subdomain count must be >= 1");
    if (n > Index(coords.size())) throw PartitionFailure("partition: more subdomains than unknowns");
    Assignment owner(coords.size(), -1);
    std::vector<Index> ids(coords.size());
    std::iota(ids.begin(), ids.end(), Index(0));
    detail::bisect(std::move(ids), n, 0, coords, owner);

    std::vector<Index> sizes(std::size_t(n), 0);
    for (const Index o : owner) ++sizes[std::size_t(o)];
    const double mean = double(coords.size()) / double(n);
    for (const Index s : sizes)
        if (s == 0 || double(s) < mean / 1.5 || double(s) > 1.5 * mean)
            throw PartitionFailure("partition: cannot balance " + std::to_string(coords.size()) + " unknowns into " +
                                   std::to_string(n) + " parts");
    return owner;
}

inline std::vector<Point2> free_coordinates(const FeSpace& space)
{
    std::vector<Point2> coords;
    coords.reserve(std::size_t(space.num_free()));
    for (const Index node : space.free_nodes()) coords.push_back(space.mesh().nodes[std::size_t(node)]);
    return coords;
}

inline Assignment partition(const FeSpace& space, Index n) { return partition(free_coordinates(space), n); }

/// Grows each set by `layers` breadth-first layers in the graph. Sets are returned sorted.
inline std::vector<std::vector<Index>> extend_overlap(const std::vector<std::vector<Index>>& sets, const Graph& graph,
                                                      Index layers)
{
    require(layers >= 0, "extend_overlap: overlap must be nonnegative");
    std::vector<std::vector<Index>> grown;
    grown.reserve(sets.size());
    std::vector<Index> depth(std::size_t(graph.size()));
    for (const auto& set : sets) {
        std::fill(depth.begin(), depth.end(), -1);
        std::queue<Index> frontier;
        std::vector<Index> members;
        for (const Index v : set) {
            depth[std::size_t(v)] = 0;
            frontier.push(v);
            members.push_back(v);
        }
        while (!frontier.empty()) {
            const Index v = frontier.front();
            frontier.pop();
            if (depth[std::size_t(v)] == layers) continue;
            for (const Index w : graph.neighbors[std::size_t(v)]) {
                if (depth[std::size_t(w)] >= 0) continue;
                depth[std::size_t(w)] = depth[std::size_t(v)] + 1;
                frontier.push(w);
                members.push_back(w);
            }
        }
        std::sort(members.begin(), members.end());
        grown.push_back(std::move(members));
    }
    return grown;
}

inline std::vector<std::vector<Index>> sets_from_assignment(const Assignment& owner, Index n)
{
    std::vector<std::vector<Index>> sets(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < owner.size(); ++i) sets[std::size_t(owner[i])].push_back(Index(i));
    return sets;
}

/**
   @brief Overlapping decomposition of n unknowns.

   Subdomain i solves on overlap(i) (sorted global indices) but only writes back
   the entries it owns. Every unknown has exactly one owner, so the restricted
   prolongations sum to the identity.
*/
class Decomposition {
public:
    Decomposition(const Assignment& owner, const Graph& graph, Index overlap) : owner_(owner), overlap_(overlap)
    {
        require(Index(owner.size()) == graph.size(), "Decomposition: assignment and graph sizes differ");
        Index n = 0;
        for (const Index o : owner) {
            require(o >= 0, "Decomposition: unassigned unknown");
            n = std::max(n, o + 1);
        }
        owned_ = sets_from_assignment(owner, n);
        for (const auto& s : owned_) require(!s.empty(), "Decomposition: empty subdomain");
        overlapping_ = extend_overlap(owned_, graph, overlap);
        owned_mask_.resize(owned_.size());
        for (std::size_t i = 0; i < owned_.size(); ++i) {
            owned_mask_[i].resize(overlapping_[i].size());
            for (std::size_t k = 0; k < overlapping_[i].size(); ++k)
                owned_mask_[i][k] = owner_[std::size_t(overlapping_[i][k])] == Index(i);
        }
    }

    Index num_subdomains() const { return Index(owned_.size()); }
    Index num_unknowns() const { return Index(owner_.size()); }
    Index overlap() const { return overlap_; }
    const Assignment& owner() const { return owner_; }
    const std::vector<Index>& owned(Index i) const { return owned_[std::size_t(i)]; }
    const std::vector<Index>& overlapping(Index i) const { return overlapping_[std::size_t(i)]; }

    /// R_i v
    Vector restrict_vector(Index i, const Vector& v) const
    {
        const auto& idx = overlapping(i);
        Vector out(Index(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k) out[Index(k)] = v[idx[k]];
        return out;
    }

    /// out += P_i local
    void add_prolonged(Index i, const Vector& local, Vector& out) const
    {
        const auto& idx = overlapping(i);
        for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] += local[Index(k)];
    }

    /// out += P~_i local (owned entries only)
    void add_restricted_prolonged(Index i, const Vector& local, Vector& out) const
    {
        const auto& idx = overlapping(i);
        const auto& mask = owned_mask_[std::size_t(i)];
        for (std::size_t k = 0; k < idx.size(); ++k)
            if (mask[k]) out[idx[k]] += local[Index(k)];
    }

    // Explicit operators, for inspection and testing.

    SparseStorage restriction_matrix(Index i) const
    {
        const auto& idx = overlapping(i);
        std::vector<Triplet> t;
        for (std::size_t k = 0; k < idx.size(); ++k) t.emplace_back(Index(k), idx[k], 1.0);
        SparseStorage R(Index(idx.size()), num_unknowns());
        R.setFromTriplets(t.begin(), t.end());
        return R;
    }

    SparseStorage prolongation_matrix(Index i) const { return SparseStorage(restriction_matrix(i).transpose()); }

    SparseStorage restricted_prolongation_matrix(Index i) const
    {
        const auto& idx = overlapping(i);
        const auto& mask = owned_mask_[std::size_t(i)];
        std::vector<Triplet> t;
        for (std::size_t k = 0; k < idx.size(); ++k)
            if (mask[k]) t.emplace_back(idx[k], Index(k), 1.0);
        SparseStorage P(num_unknowns(), Index(idx.size()));
        P.setFromTriplets(t.begin(), t.end());
        return P;
    }

private:
    Assignment owner_;
    Index overlap_ = 0;
    std::vector<std::vector<Index>> owned_;
    std::vector<std::vector<Index>> overlapping_;
    std::vector<std::vector<char>> owned_mask_;
};

inline Decomposition make_decomposition(const FeSpace& space, Index subdomains, Index overlap)
{
    return {partition(space, subdomains), space.free_graph(), overlap};
}

/**
   @brief Reads an explicit node-to-subdomain assignment.

   One `node_index subdomain_index` pair per free mesh node, whitespace
   separated. Subdomain indices must be 0..n-1 with none empty.
*/
inline Assignment read_partition(std::istream& in, const FeSpace& space)
{
    Assignment owner(std::size_t(space.num_free()), -1);
    Index node = 0, part = 0, max_part = -1;
    std::string line;
    Index line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream fields(line);
        if (!(fields >> node)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            throw InvalidArgument("partition file line " + std::to_string(line_no) + ": expected two integers");
        }
        std::string rest;
        if (!(fields >> part) || (fields >> rest))
            throw InvalidArgument("partition file line " + std::to_string(line_no) + ": expected two integers");
        if (node < 0 || node >= space.mesh().num_nodes() || space.is_dirichlet(node))
            throw InvalidArgument("partition file: node " + std::to_string(node) + " is not a free node");
        if (part < 0) throw InvalidArgument("partition file: negative subdomain index");
        auto& slot = owner[std::size_t(space.node_to_free()[std::size_t(node)])];
        if (slot >= 0) throw InvalidArgument("partition file: node " + std::to_string(node) + " assigned twice");
        slot = part;
        max_part = std::max(max_part, part);
    }
    std::vector<char> used(std::size_t(max_part + 1), 0);
    for (std::size_t k = 0; k < owner.size(); ++k) {
        if (owner[k] < 0)
            throw InvalidArgument("partition file: free node " + std::to_string(space.free_nodes()[k]) +
                                  " is not assigned");
        used[std::size_t(owner[k])] = 1;
    }
    for (std::size_t p = 0; p < used.size(); ++p)
        if (!used[p]) throw InvalidArgument("partition file: subdomain " + std::to_string(p) + " is empty");
    return owner;
}

inline Assignment read_partition_file(const std::string& path, const FeSpace& space)
{
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open partition file " + path);
    return read_partition(in, space);
}

/// Subproblem i at the current iterate: initial guess R_i v, exterior frozen at v.
template <DecomposableObjective F>
auto extract_local(const F& objective, const Decomposition& dd, Index i, const Vector& v)
{
    return objective.restrict_to(dd.overlapping(i), v);
}

} // namespace nras
