#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "sddld/errors.hpp"
#include "sddld/rng.hpp"
#include "sddld/sparse.hpp"

namespace sddld {

enum class GraphKind { grid, torus, random_regular, tree };

struct WeightSpec {
    bool unit = true;
    double lo = 1.0, hi = 1.0;
};

// Deterministic test-corpus generators; the output is laplacian(graph) + shift*I
// and always passes the SDD test.
struct GenSpec {
    GraphKind kind = GraphKind::grid;
    Index width = 0, height = 0; // grid / torus
    Index n = 0, degree = 0;     // random-regular / tree
    WeightSpec weights;
    double shift = 0.0;
};

namespace detail {

inline std::vector<Edge> weighted(std::vector<Edge> edges, const WeightSpec& w, CounterRng rng) {
    if (!w.unit) {
        if (!(w.lo > 0.0 && w.hi >= w.lo)) fail(ErrorCode::InvalidParameter, "weight range");
        for (std::size_t i = 0; i < edges.size(); ++i) {
            CounterRng sub = rng.substream(rng_stream::tagged(rng_stream::kGenerate, i));
            edges[i].weight = sub.uniform(w.lo, w.hi);
        }
    }
    return edges;
}

} // namespace detail

inline WeightedGraph generate_graph(const GenSpec& spec, std::uint64_t seed) {
    CounterRng rng(seed, rng_stream::tagged(rng_stream::kGenerate, 0));
    std::vector<Edge> edges;
    Index n = 0;
    switch (spec.kind) {
        case GraphKind::grid: {
            if (spec.width < 1 || spec.height < 1) fail(ErrorCode::InvalidParameter, "grid dimensions");
            n = spec.width * spec.height;
            const auto id = [&](Index r, Index c) { return r * spec.width + c; };
            for (Index r = 0; r < spec.height; ++r)
                for (Index c = 0; c < spec.width; ++c) {
                    if (c + 1 < spec.width) edges.push_back({id(r, c), id(r, c + 1), 1.0});
                    if (r + 1 < spec.height) edges.push_back({id(r, c), id(r + 1, c), 1.0});
                }
            break;
        }
        case GraphKind::torus: {
            if (spec.width < 2 || spec.height < 2) fail(ErrorCode::InvalidParameter, "torus dimensions");
            n = spec.width * spec.height;
            const auto id = [&](Index r, Index c) { return r * spec.width + c; };
            for (Index r = 0; r < spec.height; ++r)
                for (Index c = 0; c < spec.width; ++c) {
                    edges.push_back({id(r, c), id(r, (c + 1) % spec.width), 1.0});
                    edges.push_back({id(r, c), id((r + 1) % spec.height, c), 1.0});
                }
            break;
        }
        case GraphKind::random_regular: {
            n = spec.n;
            const Index d = spec.degree;
            if (n < 2 || d < 1 || d >= n) fail(ErrorCode::InvalidParameter, "random-regular parameters");
            if ((static_cast<long long>(n) * d) % 2 != 0)
                fail(ErrorCode::InvalidParameter, "n*d must be even");
            // Configuration model with rejection of loops and repeats.
            for (int attempt = 0; attempt < 200; ++attempt) {
                CounterRng sub = rng.substream(rng_stream::tagged(rng_stream::kGenerate, 100 + attempt));
                std::vector<Index> stubs;
                stubs.reserve(static_cast<std::size_t>(n) * d);
                for (Index v = 0; v < n; ++v)
                    for (Index k = 0; k < d; ++k) stubs.push_back(v);
                for (std::size_t i = stubs.size(); i > 1; --i)
                    std::swap(stubs[i - 1], stubs[sub.next_below(i)]);
                std::set<std::pair<Index, Index>> seen;
                bool ok = true;
                std::vector<Edge> trial;
                for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
                    Index u = stubs[i], v = stubs[i + 1];
                    if (u == v) { ok = false; break; }
                    auto key = std::minmax(u, v);
                    if (!seen.insert({key.first, key.second}).second) { ok = false; break; }
                    trial.push_back({u, v, 1.0});
                }
                if (ok) {
                    edges = std::move(trial);
                    break;
                }
            }
            if (edges.empty()) fail(ErrorCode::InvalidParameter, "could not realize a simple regular graph");
            break;
        }
        case GraphKind::tree: {
            n = spec.n;
            if (n < 1) fail(ErrorCode::InvalidParameter, "tree size");
            CounterRng sub = rng.substream(rng_stream::tagged(rng_stream::kGenerate, 7));
            for (Index v = 1; v < n; ++v)
                edges.push_back({static_cast<Index>(sub.next_below(static_cast<std::uint64_t>(v))), v, 1.0});
            break;
        }
    }
    return WeightedGraph(n, detail::weighted(std::move(edges), spec.weights, rng));
}

inline SymmetricSparse generate(const GenSpec& spec, std::uint64_t seed) {
    if (spec.shift < 0.0) fail(ErrorCode::InvalidParameter, "shift must be nonnegative");
    const SymmetricSparse lap = laplacian_of(generate_graph(spec, seed));
    return spec.shift == 0.0 ? lap : lap.shifted(spec.shift);
}

} // namespace sddld
