#include <catch2/catch_amalgamated.hpp>

#include "oracle.hpp"
#include "sddld/sparse.hpp"

using namespace sddld;

TEST_CASE("triplet construction canonicalizes the upper triangle") {
    const auto a = SymmetricSparse::from_triplets(2, std::vector<Triplet>{{0, 0, 1.0}});
    REQUIRE(a.dim() == 2);
    REQUIRE(a.nnz_upper() == 1);
    REQUIRE(a.diagonal(0) == 1.0);
    REQUIRE(a.diagonal(1) == 0.0);

    const auto b = SymmetricSparse::from_triplets(
        2, std::vector<Triplet>{{0, 0, 2.0}, {0, 1, -1.0}, {1, 1, 2.0}});
    const Eigen::MatrixXd d = oracle::to_dense(b);
    REQUIRE(d(0, 0) == 2.0);
    REQUIRE(d(0, 1) == -1.0);
    REQUIRE(d(1, 0) == -1.0);
    REQUIRE(d(1, 1) == 2.0);
}

TEST_CASE("mirrored pairs accumulate like the brute-force symmetrization") {
    // Brute force: scatter every triplet into both (i,j) and (j,i).
    const std::vector<Triplet> ts{{0, 1, -1.0}, {1, 0, -1.0}, {0, 0, 3.0}, {1, 1, 3.0}, {2, 2, 1.0}};
    Eigen::MatrixXd brute = Eigen::MatrixXd::Zero(3, 3);
    for (const auto& t : ts) {
        if (t.row == t.col) {
            brute(t.row, t.col) += t.value;
        } else {
            brute(t.row, t.col) += t.value;
            brute(t.col, t.row) += t.value;
        }
    }
    const auto a = SymmetricSparse::from_triplets(3, ts);
    REQUIRE(oracle::to_dense(a).isApprox(brute, 0.0));
    REQUIRE(oracle::to_dense(a)(0, 1) == -2.0);
}

TEST_CASE("construction rejects bad input") {
    REQUIRE_THROWS_MATCHES(SymmetricSparse::from_triplets(2, std::vector<Triplet>{{0, 2, 1.0}}), Error,
                           Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("IndexOutOfRange")));
    REQUIRE_THROWS_MATCHES(
        SymmetricSparse::from_triplets(2, std::vector<Triplet>{{0, 1, 1.0}, {1, 0, 2.0}}), Error,
        Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("AsymmetricInput")));
}

TEST_CASE("sdd predicate and per-row slack") {
    const auto a = SymmetricSparse::from_triplets(
        2, std::vector<Triplet>{{0, 0, 2.0}, {0, 1, -1.0}, {1, 1, 2.0}});
    const auto [ok, slack] = is_sdd(a);
    REQUIRE(ok);
    REQUIRE(slack[0] == 1.0);
    REQUIRE(slack[1] == 1.0);

    const auto b = SymmetricSparse::from_triplets(
        2, std::vector<Triplet>{{0, 0, 1.0}, {0, 1, -2.0}, {1, 1, 1.0}});
    REQUIRE_FALSE(is_sdd(b).first);

    const WeightedGraph tri(3, std::vector<Edge>{{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}});
    const auto [lok, lslack] = is_sdd(laplacian_of(tri));
    REQUIRE(lok);
    for (double s : lslack) REQUIRE(std::abs(s) < 1e-15);
}

TEST_CASE("matvec matches the dense product") {
    const auto id = SymmetricSparse::from_triplets(
        3, std::vector<Triplet>{{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}});
    std::vector<double> x{1.0, -2.0, 3.0};
    REQUIRE(id.matvec(x) == x);

    const auto a = SymmetricSparse::from_triplets(
        2, std::vector<Triplet>{{0, 0, 2.0}, {0, 1, -1.0}, {1, 1, 2.0}});
    const std::vector<double> ones{1.0, 1.0};
    const auto y = a.matvec(ones);
    REQUIRE(y[0] == 1.0);
    REQUIRE(y[1] == 1.0);

    CounterRng rng(7, 0);
    const auto s = oracle::random_sdd(50, rng);
    Eigen::VectorXd xv(50);
    for (int i = 0; i < 50; ++i) xv[i] = rng.next_gaussian();
    const Eigen::VectorXd want = oracle::to_dense(s) * xv;
    std::vector<double> xin(xv.data(), xv.data() + 50);
    const auto got = s.matvec(xin);
    for (int i = 0; i < 50; ++i)
        REQUIRE(got[i] == Catch::Approx(want[i]).margin(1e-12 * want.norm()));
}

TEST_CASE("graph to laplacian and back") {
    const WeightedGraph path2(2, std::vector<Edge>{{0, 1, 1.0}});
    const auto l = laplacian_of(path2);
    const Eigen::MatrixXd d = oracle::to_dense(l);
    REQUIRE(d(0, 0) == 1.0);
    REQUIRE(d(0, 1) == -1.0);
    REQUIRE(d(1, 1) == 1.0);

    const WeightedGraph tri(3, std::vector<Edge>{{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}});
    const auto lt = laplacian_of(tri);
    REQUIRE(lt.diagonal(0) == 2.0);

    const auto g2 = graph_of(lt);
    REQUIRE(g2.edge_count() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        REQUIRE(g2.edges()[i].u == tri.edges()[i].u);
        REQUIRE(g2.edges()[i].v == tri.edges()[i].v);
        REQUIRE(g2.edges()[i].weight == tri.edges()[i].weight);
    }

    const auto bad = SymmetricSparse::from_triplets(
        2, std::vector<Triplet>{{0, 0, 1.0}, {0, 1, -1.0}, {1, 1, 1.0 + 1e-3}});
    REQUIRE_THROWS_MATCHES(graph_of(bad), Error,
                           Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("NotALaplacian")));
}

TEST_CASE("parallel edges merge by weight summation") {
    const WeightedGraph g(2, std::vector<Edge>{{0, 1, 1.0}, {1, 0, 2.5}});
    REQUIRE(g.edge_count() == 1);
    REQUIRE(g.edges()[0].weight == 3.5);
}

TEST_CASE("connected components") {
    const WeightedGraph tri(3, std::vector<Edge>{{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}});
    REQUIRE(connected_components(tri).count == 1);

    const WeightedGraph two(4, std::vector<Edge>{{0, 1, 1.0}, {2, 3, 1.0}});
    const auto c = connected_components(two);
    REQUIRE(c.count == 2);
    REQUIRE(c.label[0] == c.label[1]);
    REQUIRE(c.label[2] == c.label[3]);
    REQUIRE(c.label[0] != c.label[2]);

    sddld::GenSpec spec;
    spec.kind = GraphKind::grid;
    spec.width = 10;
    spec.height = 10;
    REQUIRE(connected_components(generate_graph(spec, 1)).count == 1);
}

TEST_CASE("operator symmetry and laplacian invariants on random instances") {
    CounterRng rng(11, 0);
    for (int rep = 0; rep < 20; ++rep) {
        const auto n = static_cast<Index>(5 + rng.next_below(40));
        const auto g = oracle::random_connected_graph(n, 2 * static_cast<std::size_t>(n), rng);
        const auto l = laplacian_of(g);
        REQUIRE(is_sdd(l).first);

        std::vector<double> x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
        for (auto& v : x) v = rng.next_gaussian();
        for (auto& v : y) v = rng.next_gaussian();
        const auto lx = l.matvec(x);
        const auto ly = l.matvec(y);
        double xly = 0.0, ylx = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            xly += x[i] * ly[i];
            ylx += y[i] * lx[i];
            scale += std::abs(x[i] * ly[i]);
        }
        REQUIRE(std::abs(xly - ylx) <= 1e-12 * std::max(1.0, scale));

        const std::vector<double> ones(static_cast<std::size_t>(n), 1.0);
        const auto l1 = l.matvec(ones);
        for (double v : l1) REQUIRE(std::abs(v) <= 1e-12 * std::max(1.0, l.max_abs_entry()));
    }
}
