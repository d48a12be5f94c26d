#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "stgcn/grad_check.hpp"
#include "stgcn/graph.hpp"
#include "stgcn/rng.hpp"

using namespace stgcn;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, std::uint64_t seed) {
    Rng rng(seed);
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-1.0, 1.0);
    return t;
}

// Dense oracle for the normalized adjacency: build the degree matrix
// explicitly, take its inverse square root, and multiply out
// D^{-1/2} (A + I) D^{-1/2} as two full matrix products.
Tensor normalize_oracle(const Tensor& a) {
    const std::size_t n = a.extent(0);
    Tensor with_loops({n, n});
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            with_loops.at(i, j) = a.at(i, j) + (i == j ? 1.0 : 0.0);
        }
    }
    Tensor d_inv_sqrt({n, n});
    for (std::size_t i = 0; i < n; ++i) {
        double degree = 0.0;
        for (std::size_t j = 0; j < n; ++j) degree += with_loops.at(i, j);
        d_inv_sqrt.at(i, i) = 1.0 / std::sqrt(degree);
    }
    auto matmul = [n](const Tensor& x, const Tensor& y) {
        Tensor out({n, n});
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                double acc = 0.0;
                for (std::size_t k = 0; k < n; ++k) acc += x.at(i, k) * y.at(k, j);
                out.at(i, j) = acc;
            }
        }
        return out;
    };
    return matmul(matmul(d_inv_sqrt, with_loops), d_inv_sqrt);
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::fabs(a[i] - b[i]));
    }
    return worst;
}

// Largest |eigenvalue| by power iteration; the normalized adjacency is
// symmetric, so the iteration converges to the spectral radius.
double spectral_radius(const Tensor& m) {
    const std::size_t n = m.extent(0);
    Rng rng(99);
    std::vector<double> v(n), w(n);
    for (auto& x : v) x = rng.uniform(0.1, 1.0);
    double lambda = 0.0;
    for (int iter = 0; iter < 500; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += m.at(i, j) * v[j];
            w[i] = acc;
        }
        double norm = 0.0;
        for (double x : w) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0.0) return 0.0;
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / norm;
        lambda = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += m.at(i, j) * v[j];
            lambda += v[i] * acc;
        }
    }
    return std::fabs(lambda);
}

std::vector<std::pair<std::size_t, std::size_t>> all_pairs(std::size_t n) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    }
    return pairs;
}

}  // namespace

TEST_CASE("build_adjacency basic shapes") {
    Tensor single = build_adjacency(1, {});
    CHECK(single.size() == 1);
    CHECK(single[0] == 0.0);

    Tensor chain = build_adjacency(3, {{0, 1}, {1, 2}});
    const double expected[] = {0, 1, 0, 1, 0, 1, 0, 1, 0};
    for (std::size_t i = 0; i < 9; ++i) CHECK(chain[i] == expected[i]);

    // Swapped duplicates collapse to the same undirected edge.
    Tensor dedup = build_adjacency(2, {{0, 1}, {1, 0}});
    CHECK(dedup.at(0, 1) == 1.0);
    CHECK(dedup.at(1, 0) == 1.0);
    CHECK(dedup.at(0, 0) == 0.0);

    CHECK_THROWS_AS(build_adjacency(2, {{0, 2}}), std::invalid_argument);
    CHECK_THROWS_AS(build_adjacency(2, {{1, 1}}), std::invalid_argument);
}

TEST_CASE("normalize_adjacency closed forms") {
    Tensor single = normalize_adjacency(build_adjacency(1, {}));
    CHECK(single[0] == 1.0);

    Tensor chain = normalize_adjacency(build_adjacency(3, {{0, 1}, {1, 2}}));
    const double s = 1.0 / std::sqrt(6.0);  // degrees 2, 3, 2
    CHECK(chain.at(0, 0) == doctest::Approx(0.5).epsilon(1e-5));
    CHECK(chain.at(0, 1) == doctest::Approx(s).epsilon(1e-5));
    CHECK(chain.at(0, 2) == 0.0);
    CHECK(chain.at(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-5));
    CHECK(chain.at(1, 0) == doctest::Approx(s).epsilon(1e-5));
    CHECK(chain.at(2, 2) == doctest::Approx(0.5).epsilon(1e-5));

    Tensor clique = normalize_adjacency(build_adjacency(2, {{0, 1}}));
    for (std::size_t i = 0; i < 4; ++i) CHECK(clique[i] == doctest::Approx(0.5).epsilon(1e-12));

    Tensor asym({2, 2}, {0, 1, 0, 0});
    CHECK_THROWS_AS(normalize_adjacency(asym), std::invalid_argument);
    Tensor weighted({2, 2}, {0, 0.5, 0.5, 0});
    CHECK_THROWS_AS(normalize_adjacency(weighted), std::invalid_argument);
    Tensor looped({2, 2}, {1, 0, 0, 1});
    CHECK_THROWS_AS(normalize_adjacency(looped), std::invalid_argument);
}

TEST_CASE("normalize_adjacency matches the dense oracle exhaustively (J <= 5)") {
    // The acceptance suite extends this to J = 6; the unit test keeps the
    // same exhaustive sweep one size down for fast feedback.
    for (std::size_t n = 1; n <= 5; ++n) {
        auto pairs = all_pairs(n);
        const std::size_t subsets = std::size_t{1} << pairs.size();
        for (std::size_t mask = 0; mask < subsets; ++mask) {
            std::vector<std::pair<std::size_t, std::size_t>> edges;
            for (std::size_t b = 0; b < pairs.size(); ++b) {
                if (mask & (std::size_t{1} << b)) edges.push_back(pairs[b]);
            }
            Tensor a = build_adjacency(n, edges);
            REQUIRE(max_abs_diff(normalize_adjacency(a), normalize_oracle(a)) < 1e-12);
        }
    }
}

TEST_CASE("normalized adjacency spectrum stays within the unit disc") {
    for (const char* name : {"chain3", "chain7", "clique2", "ntu25"}) {
        SkeletonGraph g = SkeletonGraph::from_template(name);
        CHECK(spectral_radius(g.normalized_adjacency()) <= 1.0 + 1e-9);
    }
}

TEST_CASE("sgcn_forward identity factors") {
    Tensor a_norm({1, 1}, {1.0});
    Tensor w({2, 2}, {1, 0, 0, 1});
    Tensor f = random_tensor({2, 1, 6}, 31);
    Tensor out = sgcn_forward(f, w, a_norm);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(out[i] == f[i]);
}

TEST_CASE("sgcn_forward on the 3-chain sums adjacency rows") {
    SkeletonGraph g(3, {{0, 1}, {1, 2}});
    Tensor f = Tensor::ones({1, 3, 2});
    Tensor w({1, 1}, {1.0});
    Tensor out = sgcn_forward(f, w, g.normalized_adjacency());
    const double expected[] = {0.90825, 1.14982, 0.90825};
    for (std::size_t j = 0; j < 3; ++j) {
        for (std::size_t t = 0; t < 2; ++t) {
            CHECK(out.at(0, j, t) == doctest::Approx(expected[j]).epsilon(1e-4));
        }
    }
}

TEST_CASE("sgcn_forward is linear in the features") {
    SkeletonGraph g = SkeletonGraph::from_template("chain7");
    Tensor w = random_tensor({3, 4}, 33);
    Tensor x = random_tensor({3, 7, 5}, 34);
    Tensor y = random_tensor({3, 7, 5}, 35);
    double alpha = 1.7, beta = -0.4;
    Tensor mix(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) mix[i] = alpha * x[i] + beta * y[i];
    Tensor lhs = sgcn_forward(mix, w, g.normalized_adjacency());
    Tensor fx = sgcn_forward(x, w, g.normalized_adjacency());
    Tensor fy = sgcn_forward(y, w, g.normalized_adjacency());
    for (std::size_t i = 0; i < lhs.size(); ++i) {
        CHECK(lhs[i] == doctest::Approx(alpha * fx[i] + beta * fy[i]).epsilon(1e-12));
    }

    Tensor bad = random_tensor({4, 7, 5}, 36);
    CHECK_THROWS_AS(sgcn_forward(bad, w, g.normalized_adjacency()), std::invalid_argument);
}

TEST_CASE("vertex relabeling permutes sgcn output rows") {
    // Exact case: max degree 1, so every output row mixes at most two terms
    // and two-term IEEE addition is order-independent.
    {
        const std::size_t j_n = 5;
        std::vector<std::pair<std::size_t, std::size_t>> edges = {{0, 1}, {2, 3}};
        std::vector<std::size_t> perm = {3, 0, 4, 1, 2};
        std::vector<std::pair<std::size_t, std::size_t>> permuted_edges;
        for (auto [i, j] : edges) permuted_edges.emplace_back(perm[i], perm[j]);
        SkeletonGraph g(j_n, edges);
        SkeletonGraph gp(j_n, permuted_edges);
        Tensor w = random_tensor({2, 3}, 41);
        Tensor f = random_tensor({2, j_n, 4}, 42);
        Tensor fp({2, j_n, 4});
        for (std::size_t c = 0; c < 2; ++c) {
            for (std::size_t j = 0; j < j_n; ++j) {
                for (std::size_t t = 0; t < 4; ++t) fp.at(c, perm[j], t) = f.at(c, j, t);
            }
        }
        Tensor out = sgcn_forward(f, w, g.normalized_adjacency());
        Tensor outp = sgcn_forward(fp, w, gp.normalized_adjacency());
        for (std::size_t c = 0; c < 3; ++c) {
            for (std::size_t j = 0; j < j_n; ++j) {
                for (std::size_t t = 0; t < 4; ++t) {
                    CHECK(outp.at(c, perm[j], t) == out.at(c, j, t));  // bitwise
                }
            }
        }
    }
    // General graphs: relabeling reorders the neighbor summation, so equality
    // holds to rounding rather than bitwise.
    {
        const std::size_t j_n = 6;
        std::vector<std::pair<std::size_t, std::size_t>> edges = {{0, 1}, {1, 2}, {2, 3},
                                                                  {3, 4}, {4, 5}, {1, 4}};
        std::vector<std::size_t> perm = {2, 5, 0, 3, 1, 4};
        std::vector<std::pair<std::size_t, std::size_t>> permuted_edges;
        for (auto [i, j] : edges) permuted_edges.emplace_back(perm[i], perm[j]);
        SkeletonGraph g(j_n, edges);
        SkeletonGraph gp(j_n, permuted_edges);
        Tensor w = random_tensor({2, 2}, 43);
        Tensor f = random_tensor({2, j_n, 3}, 44);
        Tensor fp({2, j_n, 3});
        for (std::size_t c = 0; c < 2; ++c) {
            for (std::size_t j = 0; j < j_n; ++j) {
                for (std::size_t t = 0; t < 3; ++t) fp.at(c, perm[j], t) = f.at(c, j, t);
            }
        }
        Tensor out = sgcn_forward(f, w, g.normalized_adjacency());
        Tensor outp = sgcn_forward(fp, w, gp.normalized_adjacency());
        for (std::size_t c = 0; c < 2; ++c) {
            for (std::size_t j = 0; j < j_n; ++j) {
                for (std::size_t t = 0; t < 3; ++t) {
                    CHECK(outp.at(c, perm[j], t) ==
                          doctest::Approx(out.at(c, j, t)).epsilon(1e-15));
                }
            }
        }
    }
}

TEST_CASE("sgcn backward passes grad_check for features and weights") {
    SkeletonGraph g = SkeletonGraph::from_template("chain3");
    Tensor upstream = random_tensor({4, 3, 5}, 51);
    ParameterStore store;
    std::size_t fi = store.add("f", random_tensor({2, 3, 5}, 52));
    std::size_t wi = store.add("w", random_tensor({2, 4}, 53));
    auto loss = [&](ParameterStore& p) {
        Tensor out = sgcn_forward(p.value(fi), p.value(wi), g.normalized_adjacency());
        double acc = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) acc += out[i] * upstream[i];
        SgcnGrads grads =
            sgcn_backward(p.value(fi), p.value(wi), g.normalized_adjacency(), upstream);
        axpy(1.0, grads.grad_input, p.grad(fi));
        axpy(1.0, grads.grad_weight, p.grad(wi));
        return acc;
    };
    CHECK(grad_check(loss, store, 1e-5) < 1e-4);
}

TEST_CASE("template registry knows the shipped skeletons") {
    CHECK(find_template("ntu25").joint_count == 25);
    CHECK(find_template("ntu25").edges.size() == 24);
    CHECK(find_template("chain7").joint_count == 7);
    CHECK(find_template("chain3").joint_count == 3);
    CHECK(find_template("clique2").joint_count == 2);
    CHECK(has_template("chain3"));
    CHECK(!has_template("nope"));
    CHECK_THROWS_AS(find_template("nope"), std::out_of_range);
    CHECK(SkeletonGraph::from_template("ntu25").normalized_adjacency().extent(0) == 25);
}
