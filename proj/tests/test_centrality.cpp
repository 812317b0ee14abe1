#include <doctest.h>

#include <random>

#include "mlcent/centrality.hpp"
#include "mlcent/error.hpp"
#include "mlcent/ingest.hpp"
#include "support.hpp"

using namespace mlcent;
using mlcent::testing::Example1Scores;

namespace {

double alpha_half() { return 0.5 / estimate_lambda_max(builtin_example1()).lambda_max; }

template <class Table>
double table_max_error(const CentralityReport& r, const Table& table) {
    double err = 0.0;
    for (int i = 1; i <= 5; ++i)
        for (int l = 1; l <= 2; ++l)
            err = std::max(err, std::abs(r.score({i, l}) - table[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(l - 1)]));
    return err;
}

} // namespace

TEST_CASE("Example 1 reference values: total communicability") {
    const auto r = total_communicability_per_node(builtin_example1(), 1.0, EvalMode::exact());
    CHECK(std::abs(r.score({2, 2}) - 17.2450) <= 5e-4);
    CHECK(table_max_error(r, Example1Scores::mtc) <= 5e-4);
    CHECK(r.ranking.front() == TensorIndex{2, 2});
    CHECK(r.ranking[1] == TensorIndex{1, 1});
    CHECK(r.ranking.back() == TensorIndex{4, 2});
}

TEST_CASE("Example 1 reference values: Katz") {
    const auto r = katz_centrality(builtin_example1(), alpha_half(), EvalMode::exact());
    CHECK(table_max_error(r, Example1Scores::mkc) <= 5e-4);
    REQUIRE(r.lambda_max.has_value());
    CHECK(r.ranking.front() == TensorIndex{2, 2});
    CHECK(r.ranking.back() == TensorIndex{4, 2});
}

TEST_CASE("Example 1 reference values: subgraph centralities") {
    const auto a = builtin_example1();
    const auto nodes = all_node_layers(5, 2);
    const auto e = subgraph_centralities(a, nodes, FunctionSpec::exp(1.0), EvalMode::exact());
    CHECK(table_max_error(e, Example1Scores::msc_exp) <= 5e-4);
    CHECK(e.ranking.front() == TensorIndex{2, 2});
    CHECK(e.ranking[1] == TensorIndex{1, 1});
    CHECK(e.ranking.back() == TensorIndex{4, 2});
    CHECK(std::abs(e.score({5, 1}) - e.score({5, 2})) <= 1e-10);

    const auto r = subgraph_centralities(a, nodes, FunctionSpec::resolvent(alpha_half()), EvalMode::exact());
    CHECK(table_max_error(r, Example1Scores::msc_res) <= 5e-4);
    CHECK(r.ranking.front() == TensorIndex{2, 2});
    CHECK(r.ranking.back() == TensorIndex{4, 2});
    CHECK(std::abs(r.score({5, 1}) - r.score({5, 2})) <= 1e-10);
}

TEST_CASE("the shifted convention differs from the reference values by the identity") {
    const auto a = builtin_example1();
    const auto shifted = total_communicability_per_node(a, 1.0, EvalMode::exact(), ShiftConvention::Shifted);
    const auto plain = total_communicability_per_node(a, 1.0, EvalMode::exact());
    for (std::size_t k = 0; k < plain.scores.size(); ++k)
        CHECK(plain.scores[k].score - shifted.scores[k].score == doctest::Approx(1.0));
    CHECK(table_max_error(shifted, Example1Scores::mtc) > 0.5);
}

TEST_CASE("Krylov mode agrees with exact mode") {
    const auto a = builtin_example1();
    const auto exact = total_communicability_per_node(a, 1.0, EvalMode::exact());
    const auto kry = total_communicability_per_node(a, 1.0, EvalMode::krylov(10));
    for (std::size_t k = 0; k < exact.scores.size(); ++k)
        CHECK(std::abs(exact.scores[k].score - kry.scores[k].score) <= 1e-8);

    const auto nodes = all_node_layers(5, 2);
    const auto se = subgraph_centralities(a, nodes, FunctionSpec::exp(1.0), EvalMode::exact());
    const auto sk = subgraph_centralities(a, nodes, FunctionSpec::exp(1.0), EvalMode::krylov(10, 3, Augmentation::Ones));
    CHECK((*se.pairwise - *sk.pairwise).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("total network communicability is the sum of node scores") {
    const auto a = builtin_example1();
    double table_sum = 0.0;
    for (const auto& row : Example1Scores::mtc) table_sum += row[0] + row[1];
    const double tnc = total_network_communicability(a, 1.0, EvalMode::exact());
    CHECK(std::abs(tnc - table_sum) <= 10 * 5e-4);
    CHECK(total_network_communicability(AdjacencyTensor(3, 2), 1.0, EvalMode::exact()) == doctest::Approx(6.0));
    CHECK(total_network_communicability(AdjacencyTensor(3, 2), 1.0, EvalMode::exact(), ShiftConvention::Shifted) ==
          0.0);
}

TEST_CASE("pair communicability") {
    const auto a = builtin_example1();
    const auto spec = FunctionSpec::exp(1.0);
    const auto f = mlcent::testing::taylor_exp(mlcent::testing::example1_matrix(), 1.0, 60);
    CHECK(pair_communicability(a, {1, 1}, {2, 2}, spec, EvalMode::exact()) == doctest::Approx(f(0, 6)));
    CHECK(pair_communicability(a, {3, 2}, {3, 2}, spec, EvalMode::exact()) == doctest::Approx(Example1Scores::msc_exp[2][1]).epsilon(1e-4));

    std::vector<TensorEntry> two = {{{1, 1}, {2, 1}, 1.0}, {{2, 1}, {1, 1}, 1.0}, {{3, 1}, {4, 1}, 1.0}, {{4, 1}, {3, 1}, 1.0}};
    const auto disjoint = AdjacencyTensor::from_entries(4, 1, two);
    CHECK(pair_communicability(disjoint, {1, 1}, {3, 1}, FunctionSpec::exp0(1.0), EvalMode::exact()) == 0.0);
    CHECK(pair_communicability(disjoint, {1, 1}, {4, 1}, FunctionSpec::resolvent0(0.5), EvalMode::exact()) == 0.0);
}

TEST_CASE("isolated nodes and symmetric edges") {
    std::vector<TensorEntry> e = {{{1, 1}, {2, 1}, 1.0}, {{2, 1}, {1, 1}, 1.0}};
    const auto a = AdjacencyTensor::from_entries(3, 1, e);
    const std::array<TensorIndex, 1> iso = {TensorIndex{3, 1}};
    CHECK(subgraph_centralities(a, iso, FunctionSpec::exp0(1.0), EvalMode::exact()).scores[0].score == 0.0);
    CHECK(subgraph_centralities(a, iso, FunctionSpec::resolvent0(0.5), EvalMode::exact()).scores[0].score == 0.0);

    const auto edge = AdjacencyTensor::from_entries(2, 1, e);
    const auto r = total_communicability_per_node(edge, 1.0, EvalMode::exact());
    CHECK(std::abs(r.scores[0].score - r.scores[1].score) <= 1e-10);
}

TEST_CASE("Katz limits and convergence range") {
    const auto a = builtin_example1();
    const auto tiny = katz_centrality(a, 1e-9, EvalMode::exact());
    for (const auto& s : tiny.scores) CHECK(s.score == doctest::Approx(1.0));
    const auto tiny0 = katz_centrality(a, 1e-9, EvalMode::exact(), ShiftConvention::Shifted);
    for (const auto& s : tiny0.scores) CHECK(std::abs(s.score) <= 1e-8);
    const double lambda = estimate_lambda_max(a).lambda_max;
    CHECK_THROWS_AS(katz_centrality(a, 1.0 / lambda, EvalMode::exact()), DomainError);
    CHECK_THROWS_AS(katz_centrality(a, 2.0 / lambda, EvalMode::krylov(5)), DomainError);
}

TEST_CASE("rank tie-breaking") {
    std::vector<NodeScore> s = {{{2, 1}, 1.0}, {{1, 2}, 1.0}, {{1, 1}, 1.0}, {{3, 1}, 2.0}};
    const auto r = rank(s);
    CHECK(r == std::vector<TensorIndex>{{3, 1}, {1, 1}, {2, 1}, {1, 2}});
    std::vector<NodeScore> one = {{{1, 1}, 0.5}};
    CHECK(rank(one).size() == 1);
    CHECK(rank(std::vector<NodeScore>{}).empty());

    std::vector<NodeScore> scaled = s;
    for (auto& x : scaled) x.score *= 3.7;
    CHECK(rank(scaled) == r);
}

TEST_CASE("dense cap") {
    auto mode = EvalMode::exact();
    mode.dense_cap = 5;
    CHECK_THROWS_AS(total_communicability_per_node(builtin_example1(), 1.0, mode), SizeError);
}

TEST_CASE("one Krylov run gives every node's total communicability") {
    std::mt19937_64 rng(61);
    const auto a = mlcent::testing::random_tensor(rng, 8, 3, 0.2, true);
    const auto all = total_communicability_per_node(a, 0.7, EvalMode::krylov(6));
    const auto approx = approx_function_times_block(a, BlockVector::ones(8, 3), 6, FunctionSpec::exp(0.7));
    for (const auto& s : all.scores) CHECK(s.score == bilinear_form(BlockVector::unit(8, 3, s.index), approx.value));
}

TEST_CASE("exact-vs-Krylov error decreases to zero at full dimension") {
    std::mt19937_64 rng(67);
    for (int trial = 0; trial < 5; ++trial) {
        const auto a = mlcent::testing::random_tensor(rng, 10, 3, 0.15, trial % 2 == 0);
        if (a.is_zero()) continue;
        const auto exact = total_communicability_per_node(a, 0.5, EvalMode::exact());
        auto err = [&](int m) {
            const auto k = total_communicability_per_node(a, 0.5, EvalMode::krylov(m));
            double e = 0.0;
            for (std::size_t i = 0; i < exact.scores.size(); ++i)
                e = std::max(e, std::abs(exact.scores[i].score - k.scores[i].score));
            return e;
        };
        CHECK(err(static_cast<int>(a.dimension())) <= 1e-8);
        CHECK(err(8) <= err(2));
    }
}
