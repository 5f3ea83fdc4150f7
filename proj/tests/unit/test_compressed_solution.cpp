#include <gtest/gtest.h>

#include <thread>

#include "sqsolve/compressed_solution.hpp"
#include "sqsolve/errors.hpp"
#include "sqsolve/stats.hpp"
#include "test_support.hpp"

using namespace sqsolve;

namespace {

std::shared_ptr<const SQMatrix> single_row_34()
{
    DenseMatrix a(1, 2);
    a << 3, 4;
    return support::shared(a);
}

SparseIterate unit(std::size_t n, Index r, double v = 1.0)
{
    SparseIterate y(n);
    y.set(r, v);
    return y;
}

std::vector<double> exact_dx(const DenseVector& x)
{
    std::vector<double> p(static_cast<std::size_t>(x.size()));
    const double total = x.squaredNorm();
    for (Eigen::Index j = 0; j < x.size(); ++j) p[static_cast<std::size_t>(j)] = x(j) * x(j) / total;
    return p;
}

std::vector<double> empirical(const CompressedSolution& s, std::size_t draws, RandomStream& rng,
                              double* mean_rounds = nullptr)
{
    std::vector<std::size_t> counts(s.matrix().cols(), 0);
    std::size_t rounds = 0;
    for (std::size_t i = 0; i < draws; ++i) {
        const auto st = s.sample(rng);
        EXPECT_GE(st.iterations_used, 1u);
        rounds += st.iterations_used;
        ++counts[st.accepted_index];
    }
    if (mean_rounds) *mean_rounds = static_cast<double>(rounds) / static_cast<double>(draws);
    return stats::frequencies(counts);
}

} // namespace

// ---------------------------------------------------------------- query

TEST(Query, UnitDualGivesMatrixRow)
{
    RandomStream gen(1);
    auto m = support::shared(support::gaussian_matrix(5, 4, gen));
    CompressedSolution s(m, unit(5, 0));
    for (Index j = 0; j < 4; ++j) EXPECT_EQ(s.query(j), (*m)(0, j));
}

TEST(Query, ZeroDualGivesZero)
{
    RandomStream gen(2);
    auto m = support::shared(support::gaussian_matrix(5, 4, gen));
    CompressedSolution s(m, SparseIterate(5));
    for (Index j = 0; j < 4; ++j) EXPECT_EQ(s.query(j), 0.0);
    EXPECT_THROW((void)s.query(4), std::out_of_range);
}

TEST(Query, MatchesDenseProduct)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        RandomStream gen(seed);
        auto m = support::shared(support::gaussian_matrix(6, 4, gen));
        SparseIterate y = support::random_sparse(6, 3, gen);
        const DenseVector dense = m->entries().transpose() * y.to_dense();
        CompressedSolution s(m, std::move(y));
        for (Index j = 0; j < 4; ++j) EXPECT_NEAR(s.query(j), dense(j), 1e-12);
        EXPECT_LE(support::max_abs(s.dense() - dense), 1e-12);
        EXPECT_NEAR(s.x_sqnorm(), dense.squaredNorm(), 1e-12 * dense.squaredNorm());
    }
}

TEST(Query, RejectsMismatchedIterate)
{
    auto m = support::shared(DenseMatrix::Identity(2, 2));
    EXPECT_THROW(CompressedSolution(m, SparseIterate(3)), InvalidInput);
    EXPECT_THROW(CompressedSolution(nullptr, SparseIterate(3)), InvalidInput);
}

// ---------------------------------------------------------------- phi

TEST(Phi, SingleRowIsOne)
{
    RandomStream gen(3);
    auto m = support::shared(support::gaussian_matrix(4, 3, gen));
    CompressedSolution s(m, unit(4, 0));
    EXPECT_NEAR(s.compute_phi(), 1.0, 1e-15);
}

TEST(Phi, IdentityAllOnes)
{
    auto m = support::shared(DenseMatrix::Identity(2, 2));
    SparseIterate y(2);
    y.set(0, 1.0);
    y.set(1, 1.0);
    CompressedSolution s(m, y);
    EXPECT_DOUBLE_EQ(s.compute_phi(), 2.0);
    EXPECT_DOUBLE_EQ(s.weighted_sqnorm(), 2.0);
}

TEST(Phi, PerfectCancellationIsDegenerate)
{
    DenseMatrix a(2, 2);
    a << 1, 2, 1, 2;
    auto m = support::shared(a);
    SparseIterate y(2);
    y.set(0, 1.0);
    y.set(1, -1.0);
    CompressedSolution s(m, y);
    EXPECT_THROW((void)s.compute_phi(), DegenerateError);
    RandomStream rng(1);
    EXPECT_THROW((void)s.sample(rng), DegenerateError);
    EXPECT_THROW((void)CompressedSolution(m, SparseIterate(2)).sample(rng), DegenerateError);
}

TEST(Phi, IgnoresStoredZeros)
{
    RandomStream gen(4);
    auto m = support::shared(support::gaussian_matrix(4, 3, gen));
    SparseIterate y = unit(4, 1, 2.0);
    y.set(3, 0.0);
    CompressedSolution s(m, y);
    EXPECT_NEAR(s.compute_phi(), 1.0, 1e-15);
}

TEST(Phi, CacheInvalidatedOnMutation)
{
    auto m = support::shared(DenseMatrix::Identity(2, 2));
    CompressedSolution s(m, unit(2, 0));
    EXPECT_DOUBLE_EQ(s.compute_phi(), 1.0);
    s.set_coefficient(1, 1.0);
    EXPECT_DOUBLE_EQ(s.compute_phi(), 2.0);
    EXPECT_DOUBLE_EQ(s.query(1), 1.0);
}

// ---------------------------------------------------------------- sample

TEST(Sample, SingleRowAlwaysAccepts)
{
    CompressedSolution s(single_row_34(), unit(1, 0));
    RandomStream rng(5);
    std::vector<std::size_t> counts(2, 0);
    for (int i = 0; i < 100000; ++i) {
        const auto st = s.sample(rng);
        EXPECT_EQ(st.iterations_used, 1u);
        EXPECT_EQ(st.phi_at_sample, 1.0);
        ++counts[st.accepted_index];
    }
    const auto f = stats::frequencies(counts);
    EXPECT_NEAR(f[0], 9.0 / 25, 0.01);
    EXPECT_NEAR(f[1], 16.0 / 25, 0.01);
}

TEST(Sample, IdentityIsUniform)
{
    SparseIterate y(2);
    y.set(0, 1.0);
    y.set(1, 1.0);
    CompressedSolution s(support::shared(DenseMatrix::Identity(2, 2)), y);
    RandomStream rng(6);
    const auto f = empirical(s, 100000, rng);
    EXPECT_NEAR(f[0], 0.5, 0.01);
    EXPECT_NEAR(f[1], 0.5, 0.01);
}

TEST(Sample, TotalVariationSmall)
{
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        RandomStream gen(50 + seed);
        auto m = support::shared(support::gaussian_matrix(8, 5, gen));
        CompressedSolution s(m, support::random_sparse(8, 4, gen));
        RandomStream rng(seed);
        const auto f = empirical(s, 50000, rng);
        EXPECT_LE(stats::total_variation(f, exact_dx(s.dense())), 0.02) << "seed " << seed;
    }
}

TEST(Sample, ChiSquareAgainstExactDx)
{
    RandomStream gen(77);
    auto m = support::shared(support::gaussian_matrix(8, 5, gen));
    CompressedSolution s(m, support::random_sparse(8, 5, gen));
    RandomStream rng(3);
    std::vector<std::size_t> counts(5, 0);
    for (int i = 0; i < 100000; ++i) ++counts[s.sample(rng).accepted_index];
    EXPECT_TRUE(support::chi_square_fits(counts, exact_dx(s.dense())));
}

TEST(Sample, ZeroColumnOfXNeverReturned)
{
    // x = A^T y has x_1 = 0 exactly through cancellation
    DenseMatrix a(2, 3);
    a << 1, 1, 2,
         1, -1, 1;
    SparseIterate y(2);
    y.set(0, 1.0);
    y.set(1, 1.0);
    CompressedSolution s(support::shared(a), y);
    ASSERT_EQ(s.query(1), 0.0);
    RandomStream rng(9);
    for (int i = 0; i < 5000; ++i) EXPECT_NE(s.sample(rng).accepted_index, 1u);
}

TEST(Sample, MeanRoundsTrackPhi)
{
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        RandomStream gen(200 + seed);
        auto m = support::shared(support::gaussian_matrix(8, 6, gen));
        CompressedSolution s(m, support::random_sparse(8, 6, gen));
        const double phi = s.compute_phi();
        RandomStream rng(seed);
        double mean_rounds = 0;
        empirical(s, 10000, rng, &mean_rounds);
        EXPECT_GE(mean_rounds, phi / 2);
        EXPECT_LE(mean_rounds, 2 * phi);
        EXPECT_NEAR(mean_rounds, phi, 0.1 * phi);
    }
}

TEST(Sample, AcceptanceRatioWithinUnitInterval)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        RandomStream gen(seed);
        const auto n = 1 + gen.uniform_index(6), d = 1 + gen.uniform_index(6);
        auto m = support::shared(support::gaussian_matrix(n, d, gen));
        CompressedSolution s(m, support::random_sparse(n, 1 + gen.uniform_index(n), gen));
        for (Index j = 0; j < d; ++j) {
            const double r = s.acceptance_ratio(j);
            EXPECT_GE(r, 0.0);
            EXPECT_LE(r, 1.0 + 1e-9);
        }
    }
}

TEST(Sample, ProposalMarginalByTotalProbability)
{
    // P(j) = sum_i w_i / W * P(j | i), with w_i = y_i^2 ||a_i||^2 and the
    // matrix's own within-row sampler supplying P(j | i)
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        RandomStream gen(300 + seed);
        const std::size_t n = 6, d = 5;
        auto m = support::shared(support::gaussian_matrix(n, d, gen));
        const SparseIterate y = support::random_sparse(n, 4, gen);
        double W = 0;
        for (auto i : y.indices()) W += y.value(i) * y.value(i) * m->row_sqnorm(i);
        for (Index j = 0; j < d; ++j) {
            double total_prob = 0, direct = 0;
            for (auto i : y.indices()) {
                const double w = y.value(i) * y.value(i) * m->row_sqnorm(i);
                total_prob += w / W * m->row_entry_sampler(i).probability(j);
                direct += y.value(i) * y.value(i) * (*m)(i, j) * (*m)(i, j);
            }
            EXPECT_NEAR(total_prob, direct / W, 1e-12);
        }
    }
}

TEST(Sample, AcceptanceTimesProposalIsProportionalToDx)
{
    // r(j) P(j) = x_j^2 / (s W), so the accepted marginal is exactly D_x
    RandomStream gen(17);
    auto m = support::shared(support::gaussian_matrix(6, 6, gen));
    CompressedSolution s(m, support::random_sparse(6, 4, gen));
    const DenseVector x = s.dense();
    const double s_nnz = static_cast<double>(s.iterate().nnz());
    const double W = s.weighted_sqnorm();
    for (Index j = 0; j < 6; ++j) {
        double proposal = 0;
        for (auto i : s.iterate().indices()) {
            const double v = s.iterate().value(i);
            proposal += v * v * (*m)(i, j) * (*m)(i, j) / W;
        }
        EXPECT_NEAR(s.acceptance_ratio(j) * proposal, x(j) * x(j) / (s_nnz * W), 1e-12);
    }
}

TEST(Sample, DeterministicAndThreadSafe)
{
    RandomStream gen(21);
    auto m = support::shared(support::gaussian_matrix(10, 7, gen));
    CompressedSolution s(m, support::random_sparse(10, 6, gen));
    std::vector<std::vector<Index>> out(4);
    std::vector<std::thread> workers;
    for (int t = 0; t < 4; ++t) {
        workers.emplace_back([&, t] {
            RandomStream rng(99);
            for (int i = 0; i < 500; ++i) out[t].push_back(s.sample(rng).accepted_index);
        });
    }
    for (auto& w : workers) w.join();
    for (int t = 1; t < 4; ++t) EXPECT_EQ(out[t], out[0]);
}
