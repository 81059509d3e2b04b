#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gossip_lab/coupling.hpp"
#include "gossip_lab/generators.hpp"
#include "gossip_lab/verify.hpp"

using namespace gossip_lab;

namespace {

CallingSequence sequence_of(std::vector<CallPair> pairs) { return {std::move(pairs), {}}; }

// Greedy partition written against explicit membership flags, returning pair counts per block.
std::vector<std::size_t> naive_block_pairs(const Graph& g, const CallingSequence& calls, const SpecialSet& special,
                                           std::size_t pair_count) {
    std::vector<std::size_t> out;
    std::vector<bool> in_block(g.vertex_count(), false);
    for (std::size_t i = 0; i < pair_count; ++i) {
        const CallPair p = calls.pairs[i];
        const bool fits = !out.empty() && !in_block[p.caller] && (!in_block[p.callee] || special.contains(p.callee));
        if (!fits) {
            out.push_back(0);
            std::fill(in_block.begin(), in_block.end(), false);
        }
        ++out.back();
        in_block[p.caller] = in_block[p.callee] = true;
    }
    return out;
}

std::size_t naive_block_of(const BlockPartition& partition, std::size_t pair) {
    for (std::size_t j = 0; j < partition.blocks.size(); ++j)
        if (partition.blocks[j].first <= pair && pair < partition.blocks[j].last) return j;
    ADD_FAILURE() << "pair outside partition";
    return 0;
}

}  // namespace

TEST(SpecialVertices, StarCentreOnly) {
    for (std::size_t n : {5u, 20u, 100u}) {
        const auto s = compute_special_vertices(generate_family(FamilySpec::star(n)), 1.0 / 3.0);
        EXPECT_EQ(s.vertices, (std::vector<Vertex>{0}));
        EXPECT_TRUE(s.contains(0));
        EXPECT_FALSE(s.contains(1));
    }
}

TEST(SpecialVertices, StarFourThreshold) {
    const Graph s = generate_family(FamilySpec::star(4));
    EXPECT_EQ(compute_special_vertices(s, 0.0).vertices, (std::vector<Vertex>{0}));
    // 4^(-0.01) is about 0.986, above pi(centre) = 3/4
    EXPECT_TRUE(compute_special_vertices(s, 0.99).vertices.empty());
}

TEST(SpecialVertices, RegularGraphsHaveNone) {
    for (double alpha : {0.0, 0.3, 0.9}) {
        EXPECT_TRUE(compute_special_vertices(generate_family(FamilySpec::complete(8)), alpha).vertices.empty());
        EXPECT_TRUE(compute_special_vertices(generate_family(FamilySpec::hypercube(4)), alpha).vertices.empty());
    }
}

TEST(SpecialVertices, DoubleStarCentres) {
    const auto s = compute_special_vertices(generate_family(FamilySpec::double_star(100)), 1.0 / 3.0);
    EXPECT_EQ(s.vertices, (std::vector<Vertex>{0, 1}));
}

TEST(SpecialVertices, FewerThanNToOneMinusAlpha) {
    RandomSource src(3, 0);
    for (int i = 0; i < 100; ++i) {
        const std::size_t n = 2 + src.below(40);
        const Graph g = generate_family(FamilySpec::gnp(n, 0.1 + 0.8 * src.uniform(), src.next_u64()));
        const double alpha = 0.99 * src.uniform();
        const auto s = compute_special_vertices(g, alpha);
        EXPECT_LT(static_cast<double>(s.vertices.size()), std::pow(static_cast<double>(n), 1.0 - alpha));
    }
}

TEST(SpecialVertices, AlphaRange) {
    const Graph g = generate_family(FamilySpec::path(4));
    EXPECT_THROW(compute_special_vertices(g, -0.1), std::invalid_argument);
    EXPECT_THROW(compute_special_vertices(g, 1.0), std::invalid_argument);
}

TEST(Partition, TriangleRepeatsSplit) {
    const Graph k3 = generate_family(FamilySpec::complete(3));
    const auto calls = sequence_of({{0, 1}, {2, 0}, {1, 2}});
    const auto p = partition_blocks(k3, calls, compute_special_vertices(k3, 1.0 / 3.0));
    EXPECT_EQ(p.sizes(), (std::vector<std::size_t>{2, 2, 2}));
}

TEST(Partition, SpecialCalleeMayRepeat) {
    const Graph s = generate_family(FamilySpec::star(4));
    const auto special = compute_special_vertices(s, 1.0 / 3.0);
    const auto calls = sequence_of({{1, 0}, {2, 0}, {3, 0}});
    const auto p = partition_blocks(s, calls, special);
    EXPECT_EQ(p.sizes(), (std::vector<std::size_t>{6}));
    EXPECT_EQ(p.block_count(), 1u);
}

TEST(Partition, CallerMustBeFresh) {
    const Graph s = generate_family(FamilySpec::star(4));
    const auto special = compute_special_vertices(s, 1.0 / 3.0);
    // the centre has appeared as a callee, so it cannot call within the same block
    const auto p = partition_blocks(s, sequence_of({{1, 0}, {0, 2}}), special);
    EXPECT_EQ(p.sizes(), (std::vector<std::size_t>{2, 2}));
}

TEST(Partition, DistinctPairsFormOneBlock) {
    const Graph p6 = generate_family(FamilySpec::path(6));
    const auto p = partition_blocks(p6, sequence_of({{0, 1}, {2, 3}, {5, 4}}), compute_special_vertices(p6, 0.5));
    EXPECT_EQ(p.sizes(), (std::vector<std::size_t>{6}));
    EXPECT_EQ(p.block_of(2), 0u);
}

TEST(Partition, PrefixLongerThanSequence) {
    const Graph k3 = generate_family(FamilySpec::complete(3));
    EXPECT_THROW(partition_blocks(k3, sequence_of({{0, 1}}), compute_special_vertices(k3, 0.5), 2),
                 std::invalid_argument);
}

TEST(Partition, MatchesNaiveGreedy) {
    RandomSource src(5, 0);
    for (int i = 0; i < 500; ++i) {
        const std::size_t n = 2 + src.below(14);
        const Graph g = i % 3 == 0   ? generate_family(FamilySpec::star(n + 1))
                        : i % 3 == 1 ? generate_family(FamilySpec::gnp(n, 0.3 + 0.6 * src.uniform(), src.next_u64()))
                                     : generate_family(FamilySpec::double_star(2 * (n / 2 + 2)));
        const auto special = compute_special_vertices(g, 0.99 * src.uniform());
        const auto calls = draw_calling_sequence(g, 5 * g.vertex_count(), false, src.substream(i));
        const std::size_t prefix = 1 + src.below(calls.size());
        const auto p = partition_blocks(g, calls, special, prefix);
        const auto expected = naive_block_pairs(g, calls, special, prefix);
        ASSERT_EQ(p.block_count(), expected.size());
        for (std::size_t j = 0; j < expected.size(); ++j) EXPECT_EQ(p.blocks[j].pair_count(), expected[j]);
        const auto audit = audit_partition(p, calls, special);
        EXPECT_TRUE(audit.contiguous && audit.valid && audit.maximal);
        for (std::size_t k = 0; k < prefix; ++k) ASSERT_EQ(p.block_of(k), naive_block_of(p, k));
    }
}

TEST(Partition, AuditCatchesBrokenPartitions) {
    const Graph k3 = generate_family(FamilySpec::complete(3));
    const auto special = compute_special_vertices(k3, 1.0 / 3.0);
    const auto calls = sequence_of({{0, 1}, {2, 0}, {1, 2}});
    BlockPartition merged = partition_blocks(k3, calls, special);
    merged.blocks = {{0, 2}, {2, 3}};
    EXPECT_FALSE(audit_partition(merged, calls, special).valid);
    BlockPartition gap = partition_blocks(k3, calls, special);
    gap.blocks = {{0, 1}, {2, 3}};
    EXPECT_FALSE(audit_partition(gap, calls, special).contiguous);
    const Graph p6 = generate_family(FamilySpec::path(6));
    const auto fresh = sequence_of({{0, 1}, {2, 3}});
    BlockPartition split = partition_blocks(p6, fresh, compute_special_vertices(p6, 0.5));
    split.blocks = {{0, 1}, {1, 2}};
    EXPECT_FALSE(audit_partition(split, fresh, compute_special_vertices(p6, 0.5)).maximal);
}

TEST(Partition, CompleteBlocksCount) {
    const Graph g = generate_family(FamilySpec::double_star(10));
    const auto special = compute_special_vertices(g, 1.0 / 3.0);
    CallingSequenceDrawer drawer(g, RandomSource(6, 0), false);
    CallingSequence calls;
    const auto p = partition_complete_blocks(g, calls, drawer, special, 40);
    EXPECT_EQ(p.block_count(), 40u);
    EXPECT_GT(calls.size(), p.covered_pairs);
    const auto whole = partition_blocks(g, calls, special);
    for (std::size_t j = 0; j < 40; ++j) EXPECT_EQ(whole.blocks[j].pair_count(), p.blocks[j].pair_count());
}

TEST(Refinement, SplitsAtSpecialInformingStep) {
    const Graph s = generate_family(FamilySpec::star(4));
    const auto special = compute_special_vertices(s, 1.0 / 3.0);
    auto calls = sequence_of({{1, 0}, {2, 0}, {3, 0}});
    const auto seq = run_sequential(s, 1, calls);
    EXPECT_EQ(seq.informed_step[0], 1u);
    const auto p = partition_blocks(s, calls, special, seq.steps);
    const auto refined = refine_blocks_at_special(p, seq.informed_step);
    EXPECT_EQ(refined.sizes(), (std::vector<std::size_t>{2, 4}));
    EXPECT_TRUE(refined.refined);
    const auto lazy = run_lazy(s, 1, calls, refined);
    EXPECT_EQ(lazy.spread_time, 2.0);
    EXPECT_TRUE(lazy_matches_sequential(refined, seq, lazy));
}

TEST(Lazy, SingletonBlocksReplaySequential) {
    const Graph g = generate_family(FamilySpec::gnp(12, 0.3, 8));
    for (std::uint64_t t = 0; t < 100; ++t) {
        CallingSequenceDrawer drawer(g, RandomSource(7, t), false);
        CallingSequence calls;
        const auto seq = run_sequential(g, 0, calls, &drawer);
        BlockPartition singletons;
        singletons.covered_pairs = seq.steps;
        for (std::size_t i = 0; i < seq.steps; ++i) singletons.blocks.push_back({i, i + 1});
        const auto lazy = run_lazy(g, 0, calls, singletons);
        EXPECT_EQ(lazy.spread_time, static_cast<double>(seq.steps));
        const auto times = lazy.informing_times(g.vertex_count());
        for (Vertex v = 0; v < g.vertex_count(); ++v) EXPECT_EQ(times[v], static_cast<double>(seq.informed_step[v]));
    }
}

TEST(Lazy, RoundsFollowBlocksOfSequentialSteps) {
    for (const auto& spec : {FamilySpec::complete(6), FamilySpec::double_star(10), FamilySpec::path(8),
                             FamilySpec::diamonds(2, 3), FamilySpec::star(9)}) {
        const Graph g = generate_family(spec);
        const auto special = compute_special_vertices(g, 1.0 / 3.0);
        for (std::uint64_t t = 0; t < 300; ++t) {
            CallingSequenceDrawer drawer(g, RandomSource(8, t), false);
            CallingSequence calls;
            const auto seq = run_sequential(g, 0, calls, &drawer);
            const auto blocks = partition_blocks(g, calls, special, seq.steps);
            const auto refined = refine_blocks_at_special(blocks, seq.informed_step);
            const auto lazy = run_lazy(g, 0, calls, refined);
            const auto times = lazy.informing_times(g.vertex_count());
            for (Vertex v = 0; v < g.vertex_count(); ++v) {
                const std::size_t step = seq.informed_step[v];
                const double expected = step == 0 ? 0.0 : static_cast<double>(naive_block_of(refined, step - 1) + 1);
                ASSERT_EQ(times[v], expected) << spec.label() << " trial " << t << " vertex " << v;
            }
            EXPECT_EQ(lazy.spread_time, static_cast<double>(refined.block_count()));
            EXPECT_LE(refined.block_count(), blocks.block_count() + special.vertices.size());
            const auto audit = audit_partition(refined, calls, special);
            EXPECT_TRUE(audit.contiguous && audit.valid);
        }
    }
}

TEST(Coupled, K2) {
    const Graph k2 = generate_family(FamilySpec::complete(2));
    for (std::uint64_t t = 0; t < 100; ++t) {
        const auto run = coupled_sync_async_run(k2, 0, RandomSource(9, t));
        EXPECT_EQ(run.sync.spread_time, 1.0);
        ASSERT_EQ(run.superset.size(), 1u);
        EXPECT_TRUE(run.all_supersets());
        EXPECT_TRUE(run.within_epoch_sum);
        EXPECT_LE(run.decelerated.record.spread_time, run.epoch_ends[0]);
    }
}

TEST(Coupled, DoubleStarAndDiamonds) {
    for (const auto& spec : {FamilySpec::double_star(10), FamilySpec::diamonds(3, 3)}) {
        const Graph g = generate_family(spec);
        for (std::uint64_t t = 0; t < 300; ++t) {
            const auto run = coupled_sync_async_run(g, 2, RandomSource(10, t));
            EXPECT_EQ(run.superset.size(), static_cast<std::size_t>(run.sync.spread_time));
            EXPECT_TRUE(run.all_supersets()) << spec.label() << " trial " << t;
            EXPECT_TRUE(run.within_epoch_sum);
            for (std::size_t k = 1; k < run.epoch_ends.size(); ++k) EXPECT_GT(run.epoch_ends[k], run.epoch_ends[k - 1]);
        }
    }
}

TEST(Diagnostics, CompleteGraph) {
    const Graph k6 = generate_family(FamilySpec::complete(6));
    const auto rep = lemma_diagnostics(k6, 1.0 / 3.0, 2000, 6.0, 11);
    EXPECT_FALSE(rep.graph_too_small);
    ASSERT_EQ(rep.events.size(), 3u);
    for (const char* name : {"N_le_4n_gst", "block_sum_ge_8gst_n", "S1_gt_2ell"}) {
        const auto* e = rep.find(name);
        ASSERT_NE(e, nullptr) << name;
        EXPECT_EQ(e->frequency.trials, 2000u);
        EXPECT_GE(e->frequency.frequency, 0.0);
        EXPECT_LE(e->frequency.frequency, 1.0);
        EXPECT_LE(e->frequency.ci_lo, e->frequency.frequency);
        EXPECT_GE(e->frequency.ci_hi, e->frequency.frequency);
    }
    EXPECT_GT(rep.find("N_le_4n_gst")->frequency.frequency, 0.99);
    const nlohmann::json j(rep);
    EXPECT_EQ(j["conditional_on_gst_estimate"], 6.0);
    EXPECT_EQ(j["events"].size(), 3u);
    EXPECT_EQ(j["events"][0]["ci95"].size(), 2u);
}

TEST(Diagnostics, TinyGraphFlagged) {
    const auto rep = lemma_diagnostics(generate_family(FamilySpec::path(1)), 0.5, 10, 0.0, 1);
    EXPECT_TRUE(rep.graph_too_small);
    EXPECT_TRUE(rep.events.empty());
    EXPECT_THROW(lemma_diagnostics(generate_family(FamilySpec::path(3)), 0.5, 0, 1.0, 1), std::invalid_argument);
}

TEST(Diagnostics, Deterministic) {
    const Graph g = generate_family(FamilySpec::double_star(10));
    EXPECT_EQ(nlohmann::json(lemma_diagnostics(g, 1.0 / 3.0, 300, 8.0, 4)).dump(),
              nlohmann::json(lemma_diagnostics(g, 1.0 / 3.0, 300, 8.0, 4)).dump());
}
