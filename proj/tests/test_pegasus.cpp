// Pegasus graph: counts, addressing and coupler rules.

#include <gtest/gtest.h>

#include <map>
#include <random>
#include <sstream>

#include "qbal/hash.hpp"
#include "qbal/pegasus.hpp"

using namespace qbal;

namespace {

// Edge lists dumped from dwave-networkx pegasus_graph(m, fabric_only=False)
// in "a b\n" form, a < b, ascending.
struct Reference {
    int m;
    std::size_t edges;
    std::uint64_t fnv;
};
constexpr Reference kReference[] = {
    {2, 168, 0xf97f5be119ca3dbdULL},
    {3, 720, 0x8399c77433569d3fULL},
    {4, 1632, 0xba315cb1f14a3842ULL},
    {16, 40656, 0xbc272b070d9e8219ULL},
};

std::map<std::size_t, std::size_t> degree_histogram(const PegasusGraph& g) {
    std::map<std::size_t, std::size_t> h;
    for (std::size_t q = 0; q < g.num_qubits(); ++q) ++h[g.degree(static_cast<Qubit>(q))];
    return h;
}

}  // namespace

TEST(Pegasus, QubitCount) {
    EXPECT_EQ(build_pegasus(2).num_qubits(), 48u);
    EXPECT_EQ(build_pegasus(16).num_qubits(), 5760u);
    for (int m = 2; m <= 6; ++m) EXPECT_EQ(build_pegasus(m).num_qubits(), 24u * m * (m - 1));
}

TEST(Pegasus, RejectsSmallM) {
    EXPECT_THROW(build_pegasus(1), ParameterError);
    EXPECT_THROW(build_pegasus(0), ParameterError);
    EXPECT_THROW(build_pegasus(-3), ParameterError);
}

TEST(Pegasus, EdgeListMatchesReferenceDump) {
    for (const auto& ref : kReference) {
        const auto g = build_pegasus(ref.m);
        EXPECT_EQ(g.num_edges(), ref.edges) << "m=" << ref.m;
        std::ostringstream os;
        write_edge_list(g, os);
        EXPECT_EQ(hash_bytes(os.str()), ref.fnv) << "m=" << ref.m;
    }
}

TEST(Pegasus, DegreeHistogramP16) {
    const auto h = degree_histogram(build_pegasus(16));
    const std::map<std::size_t, std::size_t> want{{2, 16},  {3, 104},  {6, 32},  {7, 208},
                                                   {10, 32}, {11, 208}, {14, 688}, {15, 4472}};
    EXPECT_EQ(h, want);
}

TEST(Pegasus, InteriorQubitsHaveDegree15) {
    const auto g = build_pegasus(16);
    // away from the boundary tiles in both w and z
    for (int u = 0; u < 2; ++u)
        for (int w = 2; w < 14; ++w)
            for (int k = 0; k < 12; ++k)
                for (int z = 2; z < 13; ++z) ASSERT_EQ(g.degree(g.to_linear({u, w, k, z})), 15u);
}

TEST(Pegasus, SmallGraphInvariants) {
    for (int m : {2, 3, 4}) {
        const auto g = build_pegasus(m);
        std::size_t incidences = 0;
        for (std::size_t a = 0; a < g.num_qubits(); ++a) {
            const auto q = static_cast<Qubit>(a);
            const auto nb = g.neighbors(q);
            EXPECT_LE(nb.size(), 15u);
            EXPECT_TRUE(std::is_sorted(nb.begin(), nb.end()));
            EXPECT_FALSE(g.is_edge(q, q));
            for (Qubit b : nb) {
                EXPECT_NE(b, q);
                EXPECT_TRUE(g.is_edge(b, q)) << a << " " << b;
            }
            incidences += nb.size();
        }
        EXPECT_EQ(incidences, 2 * g.num_edges());
    }
}

TEST(Pegasus, LinearIndexFormula) {
    const auto g = build_pegasus(16);
    EXPECT_EQ(g.to_linear({0, 0, 0, 0}), 0);
    EXPECT_EQ(g.to_linear({1, 0, 0, 0}), 2880);
    EXPECT_EQ(g.to_linear({0, 1, 0, 0}), 180);
    EXPECT_EQ(g.to_linear({0, 0, 1, 0}), 15);
    EXPECT_EQ(g.to_linear({0, 0, 0, 1}), 1);
    EXPECT_EQ(g.to_linear({1, 15, 11, 14}), 5759);
}

TEST(Pegasus, BijectionExhaustiveSmall) {
    for (int m : {2, 3, 4}) {
        const auto g = build_pegasus(m);
        Qubit expect = 0;
        for (int u = 0; u < 2; ++u)
            for (int w = 0; w < m; ++w)
                for (int k = 0; k < 12; ++k)
                    for (int z = 0; z < m - 1; ++z, ++expect) {
                        const PegasusCoord c{u, w, k, z};
                        ASSERT_EQ(g.to_linear(c), expect);
                        ASSERT_EQ(g.from_linear(expect), c);
                    }
        EXPECT_EQ(static_cast<std::size_t>(expect), g.num_qubits());
    }
}

TEST(Pegasus, BijectionSampledP16) {
    const auto g = build_pegasus(16);
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<Qubit> pick(0, static_cast<Qubit>(g.num_qubits()) - 1);
    for (int i = 0; i < 2000; ++i) {
        const Qubit q = pick(rng);
        EXPECT_EQ(g.to_linear(g.from_linear(q)), q);
    }
}

TEST(Pegasus, OutOfRangeIsIndexError) {
    const auto g = build_pegasus(3);
    EXPECT_THROW(g.from_linear(-1), IndexError);
    EXPECT_THROW(g.from_linear(144), IndexError);
    EXPECT_THROW(g.neighbors(144), IndexError);
    EXPECT_THROW(g.is_edge(0, 144), IndexError);
    EXPECT_THROW(g.is_edge(144, 0), IndexError);
    EXPECT_THROW(g.to_linear({2, 0, 0, 0}), IndexError);
    EXPECT_THROW(g.to_linear({0, 3, 0, 0}), IndexError);
    EXPECT_THROW(g.to_linear({0, 0, 12, 0}), IndexError);
    EXPECT_THROW(g.to_linear({0, 0, 0, 2}), IndexError);
}

TEST(Pegasus, ExternalAndOddCouplers) {
    const auto g = build_pegasus(4);
    for (int u = 0; u < 2; ++u)
        for (int w = 0; w < 4; ++w)
            for (int k = 0; k < 12; ++k) {
                for (int z = 0; z + 1 < 3; ++z) EXPECT_TRUE(g.is_edge(g.to_linear({u, w, k, z}), g.to_linear({u, w, k, z + 1})));
                if (k % 2 == 0)
                    for (int z = 0; z < 3; ++z) EXPECT_TRUE(g.is_edge(g.to_linear({u, w, k, z}), g.to_linear({u, w, k + 1, z})));
            }
}

TEST(Pegasus, NoCouplerBetweenParallelLines) {
    const auto g = build_pegasus(4);
    // same orientation, different w: never coupled
    for (int u = 0; u < 2; ++u)
        for (int k = 0; k < 12; ++k)
            for (int k2 = 0; k2 < 12; ++k2)
                for (int z = 0; z < 3; ++z)
                    for (int z2 = 0; z2 < 3; ++z2)
                        EXPECT_FALSE(g.is_edge(g.to_linear({u, 0, k, z}), g.to_linear({u, 2, k2, z2})));
    // same line, non-consecutive z
    EXPECT_FALSE(g.is_edge(g.to_linear({0, 1, 5, 0}), g.to_linear({0, 1, 5, 2})));
}

TEST(Pegasus, Deterministic) {
    EXPECT_EQ(build_pegasus(5), build_pegasus(5));
    EXPECT_FALSE(build_pegasus(5) == build_pegasus(4));
}
