#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "coopalloc/association.hpp"
#include "coopalloc/util.hpp"
#include "test_util.hpp"

using namespace coopalloc;

namespace {

// Independent ordering check: sorts by explicit ratio values (index ties) and
// tests the boundary condition directly, without the production keep logic.
bool ordering_ok(const Instance& inst, const BoundaryVector& bv, const Association& assoc) {
    const std::size_t m = inst.num_bs(), n = inst.num_ue();
    PairTable pairs(m);
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
            std::vector<std::size_t> order(n);
            for (std::size_t j = 0; j < n; ++j) order[j] = j;
            std::stable_sort(order.begin(), order.end(), [&](std::size_t j, std::size_t k) {
                double rj, rk;
                try {
                    rj = snr_ratio(inst, a, b, j);
                } catch (const std::domain_error&) {
                    rj = 0.0;
                }
                try {
                    rk = snr_ratio(inst, a, b, k);
                } catch (const std::domain_error&) {
                    rk = 0.0;
                }
                if (rj != rk) return rj > rk;
                return j < k;
            });
            std::vector<std::size_t> pos(n);
            for (std::size_t k = 0; k < n; ++k) pos[order[k]] = k + 1;
            const PairCut cut = bv.cuts[pairs.index(a, b)];
            for (std::size_t u : assoc.clusters[a])
                if (pos[u] + (cut.joint ? 1 : 0) > cut.cut) return false;
            for (std::size_t u : assoc.clusters[b])
                if (pos[u] <= cut.cut) return false;
            if (cut.joint && cut.cut >= 1) {
                const std::size_t designee = order[cut.cut - 1];
                bool in_a = std::find(assoc.multi[a].begin(), assoc.multi[a].end(), designee) !=
                            assoc.multi[a].end();
                bool in_cluster = false;
                for (std::size_t i = 0; i < m; ++i)
                    if (std::find(assoc.clusters[i].begin(), assoc.clusters[i].end(), designee) !=
                        assoc.clusters[i].end())
                        in_cluster = true;
                if (!in_a && !in_cluster) return false;
            }
        }
    }
    return true;
}

}  // namespace

TEST_CASE("snr_ratio: plain ratios, symmetry and the coverage-hole sentinel") {
    Instance ok = testutil::make_instance({{4.0, 2.0, 1.0}, {2.0, 2.0, 0.0}}, {0.1, 0.1, 0.1});
    CHECK(snr_ratio(ok, 0, 1, 0) == doctest::Approx(2.0));
    CHECK(snr_ratio(ok, 0, 1, 1) == doctest::Approx(1.0));
    CHECK(std::isinf(snr_ratio(ok, 0, 1, 2)));
    Instance third = testutil::make_instance({{0.0}, {0.0}, {1.0}}, {0.1});
    CHECK_THROWS_AS(snr_ratio(third, 0, 1, 0), std::domain_error);
}

TEST_CASE("initial_clusters: argmax with ties to the lowest BS") {
    Instance a = testutil::make_instance({{3.0, 1.0}, {1.0, 3.0}}, {0.1, 0.1});
    auto ca = initial_clusters(a);
    CHECK(ca[0] == std::vector<std::size_t>{0});
    CHECK(ca[1] == std::vector<std::size_t>{1});

    Instance b = testutil::make_instance({{2.0, 2.0}, {2.0, 2.0}}, {0.1, 0.1});
    auto cb = initial_clusters(b);
    CHECK(cb[0] == std::vector<std::size_t>({0, 1}));
    CHECK(cb[1].empty());
}

TEST_CASE("initial_clusters: matches a direct argmax scan") {
    Instance inst = testutil::random_instance(3, 6, 404);
    auto clusters = initial_clusters(inst);
    for (std::size_t j = 0; j < 6; ++j) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < 3; ++i)
            if (inst.gamma(i, j) > inst.gamma(best, j)) best = i;
        CHECK(std::find(clusters[best].begin(), clusters[best].end(), j) != clusters[best].end());
    }
}

TEST_CASE("boundary enumeration: candidate counts for two BSs") {
    Instance n3 = testutil::random_instance(2, 3, 11);
    PairOrders o3(n3);
    BoundaryEnumerator e3(n3, o3);
    std::size_t count = 0;
    e3.for_each([&](const BoundaryVector&, const Association&, std::uint64_t) {
        ++count;
        return true;
    });
    CHECK(count == 4);  // cuts 0..3

    Instance n1 = testutil::random_instance(2, 1, 12);
    PairOrders o1(n1);
    BoundaryEnumerator e1(n1, o1);
    count = 0;
    e1.for_each([&](const BoundaryVector&, const Association&, std::uint64_t) {
        ++count;
        return true;
    });
    CHECK(count == 2);  // lone UE: taken over or jointly powered
}

TEST_CASE("boundary enumeration: no duplicates, every candidate verifies") {
    Instance inst = testutil::random_instance(3, 4, 21);
    PairOrders orders(inst);
    BoundaryEnumerator en(inst, orders);
    std::set<std::vector<std::size_t>> seen;
    std::size_t yielded = 0;
    en.for_each([&](const BoundaryVector& bv, const Association& assoc, std::uint64_t) {
        ++yielded;
        std::vector<std::size_t> key;
        for (const PairCut& c : bv.cuts) {
            key.push_back(c.cut);
            key.push_back(c.joint ? 1 : 0);
        }
        CHECK(seen.insert(key).second);
        CHECK(verify_association(inst, orders, bv, assoc));
        CHECK(ordering_ok(inst, bv, assoc));
        return true;
    });
    CHECK(yielded > 0);

    // independent recount: decode every raw index, filter by the direct checks
    std::size_t recount = 0;
    for (std::uint64_t idx = 0; idx < en.raw_count(); ++idx) {
        BoundaryVector bv = en.decode(idx);
        std::set<std::size_t> designees;
        for (std::size_t p = 0; p < bv.cuts.size(); ++p)
            if (bv.cuts[p].joint) designees.insert(orders.by_pair[p].order[bv.cuts[p].cut - 1]);
        if (designees.size() + 1 > inst.num_bs()) continue;
        Association assoc;
        if (!try_associate(inst, orders, bv, assoc)) continue;
        if (!verify_association(inst, orders, bv, assoc)) continue;
        if (!ordering_ok(inst, bv, assoc)) continue;
        ++recount;
    }
    CHECK(recount == yielded);
}

TEST_CASE("associate: exclusive boundary, no joint UE") {
    Instance inst = testutil::make_instance({{3.0, 1.0}, {1.0, 3.0}}, {0.1, 0.1});
    PairOrders orders(inst);
    BoundaryVector bv;
    bv.cuts = {PairCut{1, false}};
    Association assoc = associate(inst, orders, bv);
    CHECK(assoc.clusters[0] == std::vector<std::size_t>{0});
    CHECK(assoc.clusters[1] == std::vector<std::size_t>{1});
    CHECK(assoc.multi[0].empty());
    CHECK(assoc.multi[1].empty());
}

TEST_CASE("associate: lone UE designated joint serves from both BSs") {
    Instance inst = testutil::make_instance({{2.0}, {1.0}}, {0.5});
    PairOrders orders(inst);
    BoundaryVector bv;
    bv.cuts = {PairCut{1, true}};
    Association assoc = associate(inst, orders, bv);
    CHECK(assoc.clusters[0].empty());
    CHECK(assoc.clusters[1].empty());
    CHECK(assoc.multi[0] == std::vector<std::size_t>{0});
    CHECK(assoc.multi[1] == std::vector<std::size_t>{0});
    CHECK(assoc.serving[0] == std::vector<std::size_t>({0, 1}));
}

TEST_CASE("associate: inconsistent boundaries are rejected") {
    // both pair cuts deny the UE to everyone
    Instance inst = testutil::make_instance({{2.0}, {1.0}}, {0.5});
    PairOrders orders(inst);
    BoundaryVector bv;
    bv.cuts = {PairCut{0, false}};  // UE must go to BS 1...
    Association assoc = associate(inst, orders, bv);
    CHECK(assoc.clusters[1] == std::vector<std::size_t>{0});

    Instance dead = testutil::make_instance({{2.0}, {0.0}}, {0.5});
    PairOrders orders2(dead);
    Association out;
    CHECK(!try_associate(dead, orders2, bv, out));  // BS 1 side has no link
}

TEST_CASE("associate: invariants and idempotence on random instances") {
    for (std::uint64_t seed : {31ull, 32ull, 33ull}) {
        Instance inst = testutil::random_instance(3, 5, seed);
        PairOrders orders(inst);
        BoundaryEnumerator en(inst, orders);
        en.for_each([&](const BoundaryVector& bv, const Association& assoc, std::uint64_t) {
            // partition property
            std::vector<int> covered(5, 0);
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t u : assoc.clusters[i]) ++covered[u];
            std::set<std::size_t> multi_union;
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t u : assoc.multi[i]) multi_union.insert(u);
            for (std::size_t u = 0; u < 5; ++u)
                CHECK(covered[u] + (multi_union.count(u) ? 1 : 0) == 1);
            CHECK(multi_union.size() <= 2);

            // idempotence
            Association again = associate(inst, orders, bv);
            CHECK(again.serving == assoc.serving);

            // per pair, concession flows in one direction only
            for (std::size_t p = 0; p < orders.pairs.count(); ++p) {
                auto [a, b] = orders.pairs.pair(p);
                bool a_lost = false, b_lost = false;
                for (std::size_t u : assoc.initial[a])
                    if (std::find(assoc.clusters[a].begin(), assoc.clusters[a].end(), u) ==
                            assoc.clusters[a].end() &&
                        std::find(assoc.clusters[b].begin(), assoc.clusters[b].end(), u) !=
                            assoc.clusters[b].end())
                        a_lost = true;
                for (std::size_t u : assoc.initial[b])
                    if (std::find(assoc.clusters[b].begin(), assoc.clusters[b].end(), u) ==
                            assoc.clusters[b].end() &&
                        std::find(assoc.clusters[a].begin(), assoc.clusters[a].end(), u) !=
                            assoc.clusters[a].end())
                        b_lost = true;
                CHECK(!(a_lost && b_lost));
            }
            return true;
        });
    }
}

TEST_CASE("initial clusters are invariant under per-UE gain scaling") {
    Instance inst = testutil::random_instance(3, 5, 77);
    auto before = initial_clusters(inst);
    Instance scaled = inst;
    for (std::size_t j = 0; j < 5; ++j) {
        const double c = 0.25 + static_cast<double>(j);
        for (std::size_t i = 0; i < 3; ++i) scaled.gamma(i, j) = inst.gamma(i, j) * c;
    }
    CHECK(initial_clusters(scaled) == before);

    // pair orders are ratio-based, so they are scale-free as well
    PairOrders a(inst), b(scaled);
    for (std::size_t p = 0; p < a.pairs.count(); ++p) CHECK(a.by_pair[p].order == b.by_pair[p].order);
}
