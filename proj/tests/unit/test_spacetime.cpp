#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rbell/protocols.hpp"
#include "rbell/spacetime.hpp"

using namespace rbell;

namespace {

using L = EventLabel;

SpacetimeEvent ev(L l, double t, double x, double y = 0.0) { return {l, t, x, y, {}}; }

std::vector<Foliation> velocity_grid_1d() {
    std::vector<Foliation> g;
    for (int k = -90; k <= 90; ++k) g.push_back(Foliation::from_velocity(k / 100.0));
    return g;
}

}  // namespace

TEST(Causal, Examples) {
    EXPECT_EQ(causal_relation(SpacetimePoint{0, 0}, SpacetimePoint{2, 1}), CausalRelation::timelike_future);
    EXPECT_EQ(causal_relation(SpacetimePoint{2, 1}, SpacetimePoint{0, 0}), CausalRelation::timelike_past);
    EXPECT_EQ(causal_relation(SpacetimePoint{0, 0}, SpacetimePoint{1, 10}), CausalRelation::spacelike);
    EXPECT_EQ(causal_relation(SpacetimePoint{0, 0}, SpacetimePoint{1, 1}), CausalRelation::lightlike);
    EXPECT_EQ(causal_relation(SpacetimePoint{0, 0, 0}, SpacetimePoint{5, 3, 4}), CausalRelation::lightlike);
}

TEST(Causal, InvariantUnderBoosts) {
    RngStream rng(61);
    for (int n = 0; n < 1000; ++n) {
        const SpacetimePoint a{20 * rng.uniform() - 10, 20 * rng.uniform() - 10, 20 * rng.uniform() - 10};
        const SpacetimePoint b{20 * rng.uniform() - 10, 20 * rng.uniform() - 10, 20 * rng.uniform() - 10};
        const auto rel = causal_relation(a, b);
        for (int k = 0; k < 20; ++k) {
            const Foliation f(6 * rng.uniform() - 3, 2 * kPi * rng.uniform());
            // Boost the pair into f's rest frame and reclassify.
            const double c = std::cos(f.direction()), s = std::sin(f.direction());
            auto boost = [&](const SpacetimePoint& p) {
                const double par = c * p.x + s * p.y, perp = -s * p.x + c * p.y;
                const double ch = std::cosh(f.rapidity()), sh = std::sinh(f.rapidity());
                const double tp = ch * p.t - sh * par, parp = ch * par - sh * p.t;
                return SpacetimePoint{tp, c * parp - s * perp, s * parp + c * perp};
            };
            const auto ba = boost(a), bb = boost(b);
            ASSERT_NEAR(ba.t, f.time_of(a), 1e-9 * std::max(1.0, std::abs(ba.t)));
            if (rel != CausalRelation::lightlike) {
                ASSERT_EQ(causal_relation(ba, bb), rel);
            }
        }
    }
}

TEST(Foliation, BoostedTimeExample) {
    // numpy oracle: t' of (t=1, x=10) at v = 0.5.
    const Foliation f = Foliation::from_velocity(0.5);
    EXPECT_NEAR(f.time_of({1, 10}), -4.618802153517007, 1e-12);
    EXPECT_NEAR(f.speed(), 0.5, 1e-15);
}

TEST(Foliation, RejectsSuperluminal) {
    EXPECT_THROW(Foliation::from_velocity(1.0), InvalidInput);
    EXPECT_THROW(Foliation::from_velocity(0.8, 0.8), InvalidInput);
    EXPECT_THROW(Foliation(NAN), InvalidInput);
}

TEST(Order, RestFrameTies) {
    const std::vector<SpacetimeEvent> e = {ev(L::vicky, 0, 0), ev(L::alice, 1, 10), ev(L::bob, 1, -10)};
    const auto o = foliation_order(e, Foliation(0));
    ASSERT_EQ(o.size(), 2u);
    EXPECT_EQ(o[0], std::vector<L>{L::vicky});
    EXPECT_EQ(o[1], (std::vector<L>{L::alice, L::bob}));
    EXPECT_FALSE(as_permutation(o).has_value());

    const auto boosted = as_permutation(foliation_order(e, Foliation::from_velocity(0.5)));
    ASSERT_TRUE(boosted.has_value());
    EXPECT_EQ(boosted->front(), L::alice);
}

TEST(Order, TimelikeVickyAlwaysLast) {
    const auto e = geometries::timelike_swap();
    for (const auto& f : rapidity_grid(-5, 5, 0.01, 8)) {
        const auto o = foliation_order(e, f);
        ASSERT_EQ(o.back(), std::vector<L>{L::vicky});
        ASSERT_EQ(selection_verdict(e, f), SelectionVerdict::postselection);
    }
    const auto exact = enumerate_orderings_exact(e);
    EXPECT_EQ(exact.size(), 2u);
    for (const auto& [p, f] : exact) EXPECT_EQ(p.back(), L::vicky);
}

TEST(Order, SingleEvent) {
    const std::vector<SpacetimeEvent> e = {ev(L::alice, 3, 4)};
    const auto g = rapidity_grid();
    const auto found = enumerate_orderings(e, g);
    ASSERT_EQ(found.size(), 1u);
    EXPECT_EQ(found.begin()->first, Permutation{L::alice});
}

TEST(Order, CollinearSpacelikeTripleHasFourOrders) {
    // Three events on a line in one space dimension: the oracle finds 4 of 6.
    const std::vector<SpacetimeEvent> e = {ev(L::vicky, 0, 0), ev(L::alice, 0.1, 10), ev(L::bob, 0.2, -10)};
    const auto grid = velocity_grid_1d();
    const auto found = enumerate_orderings(e, grid);
    EXPECT_EQ(found.size(), 4u);
    const std::map<Permutation, double> witnesses = {{{L::bob, L::vicky, L::alice}, -0.9},
                                                     {{L::vicky, L::bob, L::alice}, -0.01},
                                                     {{L::vicky, L::alice, L::bob}, 0.0},
                                                     {{L::alice, L::vicky, L::bob}, 0.02}};
    for (const auto& [p, v] : witnesses) {
        ASSERT_TRUE(found.count(p)) << "missing order";
        EXPECT_NEAR(found.at(p).vx(), v, 1e-12);
    }
    EXPECT_EQ(enumerate_orderings_exact(e).size(), 4u);
}

TEST(Order, PairwiseSpacelikeGeometryHasAllSix) {
    const auto e = geometries::pairwise_spacelike();
    for (std::size_t i = 0; i < e.size(); ++i)
        for (std::size_t j = i + 1; j < e.size(); ++j)
            ASSERT_EQ(causal_relation(e[i], e[j]), CausalRelation::spacelike);
    const auto exact = enumerate_orderings_exact(e);
    EXPECT_EQ(exact.size(), 6u);
    for (const auto& [p, f] : exact) EXPECT_EQ(as_permutation(foliation_order(e, f)), p);
    const auto g = rapidity_grid(-5, 5, 0.01, 36);
    EXPECT_EQ(enumerate_orderings(e, g).size(), 6u);
}

TEST(Order, SixOrdersIffCommonSpacelikeSimultaneityPlane) {
    // The three pairwise swap lines v.(r_i - r_j) = t_i - t_j are concurrent at
    // the velocity making all three simultaneous; all six orders exist iff
    // that velocity is subluminal.
    RngStream rng(62);
    int six = 0, fewer = 0;
    for (int n = 0; n < 2000; ++n) {
        std::vector<SpacetimeEvent> e;
        for (L l : {L::alice, L::bob, L::vicky})
            e.push_back(ev(l, 8 * rng.uniform(), 20 * rng.uniform() - 10, 20 * rng.uniform() - 10));
        bool spacelike = true;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = i + 1; j < 3; ++j)
                spacelike = spacelike && causal_relation(e[i], e[j]) == CausalRelation::spacelike;
        if (!spacelike) continue;
        const double a1 = e[1].x - e[0].x, b1 = e[1].y - e[0].y, c1 = e[1].t - e[0].t;
        const double a2 = e[2].x - e[0].x, b2 = e[2].y - e[0].y, c2 = e[2].t - e[0].t;
        const double det = a1 * b2 - a2 * b1;
        if (std::abs(det) < 1e-3) continue;
        const double speed = std::hypot((c1 * b2 - c2 * b1) / det, (a1 * c2 - a2 * c1) / det);
        if (std::abs(speed - 1.0) < 1e-3) continue;
        const auto found = enumerate_orderings_exact(e).size();
        if (speed < 1.0) {
            ASSERT_EQ(found, 6u);
            ++six;
        } else {
            ASSERT_EQ(found, 4u);
            ++fewer;
        }
    }
    EXPECT_GE(six, 20);
    EXPECT_GE(fewer, 20);
}

TEST(Order, TimelikePairsNeverReverse) {
    RngStream rng(63);
    for (int n = 0; n < 200; ++n) {
        const SpacetimePoint a{0, 0, 0};
        const double r = 5 * rng.uniform(), th = 2 * kPi * rng.uniform();
        const SpacetimePoint b{r + 0.1 + rng.uniform(), r * std::cos(th), r * std::sin(th)};
        ASSERT_FALSE(reversing_foliation(a, b).has_value());
        for (const auto& f : rapidity_grid(-4, 4, 0.5, 6)) ASSERT_LT(f.time_of(a), f.time_of(b));
    }
}

TEST(Order, SpacelikePairsHaveReversingFoliation) {
    RngStream rng(64);
    for (int n = 0; n < 1000; ++n) {
        const SpacetimePoint a{rng.uniform(), 10 * rng.uniform() - 5, 10 * rng.uniform() - 5};
        const double r = 1 + 5 * rng.uniform(), th = 2 * kPi * rng.uniform();
        const SpacetimePoint b{a.t + (2 * rng.uniform() - 1) * 0.95 * r, a.x + r * std::cos(th), a.y + r * std::sin(th)};
        const auto f = reversing_foliation(a, b);
        ASSERT_TRUE(f.has_value());
        const double rest = b.t - a.t;
        const double boosted = f->time_of(b) - f->time_of(a);
        if (rest != 0.0) {
            ASSERT_LT(rest * boosted, 0.0);
        }
    }
}

TEST(Verdict, RestFrameVickyFirstThenBoostedVickyLast) {
    const auto e = geometries::pairwise_spacelike();
    EXPECT_EQ(selection_verdict(e, Foliation(0)), SelectionVerdict::preselection);
    // Boost towards -y pushes Vicky (at y = 6) later.
    EXPECT_EQ(selection_verdict(e, Foliation::from_velocity(0.0, -0.5)), SelectionVerdict::postselection);
    EXPECT_EQ(achievable_verdicts(e).size(), 3u);
}

TEST(Verdict, ExtendedMeasurementsBlockPostselection) {
    const auto e = geometries::extended_epr();
    const auto& v = e[0];
    for (const auto& w : {e[1], e[2]}) {
        EXPECT_EQ(causal_relation(v.start(), w.start()), CausalRelation::spacelike);
        EXPECT_EQ(causal_relation(v.start(), w.end()), CausalRelation::timelike_future);
    }
    const auto verdicts = achievable_verdicts(e);
    EXPECT_FALSE(verdicts.count(SelectionVerdict::postselection));
    EXPECT_TRUE(verdicts.count(SelectionVerdict::preselection));
    for (const auto& f : rapidity_grid(-5, 5, 0.01, 12)) ASSERT_NE(selection_verdict(e, f), SelectionVerdict::postselection);
}

TEST(Verdict, MissingLabelRejected) {
    const std::vector<SpacetimeEvent> e = {ev(L::alice, 0, 0), ev(L::vicky, 1, 0)};
    EXPECT_THROW(selection_verdict(e, Foliation(0)), InvalidInput);
}

TEST(Event, Validation) {
    SpacetimeEvent e = ev(L::alice, 2, 0);
    e.t_end = 1.0;
    EXPECT_THROW(e.validate(), InvalidInput);
    EXPECT_THROW(ev(L::bob, NAN, 0).validate(), InvalidInput);
    EXPECT_EQ(parse_event_label("Vicky"), L::vicky);
    EXPECT_FALSE(parse_event_label("Eve").has_value());
}

TEST(Relativity, VerdictChangesButTaggedStatisticsDoNot) {
    const auto e = geometries::pairwise_spacelike();
    ScenarioConfig c;
    c.scenario = Scenario::swap;
    const auto reference = exact_swap(c);
    std::set<SelectionVerdict> seen;
    for (const auto& [perm, f] : enumerate_orderings_exact(e)) {
        MeasurementOrder order{};
        for (std::size_t k = 0; k < 3; ++k)
            order[k] = perm[k] == L::alice ? Party::alice : perm[k] == L::bob ? Party::bob : Party::vicky;
        c.order = order;
        seen.insert(selection_verdict(e, f));
        const auto ex = exact_swap(c);
        for (auto k : kBellOutcomes)
            for (int i = 1; i <= 2; ++i)
                for (int j = 1; j <= 2; ++j) ASSERT_NEAR(ex.table(k).e(i, j), reference.table(k).e(i, j), 1e-12);
    }
    EXPECT_EQ(seen.size(), 3u);
}
