#include <gtest/gtest.h>

#include "ktopical/ktopical.hpp"

using namespace ktopical;

namespace {

const auto dt_cfg = ToleranceConfig::discrete();
const auto ct_cfg = ToleranceConfig::continuous();

DirectedGraph pair_graph() { return DirectedGraph(2, {{0, 1}, {1, 0}}); }

SystemDefinition averaging(double eps = 0.25) {
    return linear_consensus(DirectedGraph::complete(3), {}, TimeDomain::discrete,
                            std::vector<double>(3, eps));
}

void expect_witnesses_reproduce(const SystemDefinition& sys, const VerificationReport& rep,
                                const ToleranceConfig& cfg) {
    for (const auto& c : rep.checks)
        for (const auto& w : c.witnesses) EXPECT_TRUE(recheck(sys, w, cfg)) << c.name << " / " << w.kind;
}

}  // namespace

TEST(Classify, LinearConsensusContinuousIsKTopical) {
    const auto sys = linear_consensus(pair_graph(), {}, TimeDomain::continuous);
    const auto rep = classify(sys, SamplePlan::standard(2), ct_cfg);
    EXPECT_EQ(rep.verdict("k_topical"), Verdict::pass);
    EXPECT_EQ(rep.verdict("metzler"), Verdict::pass);
    EXPECT_EQ(rep.verdict("jacobian_consistent"), Verdict::pass);
}

TEST(Classify, AveragingIsKTopicalAndRowStochastic) {
    const auto sys = averaging();
    const auto rep = classify(sys, SamplePlan::standard(3), dt_cfg);
    EXPECT_EQ(rep.verdict("k_topical"), Verdict::pass);
    EXPECT_EQ(rep.verdict("row_stochastic"), Verdict::pass);
    const Matrix J = jacobian_at(sys, StateVector{0.3, -1, 2}, dt_cfg);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(J.row_sum(i), 1.0, 1e-12);
}

TEST(Classify, SwapFailsTypeKWithZeroDiagonalWitness) {
    const auto sys = swap_map();
    const auto rep = classify(sys, SamplePlan::standard(2), dt_cfg);
    EXPECT_EQ(rep.verdict("plus_homogeneous"), Verdict::pass);
    EXPECT_EQ(rep.verdict("monotone"), Verdict::pass);
    EXPECT_EQ(rep.verdict("type_k"), Verdict::fail);
    const auto* diag = rep.find("diagonal_positive");
    ASSERT_NE(diag, nullptr);
    ASSERT_FALSE(diag->witnesses.empty());
    EXPECT_EQ(diag->witnesses[0].kind, "diagonal_nonpositive");
    EXPECT_DOUBLE_EQ(diag->witnesses[0].value, 0.0);
    expect_witnesses_reproduce(sys, rep, dt_cfg);
}

TEST(Classify, RotationFailsMetzler) {
    const auto sys = rotation_field();
    const auto rep = classify(sys, SamplePlan::standard(2), ct_cfg);
    EXPECT_EQ(rep.verdict("metzler"), Verdict::fail);
    EXPECT_EQ(rep.verdict("k_topical"), Verdict::fail);
    expect_witnesses_reproduce(sys, rep, ct_cfg);
}

TEST(Classify, SquareFailsPlusHomogeneity) {
    const auto sys = square_map(2);
    const auto rep = classify(sys, SamplePlan::standard(2), dt_cfg);
    EXPECT_EQ(rep.verdict("plus_homogeneous"), Verdict::fail);
    const auto* ph = rep.find("plus_homogeneous");
    ASSERT_NE(ph, nullptr);
    ASSERT_FALSE(ph->witnesses.empty());
    expect_witnesses_reproduce(sys, rep, dt_cfg);
}

TEST(Classify, ShiftIsPlusHomogeneousAndKTopical) {
    const auto rep = classify(shift_map(3, 2.0), SamplePlan::standard(3), dt_cfg);
    EXPECT_EQ(rep.verdict("k_topical"), Verdict::pass);
}

TEST(Classify, IsDeterministicForFixedSeed) {
    const auto sys = square_map(2);
    const auto a = classify(sys, SamplePlan::standard(2), dt_cfg);
    const auto b = classify(sys, SamplePlan::standard(2), dt_cfg);
    ASSERT_EQ(a.checks.size(), b.checks.size());
    for (std::size_t k = 0; k < a.checks.size(); ++k) {
        EXPECT_EQ(a.checks[k].violations, b.checks[k].violations);
        ASSERT_EQ(a.checks[k].witnesses.size(), b.checks[k].witnesses.size());
        for (std::size_t w = 0; w < a.checks[k].witnesses.size(); ++w)
            EXPECT_EQ(a.checks[k].witnesses[w].points, b.checks[k].witnesses[w].points);
    }
}

TEST(Metzler, RejectsDiscreteSystems) {
    EXPECT_THROW(check_metzler_ct(swap_map(), SamplePlan::standard(2), dt_cfg), InvalidModel);
}

TEST(Metzler, AgreesWithKamkeOnLinearFields) {
    const Matrix good{{-2, 1, 0.5}, {0, -1, 1}, {3, 0, -3}};
    const Matrix bad{{-2, 1, -0.5}, {0, -1, 1}, {3, 0, -3}};
    for (const auto& m : {good, bad}) {
        const auto sys = linear_field(m);
        const auto plan = SamplePlan::standard(3);
        EXPECT_EQ(check_metzler_ct(sys, plan, ct_cfg).overall(),
                  check_kamke_direct(sys, plan, ct_cfg).overall());
    }
    EXPECT_EQ(check_metzler_ct(linear_field(bad), SamplePlan::standard(3), ct_cfg).overall(),
              Verdict::fail);
}

TEST(Kamke, WitnessReproduces) {
    const auto sys = rotation_field();
    const auto rep = check_kamke_direct(sys, SamplePlan::standard(2), ct_cfg);
    ASSERT_EQ(rep.overall(), Verdict::fail);
    for (const auto& w : rep.checks[0].witnesses) {
        EXPECT_TRUE(partial_leq(w.points[0], w.points[1]));
        EXPECT_TRUE(recheck(sys, w, ct_cfg));
    }
}

TEST(NonnegPosdiag, DiagonalFractionAllowsMeasureZeroSet) {
    // Diagonal vanishes only on the hyperplane x_1 = 0: still passes.
    auto sys = detail::make_system(
        TimeDomain::discrete, 2, "kink",
        [](std::span<const double> x) {
            return StateVector{0.5 * x[0] + 0.5 * x[1] + 0.1 * x[0] * x[0] * x[0], x[1]};
        });
    const auto rep = check_nonneg_posdiag_dt(sys, SamplePlan::standard(2), dt_cfg);
    EXPECT_EQ(rep.verdict("jacobian_nonnegative"), Verdict::pass);
    EXPECT_EQ(rep.verdict("diagonal_positive"), Verdict::pass);
}

TEST(NonnegPosdiag, ProbePointMustHavePositiveDiagonal) {
    auto sys = linear_map(Matrix{{0.5, 0.5}, {0.5, 0.5}});
    sys.diagonal_probes = {StateVector{0, 0}};
    EXPECT_EQ(check_nonneg_posdiag_dt(sys, SamplePlan::standard(2), dt_cfg).overall(), Verdict::pass);
    auto bad = linear_map(Matrix{{0.0, 1.0}, {0.5, 0.5}});
    bad.diagonal_probes = {StateVector{0, 0}};
    EXPECT_EQ(check_nonneg_posdiag_dt(bad, SamplePlan::standard(2), dt_cfg).verdict("diagonal_positive"),
              Verdict::fail);
}

TEST(NonnegPosdiag, NegativeEntryFails) {
    const auto sys = linear_map(Matrix{{1.2, -0.2}, {0.5, 0.5}});
    const auto rep = check_nonneg_posdiag_dt(sys, SamplePlan::standard(2), dt_cfg);
    EXPECT_EQ(rep.verdict("jacobian_nonnegative"), Verdict::fail);
    expect_witnesses_reproduce(sys, rep, dt_cfg);
}

TEST(KamkeLike, MaxPlusIsOrderPreservingButNotStrict) {
    const auto a = MaxPlusMatrix::from_rows({{0, -1}, {-1, 0}});
    const auto sys = max_plus(a);
    const auto rep = check_kamke_like_dt(sys, SamplePlan::standard(2), dt_cfg);
    EXPECT_EQ(rep.verdict("order_preserving"), Verdict::pass);
    EXPECT_EQ(rep.verdict("strict_order"), Verdict::fail);
    expect_witnesses_reproduce(sys, rep, dt_cfg);
    // Explicit instance: (0,5) and (1,5) have the same image.
    EXPECT_EQ(evaluate(sys, StateVector{0, 5}), evaluate(sys, StateVector{1, 5}));
}

TEST(KamkeLike, DiagonalMaxPlusIsStrict) {
    const auto a = MaxPlusMatrix::from_rows({{0, -INFINITY}, {-INFINITY, 0}});
    const auto rep = check_kamke_like_dt(max_plus(a), SamplePlan::standard(2), dt_cfg);
    EXPECT_EQ(rep.overall(), Verdict::pass);
}

TEST(PlusHomogeneity, ContinuousAndDiscreteForms) {
    const auto plan = SamplePlan::standard(2);
    EXPECT_EQ(check_plus_homogeneity(linear_field(Matrix{{-1, 1}, {2, -2}}), plan, ct_cfg).overall(),
              Verdict::pass);
    // f(x+a1) = f(x) + a1 for a DT map but not f(x+a1) = f(x).
    EXPECT_EQ(check_plus_homogeneity(identity_map(2), plan, dt_cfg).overall(), Verdict::pass);
    auto id_as_field = linear_field(Matrix::identity(2));
    EXPECT_EQ(check_plus_homogeneity(id_as_field, plan, ct_cfg).overall(), Verdict::fail);
}

TEST(PlusHomogeneity, ClampsTranslationInsideBoundedDomain) {
    const auto sys = kuramoto(DirectedGraph::cycle(3), sine_coupling(), DomainBox::cube(3, -0.5, 0.5), 1.0);
    SamplePlan plan = SamplePlan::standard(3);
    plan.box = DomainBox::cube(3, -0.5, 0.5);
    const auto rep = check_plus_homogeneity(sys, plan, ct_cfg);
    EXPECT_EQ(rep.overall(), Verdict::pass);
}

TEST(RowStochastic, DetectsNonUnitRowSums) {
    const auto sys = linear_map(Matrix{{0.5, 0.4}, {0.5, 0.5}});
    const auto rep = check_row_stochastic(sys, SamplePlan::standard(2), dt_cfg);
    EXPECT_EQ(rep.overall(), Verdict::fail);
    expect_witnesses_reproduce(sys, rep, dt_cfg);
}

TEST(JacobianConsistency, DetectsWrongAnalyticJacobian) {
    auto sys = linear_map(Matrix{{0.5, 0.5}, {0.5, 0.5}});
    sys.jacobian = [](std::span<const double>) { return Matrix{{0.5, 0.5}, {0.5, 0.4}}; };
    const auto rep = check_jacobian_consistency(sys, SamplePlan::standard(2), dt_cfg);
    EXPECT_EQ(rep.overall(), Verdict::fail);
    expect_witnesses_reproduce(sys, rep, dt_cfg);
}

TEST(NumericJacobian, MatchesAnalytic) {
    const auto a = MaxPlusMatrix::from_rows({{0, -1, 2}, {1, 0, -INFINITY}, {0.5, 0.5, 0}});
    const auto sys = smooth_max_plus(a, 3.0);
    const StateVector x{0.2, -0.4, 1.1};
    const Matrix ja = sys.jacobian(x);
    const Matrix jn = numeric_jacobian(sys, x, 1e-6);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(ja(i, j), jn(i, j), 1e-7);
}

TEST(NumericJacobian, ProbeOutsideDomainThrows) {
    const auto sys = kuramoto(DirectedGraph::cycle(3), sine_coupling(), DomainBox::cube(3, -0.5, 0.5), 1.0);
    EXPECT_THROW(numeric_jacobian(sys, StateVector{0.5, 0, 0}, 1e-6), InvalidModel);
}

TEST(FlowProperties, KTopicalModelsPass) {
    const auto sys = linear_consensus(pair_graph(), {}, TimeDomain::continuous);
    SamplePlan plan = SamplePlan::standard(2);
    plan.n_pairs = 30;
    const auto rep = test_flow_properties(sys, plan, 3.0, ct_cfg);
    for (const auto& c : rep.checks) EXPECT_EQ(c.verdict, Verdict::pass) << c.name;
}

TEST(FlowProperties, SwapBreaksStrictOrderAlongFlow) {
    const auto sys = swap_map();
    SamplePlan plan = SamplePlan::standard(2);
    plan.n_pairs = 30;
    const auto rep = test_flow_properties(sys, plan, 4, dt_cfg);
    EXPECT_EQ(rep.verdict("flow_type_k"), Verdict::fail);
    EXPECT_EQ(rep.verdict("flow_monotone"), Verdict::pass);
    EXPECT_EQ(rep.verdict("flow_nonexpansive"), Verdict::pass);
    expect_witnesses_reproduce(sys, rep, dt_cfg);
}

TEST(FlowProperties, ExpandingMapFailsNonexpansiveness) {
    const auto sys = scaling_map(2, 1.5);
    SamplePlan plan = SamplePlan::standard(2);
    plan.n_pairs = 20;
    const auto rep = test_flow_properties(sys, plan, 3, dt_cfg);
    EXPECT_EQ(rep.verdict("flow_nonexpansive"), Verdict::fail);
    EXPECT_EQ(rep.verdict("flow_plus_homogeneous"), Verdict::fail);
    expect_witnesses_reproduce(sys, rep, dt_cfg);
}

TEST(Recheck, UnknownKindThrows) {
    Witness w;
    w.kind = "nonsense";
    EXPECT_THROW(recheck(swap_map(), w, dt_cfg), InvalidModel);
}

TEST(SamplePair, ProducesOrderedPairsWithTiesAndGaps) {
    detail::Sampler s(123);
    const auto box = DomainBox::cube(4, -2, 2);
    for (int k = 0; k < 300; ++k) {
        const auto [a, b] = detail::sample_pair(s, box);
        EXPECT_TRUE(partial_leq(a, b));
        EXPECT_TRUE(box.contains(a) && box.contains(b));
        int ties = 0, gaps = 0;
        for (int i = 0; i < 4; ++i) (a[i] == b[i] ? ties : gaps)++;
        EXPECT_GE(ties, 1);
        EXPECT_GE(gaps, 1);
    }
}

TEST(SamplePlan, ValidatesInputs) {
    SamplePlan p = SamplePlan::standard(2);
    EXPECT_NO_THROW(p.validate());
    p.n_points = 0;
    EXPECT_THROW(p.validate(), InvalidModel);
    SamplePlan q;
    q.box = DomainBox::whole_space(2);
    EXPECT_THROW(q.validate(), InvalidModel);
}

TEST(Sampler, SubSeedsAreIndependentPerCheck) {
    EXPECT_NE(detail::sub_seed(42, "metzler"), detail::sub_seed(42, "kamke"));
    EXPECT_EQ(detail::sub_seed(42, "metzler"), detail::sub_seed(42, "metzler"));
    detail::Sampler a(5), b(5);
    for (int k = 0; k < 10; ++k) EXPECT_EQ(a.unit(), b.unit());
}

TEST(NumericJacobian, ReferenceValues) {
    EXPECT_EQ(numeric_jacobian(identity_map(2), StateVector{0.3, 7}, 1e-6).rows(), 2u);
    const Matrix id = numeric_jacobian(identity_map(2), StateVector{0.3, 7}, 1e-6);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(id(i, j), i == j ? 1.0 : 0.0, 1e-9);
    const auto f = detail::make_system(TimeDomain::discrete, 2, "quad", [](std::span<const double> x) {
        return StateVector{x[1] * x[1], x[0]};
    });
    const Matrix J = numeric_jacobian(f, StateVector{1, 2}, 1e-6);
    EXPECT_NEAR(J(0, 0), 0, 1e-6);
    EXPECT_NEAR(J(0, 1), 4, 1e-6);
    EXPECT_NEAR(J(1, 0), 1, 1e-6);
    EXPECT_NEAR(J(1, 1), 0, 1e-6);
}

TEST(Metzler, RotationWitnessValue) {
    const auto rep = check_metzler_ct(rotation_field(), SamplePlan::standard(2), ct_cfg);
    ASSERT_FALSE(rep.checks[0].witnesses.empty());
    const auto& w = rep.checks[0].witnesses[0];
    EXPECT_EQ(*w.row, 0u);
    EXPECT_EQ(*w.col, 1u);
    EXPECT_DOUBLE_EQ(w.value, -1.0);
}

TEST(Metzler, KuramotoSignDependsOnBox) {
    const auto sys = kuramoto_field(DirectedGraph::complete(2), sine_coupling());
    SamplePlan plan = SamplePlan::standard(2);
    plan.box = DomainBox::cube(2, -std::numbers::pi / 4, std::numbers::pi / 4);
    EXPECT_EQ(check_metzler_ct(sys, plan, ct_cfg).overall(), Verdict::pass);
}

TEST(Kamke, ReferencePairsAndScalarSystems) {
    EXPECT_EQ(evaluate(linear_field(Matrix{{-1, 1}, {1, -1}}), StateVector{0, 1})[0], 1.0);
    EXPECT_EQ(evaluate(rotation_field(), StateVector{0, 1})[0], -1.0);
    const auto scalar = detail::make_system(TimeDomain::continuous, 1, "cubic", [](std::span<const double> x) {
        return StateVector{-x[0] * x[0] * x[0] + std::sin(5 * x[0])};
    });
    EXPECT_EQ(check_kamke_direct(scalar, SamplePlan::standard(1), ct_cfg).overall(), Verdict::pass);
}

TEST(RowStochastic, HalvingMapFails) {
    EXPECT_EQ(check_row_stochastic(scaling_map(2, 0.5), SamplePlan::standard(2), dt_cfg).overall(),
              Verdict::fail);
    EXPECT_EQ(check_row_stochastic(averaging(), SamplePlan::standard(3), dt_cfg).overall(), Verdict::pass);
}

TEST(FlowProperties, SquareMapMonotoneOnPositiveBoxButNotPlusHomogeneous) {
    SamplePlan plan = SamplePlan::standard(2);
    plan.box = DomainBox::cube(2, 0.1, 1.0);
    plan.n_pairs = 30;
    const auto rep = test_flow_properties(square_map(2), plan, 3, dt_cfg);
    EXPECT_EQ(rep.verdict("flow_monotone"), Verdict::pass);
    EXPECT_EQ(rep.verdict("flow_plus_homogeneous"), Verdict::fail);
}

TEST(FlowProperties, SwapExplicitWitness) {
    Witness w;
    w.kind = "flow_strict";
    w.points = {{0, 0}, {0, 1}};
    w.row = 1;
    w.time = 1;
    EXPECT_TRUE(recheck(swap_map(), w, dt_cfg));
}
