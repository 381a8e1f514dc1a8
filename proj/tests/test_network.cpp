#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "contagion/network.hpp"
#include "test_networks.hpp"

#include <random>

using namespace contagion;

namespace {

bool mentions(const std::vector<std::string>& messages, const std::string& needle) {
    for (const std::string& m : messages) {
        if (m.find(needle) != std::string::npos) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("sign decomposition identities") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> coef(-5.0, 5.0);
    for (int trial = 0; trial < 50; ++trial) {
        Vector v(6);
        for (int i = 0; i < 6; ++i) v[i] = coef(rng);
        const Vector pos = positive_part(v);
        const Vector neg = negative_part(v);
        CHECK(sup_norm(pos - neg - v) == 0.0);
        CHECK(pos.minCoeff() >= 0.0);
        CHECK(neg.minCoeff() >= 0.0);
        for (int i = 0; i < 6; ++i) CHECK(pos[i] * neg[i] == 0.0);
    }
}

TEST_CASE("relative liabilities of an all-zero matrix use the uniform convention") {
    const RelativeLiabilities rl = total_and_relative_liabilities(Matrix::Zero(3, 3));
    CHECK(rl.pbar.isZero());
    for (int i = 0; i < 3; ++i) {
        CHECK(rl.pi(i, i) == 0.0);
        for (int j = 0; j < 3; ++j) {
            if (i != j) CHECK(rl.pi(i, j) == doctest::Approx(0.5));
        }
    }
}

TEST_CASE("relative liabilities of the CDS example at zero wealths") {
    const FinancialNetwork net = testnets::nonunique_cds_network();
    const LiabilitySpec spec = make_liability_spec(net);
    const Matrix L = evaluate_liabilities(spec, Vector::Zero(3));
    const RelativeLiabilities rl = total_and_relative_liabilities(L);
    Vector expected(3);
    expected << 0.0, 1.0, 1.0;
    CHECK(sup_norm(rl.pbar - expected) == 0.0);
    CHECK(rl.pi(1, 0) == 0.0);
    CHECK(rl.pi(1, 1) == 0.0);
    CHECK(rl.pi(1, 2) == 1.0);
    CHECK(rl.pi(2, 1) == 1.0);
    CHECK(rl.pi(2, 2) == 0.0);
}

TEST_CASE("every row of pi sums to one for random matrices") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> amount(0.0, 4.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        Matrix L = Matrix::Zero(5, 5);
        for (int i = 0; i < 5; ++i) {
            for (int j = 0; j < 5; ++j) {
                if (i != j && unit(rng) < 0.6) L(i, j) = amount(rng);
            }
        }
        const RelativeLiabilities rl = total_and_relative_liabilities(L);
        for (int i = 0; i < 5; ++i) CHECK(rl.pi.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("relative liabilities reject bad input") {
    Matrix L = Matrix::Zero(2, 2);
    L(0, 1) = -1.0;
    CHECK_THROWS_AS(total_and_relative_liabilities(L), InvalidInputError);
    L(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(total_and_relative_liabilities(L), InvalidInputError);
}

TEST_CASE("payments from wealth") {
    SUBCASE("fully insolvent chain pays nothing") {
        Vector pbar(3), v(3);
        pbar << 2.0, 1.5, 0.0;
        v << -2.0, -1.5, 1.0;
        CHECK(payments_from_wealth(pbar, v).isZero());
    }
    SUBCASE("solvent firms pay in full") {
        Vector pbar(3), v(3);
        pbar << 2.0, 1.5, 0.0;
        v << 0.1, 3.0, 0.0;
        CHECK(sup_norm(payments_from_wealth(pbar, v) - pbar) == 0.0);
    }
    SUBCASE("payments truncate at zero") {
        Vector pbar(2), v(2);
        pbar << 1.0, 1.0;
        v << -0.25, -2.0;
        Vector expected(2);
        expected << 0.75, 0.0;
        CHECK(sup_norm(payments_from_wealth(pbar, v) - expected) == 0.0);
    }
}

TEST_CASE("Eisenberg-Noe clearing without obligations returns the endowments") {
    FinancialNetwork net;
    net.node_count = 2;
    net.external_assets = Vector::Ones(2);
    net.base_liabilities = Matrix::Zero(2, 2);
    const ClearingResult result = clear_eisenberg_noe(net);
    CHECK(result.converged);
    CHECK(sup_norm(result.wealths - Vector::Ones(2)) == 0.0);
    CHECK(result.payments.isZero());
}

TEST_CASE("Eisenberg-Noe clearing of the insolvent chain") {
    FinancialNetwork net;
    net.node_count = 3;
    net.external_assets = Vector::Zero(3);
    net.external_assets[2] = 1.0;
    net.base_liabilities = Matrix::Zero(3, 3);
    net.base_liabilities(0, 1) = 2.0;
    net.base_liabilities(1, 2) = 1.5;
    const ClearingResult result = clear_eisenberg_noe(net);
    Vector expected(3);
    expected << -2.0, -1.5, 1.0;
    CHECK(result.converged);
    CHECK(sup_norm(result.wealths - expected) <= 1e-8);
    CHECK(result.defaults == std::vector<int>{0, 1});
}

TEST_CASE("Eisenberg-Noe matches the direct payment iteration on regular networks") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 25; ++trial) {
        const FinancialNetwork net = testnets::random_regular_network(rng, 4);
        const ClearingResult result = clear_eisenberg_noe(net);
        CHECK(result.converged);
        CHECK(result.uniqueness_guaranteed);
        const Vector oracle =
            testnets::payment_picard_oracle(net.external_assets, net.base_liabilities, 1e-12);
        CHECK(sup_norm(result.payments - oracle) <= 1e-10);
    }
}

TEST_CASE("payment and wealth formulations agree at the clearing point") {
    std::mt19937_64 rng(123);
    for (int trial = 0; trial < 25; ++trial) {
        const FinancialNetwork net = testnets::random_regular_network(rng, 5);
        const ClearingResult result = clear_eisenberg_noe(net);
        const RelativeLiabilities rl = total_and_relative_liabilities(net.base_liabilities);
        // V = x + Pi^T p - pbar and p = [pbar - V^-]^+, exactly as stored.
        const Vector wealth_identity =
            net.external_assets + rl.pi.transpose() * result.payments - rl.pbar;
        CHECK(sup_norm(wealth_identity - result.wealths) <= 1e-10);
        CHECK(sup_norm(payments_from_wealth(rl.pbar, result.wealths) - result.payments) == 0.0);
        CHECK(result.payments.minCoeff() >= 0.0);
        CHECK((rl.pbar - result.payments).minCoeff() >= -1e-12);
    }
}

TEST_CASE("positive equity is conserved at constant-L fixed points with society") {
    std::mt19937_64 rng(321);
    for (int trial = 0; trial < 25; ++trial) {
        const FinancialNetwork net = testnets::random_regular_network(rng, 6);
        const ClearingResult result = clear_eisenberg_noe(net);
        CHECK(positive_part(result.wealths).sum() ==
              doctest::Approx(net.external_assets.sum()).epsilon(1e-10));
    }
}

TEST_CASE("network validation") {
    SUBCASE("the CDS example is valid") {
        CHECK(validate_network(testnets::nonunique_cds_network()).valid());
    }
    SUBCASE("nonzero diagonal is reported") {
        FinancialNetwork net = testnets::nonunique_cds_network();
        net.base_liabilities(0, 0) = 1.0;
        const ValidationReport report = validate_network(net);
        REQUIRE(report.violations.size() == 1);
        CHECK(mentions(report.violations, "nonzero diagonal at node 0"));
    }
    SUBCASE("negative assets are reported") {
        FinancialNetwork net = testnets::nonunique_cds_network();
        net.external_assets[1] = -1.0;
        const ValidationReport report = validate_network(net);
        REQUIRE(report.violations.size() == 1);
        CHECK(mentions(report.violations, "negative external assets at node 1"));
    }
    SUBCASE("society with liabilities is reported") {
        std::mt19937_64 rng(5);
        FinancialNetwork net = testnets::random_regular_network(rng, 3);
        net.base_liabilities(0, 1) = 1.0;
        CHECK(mentions(validate_network(net).violations, "society with liabilities"));
    }
    SUBCASE("over-insurance only warns") {
        FinancialNetwork net;
        net.node_count = 4;
        net.external_assets = Vector::Ones(4);
        net.base_liabilities = Matrix::Zero(4, 4);
        net.base_liabilities(3, 0) = 1.0;
        for (int writer : {1, 2}) {
            ContingentContract c;
            c.kind = ContractKind::Insurance;
            c.writer = writer;
            c.beneficiary = 0;
            c.reference = 3;
            c.eta = 0.8;
            net.contracts.push_back(c);
        }
        const ValidationReport report = validate_network(net);
        CHECK(report.valid());
        CHECK(mentions(report.warnings, "over-insurance"));
    }
}

TEST_CASE("stability fund construction") {
    FinancialNetwork net;
    net.node_count = 2;
    net.external_assets = Vector(2);
    net.external_assets << 1.0, 2.0;
    net.base_liabilities = Matrix::Zero(2, 2);
    net.base_liabilities(0, 1) = 1.0;

    SUBCASE("pre-collected contributions move assets to the fund") {
        StabilityFundConfig cfg;
        cfg.contributions = Vector(2);
        cfg.contributions << 0.5, 0.5;
        const FinancialNetwork funded = build_stability_fund(net, cfg);
        REQUIRE(funded.node_count == 3);
        Vector expected(3);
        expected << 0.5, 1.5, 1.0;
        CHECK(sup_norm(funded.external_assets - expected) == 0.0);
        CHECK(funded.contracts.size() == 2);
    }
    SUBCASE("in-clearing contributions become base obligations") {
        StabilityFundConfig cfg;
        cfg.contributions = Vector(2);
        cfg.contributions << 0.5, 0.5;
        cfg.mode = FundMode::InClearing;
        const FinancialNetwork funded = build_stability_fund(net, cfg);
        CHECK(sup_norm(funded.external_assets.head(2) - net.external_assets) == 0.0);
        CHECK(funded.base_liabilities(0, 2) == 0.5);
        CHECK(funded.base_liabilities(1, 2) == 0.5);
    }
    SUBCASE("contributions outside [0, x] are rejected") {
        StabilityFundConfig cfg;
        cfg.contributions = Vector(2);
        cfg.contributions << 1.5, 0.0;
        CHECK_THROWS_AS(build_stability_fund(net, cfg), InvalidInputError);
    }
}
