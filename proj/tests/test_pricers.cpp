#include <doctest.h>

#include <cmath>
#include <random>

#include "crcva/errors.hpp"
#include "crcva/pricers.hpp"
#include "test_support.hpp"

using namespace crcva;

namespace {

const OilModel& case_oil() {
    static const OilModel m = calibrate_oil_model(OilParams{}, test::case_study().market.forwards);
    return m;
}

const ZeroCurve& curve() {
    static const ZeroCurve c = test::table_curve();
    return c;
}

}  // namespace

TEST_SUITE("pricers") {

TEST_CASE("sides") {
    CHECK(parse_side("payer") == Side::Payer);
    CHECK(parse_side("Receiver") == Side::Receiver);
    CHECK(to_string(Side::Receiver) == "receiver");
    CHECK_THROWS_AS(parse_side("buyer"), ConfigError);
}

TEST_CASE("forward contract value") {
    const OilModel& m = case_oil();
    const OilState s0 = m.initial_state();
    const double F = forward_price(m, s0, 2.0);
    CHECK(forward_value({2.0, F, Side::Payer, 1.0}, m, s0, curve()) == doctest::Approx(0.0));
    CHECK(forward_value({2.0, 0.0, Side::Payer, 1.0}, m, s0, curve()) ==
          doctest::Approx(curve().discount_factor(2.0) * F));
    CHECK(forward_value({2.0, 100.0, Side::Receiver, 3.0}, m, s0, curve()) ==
          doctest::Approx(-3.0 * curve().discount_factor(2.0) * (F - 100.0)));
    CHECK_THROWS_AS(forward_value({2.0, 100.0, Side::Payer, 1.0}, m, OilState{0, 0, 2.5}, curve()),
                    DomainError);
}

TEST_CASE("forward value agrees with the discounted simulated payoff") {
    const OilModel& m = case_oil();
    const OilState s0 = m.initial_state();
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal;
    std::vector<double> payoff;
    for (int i = 0; i < 400'000; ++i) {
        const OilState s = evolve_oil_state(m.params, s0, 5.0, normal(rng), normal(rng));
        payoff.push_back(curve().discount_factor(5.0) * (std::exp(s.x + s.L + m.shift(5.0)) - 126.0));
    }
    const auto mc = test::moments(payoff);
    CHECK(test::within_se(forward_value({5.0, 126.0, Side::Payer, 1.0}, m, s0, curve()), mc.mean, mc.se));
}

TEST_CASE("option on a forward") {
    const OilModel& m = case_oil();
    const OilState s0 = m.initial_state();
    const double D5 = curve().discount_factor(5.0);
    const double F5 = forward_price(m, s0, 5.0);

    SUBCASE("closed form value") {
        CHECK(option_on_forward(m, s0, 5.0, 2.5, 126.0, curve()) ==
              doctest::Approx(10.779970341791774).epsilon(1e-10));
        CHECK(option_on_forward(m, s0, 5.0, 2.5, 126.0, curve(), Side::Receiver) ==
              doctest::Approx(13.469960317311893).epsilon(1e-10));
    }
    SUBCASE("zero strike is the discounted forward") {
        CHECK(option_on_forward(m, s0, 5.0, 2.5, 1e-12, curve()) == doctest::Approx(D5 * F5).epsilon(1e-12));
    }
    SUBCASE("immediate exercise is intrinsic") {
        CHECK(option_on_forward(m, s0, 5.0, 0.0, 100.0, curve()) == doctest::Approx(D5 * (F5 - 100.0)));
        CHECK(option_on_forward(m, s0, 5.0, 0.0, 100.0, curve(), Side::Receiver) == 0.0);
        OilModel flat = m;
        flat.params.sigma_x = 0.0;
        flat.params.sigma_L = 0.0;
        flat.shift = calibrate_shift(flat.params, test::case_study().market.forwards, flat.x0, flat.L0);
        CHECK(option_on_forward(flat, s0, 5.0, 2.0, 150.0, curve(), Side::Receiver) ==
              doctest::Approx(D5 * (150.0 - F5)));
    }
    SUBCASE("payer minus receiver is the forward value") {
        for (double K : {60.0, 110.0, 126.0, 140.0, 250.0}) {
            const double diff = option_on_forward(m, s0, 5.0, 2.5, K, curve()) -
                                option_on_forward(m, s0, 5.0, 2.5, K, curve(), Side::Receiver);
            CHECK(std::abs(diff - D5 * (F5 - K)) < 1e-9);
        }
    }
    SUBCASE("nonincreasing and convex in the strike") {
        std::vector<double> v;
        for (int i = 0; i <= 60; ++i) v.push_back(option_on_forward(m, s0, 5.0, 2.5, 80.0 + i, curve()));
        for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i] <= v[i - 1]);
        for (std::size_t i = 1; i + 1 < v.size(); ++i) CHECK(v[i - 1] - 2.0 * v[i] + v[i + 1] >= -1e-10);
    }
    SUBCASE("agrees with simulation to the exercise date") {
        std::mt19937_64 rng(21);
        std::normal_distribution<double> normal;
        std::vector<double> payoff;
        for (int i = 0; i < 400'000; ++i) {
            const OilState s = evolve_oil_state(m.params, s0, 2.5, normal(rng), normal(rng));
            const ForwardContract c{5.0, 126.0, Side::Payer, 1.0};
            payoff.push_back(curve().discount_factor(2.5) *
                             std::max(forward_value(c, m, s, curve()), 0.0));
        }
        const auto mc = test::moments(payoff);
        CHECK(test::within_se(option_on_forward(m, s0, 5.0, 2.5, 126.0, curve()), mc.mean, mc.se));
    }
}

TEST_CASE("commodity swap value, fair strike and fixed leg") {
    const OilModel& m = case_oil();
    const OilState s0 = m.initial_state();
    const CommoditySwap swap = CommoditySwap::regular(5.0, 12, 126.0, Side::Payer);
    REQUIRE(swap.payment_times.size() == 60);

    SUBCASE("single payment equals the forward") {
        const CommoditySwap one = CommoditySwap::regular(1.0, 1, 120.0, Side::Receiver, 2.0);
        CHECK(swap_value(one, m, s0, curve()) ==
              doctest::Approx(forward_value({1.0, 120.0, Side::Receiver, 2.0}, m, s0, curve())));
    }
    SUBCASE("swap is the sum of its forwards") {
        double sum = 0.0;
        for (double t : swap.payment_times) sum += forward_value({t, 126.0, Side::Payer, 1.0}, m, s0, curve());
        CHECK(swap_value(swap, m, s0, curve()) == doctest::Approx(sum).epsilon(1e-14));
    }
    SUBCASE("case-study swap is at par at 126") {
        CHECK(std::abs(swap_value(swap, m, s0, curve())) < 0.01);
        CHECK(fair_strike(swap, m, s0, curve()) == doctest::Approx(126.0).epsilon(1e-6));
        CommoditySwap at_fair = swap;
        at_fair.strike = fair_strike(swap, m, s0, curve());
        CHECK(std::abs(swap_value(at_fair, m, s0, curve())) <= 1e-9 * fixed_leg_value(at_fair, curve()));
    }
    SUBCASE("flat forward curve") {
        ForwardCurveQuotes flat;
        for (int i = 1; i <= 60; ++i) flat.nodes.push_back({i / 12.0, 90.0});
        const OilModel fm = calibrate_oil_model(OilParams{}, flat);
        CHECK(fair_strike(swap, fm, fm.initial_state(), curve()) == doctest::Approx(90.0).epsilon(1e-12));
    }
    SUBCASE("two periods by hand") {
        CommoditySwap two;
        two.payment_times = {1.0, 2.0};
        two.notionals = {1.0, 3.0};
        two.strike = 100.0;
        const double w1 = curve().discount_factor(1.0);
        const double w2 = 3.0 * curve().discount_factor(2.0);
        const double expected =
            (w1 * forward_price(m, s0, 1.0) + w2 * forward_price(m, s0, 2.0)) / (w1 + w2);
        CHECK(fair_strike(two, m, s0, curve()) == doctest::Approx(expected).epsilon(1e-14));
    }
    SUBCASE("fixed leg") {
        CommoditySwap zero = swap;
        zero.strike = 0.0;
        CHECK(fixed_leg_value(zero, curve()) == 0.0);
        CHECK(swap_annuity(swap, curve()) == doctest::Approx(54.59425865535304).epsilon(1e-13));
        CHECK(fixed_leg_value(swap, curve()) == doctest::Approx(6852.35).epsilon(0.005));
        CHECK(6852.35 / 126.0 == doctest::Approx(54.384).epsilon(1e-4));
    }
    SUBCASE("validation") {
        CommoditySwap bad = swap;
        bad.notionals[3] = 0.0;
        CHECK_FALSE(bad.validate().empty());
        bad.payment_times[5] = bad.payment_times[4];
        CHECK(bad.validate().size() >= 2);
    }
}

TEST_CASE("swap exposure option") {
    const OilModel& m = case_oil();
    const CommoditySwap payer = CommoditySwap::regular(5.0, 12, 126.0, Side::Payer);
    CommoditySwap receiver = payer;
    receiver.side = Side::Receiver;
    // Independent two-dimensional quadrature over both factors.
    CHECK(swap_exposure_option(payer, m, 1.0, curve()) == doctest::Approx(414.0900917048425).epsilon(1e-8));
    CHECK(swap_exposure_option(receiver, m, 1.0, curve()) ==
          doctest::Approx(464.95912007560435).epsilon(1e-8));
    // Nothing remains after the last payment.
    CHECK(swap_exposure_option(payer, m, 5.0, curve()) == 0.0);
    // Payer minus receiver exposure is the discounted residual swap value.
    for (double tj : {0.5, 2.0, 4.25}) {
        double residual = 0.0;
        for (double t : payer.payment_times)
            if (t > tj + 1e-12)
                residual += forward_value({t, 126.0, Side::Payer, 1.0}, m, m.initial_state(), curve());
        CHECK(swap_exposure_option(payer, m, tj, curve()) - swap_exposure_option(receiver, m, tj, curve()) ==
              doctest::Approx(residual).epsilon(1e-9));
    }
}

TEST_CASE("independence CVA") {
    const OilModel& m = case_oil();
    const HazardCurve bank = strip_hazard_curve(test::bank_quotes(), curve());
    const ForwardContract fwd{5.0, 126.0, Side::Payer, 1.0};
    const auto grid = test::monthly(5.0);
    CHECK(cva_forward_independent(fwd, m, curve(), grid, bank, 0.0) == 0.0);
    CHECK(cva_forward_independent(fwd, m, curve(), grid, HazardCurve::flat(0.0), 0.6) == 0.0);
    const double base = cva_forward_independent(fwd, m, curve(), grid, bank, 0.6);
    CHECK(base > 0.0);
    CHECK(cva_forward_independent(fwd, m, curve(), grid, bank, 0.8) > base);
    CHECK(cva_forward_independent(fwd, m, curve(), grid, HazardCurve::flat(0.05), 0.6) <
          cva_forward_independent(fwd, m, curve(), grid, HazardCurve::flat(0.06), 0.6));

    const CommoditySwap swap = CommoditySwap::regular(5.0, 12, 126.0, Side::Payer);
    const double cva = cva_swap_independent(swap, m, curve(), bank, 0.6);
    const auto q = bucket_default_probabilities(bank, swap.payment_times);
    double expected = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j)
        expected += q[j] * swap_exposure_option(swap, m, swap.payment_times[j], curve());
    CHECK(cva == doctest::Approx(0.6 * expected).epsilon(1e-12));
    CHECK(cva <= cva_swap_upper_bound(swap, m, curve(), 0.6));
    CHECK(cva_swap_independent(swap, m, curve(), bank, 0.0) == 0.0);
}

TEST_CASE("bucket default probabilities") {
    const auto q = bucket_default_probabilities(HazardCurve::flat(0.02), std::vector<double>{1.0, 2.0});
    REQUIRE(q.size() == 2);
    CHECK(q[0] == doctest::Approx(1.0 - std::exp(-0.02)));
    CHECK(q[1] == doctest::Approx(std::exp(-0.02) - std::exp(-0.04)));
}

TEST_CASE("adjusted strike") {
    const double annuity = 6852.35 / 126.0;
    CHECK(adjusted_strike(126.0, 0.0, annuity, Side::Payer) == 126.0);
    const double payer = adjusted_strike(126.0, 63.49, annuity, Side::Payer);
    CHECK(payer >= 124.83 - 0.02);
    CHECK(payer <= 124.84 + 0.02);
    CHECK(std::abs(adjusted_strike(126.0, 27.99, annuity, Side::Receiver) - 126.51) <= 0.02);
}

}  // TEST_SUITE
