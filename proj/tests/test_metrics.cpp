#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "peakshaver/gen.hpp"
#include "peakshaver/metrics.hpp"
#include "peakshaver/oracle.hpp"
#include "peakshaver/scheduler.hpp"
#include "test_support.hpp"

using namespace peakshaver;
using test_support::make_instance;
using test_support::make_request;

TEST_CASE("compute_metrics on an empty schedule is all zeros") {
  const auto in = make_instance(4, {5.0, 5.0}, 10.0, 1.5,
                                {make_request(1, 1, 2.0, 4, 1.0, 3.0)});
  const auto report = compute_metrics(in, Schedule{});
  CHECK(report.revenue == 0.0);
  CHECK(report.normalized_revenue == 0.0);
  CHECK(report.utilization == 0.0);
  CHECK(report.acceptance_rate == 0.0);
  CHECK(report.actual_peak == 0.0);
  CHECK(report.per_station_peaks == std::vector<double>{0.0, 0.0});
}

TEST_CASE("utilization divides delivered energy by the horizon capacity") {
  // 100 kWh delivered against 24 slots of 500 kWh
  std::vector<ChargingRequest> requests;
  for (int i = 1; i <= 4; ++i) requests.push_back(make_request(i, 1, 25.0, 24, 5.0, 10.0));
  const auto in = make_instance(24, {125.0}, 500.0, 1.5, requests);
  const auto result = run_scs(in);
  REQUIRE(result.schedule.selected.size() == 4);
  const auto report = compute_metrics(in, result.schedule);
  CHECK_THAT(report.utilization, Catch::Matchers::WithinAbs(100.0 / 12000.0, 1e-12));
}

TEST_CASE("metrics of the two-object trap after the full run") {
  const auto in = test_support::knapsack_trap_instance();
  const auto result = run_scs(in);
  const auto report = compute_metrics(in, result.schedule);
  CHECK(report.revenue == 10.0);
  CHECK_THAT(report.normalized_revenue, Catch::Matchers::WithinAbs(10.0 / 12.0, 1e-12));
  CHECK(report.acceptance_rate == 0.5);
  CHECK(report.actual_peak == 10.0);
  CHECK(report.per_station_peaks == std::vector<double>{10.0});
}

TEST_CASE("compute_metrics ignores request order") {
  auto in = generate_instance(test_support::small_config(3, 8));
  const auto result = run_scs(in);
  const auto before = compute_metrics(in, result.schedule);

  auto shuffled = in;
  std::mt19937 rng(9);
  std::shuffle(shuffled.requests.begin(), shuffled.requests.end(), rng);
  const auto after = compute_metrics(shuffled, result.schedule);
  CHECK(before.revenue == after.revenue);
  CHECK(before.normalized_revenue == after.normalized_revenue);
  CHECK(before.utilization == after.utilization);
  CHECK(before.acceptance_rate == after.acceptance_rate);
  CHECK(before.actual_peak == after.actual_peak);
}

TEST_CASE("revenue and utilization are monotone under schedule inclusion") {
  const auto in = make_instance(2, {4.0}, 4.0, 1.0,
                                {make_request(1, 1, 2.0, 2, 1.0, 3.0),
                                 make_request(2, 1, 2.0, 2, 1.0, 5.0)});
  const auto smaller = max_flow_feasible(in, {1});
  const auto larger = max_flow_feasible(in, {1, 2});
  REQUIRE(smaller.feasible);
  REQUIRE(larger.feasible);
  const auto a = compute_metrics(in, smaller.witness);
  const auto b = compute_metrics(in, larger.witness);
  CHECK(a.revenue <= b.revenue);
  CHECK(a.utilization <= b.utilization);
}

TEST_CASE("verify_primal_feasibility flags hand-built defects") {
  const auto in = make_instance(2, {5.0}, 5.0, 1.0, {make_request(1, 1, 2.0, 2, 1.0, 1.0)});

  SECTION("rate violation") {
    Schedule s;
    s.selected.insert(1);
    s.allocation[1][1] = 2.0; // max_rate is 1
    const auto violations = verify_primal_feasibility(in, s);
    REQUIRE_FALSE(violations.empty());
    bool rate_mentioned = false;
    for (const auto& v : violations)
      rate_mentioned = rate_mentioned || v.condition.find("max rate") != std::string::npos;
    CHECK(rate_mentioned);
  }

  SECTION("partial charging violates all-or-nothing") {
    Schedule s;
    s.selected.insert(1);
    s.allocation[1][1] = 1.0; // half of the demand
    const auto violations = verify_primal_feasibility(in, s);
    REQUIRE(violations.size() == 1);
    CHECK(violations.front().subject == "request 1");
  }

  SECTION("energy after the deadline") {
    const auto roomy = make_instance(4, {5.0}, 5.0, 1.0, {make_request(1, 1, 2.0, 2, 1.0, 1.0)});
    Schedule late;
    late.selected.insert(1);
    late.allocation[1][2] = 1.0;
    late.allocation[1][3] = 1.0; // deadline is 2
    const auto violations = verify_primal_feasibility(roomy, late);
    bool deadline_mentioned = false;
    for (const auto& v : violations)
      deadline_mentioned = deadline_mentioned || v.condition.find("deadline") != std::string::npos;
    CHECK(deadline_mentioned);
  }

  SECTION("a clean schedule passes") {
    Schedule s;
    s.selected.insert(1);
    s.allocation[1][1] = 1.0;
    s.allocation[1][2] = 1.0;
    CHECK(verify_primal_feasibility(in, s).empty());
  }
}

TEST_CASE("verify_dual_feasibility checks the cover constraint") {
  const auto in = make_instance(2, {5.0}, 5.0, 1.0,
                                {make_request(1, 1, 2.0, 2, 1.0, 4.0),
                                 make_request(2, 1, 1.0, 1, 1.0, 1.0)});

  SECTION("the all-zero certificate misses every (request, slot) pair") {
    DualCertificate cert;
    CHECK(verify_dual_feasibility(in, cert).size() == 3); // d_1 + d_2 slots
  }

  SECTION("alpha alone can cover everything") {
    DualCertificate cert;
    cert.alpha[1] = 2.0;
    cert.alpha[2] = 1.0;
    cert.dual_objective = dual_objective_value(in, cert);
    CHECK(verify_dual_feasibility(in, cert).empty());
  }

  SECTION("negative entries and stale objectives are flagged") {
    DualCertificate cert;
    cert.alpha[1] = 2.0;
    cert.alpha[2] = 1.0;
    cert.beta = {0.0, -0.5, 0.0};
    cert.dual_objective = 123.0;
    const auto violations = verify_dual_feasibility(in, cert);
    CHECK(violations.size() >= 2);
  }
}

TEST_CASE("verify_bound certifies a run featuring a phase-2 swap") {
  // A tight variant of the two-object trap with slackness 2: the large
  // request is rejected first, covered, then swapped in.
  const auto in = make_instance(3, {10.0}, 4.0, 2.0,
                                {make_request(1, 1, 1.0, 3, 2.0, 2.0),
                                 make_request(2, 1, 11.9, 3, 8.0, 11.9)});
  REQUIRE(validate_instance(in).ok());
  const auto result = run_scs(in);
  REQUIRE(result.schedule.selected == std::set<int>{2});
  REQUIRE(result.phase1_revenue == 2.0);

  const auto opt = brute_force_opt(in);
  const auto report = verify_bound(in, result.schedule, result.certificate, &result.phi,
                                   opt.revenue);
  CHECK(report.dual_bounded);
  CHECK(report.weak_duality_ok);
  CHECK(report.phi_available);
  CHECK_THAT(report.revenue, Catch::Matchers::WithinAbs(11.9, 1e-12));
  CHECK(verify_dual_feasibility(in, result.certificate).empty());
}

TEST_CASE("verify_bound requires slackness above one") {
  const auto in = test_support::knapsack_trap_instance();
  const auto result = run_scs(in);
  CHECK_THROWS_AS(verify_bound(in, result.schedule, result.certificate), BoundUndefinedError);
}

TEST_CASE("verify_bound on an empty instance passes trivially") {
  const auto in = make_instance(2, {5.0}, 5.0, 1.5, {});
  const auto result = run_scs(in);
  const auto report = verify_bound(in, result.schedule, result.certificate, &result.phi, 0.0);
  CHECK(report.dual_objective == 0.0);
  CHECK(report.dual_bounded);
  CHECK(report.weak_duality_ok);
}

TEST_CASE("metrics CSV emits the fixed column layout") {
  CHECK(metrics_csv_header(2) ==
        "instance_id,engine,revenue,normalized_revenue,utilization,acceptance_rate,"
        "actual_peak,peak_station_1,peak_station_2,alpha_bound,dual_objective,opt_revenue,"
        "ratio_to_opt");
  MetricsReport report;
  report.revenue = 10.0;
  report.normalized_revenue = 0.5;
  report.utilization = 0.25;
  report.acceptance_rate = 1.0;
  report.actual_peak = 10.0;
  report.per_station_peaks = {10.0, 0.0};
  const auto row = metrics_csv_row("case", "scs", report, 2, std::nullopt, 12.5, std::nullopt,
                                   std::nullopt);
  CHECK(row == "case,scs,10,0.5,0.25,1,10,10,0,,12.5,,");
}
