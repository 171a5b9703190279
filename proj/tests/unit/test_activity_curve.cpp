#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "procscore/activity_curve.hpp"
#include "procscore/random.hpp"

using namespace procscore;

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, int intervals = 2048) {
  const double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) s += f(a + i * h) * (i % 2 ? 4 : 2);
  return s * h / 3;
}

std::vector<Event> random_events(Rng& rng, std::size_t n) {
  std::vector<Event> out(n);
  for (auto& e : out) {
    e.time = rng.uniform();
    e.weight = rng.uniform_open_closed();
  }
  return out;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no exception");
  return ErrorKind::InvariantViolation;
}

}  // namespace

TEST_CASE("project time normalization") {
  const std::vector<double> ts{0, 50, 100};
  CHECK(normalize_project_time(ts) == std::vector<double>{0, 0.5, 1});
  const std::vector<double> same{10, 10};
  CHECK(kind_of([&] { normalize_project_time(same); }) == ErrorKind::DegenerateTimeRange);
  const std::vector<double> shuffled{7, -3, 12, 4};
  const auto n = normalize_project_time(shuffled);
  CHECK(n[1] == 0.0);
  CHECK(n[2] == 1.0);
  CHECK(n[0] > n[3]);
}

TEST_CASE("curves integrate to one") {
  Rng rng(21);
  for (std::size_t n : {1u, 2u, 4u, 5u, 17u, 200u}) {
    const auto curve = build_curve(random_events(rng, n));
    CHECK(simpson([&](double x) { return curve(x); }, 0, 1) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(curve.cumulative(0) == 0.0);
    CHECK(curve.cumulative(1) == doctest::Approx(1.0).epsilon(1e-6));
  }
  for (double at : {0.0, 0.02, 0.5, 1.0}) {
    const std::vector<Event> one{{at, 1}};
    const auto curve = build_curve(one, FixedBandwidth{0.3});
    CHECK(simpson([&](double x) { return curve(x); }, 0, 1) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(curve(-0.1) == 0.0);
    CHECK(curve(1.1) == 0.0);
  }
}

TEST_CASE("single event is symmetric") {
  const std::vector<Event> one{{0.5, 1}};
  const auto curve = build_curve(one, FixedBandwidth{0.1});
  for (double x = 0; x <= 0.5; x += 0.01) CHECK(curve(0.5 - x) == doctest::Approx(curve(0.5 + x)).epsilon(1e-12));
  CHECK(curve.cumulative(0.5) == doctest::Approx(0.5).epsilon(1e-12));

  const auto narrow = build_curve(one, FixedBandwidth{0.02});
  CHECK(activity_mass(narrow, {0.4, 0.6, ""}) > 0.99);
}

TEST_CASE("mirrored events give a mirrored curve") {
  Rng rng(5);
  auto events = random_events(rng, 12);
  auto mirrored = events;
  for (auto& e : mirrored) e.time = 1 - e.time;
  const auto f = build_curve(events);
  const auto g = build_curve(mirrored);
  for (int i = 0; i <= 100; ++i) {
    const double x = i / 100.0;
    CHECK(std::abs(f(x) - g(1 - x)) <= 1e-9);
  }
}

TEST_CASE("weight scaling and event order do not matter") {
  Rng rng(8);
  const auto events = random_events(rng, 30);
  auto doubled = events;
  for (auto& e : doubled) e.weight *= 2;
  auto reversed = events;
  std::reverse(reversed.begin(), reversed.end());
  const auto f = build_curve(events);
  const auto g = build_curve(doubled);
  const auto r = build_curve(reversed);
  for (int i = 0; i <= 64; ++i) {
    const double x = i / 64.0;
    CHECK(g(x) == doctest::Approx(f(x)).epsilon(1e-12));
    CHECK(r(x) == doctest::Approx(f(x)).epsilon(1e-12));
  }
}

TEST_CASE("cumulative is monotone and matches numeric integration") {
  Rng rng(13);
  const auto curve = build_curve(random_events(rng, 25));
  double prev = 0;
  for (int i = 0; i <= 1000; ++i) {
    const double v = curve.cumulative(i / 1000.0);
    CHECK(v >= prev);
    prev = v;
  }
  for (double x : {0.1, 0.37, 0.8})
    CHECK(cumulative(curve, x) == doctest::Approx(simpson([&](double t) { return curve(t); }, 0, x)).epsilon(1e-8));
  CHECK(kind_of([&] { curve.cumulative(1.01); }) == ErrorKind::OutOfDomain);
  CHECK(kind_of([&] { curve.cumulative(-0.01); }) == ErrorKind::OutOfDomain);
}

TEST_CASE("equispaced events give a near-uniform cumulative") {
  std::vector<Event> events;
  for (int i = 0; i < 200; ++i) events.push_back({(i + 0.5) / 200, 1});
  const auto curve = build_curve(events);
  for (double x : {0.25, 0.5, 0.75}) {
    // empirical CDF of the event times
    const double ecdf = static_cast<double>(std::count_if(events.begin(), events.end(), [x](const Event& e) { return e.time <= x; })) / 200;
    CHECK(std::abs(curve.cumulative(x) - ecdf) < 0.05);
  }
}

TEST_CASE("mixtures") {
  const std::vector<Event> left{{0.2, 1}}, right{{0.8, 1}};
  const auto a = build_curve(left, FixedBandwidth{0.05});
  const auto b = build_curve(right, FixedBandwidth{0.05});
  const std::vector<ActivityCurve> curves{a, b};

  const std::vector<double> first{1, 0};
  const auto only_a = mixture(curves, first);
  for (double x = 0; x <= 1; x += 0.05) CHECK(only_a(x) == doctest::Approx(a(x)).epsilon(1e-14));

  const std::vector<double> half{0.5, 0.5};
  const auto m = mixture(curves, half);
  CHECK(std::abs(simpson([&](double x) { return m(x); }, 0, 0.5) - 0.5) < 0.01);
  CHECK(std::abs(simpson([&](double x) { return m(x); }, 0.5, 1) - 0.5) < 0.01);

  const std::vector<double> skew{3, 1};
  const auto s = mixture(curves, skew);
  for (double x = 0; x <= 1; x += 0.05) CHECK(s(x) == doctest::Approx(0.75 * a(x) + 0.25 * b(x)).epsilon(1e-12));
  CHECK(simpson([&](double x) { return s(x); }, 0, 1) == doctest::Approx(1.0).epsilon(1e-6));

  const std::vector<ActivityCurve> twins{a, a};
  const std::vector<double> odd{0.9, 0.1};
  const auto same = mixture(twins, odd);
  for (double x = 0; x <= 1; x += 0.05) CHECK(same(x) == doctest::Approx(a(x)).epsilon(1e-12));

  const std::vector<double> zeros{0, 0}, one{1};
  CHECK(kind_of([&] { mixture(curves, zeros); }) == ErrorKind::AllZeroWeights);
  CHECK(kind_of([&] { mixture(curves, one); }) == ErrorKind::LengthMismatch);
}

TEST_CASE("activity mass") {
  Rng rng(3);
  const auto curve = build_curve(random_events(rng, 40));
  CHECK(activity_mass(curve, {0, 1, ""}) == doctest::Approx(1.0).epsilon(1e-6));
  for (double c : {0.1, 0.5, 0.93})
    CHECK(activity_mass(curve, {0, c, ""}) + activity_mass(curve, {c, 1, ""}) == doctest::Approx(1.0).epsilon(1e-6));
  double total = 0;
  for (int i = 0; i < 10; ++i) total += activity_mass(curve, {i / 10.0, (i + 1) / 10.0, ""});
  CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(kind_of([&] { activity_mass(curve, {0.5, 0.5, ""}); }) == ErrorKind::InvalidSegment);
  CHECK(kind_of([&] { activity_mass(curve, {-0.1, 0.5, ""}); }) == ErrorKind::InvalidSegment);
}

TEST_CASE("build_curve errors") {
  CHECK(kind_of([] { build_curve(std::vector<Event>{}); }) == ErrorKind::NoEvents);
  const std::vector<Event> zero{{0.2, 0}, {0.4, 0}};
  CHECK(kind_of([&] { build_curve(zero); }) == ErrorKind::ZeroTotalWeight);
  const std::vector<Event> outside{{1.5, 1}};
  CHECK(kind_of([&] { build_curve(outside); }) == ErrorKind::OutOfDomain);
  const std::vector<Event> repeated(6, Event{0.3, 1});
  const auto curve = build_curve(repeated);
  CHECK(curve.components()[0].bandwidth > 0);
}

TEST_CASE("curve JSON and process models") {
  Rng rng(17);
  const auto a = build_curve(random_events(rng, 10));
  const auto b = build_curve(random_events(rng, 15));
  const auto restored = ActivityCurve::from_json(nlohmann::json::parse(a.to_json().dump()));
  for (double x = 0; x <= 1; x += 0.1) CHECK(restored(x) == a(x));

  const std::vector<std::map<std::string, ActivityCurve>> projects{{{"req", a}, {"dev", b}}, {{"req", b}, {"dev", a}}};
  const std::vector<double> weights{1, 3};
  const auto pm = build_process_model(projects, weights);
  CHECK(pm.project_weights == std::vector<double>{0.25, 0.75});
  CHECK(pm.at("req")(0.4) == doctest::Approx(0.25 * a(0.4) + 0.75 * b(0.4)));
  CHECK(kind_of([&] { pm.at("desc"); }) == ErrorKind::MissingActivity);
  const auto pm2 = ProcessModel::from_json(pm.to_json());
  CHECK(pm2.at("dev")(0.7) == pm.at("dev")(0.7));

  const std::vector<std::map<std::string, ActivityCurve>> partial{{{"req", a}, {"dev", b}}, {{"req", b}}};
  CHECK(kind_of([&] { build_process_model(partial, weights); }) == ErrorKind::MissingActivity);
}

TEST_CASE("issue records and curve tables") {
  const auto issues = read_issues("activity,timestamp,hours\nreq,100,2.5\ndev,200,1\ndesc,300,4\n");
  REQUIRE(issues.size() == 3);
  CHECK(issues[0].activity == IssueActivity::Requirements);
  CHECK(issues[2].hours == 4);
  CHECK_THROWS(read_issues("activity,timestamp,hours\nreq,100,0\n"));
  CHECK_THROWS(read_issues("activity,timestamp,hours\nops,100,1\n"));

  const std::vector<Event> one{{0.5, 1}};
  const auto csv = curve_table_csv(build_curve(one, FixedBandwidth{0.1}), 5, {"seed=1"});
  CHECK(csv.rfind("# seed=1\r\n", 0) == 0);
  CHECK(csv.find("x,f,F\r\n") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
  CHECK(kind_of([&] { curve_table_csv(build_curve(one), 1); }) == ErrorKind::InvalidGrid);
  CHECK(curves_svg({{"req", build_curve(one)}}).find("<svg") != std::string::npos);
}
