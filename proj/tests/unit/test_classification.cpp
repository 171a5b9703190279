#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "procscore/classification.hpp"
#include "procscore/random.hpp"
#include "synthetic.hpp"

using namespace procscore;

namespace {

CommitRecord make_commit(const std::string& id, const std::string& parent, double density, std::int64_t lines = 0) {
  CommitRecord r;
  r.id = id;
  if (parent.empty()) r.is_initial = true;
  else r.parent_ids = {parent};
  r.density = density;
  r.lines_added_net = lines;
  r.lines_added_gross = lines;
  return r;
}

CommitChain single(const CommitRecord& r, std::optional<Activity> label) { return CommitChain{{r}, {label}}; }

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no exception");
  return ErrorKind::InvariantViolation;
}

double gauss_kde(const std::vector<double>& samples, double h, double x) {
  double s = 0;
  for (double v : samples) s += std::exp(-0.5 * (x - v) * (x - v) / (h * h)) / (h * std::sqrt(2 * M_PI));
  return s / static_cast<double>(samples.size());
}

double path_probability(const DiscreteHmm& hmm, const std::vector<int>& path, const std::vector<int>& obs) {
  double p = hmm.initial(path[0]) * hmm.emission(path[0], obs[0]);
  for (std::size_t t = 1; t < obs.size(); ++t)
    p *= hmm.transition(path[t - 1], path[t]) * hmm.emission(path[t], obs[t]);
  return p;
}

// Calls visit for every state path of the given length.
void for_each_path(int states, std::size_t length, const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> path(length, 0);
  while (true) {
    visit(path);
    std::size_t i = 0;
    while (i < length && ++path[i] == states) path[i++] = 0;
    if (i == length) return;
  }
}

VectorXd random_distribution(Rng& rng, Eigen::Index n) {
  VectorXd v(n);
  for (auto& x : v) x = rng.uniform_open_closed();
  return v / v.sum();
}

DiscreteHmm random_hmm(Rng& rng, int states, int symbols) {
  DiscreteHmm hmm;
  hmm.initial = random_distribution(rng, states);
  hmm.transition.resize(states, states);
  hmm.emission.resize(states, symbols);
  for (int s = 0; s < states; ++s) {
    hmm.transition.row(s) = random_distribution(rng, states).transpose();
    hmm.emission.row(s) = random_distribution(rng, symbols).transpose();
  }
  return hmm;
}

}  // namespace

TEST_CASE("activity names") {
  CHECK(parse_activity("a") == Activity::Adaptive);
  CHECK(parse_activity("Corrective") == Activity::Corrective);
  CHECK(parse_activity("P") == Activity::Perfective);
  CHECK(activity_code(Activity::Corrective) == 'c');
  CHECK_THROWS_AS(parse_activity("x"), Error);
}

TEST_CASE("featurize follows the schema") {
  auto r = make_commit("x", "p", 0.6, 12);
  r.keyword_counts = {{"fix", 2}};
  r.sojourn_seconds = 99;
  CHECK(featurize(r, FeatureSchema({"density"}))(0) == 0.6);
  const auto v = featurize(r, FeatureSchema({"lines_added_net", "fix_count", "has_sojourn", "log_sojourn"}));
  CHECK(v(0) == 12);
  CHECK(v(1) == 2);
  CHECK(v(2) == 1);
  CHECK(v(3) == doctest::Approx(std::log(100.0)));
  CHECK(kind_of([] { FeatureSchema({"colour"}); }) == ErrorKind::SchemaFieldUnknown);
  CHECK(kind_of([&] { featurize(r, FeatureSchema({"bug_count"})); }) == ErrorKind::SchemaFieldUnknown);
  auto merge = r;
  merge.is_merge = true;
  merge.parent_ids = {"p", "q"};
  CHECK_THROWS(featurize(merge, FeatureSchema({"density"})));
}

TEST_CASE("zero rule") {
  const std::vector<Activity> ppc{Activity::Perfective, Activity::Perfective, Activity::Corrective};
  CHECK(zero_rule_fit(ppc).predict() == Activity::Perfective);
  const std::vector<Activity> tie{Activity::Corrective, Activity::Adaptive};
  CHECK(zero_rule_fit(tie).predict() == Activity::Adaptive);
  CHECK(kind_of([] { zero_rule_fit(std::vector<Activity>{}); }) == ErrorKind::EmptyTrainingSet);

  // 4345 of 10000 in the modal class: accuracy of the baseline equals that share.
  std::vector<Activity> labels(10000, Activity::Adaptive);
  std::fill(labels.begin(), labels.begin() + 4345, Activity::Perfective);
  std::fill(labels.begin() + 4345, labels.begin() + 7300, Activity::Corrective);
  const auto zr = zero_rule_fit(labels);
  const std::vector<Activity> predictions(labels.size(), zr.predict());
  CHECK(evaluate(predictions, labels).accuracy == doctest::Approx(0.4345));
}

TEST_CASE("keyword rule") {
  auto r = make_commit("x", "p", 1.0, 10);
  r.message = "fix NPE in parser";
  CHECK(keyword_rule(r) == Activity::Corrective);
  r.message = "implement login";
  CHECK(keyword_rule(r) == Activity::Adaptive);
  r.lines_added_net = 0;
  CHECK(keyword_rule(r, {true}) == Activity::Perfective);
  CHECK(keyword_rule(r, {false}) == Activity::Adaptive);
  r.message = "weekly housekeeping";
  CHECK(keyword_rule(r) == Activity::Perfective);
  r.message = "Refactor and add docs";
  CHECK(keyword_rule(r) == Activity::Adaptive);
}

TEST_CASE("order-0 JCD equals naive Bayes with KDE") {
  const std::vector<double> a{0.1, 0.2, 0.3}, c{0.6, 0.7, 0.8}, p{0.4, 0.5, 0.5, 0.9};
  std::vector<CommitChain> chains;
  int id = 0;
  for (double v : a) chains.push_back(single(make_commit("t" + std::to_string(id++), "", v), Activity::Adaptive));
  for (double v : c) chains.push_back(single(make_commit("t" + std::to_string(id++), "", v), Activity::Corrective));
  for (double v : p) chains.push_back(single(make_commit("t" + std::to_string(id++), "", v), Activity::Perfective));
  const double h = 0.15;
  const JcdOptions options{0, FixedBandwidth{h}, false, false};
  const auto model = fit_jcd(chains, options, FeatureSchema({"density"}));
  CHECK(model.priors()[0] == doctest::Approx(0.3));
  CHECK(model.priors()[2] == doctest::Approx(0.4));

  for (double x : {0.0, 0.35, 0.55, 1.0}) {
    const std::array<double, 3> joint{0.3 * gauss_kde(a, h, x), 0.3 * gauss_kde(c, h, x), 0.4 * gauss_kde(p, h, x)};
    const double total = joint[0] + joint[1] + joint[2];
    const auto pred = predict_jcd(model, single(make_commit("q", "", x), std::nullopt));
    for (std::size_t k = 0; k < 3; ++k) CHECK(pred.posterior[k] == doctest::Approx(joint[k] / total).epsilon(1e-10));
    const auto best = std::max_element(joint.begin(), joint.end()) - joint.begin();
    CHECK(index_of(pred.label) == static_cast<std::size_t>(best));
  }

  const auto restored = JcdModel::from_json(nlohmann::json::parse(model.to_json().dump()));
  const auto probe = single(make_commit("q", "", 0.42), std::nullopt);
  CHECK(predict_jcd(restored, probe).posterior == predict_jcd(model, probe).posterior);
}

TEST_CASE("uninformative model returns the priors") {
  std::vector<CommitChain> chains;
  const std::array<int, 3> counts{3, 5, 4};
  int id = 0;
  for (std::size_t c = 0; c < 3; ++c)
    for (int i = 0; i < counts[c]; ++i)
      for (double v : {0.2, 0.5, 0.8})
        chains.push_back(single(make_commit("u" + std::to_string(id++), "", v), static_cast<Activity>(c)));
  // A fixed bandwidth keeps the class densities identical despite unequal n.
  const auto model = fit_jcd(chains, {0, FixedBandwidth{0.2}, true, false}, FeatureSchema({"density"}));
  const auto pred = predict_jcd(model, single(make_commit("q", "", 0.37), std::nullopt));
  CHECK(pred.posterior[0] == doctest::Approx(3.0 / 12));
  CHECK(pred.posterior[1] == doctest::Approx(5.0 / 12));
  CHECK(pred.posterior[2] == doctest::Approx(4.0 / 12));
  CHECK(pred.label == Activity::Corrective);
}

TEST_CASE("single-class training predicts that class") {
  std::vector<CommitChain> chains;
  for (int i = 0; i < 5; ++i)
    chains.push_back(single(make_commit("s" + std::to_string(i), "", 0.1 * i), Activity::Corrective));
  const auto model = fit_jcd(chains, {0, SheatherJones{}, true, false}, FeatureSchema({"density"}));
  for (double x : {-5.0, 0.3, 42.0}) {
    const auto pred = predict_jcd(model, single(make_commit("q", "", x), std::nullopt));
    CHECK(pred.label == Activity::Corrective);
    CHECK(pred.posterior[1] == 1.0);
  }
}

TEST_CASE("JCD training errors") {
  std::vector<CommitChain> chains;
  for (int i = 0; i < 4; ++i) chains.push_back(single(make_commit("a" + std::to_string(i), "", 0.1 * i), Activity::Adaptive));
  chains.push_back(single(make_commit("c0", "", 0.5), Activity::Corrective));
  chains.push_back(single(make_commit("c1", "", 0.6), Activity::Corrective));
  CHECK(kind_of([&] { fit_jcd(chains, {0, SheatherJones{}, true, false}, FeatureSchema({"density"})); }) ==
        ErrorKind::InsufficientData);
  CHECK(kind_of([&] { fit_jcd(chains, {4, SheatherJones{}, true, false}, FeatureSchema({"density"})); }) ==
        ErrorKind::InvalidConfig);
  CHECK(kind_of([&] { fit_jcd(chains, {1, SheatherJones{}, true, false}, FeatureSchema({"density"})); }) ==
        ErrorKind::OrderMismatch);
}

TEST_CASE("deterministic transitions dominate uninformative features") {
  std::vector<CommitChain> chains;
  int id = 0;
  const auto add = [&](Activity from, Activity to, int times) {
    for (int i = 0; i < times; ++i) {
      const auto p = make_commit("d" + std::to_string(id++), "", 0.5);
      const auto q = make_commit("d" + std::to_string(id++), p.id, 0.5);
      chains.push_back(CommitChain{{p, q}, {from, to}});
    }
  };
  add(Activity::Adaptive, Activity::Corrective, 30);
  add(Activity::Corrective, Activity::Perfective, 5);
  add(Activity::Perfective, Activity::Adaptive, 5);
  const auto model = fit_jcd(chains, {1, SheatherJones{}, true, false}, FeatureSchema({"density"}));
  CHECK(model.transitions()(0, 1) == doctest::Approx(31.0 / 33.0));
  for (Eigen::Index r = 0; r < model.transitions().rows(); ++r) CHECK(model.transitions().row(r).sum() == doctest::Approx(1.0));

  const auto parent = make_commit("x0", "", 0.5);
  const auto principal = make_commit("x1", "x0", 0.5);
  const auto pred = predict_jcd(model, CommitChain{{parent, principal}, {Activity::Adaptive, std::nullopt}});
  CHECK(pred.label == Activity::Corrective);
  CHECK(pred.posterior[1] > 0.9);
  CHECK(kind_of([&] { predict_jcd(model, single(principal, std::nullopt)); }) == ErrorKind::OrderMismatch);

  // An unlabeled parent is marginalized; the prediction still normalizes.
  const auto marginal = predict_jcd(model, CommitChain{{parent, principal}, {std::nullopt, std::nullopt}});
  CHECK(marginal.posterior[0] + marginal.posterior[1] + marginal.posterior[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(marginal.posterior[1] > marginal.posterior[2]);
}

TEST_CASE("net-empty rule excludes adaptive inside JCD") {
  std::vector<CommitChain> chains;
  for (int i = 0; i < 6; ++i) {
    chains.push_back(single(make_commit("a" + std::to_string(i), "", 0.5, 0), Activity::Adaptive));
    chains.push_back(single(make_commit("p" + std::to_string(i), "", 0.5, 0), Activity::Perfective));
  }
  chains.push_back(single(make_commit("a9", "", 0.5, 0), Activity::Adaptive));
  const auto on = fit_jcd(chains, {0, SheatherJones{}, true, true}, FeatureSchema({"density"}));
  const auto off = fit_jcd(chains, {0, SheatherJones{}, true, false}, FeatureSchema({"density"}));
  const auto probe = single(make_commit("q", "", 0.5, 0), std::nullopt);
  CHECK(predict_jcd(off, probe).label == Activity::Adaptive);
  CHECK(predict_jcd(on, probe).label == Activity::Perfective);
  CHECK(predict_jcd(on, probe).posterior[0] == 0.0);
}

TEST_CASE("posteriors normalize on synthetic chains and transitions converge") {
  testing::ChainProcess process;
  process.transition = {{{0.6, 0.3, 0.1}, {0.2, 0.5, 0.3}, {0.25, 0.25, 0.5}}};
  process.lines_mean = {80, 20, 40};
  process.lines_sd = {20, 10, 15};
  process.density_mean = {0.8, 0.5, 0.3};
  process.density_sd = {0.1, 0.15, 0.1};
  process.log_sojourn_mean = {9, 7, 8};
  const auto history = testing::generate_history(process, 10001, 3);
  const auto chains = training_chains(history.records, history.label_map, 1);
  CHECK(chains.size() == 10000);
  const auto model = fit_jcd(chains, {1, SheatherJones{}, true, false}, testing::synthetic_schema());
  for (std::size_t from = 0; from < 3; ++from)
    for (std::size_t to = 0; to < 3; ++to)
      CHECK(std::abs(model.transitions()(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to)) -
                     process.transition[from][to]) < 0.05);
  for (std::size_t i = 0; i < 200; i += 7) {
    auto chain = chains[i];
    chain.labels.back().reset();
    const auto pred = predict_jcd(model, chain);
    CHECK(pred.posterior[0] + pred.posterior[1] + pred.posterior[2] == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("chains from a labeled dataset") {
  std::vector<CommitRecord> records{make_commit("r0", "", 0.1), make_commit("r1", "r0", 0.2), make_commit("r2", "r1", 0.3),
                                    make_commit("r3", "r2", 0.4)};
  records[1].sojourn_seconds = records[2].sojourn_seconds = records[3].sojourn_seconds = 10;
  const auto labels = read_labels("id,label\r\nr0,a\r\nr1,c\r\nr2,\r\nr3,p\r\n");
  CHECK(labels.size() == 3);
  CHECK(labels.at("r1") == Activity::Corrective);
  const auto chains = training_chains(records, labels, 1);
  REQUIRE(chains.size() == 1);
  CHECK(chains[0].principal().id == "r1");
  std::unordered_map<std::string, const CommitRecord*> by_id;
  for (const auto& r : records) by_id[r.id] = &r;
  const auto chain = chain_ending_at(by_id, labels, "r3", 2);
  REQUIRE(chain.size() == 3);
  CHECK(chain.commits.front().id == "r1");
  CHECK_FALSE(chain.labels[1].has_value());
}

TEST_CASE("HMM forward matches exhaustive enumeration") {
  Rng rng(99);
  for (int states = 1; states <= 3; ++states)
    for (std::size_t length = 1; length <= 6; ++length)
      for (int rep = 0; rep < 3; ++rep) {
        const auto hmm = random_hmm(rng, states, 3);
        std::vector<int> obs(length);
        for (auto& o : obs) o = static_cast<int>(rng.uniform_int(0, 2));
        double total = 0, best = 0;
        for_each_path(states, length, [&](const std::vector<int>& path) {
          const double p = path_probability(hmm, path, obs);
          total += p;
          best = std::max(best, p);
        });
        CHECK(std::exp(hmm_forward(hmm, obs)) == doctest::Approx(total).epsilon(1e-9));
        const auto path = hmm_viterbi(hmm, obs);
        REQUIRE(path.size() == length);
        CHECK(path_probability(hmm, path, obs) == doctest::Approx(best).epsilon(1e-12));
      }
}

TEST_CASE("HMM special cases") {
  DiscreteHmm one{VectorXd::Ones(1), MatrixXd::Ones(1, 1), MatrixXd(1, 2)};
  one.emission << 0.25, 0.75;
  const std::vector<int> obs{0, 1, 1};
  CHECK(hmm_forward(one, obs) == doctest::Approx(std::log(0.25 * 0.75 * 0.75)));

  DiscreteHmm forced{VectorXd::Constant(3, 1.0 / 3), MatrixXd::Constant(3, 3, 1.0 / 3), MatrixXd::Identity(3, 3)};
  const std::vector<int> seq{2, 0, 1, 1, 2};
  CHECK(hmm_viterbi(forced, seq) == seq);

  DiscreteHmm tied{VectorXd::Constant(2, 0.5), MatrixXd::Constant(2, 2, 0.5), MatrixXd::Constant(2, 2, 0.5)};
  CHECK(hmm_viterbi(tied, std::vector<int>{1, 0, 1}) == std::vector<int>{0, 0, 0});

  DiscreteHmm bad = one;
  bad.emission << 0.5, 0.6;
  CHECK(kind_of([&] { hmm_forward(bad, obs); }) == ErrorKind::InvalidDistribution);
  CHECK_THROWS(hmm_forward(one, std::vector<int>{2}));
}

TEST_CASE("supervised HMM estimation counts transitions") {
  const std::vector<std::vector<int>> states{{0, 0, 1}, {1, 1}};
  const std::vector<std::vector<int>> obs{{0, 0, 1}, {1, 0}};
  const auto hmm = fit_hmm_supervised(states, obs, 2, 2, 0.0);
  CHECK(hmm.initial(0) == doctest::Approx(0.5));
  CHECK(hmm.transition(0, 0) == doctest::Approx(0.5));
  CHECK(hmm.transition(1, 1) == doctest::Approx(1.0));
  CHECK(hmm.emission(0, 0) == doctest::Approx(1.0));
  CHECK(hmm.emission(1, 1) == doctest::Approx(2.0 / 3));
  const auto smoothed = fit_hmm_supervised(states, obs, 2, 2, 1.0);
  CHECK(smoothed.transition(1, 0) == doctest::Approx(1.0 / 3));
  CHECK_NOTHROW(smoothed.validate());
}

TEST_CASE("evaluation metrics") {
  const std::vector<Activity> truth{Activity::Adaptive, Activity::Corrective, Activity::Perfective, Activity::Adaptive};
  const auto perfect = evaluate(truth, truth);
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.kappa == 1.0);

  using A = Activity;
  const std::vector<A> t2{A::Adaptive, A::Adaptive, A::Adaptive, A::Corrective, A::Corrective, A::Corrective};
  const std::vector<A> p2{A::Adaptive, A::Adaptive, A::Corrective, A::Adaptive, A::Corrective, A::Corrective};
  const auto m = evaluate(p2, t2);
  CHECK(m.accuracy == doctest::Approx(2.0 / 3));
  CHECK(m.kappa == doctest::Approx(1.0 / 3));
  CHECK(m.confusion(0, 0) == 2);
  CHECK(m.confusion(0, 1) == 1);
  CHECK(m.confusion.row(1).sum() == 3);

  Rng rng(4);
  std::vector<A> tr, pr;
  for (int i = 0; i < 20000; ++i) {
    tr.push_back(static_cast<A>(rng.uniform_int(0, 2)));
    pr.push_back(static_cast<A>(rng.uniform_int(0, 2)));
  }
  CHECK(std::abs(evaluate(pr, tr).kappa) < 0.03);
  CHECK(kind_of([&] { evaluate(pr, t2); }) == ErrorKind::LengthMismatch);
}
