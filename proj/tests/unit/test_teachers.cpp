#include <doctest.h>

#include <cmath>

#include "procurl/teachers.hpp"

using namespace procurl;
using namespace procurl::teachers;

namespace {

PoSTable table_of(std::vector<double> pos) {
  PoSTable t = PoSTable::zeros(pos.size());
  t.pos_t = std::move(pos);
  return t;
}

std::vector<double> random_pos(Rng& rng, std::size_t n) {
  std::vector<double> p(n);
  for (auto& v : p) v = rng.uniform();
  return p;
}

// Brute-force oracle: index whose value is nearest 0.5, lowest index on ties.
std::size_t nearest_half(const std::vector<double>& p) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (std::abs(p[i] - 0.5) < std::abs(p[best] - 0.5)) best = i;
  }
  return best;
}

std::vector<double> frequencies(const std::vector<double>& scores, double beta, int n, Rng& rng) {
  std::vector<double> f(scores.size(), 0.0);
  for (int i = 0; i < n; ++i) f[select_softmax(scores, beta, rng).index] += 1.0;
  for (auto& v : f) v /= n;
  return f;
}

}  // namespace

TEST_CASE("curriculum score examples") {
  CHECK(curriculum_score(0.5, 1.0) == 0.25);
  CHECK(curriculum_score(0.0, 0.3) == 0.0);
  CHECK(curriculum_score(0.0, 1.0) == 0.0);
  for (double p : {0.0, 0.1, 0.37, 0.5, 1.0}) CHECK(curriculum_score(p, p) == 0.0);
}

TEST_CASE("generalized score examples") {
  CHECK(generalized_score(0.5, 1.0, 1.0, 0.6) == doctest::Approx(0.35).epsilon(1e-14));
  CHECK(generalized_score(0.5, 1.0, 1.0, 1.4) == doctest::Approx(0.15).epsilon(1e-14));
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double p = rng.uniform();
    const double ps = rng.uniform();
    CHECK(generalized_score(p, ps, 1.0, 1.0) == curriculum_score(p, ps));
  }
}

TEST_CASE("strategy score examples") {
  Rng rng(0);
  auto iid = strategy_scores(TeacherConfig::for_strategy(Strategy::kIid), table_of({0.2, 0.9, 0.5}), rng);
  CHECK(iid[0] == iid[1]);
  CHECK(iid[1] == iid[2]);

  auto easy_cfg = TeacherConfig::for_strategy(Strategy::kEasy);
  auto easy = strategy_scores(easy_cfg, table_of({0.9, 0.1}), rng);
  CHECK(easy[0] == 0.9);
  CHECK(easy[1] == 0.1);

  auto val = strategy_scores(TeacherConfig::for_strategy(Strategy::kProcurlVal), table_of({0.1, 0.5, 0.9}), rng);
  CHECK(val[0] == doctest::Approx(0.09).epsilon(1e-14));
  CHECK(val[1] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(val[2] == doctest::Approx(0.09).epsilon(1e-14));

  auto hard = strategy_scores(TeacherConfig::for_strategy(Strategy::kHard), table_of({0.9, 0.1}), rng);
  CHECK(hard[0] == doctest::Approx(0.1));
  CHECK(hard[1] == doctest::Approx(0.9));
}

TEST_CASE("provided pos star is used by the softmax strategy") {
  Rng rng(0);
  auto cfg = TeacherConfig::for_strategy(Strategy::kProcurlSoftmax);
  cfg.pos_star_mode = PosStarMode::kProvided;
  PoSTable t = table_of({0.2, 0.2});
  t.pos_star = {0.4, 1.0};
  const auto s = strategy_scores(cfg, t, rng);
  CHECK(s[0] == doctest::Approx(0.04));
  CHECK(s[1] == doctest::Approx(0.16));
  cfg.pos_star_mode = PosStarMode::kAllOnes;
  const auto s1 = strategy_scores(cfg, t, rng);
  CHECK(s1[0] == doctest::Approx(0.16));
}

TEST_CASE("space-alt uses the previous table") {
  Rng rng(0);
  auto cfg = TeacherConfig::for_strategy(Strategy::kSpaceAlt);
  PoSTable t = table_of({0.5, 0.2});
  t.prev_pos = std::vector<double>{0.3, 0.4};
  const auto s = strategy_scores(cfg, t, rng);
  CHECK(s[0] == doctest::Approx(0.2));
  CHECK(s[1] == doctest::Approx(-0.2));
  t.prev_pos.reset();
  CHECK_THROWS_AS(strategy_scores(cfg, t, rng), ConfigError);
}

TEST_CASE("hard ordering reverses easy ordering") {
  Rng rng(8);
  for (int trial = 0; trial < 500; ++trial) {
    const auto t = table_of(random_pos(rng, 6));
    const auto e = strategy_scores(TeacherConfig::for_strategy(Strategy::kEasy), t, rng);
    const auto h = strategy_scores(TeacherConfig::for_strategy(Strategy::kHard), t, rng);
    for (std::size_t i = 0; i < e.size(); ++i) {
      for (std::size_t j = 0; j < e.size(); ++j) {
        if (e[i] < e[j]) CHECK(h[i] > h[j]);
      }
    }
  }
}

TEST_CASE("noise is bounded and clipped") {
  Rng rng(4);
  auto cfg = TeacherConfig::for_strategy(Strategy::kEasy);
  cfg.noise_eps = 0.2;
  const auto t = table_of({0.0, 0.5, 1.0});
  for (int i = 0; i < 2000; ++i) {
    const auto s = strategy_scores(cfg, t, rng);
    CHECK(s[0] >= 0.0);
    CHECK(s[0] <= 0.2);
    CHECK(std::abs(s[1] - 0.5) <= 0.2);
    CHECK(s[2] >= 0.8);
    CHECK(s[2] <= 1.0);
  }
}

TEST_CASE("noise-free scores are deterministic") {
  Rng a(1);
  Rng b(999);
  Rng rng(3);
  for (auto s : {Strategy::kProcurlSoftmax, Strategy::kProcurlVal, Strategy::kEasy, Strategy::kHard}) {
    const auto t = table_of(random_pos(rng, 5));
    CHECK(strategy_scores(TeacherConfig::for_strategy(s), t, a) ==
          strategy_scores(TeacherConfig::for_strategy(s), t, b));
  }
}

TEST_CASE("argmax examples") {
  CHECK(select_argmax({0.09, 0.25, 0.09}).index == 1);
  CHECK(select_argmax({0.3, 0.3, 0.3}).index == 0);
  CHECK(select_argmax({0.1, 0.4, 0.4}).index == 1);
  CHECK_THROWS_AS(select_argmax({}), ContractError);
}

TEST_CASE("argmax and softmax are shift invariant") {
  Rng rng(6);
  for (int trial = 0; trial < 500; ++trial) {
    auto s = random_pos(rng, 7);
    const double c = rng.uniform(-100, 100);
    auto shifted = s;
    for (auto& v : shifted) v += c;
    CHECK(select_argmax(s) == select_argmax(shifted));
    const auto p = softmax_distribution(s, 10.0);
    const auto q = softmax_distribution(shifted, 10.0);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(q[i] == doctest::Approx(p[i]).epsilon(1e-9));
  }
}

TEST_CASE("with pos star all ones argmax picks the task nearest one half") {
  Rng rng(10);
  auto cfg = TeacherConfig::for_strategy(Strategy::kProcurlArgmax);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto pos = random_pos(rng, 2 + rng.below(10));
    const auto scores = strategy_scores(cfg, table_of(pos), rng);
    CHECK(select_argmax(scores).index == nearest_half(pos));
  }
}

TEST_CASE("generalized selection with equal gammas matches the proximal rule") {
  Rng rng(12);
  auto gen = TeacherConfig::for_strategy(Strategy::kProcurlGeneralized);
  gen.gamma1 = gen.gamma2 = 0.7;
  auto base = TeacherConfig::for_strategy(Strategy::kProcurlArgmax);
  gen.pos_star_mode = base.pos_star_mode = PosStarMode::kProvided;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(10);
    PoSTable t = table_of(random_pos(rng, n));
    t.pos_star = random_pos(rng, n);
    for (std::size_t i = 0; i < n; ++i) t.pos_star[i] = std::max(t.pos_star[i], t.pos_t[i]);
    CHECK(select_argmax(strategy_scores(gen, t, rng)) == select_argmax(strategy_scores(base, t, rng)));
  }
}

TEST_CASE("softmax distribution matches exp arithmetic") {
  const auto p = softmax_distribution({0.25, 0.25 - std::log(2.0) / 7.0}, 7.0);
  CHECK(p[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  const auto big = softmax_distribution({1e6, 0.0}, 1e6);
  CHECK(big[0] == 1.0);
  CHECK(big[1] == 0.0);
  CHECK_THROWS_AS(softmax_distribution({}, 1.0), ContractError);
  CHECK_THROWS_AS(softmax_distribution({0.1}, -1.0), ContractError);
}

TEST_CASE("softmax with beta 0 samples uniformly") {
  Rng rng(13);
  const auto f = frequencies({0.1, 0.9, 0.5}, 0.0, 100000, rng);
  for (double v : f) CHECK(std::abs(v - 1.0 / 3.0) <= 0.02);
}

TEST_CASE("softmax with a ln2 gap samples two to one") {
  Rng rng(14);
  const double beta = 3.0;
  const int n = 100000;
  const auto f = frequencies({0.25, 0.25 - std::log(2.0) / beta}, beta, n, rng);
  CHECK(std::abs(f[0] - 2.0 / 3.0) <= 4 * std::sqrt(2.0 / 9.0 / n));
}

TEST_CASE("softmax with very large beta matches argmax") {
  Rng rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = random_pos(rng, 5);
    const auto best = select_argmax(s);
    int hits = 0;
    for (int i = 0; i < 10000; ++i) hits += select_softmax(s, 1e6, rng) == best ? 1 : 0;
    CHECK(hits >= 9990);
  }
}

TEST_CASE("softmax empirical frequencies match the analytic distribution") {
  Rng rng(16);
  for (double beta : {1.0, 10.0, 20.0}) {
    const auto s = random_pos(rng, 5);
    const auto p = softmax_distribution(s, beta);
    const auto f = frequencies(s, beta, 100000, rng);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(std::abs(f[i] - p[i]) <= 0.02);
  }
}

TEST_CASE("select_task uses argmax only for the argmax strategy") {
  Rng rng(17);
  const std::vector<double> s{0.1, 0.2, 0.15};
  auto arg = TeacherConfig::for_strategy(Strategy::kProcurlArgmax);
  for (int i = 0; i < 100; ++i) CHECK(select_task(arg, s, rng).index == 1);
  auto soft = TeacherConfig::for_strategy(Strategy::kProcurlSoftmax, 0.0);
  std::vector<int> seen(3, 0);
  for (int i = 0; i < 300; ++i) ++seen[select_task(soft, s, rng).index];
  for (int c : seen) CHECK(c > 0);
}

TEST_CASE("teacher config validation") {
  auto env = TeacherConfig::for_strategy(Strategy::kProcurlEnv);
  CHECK(env.pos_source == PosSource::kRollouts);
  env.pos_source = PosSource::kCritic;
  CHECK_THROWS_AS(env.validate(), ConfigError);
  auto val = TeacherConfig::for_strategy(Strategy::kProcurlVal);
  CHECK(val.pos_source == PosSource::kCritic);
  val.pos_source = PosSource::kRollouts;
  CHECK_THROWS_AS(val.validate(), ConfigError);
  auto easy = TeacherConfig::for_strategy(Strategy::kEasy);
  easy.pos_source = PosSource::kNone;
  CHECK_THROWS_AS(easy.validate(), ConfigError);
  auto neg = TeacherConfig::for_strategy(Strategy::kIid, -1.0);
  CHECK_THROWS_AS(neg.validate(), ConfigError);
}

TEST_CASE("teacher config json is strict") {
  const auto c = teacher_config_from_json({{"strategy", "Hard"}, {"pos_source", "exact"}, {"beta", 5.0}});
  CHECK(c.strategy == Strategy::kHard);
  CHECK(c.pos_source == PosSource::kExact);
  CHECK(c.beta == 5.0);
  CHECK(teacher_config_from_json(to_json(c)) == c);
  CHECK(teacher_config_from_json({{"strategy", "IID"}}, 20.0).beta == 20.0);
  CHECK_THROWS_AS(teacher_config_from_json({{"strategy", "IID"}, {"temperature", 1}}), ConfigError);
  CHECK_THROWS_AS(teacher_config_from_json({{"strategy", "Medium"}}), ConfigError);
  CHECK_THROWS_AS(teacher_config_from_json({{"strategy", "ProCuRL-val"}, {"pos_source", "rollouts"}}), ConfigError);
}

TEST_CASE("labels distinguish configurations") {
  auto a = TeacherConfig::for_strategy(Strategy::kProcurlSoftmax);
  auto b = a;
  b.pos_source = PosSource::kExact;
  auto c = b;
  c.pos_star_mode = PosStarMode::kProvided;
  auto d = c;
  d.beta = 50.0;
  CHECK(a.label() == "ProCuRL-softmax");
  CHECK(b.label() == "ProCuRL-softmax[exact]");
  CHECK(c.label() != b.label());
  CHECK(d.label() != c.label());
  CHECK(d.label(50.0) == "ProCuRL-softmax[exact,pos*]");
  for (auto s : {Strategy::kProcurlArgmax, Strategy::kProcurlSoftmax, Strategy::kProcurlEnv, Strategy::kProcurlVal,
                 Strategy::kProcurlGeneralized, Strategy::kIid, Strategy::kEasy, Strategy::kHard, Strategy::kSpaceAlt}) {
    CHECK(strategy_from_string(to_string(s)) == s);
  }
}

TEST_CASE("pos table validation") {
  auto t = PoSTable::zeros(3);
  CHECK(t.pos_star == std::vector<double>{1, 1, 1});
  CHECK_NOTHROW(t.validate());
  t.pos_t[1] = 1.5;
  CHECK_THROWS_AS(t.validate(), ContractError);
  t = PoSTable::zeros(3);
  t.pos_star.pop_back();
  CHECK_THROWS_AS(t.validate(), ContractError);
}
