#include <gtest/gtest.h>
#include <httplib.h>

#include <filesystem>
#include <random>
#include <thread>

#include "collex/annotation.hpp"
#include "collex/error.hpp"
#include "collex/server.hpp"
#include "oracles.hpp"

using namespace collex;
using namespace collex::annotation;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no collex::Error thrown";
  return ErrorCode::integrity;
}

const std::vector<std::string> team{"ann", "bob", "cat"};

std::vector<PairRef> pairs(std::size_t n) {
  std::vector<PairRef> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({"lemma" + std::to_string(i), "C" + std::to_string(i % 3), "Name", {"surf"}});
  }
  return out;
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("collex-anno-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

RoundService::Clock fixed_clock() {
  return [] { return std::string("2020-01-01T00:00:00Z"); };
}

}  // namespace

TEST(Split, NinePairsGiveThreeSetsAndSixTasksEach) {
  const auto tasks = split_and_assign(pairs(9), team, 1);
  std::map<int, int> set_sizes;
  std::map<std::string, int> load;
  for (const auto& t : tasks) {
    ++set_sizes[t.set_index];
    EXPECT_NE(t.assigned_annotators[0], t.assigned_annotators[1]);
    for (const auto& a : t.assigned_annotators) ++load[a];
    EXPECT_EQ(t.assigned_annotators[0], team[static_cast<std::size_t>(t.set_index)]);
    EXPECT_EQ(t.assigned_annotators[1], team[static_cast<std::size_t>(t.set_index + 1) % 3]);
  }
  EXPECT_EQ(set_sizes, (std::map<int, int>{{0, 3}, {1, 3}, {2, 3}}));
  for (const auto& a : team) EXPECT_EQ(load[a], 6);
}

TEST(Split, SizesDifferByAtMostOneAndAreDeterministic) {
  for (std::size_t n = 3; n < 40; ++n) {
    const auto tasks = split_and_assign(pairs(n), team, n);
    std::array<int, 3> sizes{};
    for (const auto& t : tasks) ++sizes[static_cast<std::size_t>(t.set_index)];
    const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
    EXPECT_LE(*hi - *lo, 1);
    EXPECT_EQ(tasks.size(), n);
  }
  const auto a = split_and_assign(pairs(10), team, 5);
  const auto b = split_and_assign(pairs(10), team, 5);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].pair_id, b[i].pair_id);
    EXPECT_EQ(a[i].set_index, b[i].set_index);
  }
  EXPECT_EQ(code_of([] { split_and_assign(pairs(9), {"a", "b"}, 0); }), ErrorCode::configuration);
}

TEST(Context, TenOfManyAllOfFewAndLowContextFlag) {
  std::vector<corpus::Tweet> tweets;
  for (int i = 0; i < 25; ++i) tweets.push_back({"m" + std::to_string(i), "so much surf now", "en", {}, false, false});
  for (int i = 0; i < 4; ++i) tweets.push_back({"f" + std::to_string(i), "a rare one here", "en", {}, false, false});
  const auto index = corpus::ContextIndex::build(tweets);
  auto tasks = split_and_assign(pairs(3), team, 0);
  attach_context(tasks[0], index, 1);
  EXPECT_EQ(tasks[0].context_tweets.size(), 10u);
  tasks[1].surfaces = {"rare one"};
  attach_context(tasks[1], index, 1);
  EXPECT_EQ(tasks[1].context_tweets.size(), 4u);
  tasks[2].surfaces = {"absent"};
  attach_context(tasks[2], index, 1);
  EXPECT_TRUE(tasks[2].context_tweets.empty());
  EXPECT_TRUE(tasks[2].low_context);
}

TEST(Kappa, WorkedExampleAndPerfectAgreement) {
  const std::vector<int> a{1, 1, 0, 0, 2, 2}, b{1, 0, 0, 0, 2, 1};
  const auto k = cohen_kappa(a, b);
  EXPECT_NEAR(k.observed_agreement, 4.0 / 6, 1e-15);
  EXPECT_NEAR(k.expected_agreement, 1.0 / 3, 1e-15);
  EXPECT_NEAR(k.kappa, 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(cohen_kappa(a, a).kappa, 1.0);
  const std::vector<int> ones(5, 1), zeros(5, 0);
  EXPECT_LE(cohen_kappa(ones, zeros).kappa, 0.0);
  EXPECT_TRUE(cohen_kappa(ones, ones).degenerate);
  EXPECT_EQ(cohen_kappa(ones, ones).kappa, 1.0);
  EXPECT_EQ(code_of([] { cohen_kappa(std::vector<int>{}, std::vector<int>{}); }), ErrorCode::empty_input);
  EXPECT_EQ(code_of([] { cohen_kappa(std::vector<int>{1}, std::vector<int>{1, 0}); }),
            ErrorCode::invalid_argument);
}

TEST(Kappa, AgreesWithContingencyOracleAndIsSymmetric) {
  std::mt19937_64 gen(31);
  for (int i = 0; i < 500; ++i) {
    const auto n = 1 + gen() % 40;
    std::vector<int> a(n), b(n);
    for (std::size_t j = 0; j < n; ++j) {
      a[j] = static_cast<int>(gen() % 3);
      b[j] = gen() % 4 == 0 ? static_cast<int>(gen() % 3) : a[j];
    }
    const auto got = cohen_kappa(a, b);
    const auto want = oracle::cohen_kappa(a, b);
    ASSERT_NEAR(got.kappa, want.kappa, 1e-12);
    ASSERT_NEAR(got.observed_agreement, want.p_o, 1e-12);
    ASSERT_NEAR(cohen_kappa(b, a).kappa, got.kappa, 1e-12);
  }
}

TEST(Kappa, KeyedOverlapOnly) {
  const std::map<std::string, int> a{{"p1", 1}, {"p2", 0}, {"p3", 2}};
  const std::map<std::string, int> b{{"p2", 0}, {"p3", 2}, {"p4", 1}};
  EXPECT_EQ(cohen_kappa(a, b).n_items, 2u);
  const std::map<std::string, int> c{{"zz", 1}};
  EXPECT_EQ(code_of([&] { cohen_kappa(a, c); }), ErrorCode::empty_input);
}

TEST(Adjudicate, AgreementResolutionAndErrors) {
  const std::vector<TwoLabels> p{{"a", 1, 1}, {"b", 0, 1}};
  EXPECT_EQ(code_of([&] { adjudicate(p, {}); }), ErrorCode::incomplete_adjudication);
  const auto out = adjudicate(p, {{"b", {1, ""}}});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0], (FinalLabel{"a", 1, false, ""}));
  EXPECT_EQ(out[1].label, 1);
  EXPECT_TRUE(out[1].adjudicated);
  EXPECT_EQ(code_of([&] { adjudicate(p, {{"b", {2, ""}}}); }), ErrorCode::validation);
  EXPECT_EQ(adjudicate(p, {{"b", {2, "neither fits"}}})[1].label, 2);
}

TEST(Sanity, SampleSizeAndAccuracyRendering) {
  curation::Dictionary d;
  for (int i = 0; i < 5; ++i) {
    d.adopt("C1", "Fever", {"l" + std::to_string(i), {"s" + std::to_string(i)}, 1, 1.0});
  }
  const auto index = corpus::ContextIndex::build({});
  EXPECT_EQ(sanity_sample(d, 3, index, 0).size(), 3u);
  EXPECT_EQ(sanity_sample(d, 100, index, 0).size(), 5u);
  EXPECT_EQ(render_accuracy(95, 100), "95%");
  EXPECT_EQ(render_accuracy(2, 3), "66.7%");
}

TEST(RoundService, LabelsProgressOverwriteAndAuthorization) {
  TempDir dir;
  RoundService svc(dir.path, fixed_clock());
  const auto tasks = split_and_assign(pairs(9), team, 0);
  svc.open_round(1, tasks);
  const auto& t = tasks[0];
  const auto& who = t.assigned_annotators[0];
  auto ack = svc.record_label({t.pair_id, who, 1, ""});
  EXPECT_FALSE(ack.overwritten);
  EXPECT_EQ(ack.annotator_done, 1u);
  EXPECT_EQ(ack.annotator_total, 6u);
  ack = svc.record_label({t.pair_id, who, 0, ""});
  EXPECT_TRUE(ack.overwritten);
  EXPECT_EQ(ack.annotator_done, 1u);
  EXPECT_EQ(svc.audit(1).size(), 1u);

  std::string outsider;
  for (const auto& a : team) {
    if (a != t.assigned_annotators[0] && a != t.assigned_annotators[1]) outsider = a;
  }
  EXPECT_EQ(code_of([&] { svc.record_label({t.pair_id, outsider, 1, ""}); }), ErrorCode::authorization);
  EXPECT_EQ(code_of([&] { svc.record_label({"r1-9999", who, 1, ""}); }), ErrorCode::not_found);
  EXPECT_EQ(code_of([&] { svc.record_label({t.pair_id, who, 5, ""}); }), ErrorCode::validation);
}

namespace {

// Labels every task: the first annotator always says 1, the second agrees
// except on pairs whose id ends in an odd digit.
void label_everything(RoundService& svc, const std::vector<AnnotationTask>& tasks) {
  for (const auto& t : tasks) {
    svc.record_label({t.pair_id, t.assigned_annotators[0], 1, ""});
    const bool odd = (t.pair_id.back() - '0') % 2 == 1;
    svc.record_label({t.pair_id, t.assigned_annotators[1], odd ? 0 : 1, ""});
  }
}

}  // namespace

TEST(RoundService, CloseNeedsAdjudicationThenExportsLabels) {
  TempDir dir;
  RoundService svc(dir.path, fixed_clock());
  const auto tasks = split_and_assign(pairs(9), team, 0);
  svc.open_round(1, tasks);
  EXPECT_EQ(code_of([&] { svc.close(1); }), ErrorCode::incomplete_round);
  label_everything(svc, tasks);
  const auto open = svc.disagreements(1, true);
  const auto odd = std::count_if(tasks.begin(), tasks.end(),
                                 [](const AnnotationTask& t) { return (t.pair_id.back() - '0') % 2; });
  EXPECT_EQ(open.size(), static_cast<std::size_t>(odd));
  EXPECT_EQ(code_of([&] { svc.close(1); }), ErrorCode::incomplete_adjudication);
  for (const auto& d : open) svc.resolve(1, d.pair_id, {1, ""});
  svc.close(1);
  EXPECT_TRUE(svc.closed(1));
  const auto labels = svc.export_labels(1);
  ASSERT_EQ(labels.size(), 9u);
  for (const auto& l : labels) EXPECT_EQ(l.label, 1);
  EXPECT_EQ(code_of([&] { svc.record_label({tasks[0].pair_id, tasks[0].assigned_annotators[0], 2, ""}); }),
            ErrorCode::conflict);
}

TEST(RoundService, KappaIsWeightedOverSets) {
  TempDir dir;
  RoundService svc(dir.path, fixed_clock());
  const auto tasks = split_and_assign(pairs(12), team, 3);
  svc.open_round(1, tasks);
  label_everything(svc, tasks);
  const auto k = svc.kappa(1);
  double weighted = 0;
  std::size_t n = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    std::vector<int> a, b;
    for (const auto& t : tasks) {
      if (t.set_index != static_cast<int>(s)) continue;
      a.push_back(*svc.label_of(t.pair_id, t.assigned_annotators[0]));
      b.push_back(*svc.label_of(t.pair_id, t.assigned_annotators[1]));
    }
    ASSERT_TRUE(k.per_set[s]);
    const auto want = oracle::cohen_kappa(a, b).kappa;
    EXPECT_NEAR(k.per_set[s]->kappa, want, 1e-12);
    weighted += want * static_cast<double>(a.size());
    n += a.size();
  }
  ASSERT_TRUE(k.weighted);
  EXPECT_NEAR(k.weighted->kappa, weighted / static_cast<double>(n), 1e-12);
}

TEST(RoundService, JournalReplayReconstructsState) {
  TempDir dir;
  const auto tasks = split_and_assign(pairs(10), team, 8);
  nlohmann::ordered_json progress, audit;
  std::vector<curation::LabeledPair> labels;
  {
    RoundService svc(dir.path, fixed_clock(), 7);
    svc.open_round(2, tasks);
    label_everything(svc, tasks);
    svc.record_label({tasks[1].pair_id, tasks[1].assigned_annotators[0], 2, ""});
    for (const auto& d : svc.disagreements(2, true)) svc.resolve(2, d.pair_id, {d.labels[1], ""});
    progress = svc.progress(2);
    audit = svc.audit(2);
    labels = svc.export_labels(2);
  }
  EXPECT_TRUE(fs::exists(dir.path / "snapshot.json"));
  RoundService again(dir.path, fixed_clock(), 7);
  EXPECT_EQ(again.progress(2).dump(), progress.dump());
  EXPECT_EQ(again.audit(2).dump(), audit.dump());
  EXPECT_EQ(again.export_labels(2), labels);
  RoundService no_snapshot_dir(dir.path, fixed_clock(), 1000);
  EXPECT_EQ(no_snapshot_dir.export_labels(2), labels);
}

namespace {

struct LiveServer {
  TempDir dir;
  RoundService service{dir.path, fixed_clock()};
  httplib::Server server;
  std::thread thread;
  int port = 0;

  explicit LiveServer(const std::string& token) {
    install_routes(server, service, ServerOptions{token, {}});
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~LiveServer() {
    server.stop();
    thread.join();
  }
  httplib::Client client(const std::string& token) const {
    httplib::Client c("127.0.0.1", port);
    if (!token.empty()) c.set_default_headers({{"X-Collex-Token", token}});
    return c;
  }
};

nlohmann::json label_body(const std::string& pair, const std::string& who, int label) {
  return {{"pair_id", pair}, {"annotator_id", who}, {"label", label}};
}

}  // namespace

TEST(Http, TokenAssignmentAndRoundLifecycle) {
  LiveServer live("secret");
  const auto tasks = split_and_assign(pairs(3), team, 2);
  live.service.open_round(1, tasks);

  auto anon = live.client("");
  EXPECT_EQ(anon.Get("/api/rounds")->status, 401);

  auto c = live.client("secret");
  auto rounds = c.Get("/api/rounds");
  ASSERT_EQ(rounds->status, 200);
  EXPECT_EQ(nlohmann::json::parse(rounds->body)["rounds"][0]["round"], 1);

  EXPECT_EQ(c.Get("/api/rounds/1/next")->status, 400);
  for (const auto& who : team) {
    for (;;) {
      auto next = c.Get(("/api/rounds/1/next?annotator=" + who).c_str());
      ASSERT_TRUE(next);
      if (next->status == 204) break;
      ASSERT_EQ(next->status, 200);
      const auto task = nlohmann::json::parse(next->body);
      const std::string pair = task["pair_id"];
      const bool first = task["assigned_annotators"][0] == who;
      const int label = first ? 1 : 0;
      auto res = c.Post("/api/labels", label_body(pair, who, label).dump(), "application/json");
      ASSERT_EQ(res->status, 200) << res->body;
    }
  }

  const auto outsider_task = tasks[0];
  std::string outsider;
  for (const auto& a : team) {
    if (a != outsider_task.assigned_annotators[0] && a != outsider_task.assigned_annotators[1]) outsider = a;
  }
  EXPECT_EQ(c.Post("/api/labels", label_body(outsider_task.pair_id, outsider, 1).dump(), "application/json")->status,
            403);
  EXPECT_EQ(c.Post("/api/labels", label_body(outsider_task.pair_id, outsider_task.assigned_annotators[0], 7).dump(),
                   "application/json")->status,
            400);
  EXPECT_EQ(c.Post("/api/labels", "not json", "application/json")->status, 400);
  EXPECT_EQ(c.Get("/api/pairs/r1-4242/context")->status, 404);

  auto ctx = c.Get(("/api/pairs/" + outsider_task.pair_id + "/context").c_str());
  ASSERT_EQ(ctx->status, 200);
  EXPECT_EQ(nlohmann::json::parse(ctx->body)["lemma"], outsider_task.lemma);

  auto progress = nlohmann::json::parse(c.Get("/api/rounds/1/progress")->body);
  EXPECT_FALSE(progress.empty());

  auto kappa = nlohmann::json::parse(c.Get("/api/rounds/1/kappa")->body);
  EXPECT_EQ(kappa["per_set"].size(), 3u);

  EXPECT_EQ(c.Post("/api/rounds/1/close", "", "application/json")->status, 409);
  auto dis = nlohmann::json::parse(c.Get("/api/rounds/1/disagreements?unresolved=1")->body);
  ASSERT_EQ(dis["disagreements"].size(), 3u);
  nlohmann::json resolutions = nlohmann::json::array();
  for (const auto& d : dis["disagreements"]) resolutions.push_back({{"pair_id", d["pair_id"]}, {"label", 1}});
  auto adj = c.Post("/api/rounds/1/adjudicate", nlohmann::json{{"resolutions", resolutions}}.dump(),
                    "application/json");
  ASSERT_EQ(adj->status, 200) << adj->body;
  EXPECT_EQ(nlohmann::json::parse(adj->body)["unresolved"], 0);

  auto labels = c.Get("/api/rounds/1/labels");
  ASSERT_EQ(labels->status, 200);
  EXPECT_EQ(labels->body.substr(0, labels->body.find('\n')), curation::labels_header);
  EXPECT_EQ(c.Post("/api/rounds/1/close", "", "application/json")->status, 200);
  EXPECT_EQ(nlohmann::json::parse(c.Get("/api/rounds/1/audit")->body)["audit"].size(), 0u);
}

TEST(Http, StatusMapping) {
  EXPECT_EQ(http_status_for(ErrorCode::authorization), 403);
  EXPECT_EQ(http_status_for(ErrorCode::not_found), 404);
  EXPECT_EQ(http_status_for(ErrorCode::incomplete_adjudication), 409);
  EXPECT_EQ(http_status_for(ErrorCode::io), 500);
}
