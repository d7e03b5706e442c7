#include <gtest/gtest.h>

#include <thread>

#include "navnet/app/service.hpp"
#include "support.hpp"

using namespace navnet;
using namespace navnet::app;
using navnet::testing::TempDir;

namespace {

ml::TrainedModel inbound_share_model() {
    const auto schema = feature_schema(FeatureMode::binary);
    const auto col = *schema.index_of("from_misinformation");
    Matrix x;
    std::vector<int> y;
    for (int i = 0; i < 40; ++i) {
        std::vector<double> row(schema.columns.size(), 0.0);
        row[col] = (i % 2 ? 0.6 : 0.0) + 0.01 * i;
        x.append_row(row);
        y.push_back(i % 2);
    }
    ml::ModelConfig c;
    c.algorithm = ml::Algorithm::logreg;
    return ml::train(c, schema, x, y);
}

// G1 plus a second unlabeled neighbour d of b, so the run flags two domains.
GraphSet fixture_graphs() {
    GraphSet s;
    for (const Month m : {Month{2022, 10}, Month{2022, 11}}) {
        s.emplace(m, NavigationGraph::from_parts(m, {},
                                                 {{"a.example", "b.example", 5000},
                                                  {"b.example", "a.example", 4000},
                                                  {"google.com", "a.example", 6000},
                                                  {"facebook.com", "a.example", 3500},
                                                  {"a.example", "c.example", 3000},
                                                  {"b.example", "d.example", 4000},
                                                  {"google.com", "d.example", 3000}}));
    }
    return s;
}

class ServiceTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto graphs = fixture_graphs();
        const auto store = navnet::testing::g1_store();
        DeploymentOptions o;
        o.run_id = "r1";
        const auto cands = select_candidates(graphs, store, default_registry(), {});
        const auto run = run_deployment(cands, graphs, store, default_registry(), inbound_share_model(),
                                        "misinformation", {}, o);
        ASSERT_EQ(run.positives, (std::vector<Domain>{"c.example", "d.example"}));
        write_run(run, dir.path() / "runs" / "r1");
    }

    ReviewService make() {
        ReviewService::Options o;
        o.graphs = fixture_graphs();
        o.labels = navnet::testing::g1_store();
        o.events_path = dir.file("events.jsonl");
        o.runs_dir = dir.path() / "runs";
        o.clock = [] { return std::string("2023-01-01T00:00:00Z"); };
        return ReviewService(std::move(o));
    }

    static std::string review(const std::string& domain, const std::string& verdict, const std::string& run = "r1") {
        return nlohmann::json{{"run", run}, {"domain", domain}, {"verdict", verdict}, {"reviewer", "amy"}}.dump();
    }

    TempDir dir;
};

}  // namespace

TEST_F(ServiceTest, QueueOrderedByMinimumConfidence) {
    auto svc = make();
    const auto r = svc.queue("r1", "", "");
    ASSERT_EQ(r.status, 200);
    const auto& entries = r.body.at("entries");
    ASSERT_EQ(entries.size(), 2u);
    EXPECT_GE(entries[0].at("min_confidence").get<double>(), entries[1].at("min_confidence").get<double>());
    EXPECT_EQ(entries[0].at("status"), "pending");
    EXPECT_EQ(r.body.at("total"), 2);

    const auto page2 = svc.queue("r1", "2", "1");
    ASSERT_EQ(page2.body.at("entries").size(), 1u);
    EXPECT_EQ(page2.body.at("entries")[0].at("domain"), entries[1].at("domain"));
    EXPECT_EQ(svc.queue("r1", "0", "").status, 400);
    EXPECT_EQ(svc.queue("r1", "1", "5000").status, 400);
    EXPECT_EQ(svc.queue("r1", "x", "").status, 400);
    EXPECT_EQ(svc.queue("nope", "", "").status, 404);
}

TEST_F(ServiceTest, ReviewWritesOneEventAndUpdatesQueue) {
    auto svc = make();
    const auto r = svc.post_review(review("c.example", "confirmed_misinformation"));
    ASSERT_EQ(r.status, 200) << r.body.dump();
    EXPECT_EQ(r.body.at("status"), "reviewed");
    EXPECT_EQ(r.body.at("verdict"), "confirmed_misinformation");
    EXPECT_EQ(r.body.at("reviewed_at"), "2023-01-01T00:00:00Z");
    EXPECT_EQ(read_event_log(dir.file("events.jsonl")).size(), 1u);
    EXPECT_EQ(read_event_log((dir.path() / "runs" / "r1" / "reviews.jsonl").string()).size(), 1u);
    EXPECT_TRUE(svc.labels().is_misinformation("c.example"));

    // Repeating the same verdict is acknowledged without a second event.
    EXPECT_EQ(svc.post_review(review("c.example", "confirmed_misinformation")).status, 200);
    EXPECT_EQ(read_event_log(dir.file("events.jsonl")).size(), 1u);
    EXPECT_EQ(svc.post_review(review("c.example", "rejected")).status, 409);
    EXPECT_EQ(read_event_log(dir.file("events.jsonl")).size(), 1u);
    EXPECT_EQ(svc.runs().body.at("runs")[0].at("reviewed"), 1);
}

TEST_F(ServiceTest, RejectsBadRequests) {
    auto svc = make();
    EXPECT_EQ(svc.post_review("{not json").status, 400);
    EXPECT_EQ(svc.post_review("[]").status, 400);
    EXPECT_EQ(svc.post_review(R"({"run":"r1","domain":"c.example","verdict":"confirmed_misinformation"})").status, 400);
    EXPECT_EQ(svc.post_review(review("c.example", "maybe")).status, 400);
    EXPECT_EQ(svc.post_review(R"({"run":"r1","domain":"c.example","verdict":"rejected","reviewer":"a","checklist":[1]})").status,
              400);
    EXPECT_EQ(svc.post_review(review("a.example", "rejected")).status, 404);  // labeled, never flagged
    EXPECT_EQ(svc.post_review(review("c.example", "rejected", "r9")).status, 404);
    EXPECT_TRUE(read_event_log(dir.file("events.jsonl")).empty());
}

TEST_F(ServiceTest, DomainViewHasFeaturesAndNeighbours) {
    auto svc = make();
    const auto r = svc.domain("A.EXAMPLE");
    ASSERT_EQ(r.status, 200);
    EXPECT_EQ(r.body.at("class"), "misinformation");
    const auto& m0 = r.body.at("months")[0];
    EXPECT_TRUE(m0.at("present").get<bool>());
    EXPECT_DOUBLE_EQ(m0.at("features").at("to_misinformation").get<double>(), 0.625);
    EXPECT_EQ(m0.at("neighbors").size(), 5u);
    const auto g = svc.domain("google.com");
    EXPECT_EQ(g.body.at("category"), "google");
    EXPECT_EQ(svc.domain("nowhere.example").status, 404);
}

TEST_F(ServiceTest, RestartReconstructsStateFromTheLog) {
    {
        auto svc = make();
        ASSERT_EQ(svc.post_review(review("d.example", "rejected")).status, 200);
    }
    // A stale mirror is rebuilt from the label log on startup.
    write_file((dir.path() / "runs" / "r1" / "reviews.jsonl").string(), "");
    auto again = make();
    const auto entries = again.queue("r1", "", "").body.at("entries");
    for (const auto& e : entries)
        EXPECT_EQ(e.at("status"), e.at("domain") == "d.example" ? "reviewed" : "pending");
    EXPECT_TRUE(again.labels().is_authoritative("d.example"));
    EXPECT_EQ(read_event_log((dir.path() / "runs" / "r1" / "reviews.jsonl").string()).size(), 1u);
    EXPECT_EQ(again.post_review(review("d.example", "confirmed_misinformation")).status, 409);
}

TEST_F(ServiceTest, HttpRoundTrip) {
    auto svc = make();
    httplib::Server server;
    bind_routes(server, svc);
    const int port = server.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port, 0);
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    httplib::Client client("127.0.0.1", port);

    auto h = client.Get("/health");
    ASSERT_TRUE(h);
    EXPECT_EQ(h->status, 200);
    auto post = client.Post("/reviews", review("c.example", "confirmed_misinformation"), "application/json");
    ASSERT_TRUE(post);
    EXPECT_EQ(post->status, 200);
    auto q = client.Get("/runs/r1/queue?page=1&size=10");
    ASSERT_TRUE(q);
    const auto body = nlohmann::json::parse(q->body);
    bool seen = false;
    for (const auto& e : body.at("entries"))
        if (e.at("domain") == "c.example") seen = e.at("status") == "reviewed";
    EXPECT_TRUE(seen);
    EXPECT_EQ(read_event_log(dir.file("events.jsonl")).size(), 1u);

    EXPECT_EQ(client.Post("/reviews", review("a.example", "rejected"), "application/json")->status, 404);
    EXPECT_EQ(client.Post("/reviews", review("c.example", "rejected"), "application/json")->status, 409);
    auto bad = client.Post("/reviews", "{oops", "application/json");
    EXPECT_EQ(bad->status, 400);
    EXPECT_EQ(nlohmann::json::parse(bad->body).at("code"), "parse_error");
    EXPECT_EQ(client.Get("/runs/none/queue")->status, 404);
    EXPECT_EQ(client.Get("/domains/c.example")->status, 200);
    auto missing = client.Get("/nothing");
    EXPECT_EQ(missing->status, 404);
    EXPECT_TRUE(nlohmann::json::parse(missing->body).contains("message"));

    server.stop();
    t.join();
}

TEST_F(ServiceTest, ConcurrentReviewersProduceOneEventPerDomain) {
    auto svc = make();
    std::vector<std::thread> workers;
    std::atomic<int> ok{0}, conflict{0};
    for (int i = 0; i < 8; ++i) {
        workers.emplace_back([&, i] {
            const auto r = svc.post_review(review("c.example", i % 2 ? "rejected" : "confirmed_misinformation"));
            (r.status == 200 ? ok : conflict)++;
            svc.queue("r1", "", "");
        });
    }
    for (auto& w : workers) w.join();
    EXPECT_EQ(read_event_log(dir.file("events.jsonl")).size(), 1u);
    EXPECT_EQ(ok + conflict, 8);
    EXPECT_EQ(conflict, 4);
}
