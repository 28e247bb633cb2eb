#include "doctest.h"

#include "mpst/gateway.hpp"
#include "mpst/syntax.hpp"
#include "mpst/typecheck.hpp"
#include "support/corpus.hpp"
#include "support/generators.hpp"

#include <httplib.h>

#include <chrono>
#include <future>
#include <thread>

using namespace mpst;
using namespace std::chrono_literals;

namespace {

std::string error_code(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return "";
}

Config elaborated(const std::string& source) { return initial_config(elaborate(typecheck(parse_program(source)))); }

std::optional<PendingChoice> wait_pending(const Gateway& gw, const std::string& sid, int p, int sync_id)
{
    auto deadline = std::chrono::steady_clock::now() + 10s;
    while (std::chrono::steady_clock::now() < deadline) {
        try {
            auto pc = gw.pending(sid, p);
            if (pc && pc->sync_id == sync_id) return pc;
        } catch (const Error&) {
        }
        std::this_thread::sleep_for(1ms);
    }
    return std::nullopt;
}

// Runs `cfg` against the gateway on a background thread.
std::future<Trace> start(Gateway& gw, const Config& cfg)
{
    return std::async(std::launch::async, [&gw, cfg] {
        GatewayPolicy policy(gw, 0);
        return run(cfg, policy, 10000, [&](const StepLabel& s) { policy.observe(s); });
    });
}

Decision decide(const std::string& sid, int sync_id, int p, std::set<std::string> accepted)
{
    return Decision{sid, sync_id, p, std::move(accepted), {}};
}

// Accepts every offered label for every participant until the run ends.
void accept_everything(Gateway& gw, std::future<Trace>& running, const std::string& sid, int participants)
{
    std::set<std::pair<int, int>> done;
    while (running.wait_for(1ms) != std::future_status::ready) {
        for (int p = 1; p <= participants; ++p) {
            auto pc = gw.pending(sid, p);
            if (!pc || !done.insert({pc->sync_id, p}).second) continue;
            std::set<std::string> all;
            for (const auto& o : pc->offered) all.insert(o.label);
            gw.submit(decide(sid, pc->sync_id, p, all));
        }
    }
}

const std::string guisync_source =
    "type T = {^go: 1=>2:1<Int>;end}; chan a : T;"
    "/a[2..2](s).guisync((s),2){^go(n: Int): s<<<n>;end} | a[2](s).guisync((s),2){^go(m: Int): s>>(x);end}";

}  // namespace

TEST_CASE("sessions and participants must exist")
{
    Gateway gw;
    CHECK(error_code([&] { gw.pending("1", 1); }) == "E-NOSESSION");
    gw.open_session("1", 3);
    CHECK(gw.sessions() == std::vector<std::string>{"1"});
    CHECK(error_code([&] { gw.pending("1", 4); }) == "E-NOPART");
    CHECK(error_code([&] { gw.pending("1", 0); }) == "E-NOPART");
    CHECK_FALSE(gw.pending("1", 2).has_value());
    CHECK(error_code([&] { gw.submit(decide("2", 1, 1, {})); }) == "E-NOSESSION");
    CHECK(error_code([&] { gw.submit(decide("1", 1, 1, {})); }) == "E-STALE");
}

TEST_CASE("three participants agree on the least common label")
{
    Gateway gw;
    auto running = start(gw, elaborated(test::read_corpus("healthcare.mps")));

    auto doctor = wait_pending(gw, "1", 2, 1);
    REQUIRE(doctor);
    REQUIRE(doctor->offered.size() == 2);
    CHECK(doctor->offered[0].label == "CaseD");
    CHECK_FALSE(doctor->offered[0].mandatory);
    CHECK(doctor->offered[1].label == "CaseN");
    CHECK(doctor->offered[1].mandatory);
    for (int p = 1; p <= 3; ++p) CHECK(wait_pending(gw, "1", p, 1));

    std::vector<std::future<SubmitResult>> clients;
    std::vector<std::set<std::string>> sets{{"CaseD", "CaseN"}, {"CaseD", "CaseN"}, {"CaseD"}};
    std::promise<void> go;
    std::shared_future<void> ready = go.get_future().share();
    for (int p = 1; p <= 3; ++p)
        clients.push_back(std::async(std::launch::async, [&, p] {
            ready.wait();
            return gw.submit(decide("1", 1, p, sets[p - 1]));
        }));
    go.set_value();
    int resolutions = 0;
    for (auto& c : clients) {
        SubmitResult r = c.get();
        if (r.resolved) {
            ++resolutions;
            CHECK(r.resolved->label == "CaseD");
            CHECK(r.resolved->sync_id == 1);
        }
    }
    CHECK(resolutions == 1);
    auto events = gw.events_after(0, 1000);
    REQUIRE(events.size() == 1);
    CHECK(events[0].label == "CaseD");
    for (int p = 1; p <= 3; ++p) CHECK(error_code([&] { gw.submit(decide("1", 1, p, {"CaseD"})); }) == "E-STALE");

    accept_everything(gw, running, "1", 3);
    Trace t = running.get();
    CHECK(t.verdict == Verdict::Terminated);
    std::vector<std::string> synced;
    for (const auto& s : t.steps)
        if (s.kind == StepKind::Sync) synced.push_back(s.label);
    CHECK(synced == std::vector<std::string>{"CaseD", "CaseDD"});
    CHECK(gw.events_after(0, 0).size() == 2);
    CHECK(gw.pending("1", 2) == std::nullopt);
}

TEST_CASE("acceptances are revocable until resolution")
{
    Gateway gw;
    auto running = start(gw, elaborated(test::read_corpus("healthcare.mps")));
    REQUIRE(wait_pending(gw, "1", 3, 1));
    CHECK_FALSE(gw.submit(decide("1", 1, 2, {})).resolved);
    CHECK_FALSE(gw.submit(decide("1", 1, 1, {"CaseN"})).resolved);
    CHECK_FALSE(gw.submit(decide("1", 1, 3, {"CaseN"})).resolved);
    CHECK_FALSE(gw.submit(decide("1", 1, 1, {"CaseD"})).resolved);
    CHECK_FALSE(gw.submit(decide("1", 1, 2, {"CaseN"})).resolved);
    auto r = gw.submit(decide("1", 1, 1, {"CaseN"}));
    REQUIRE(r.resolved);
    CHECK(r.resolved->label == "CaseN");

    auto nurse = wait_pending(gw, "1", 3, 2);
    REQUIRE(nurse);
    REQUIRE(nurse->received_log.size() == 1);
    CHECK(nurse->received_log[0].channel == "d");
    CHECK(nurse->received_log[0].value == "\"data\"");
    CHECK(gw.pending("1", 2)->received_log.empty());
    accept_everything(gw, running, "1", 3);
    CHECK(running.get().verdict == Verdict::Terminated);
}

TEST_CASE("decisions are checked against the pending choice")
{
    Gateway gw;
    auto running = start(gw, elaborated(guisync_source));
    auto first = wait_pending(gw, "1", 1, 1);
    REQUIRE(first);
    REQUIRE(first->offered.size() == 1);
    CHECK(first->offered[0].mandatory);
    REQUIRE(first->offered[0].args.size() == 1);
    CHECK(first->offered[0].args[0].first == "n");
    REQUIRE(wait_pending(gw, "1", 2, 1));

    CHECK(error_code([&] { gw.submit(decide("1", 1, 1, {"stop"})); }) == "E-BADLABEL");
    CHECK(error_code([&] { gw.submit(decide("1", 1, 1, {"go"})); }) == "E-MISSINGARG");
    Decision wrong = decide("1", 1, 1, {"go"});
    wrong.values["go"]["n"] = "seven";
    CHECK(error_code([&] { gw.submit(wrong); }) == "E-MISSINGARG");
    CHECK(error_code([&] { gw.submit(decide("1", 2, 1, {})); }) == "E-STALE");

    Decision one = decide("1", 1, 1, {"go"});
    one.values["go"]["n"] = 7;
    Decision two = decide("1", 1, 2, {"go"});
    two.values["go"]["m"] = 3;
    CHECK_FALSE(gw.submit(one).resolved);
    CHECK(gw.submit(two).resolved);
    Trace t = running.get();
    std::string sent;
    for (const auto& s : t.steps)
        if (s.kind == StepKind::Send) sent = s.payload;
    CHECK(sent == "7");
}

TEST_CASE("random acceptances resolve soundly")
{
    std::mt19937_64 rng(5);
    for (int round = 0; round < 40; ++round) {
        Gateway gw;
        int n = test::uniform(rng, 2, 4);
        SyncRequest req;
        req.session = 1;
        req.sync_index = 1;
        std::vector<std::string> pool{"a", "b", "c", "d"};
        std::set<std::string> mandatory;
        for (const auto& l : pool)
            if (test::coin(rng, 0.3)) mandatory.insert(l);
        if (mandatory.empty()) mandatory.insert(test::pick(rng, pool));
        for (int p = 0; p < n; ++p) {
            std::vector<std::string> offered(mandatory.begin(), mandatory.end());
            for (const auto& l : pool)
                if (!mandatory.count(l) && test::coin(rng)) offered.push_back(l);
            req.offered.push_back(offered);
            req.mandatory.push_back({mandatory.begin(), mandatory.end()});
            req.own_args.emplace_back();
        }
        auto waiting = std::async(std::launch::async, [&] { return gw.await("1", req); });
        REQUIRE(wait_pending(gw, "1", 1, 1));

        std::map<int, std::set<std::string>> last;
        std::optional<Resolution> resolved;
        for (int k = 0; k < 30 && !resolved; ++k) {
            int p = test::uniform(rng, 1, n);
            std::set<std::string> accepted;
            for (const auto& l : req.offered[p - 1])
                if (test::coin(rng)) accepted.insert(l);
            last[p] = accepted;
            resolved = gw.submit(decide("1", 1, p, accepted)).resolved;
        }
        if (!resolved)
            for (int p = 1; p <= n && !resolved; ++p) {
                last[p].insert(mandatory.begin(), mandatory.end());
                resolved = gw.submit(decide("1", 1, p, last[p])).resolved;
            }
        REQUIRE(resolved);
        std::set<std::string> common(pool.begin(), pool.end());
        for (int p = 1; p <= n; ++p) {
            std::set<std::string> both;
            std::set_intersection(common.begin(), common.end(), last[p].begin(), last[p].end(),
                                  std::inserter(both, both.end()));
            common = both;
        }
        CHECK(common.count(resolved->label));
        CHECK(resolved->label == *common.begin());
        CHECK(waiting.get().label == resolved->label);
        CHECK(error_code([&] { gw.submit(decide("1", 1, 1, {})); }) == "E-STALE");
    }
}

TEST_CASE("shutdown releases a waiting interpreter")
{
    Gateway gw;
    auto running = start(gw, elaborated(test::read_corpus("healthcare.mps")));
    REQUIRE(wait_pending(gw, "1", 1, 1));
    gw.shutdown();
    CHECK(error_code([&] { running.get(); }) == "E-CLOSED");
}

TEST_CASE("json encoding")
{
    PendingChoice pc{"4", 2, 1, {{"go", true, {{"n", SimpleType{}}}}}, {{"d", "\"x\""}}};
    auto j = to_json(pc);
    CHECK(j["sessionId"] == "4");
    CHECK(j["syncId"] == "2");
    CHECK(j["participant"] == "1");
    CHECK(j["offered"][0]["args"][0]["type"] == "Int");
    CHECK(j["receivedLog"][0]["channel"] == "d");

    auto d = decision_from_json(nlohmann::json::parse(
        R"({"sessionId":"4","syncId":"2","participant":1,"accepted":["go"],"values":{"go":{"n":5}}})"));
    CHECK(d.sync_id == 2);
    CHECK(d.participant == 1);
    CHECK(d.accepted == std::set<std::string>{"go"});
    CHECK(d.values["go"]["n"] == 5);
    CHECK(error_code([] { decision_from_json(nlohmann::json::parse(R"({"syncId":1})")); }) == "E-PARSE");
    CHECK(error_code([] { decision_from_json(nlohmann::json::parse(R"({"sessionId":"1","syncId":"x","participant":1})")); }) ==
          "E-PARSE");
    CHECK(to_json(Resolution{"1", 3, "CaseD"}).dump() == R"({"label":"CaseD","sid":"1","syncId":"3"})");
}

TEST_CASE("http protocol")
{
    Gateway gw;
    GatewayServer server(gw);
    int port = server.bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    std::thread listener([&] { server.listen(); });
    auto running = start(gw, elaborated(test::read_corpus("healthcare.mps")));
    REQUIRE(wait_pending(gw, "1", 1, 1));

    httplib::Client cli("127.0.0.1", port);
    auto sessions = cli.Get("/sessions");
    REQUIRE(sessions);
    CHECK(nlohmann::json::parse(sessions->body)["sessions"] == nlohmann::json::array({"1"}));

    auto pending = cli.Get("/sessions/1/participants/2/pending");
    REQUIRE(pending);
    CHECK(pending->status == 200);
    auto pj = nlohmann::json::parse(pending->body);
    CHECK(pj["offered"][1]["label"] == "CaseN");
    CHECK(pj["offered"][1]["mandatory"] == true);
    auto missing = cli.Get("/sessions/9/participants/1/pending");
    REQUIRE(missing);
    CHECK(missing->status == 404);
    CHECK(nlohmann::json::parse(missing->body)["code"] == "E-NOSESSION");

    std::promise<std::string> first_event;
    std::thread sse([&] {
        httplib::Client events("127.0.0.1", port);
        std::string buffer;
        bool delivered = false;
        events.Get("/events", [&](const char* data, size_t len) {
            buffer.append(data, len);
            if (buffer.find("\n\n") == std::string::npos) return true;
            first_event.set_value(buffer);
            delivered = true;
            return false;
        });
        if (!delivered) first_event.set_value("");
    });

    std::vector<std::set<std::string>> sets{{"CaseD", "CaseN"}, {"CaseD", "CaseN"}, {"CaseD"}};
    nlohmann::json last;
    for (int p = 1; p <= 3; ++p) {
        nlohmann::json body = {{"sessionId", "1"}, {"syncId", "1"}, {"participant", std::to_string(p)},
                               {"accepted", sets[p - 1]}};
        auto res = cli.Post("/sessions/1/participants/" + std::to_string(p) + "/decision", body.dump(),
                            "application/json");
        REQUIRE(res);
        CHECK(res->status == 200);
        last = nlohmann::json::parse(res->body);
    }
    CHECK(last["resolved"]["label"] == "CaseD");
    auto stale = cli.Post("/sessions/1/participants/1/decision",
                          R"({"sessionId":"1","syncId":"1","participant":"1","accepted":["CaseD"]})",
                          "application/json");
    REQUIRE(stale);
    CHECK(stale->status == 409);
    CHECK(nlohmann::json::parse(stale->body)["code"] == "E-STALE");

    std::string event = first_event.get_future().get();
    CHECK(event.rfind("event: resolved\ndata: ", 0) == 0);
    CHECK(event.find(R"("label":"CaseD")") != std::string::npos);

    accept_everything(gw, running, "1", 3);
    CHECK(running.get().verdict == Verdict::Terminated);
    gw.shutdown();
    server.stop();
    sse.join();
    listener.join();
}
