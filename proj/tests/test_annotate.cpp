#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ac/annotate.hpp"
#include "ac/dataset.hpp"
#include "ac/error.hpp"

#include "httplib.h"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

using namespace ac;

namespace {

const Sample& fixture(std::size_t index) {
    static const Dataset dataset = fixtures::samples();
    return dataset.samples.at(index);
}

std::string read_asset_file(const std::string& rel) {
    std::ifstream in(std::string(AC_ASSET_DIR) + "/" + rel, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
    return text;
}

// In-process transport scripted with canned replies and optional failures.
class ScriptedTransport final : public ChatTransport {
public:
    std::string complete(const std::vector<Message>& messages) const override {
        last_messages = messages;
        ++calls;
        if (failures_before_success > 0) {
            --failures_before_success;
            fail(Errc::ServiceUnreachable, "scripted transport failure");
        }
        REQUIRE(!replies.empty());
        std::string reply = replies.front();
        if (replies.size() > 1) replies.erase(replies.begin());
        return reply;
    }

    mutable std::vector<std::string> replies;
    mutable int failures_before_success = 0;
    mutable int calls = 0;
    mutable std::vector<Message> last_messages;
};

const char* kStage1Reply = R"({
    "causal_events": {
        "E one": {"occur": true, "order": 0, "focal": true},
        "E two": {"occur": true, "order": 1, "focal": false}
    },
    "outcome_event": {"O": {"occur": true, "order": 2}}
})";

const char* kStage2Reply = R"({
    "E one": {"sufficient": true, "necessary": false, "halpern_pearl": false,
               "norm_violated": false, "behavior_intended": true},
    "E two": {"sufficient": true, "necessary": false, "halpern_pearl": false,
               "norm_violated": false, "behavior_intended": false}
})";

AnnotatorConfig external_config() {
    AnnotatorConfig config;
    config.kind = AnnotatorConfig::Kind::External;
    config.base_url = "http://127.0.0.1:1";
    config.max_retries = 2;
    config.backoff_base_seconds = 0.001;
    return config;
}

} // namespace

TEST_CASE("prompt templates are byte-identical to the committed assets") {
    CHECK(prompts::stage1_causal_setting() == read_asset_file("prompts/stage1_causal_setting.txt"));
    CHECK(prompts::stage2_factor_analysis() == read_asset_file("prompts/stage2_factor_analysis.txt"));
    CHECK(prompts::resolver_simultaneous() == read_asset_file("prompts/resolver_simultaneous.txt"));
    CHECK(prompts::resolver_temporal() == read_asset_file("prompts/resolver_temporal.txt"));
}

TEST_CASE("rendering substitutes only the named placeholders") {
    std::string rendered = prompts::render(prompts::stage1_causal_setting(),
                                           {{"story", "STORY."}, {"query", "QUERY?"}});
    std::string expected = replace_all(
        replace_all(read_asset_file("prompts/stage1_causal_setting.txt"), "{story}", "STORY."),
        "{query}", "QUERY?");
    CHECK(rendered == expected);
    // The JSON format block's braces survive untouched.
    CHECK(rendered.find("\"causal_events\"") != std::string::npos);
    CHECK(rendered.find("True/False") != std::string::npos);

    CHECK(prompts::render_event_list({EventName("A"), EventName("B c")}) == R"(["A", "B c"])");
}

TEST_CASE("json reply repair: fences, python literals, trailing commas") {
    std::vector<std::string> log;
    std::string repaired = repair_json_reply(
        "```json\n{\"a\": True, \"b\": [1, 2,], \"c\": None,}\n```", &log);
    Json doc = Json::parse(repaired, nullptr, false);
    REQUIRE(!doc.is_discarded());
    CHECK(doc.at("a").get<bool>() == true);
    CHECK(doc.at("b").size() == 2);
    CHECK(doc.at("c").is_null());
    CHECK(log.size() == 4); // fence, True, None, trailing commas

    // Word boundaries: identifiers containing "True" stay intact.
    std::vector<std::string> log2;
    CHECK(repair_json_reply("{\"TrueName\": true}", &log2) == "{\"TrueName\": true}");
    CHECK(log2.empty());
}

TEST_CASE("gold backend returns the sample's own reasoning unchanged") {
    AnnotatorConfig config;
    auto annotator = make_annotator(config);
    AnnotationResult result = annotator->annotate(fixture(1), fixture(1).queries[0]);
    CHECK_FALSE(result.failed);
    CHECK(result.setting == fixture(1).reasoning);
}

TEST_CASE("noisy backend: zero probabilities are the identity") {
    AnnotatorConfig config;
    config.kind = AnnotatorConfig::Kind::Noisy;
    auto annotator = make_annotator(config);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(annotator->annotate(fixture(i), fixture(i).queries[0]).setting ==
              fixture(i).reasoning);
    }
}

TEST_CASE("noisy backend: probability one inverts exactly the chosen factor") {
    AnnotatorConfig config;
    config.kind = AnnotatorConfig::Kind::Noisy;
    config.flips.norm_violated = 1.0;
    auto annotator = make_annotator(config);
    for (std::size_t i = 0; i < 6; ++i) {
        CausalSetting noisy = annotator->annotate(fixture(i), fixture(i).queries[0]).setting;
        const auto& gold_events = fixture(i).reasoning.events();
        REQUIRE(noisy.events().size() == gold_events.size());
        for (std::size_t e = 0; e < gold_events.size(); ++e) {
            CHECK(noisy.events()[e].second.norm_violated != gold_events[e].second.norm_violated);
            CHECK(noisy.events()[e].second.sufficient == gold_events[e].second.sufficient);
            CHECK(noisy.events()[e].second.necessary == gold_events[e].second.necessary);
            CHECK(noisy.events()[e].second.behavior_intended ==
                  gold_events[e].second.behavior_intended);
        }
    }
}

TEST_CASE("noisy backend is reproducible per seed and re-imposes factor consistency") {
    AnnotatorConfig config;
    config.kind = AnnotatorConfig::Kind::Noisy;
    config.flips = {0.5, 0.5, 0.5, 0.5, 0.5};
    config.seed = 42;
    auto a = make_annotator(config);
    auto b = make_annotator(config);
    for (std::size_t i = 0; i < 6; ++i) {
        AnnotationResult ra = a->annotate(fixture(i), fixture(i).queries[0]);
        AnnotationResult rb = b->annotate(fixture(i), fixture(i).queries[0]);
        CHECK(ra.setting == rb.setting);
        for (const auto& [name, f] : ra.setting.events()) {
            (void)name;
            CHECK((!f.necessary || f.halpern_pearl));
        }
    }
    config.seed = 43;
    auto c = make_annotator(config);
    bool any_difference = false;
    for (std::size_t i = 0; i < 6; ++i) {
        if (!(c->annotate(fixture(i), fixture(i).queries[0]).setting ==
              a->annotate(fixture(i), fixture(i).queries[0]).setting)) {
            any_difference = true;
        }
    }
    CHECK(any_difference);

    AnnotatorConfig bad;
    bad.kind = AnnotatorConfig::Kind::Noisy;
    bad.flips.sufficient = 1.5;
    CHECK_THROWS_AS(make_annotator(bad), Error);
}

TEST_CASE("external backend issues the two staged requests and merges the replies") {
    auto transport = std::make_shared<ScriptedTransport>();
    transport->replies = {kStage1Reply, kStage2Reply};
    auto annotator = make_external_annotator(external_config(), transport);
    AnnotationResult result = annotator->annotate(fixture(1), fixture(1).queries[0]);

    CHECK_FALSE(result.failed);
    CHECK(result.raw_responses.size() == 2);
    REQUIRE(result.setting.events().size() == 2);
    const FactorVector* e1 = result.setting.find(EventName("E one"));
    REQUIRE(e1 != nullptr);
    CHECK(e1->focal);
    CHECK(e1->sufficient);
    CHECK(e1->behavior_intended);
    CHECK(result.setting.outcome_name() == EventName("O"));
    CHECK(transport->calls == 2);

    // Stage 2 runs as a continuation: stage-1 prompt, assistant reply, then
    // the factor-analysis instruction.
    REQUIRE(transport->last_messages.size() == 4);
    CHECK(transport->last_messages[0].role == "system");
    CHECK(transport->last_messages[2].role == "assistant");
    CHECK(transport->last_messages[3].content == prompts::stage2_factor_analysis());
    // The stage-1 user message carries the story and query.
    CHECK(transport->last_messages[1].content.find(fixture(1).story) != std::string::npos);
}

TEST_CASE("external backend survives transport failures within the retry budget") {
    auto transport = std::make_shared<ScriptedTransport>();
    transport->replies = {kStage1Reply, kStage2Reply};
    transport->failures_before_success = 2; // eaten by retries (budget 2 => 3 attempts)
    auto annotator = make_external_annotator(external_config(), transport);
    CHECK_FALSE(annotator->annotate(fixture(1), fixture(1).queries[0]).failed);

    auto exhausted = std::make_shared<ScriptedTransport>();
    exhausted->replies = {kStage1Reply};
    exhausted->failures_before_success = 3;
    auto failing = make_external_annotator(external_config(), exhausted);
    try {
        failing->annotate(fixture(1), fixture(1).queries[0]);
        FAIL("expected service-unreachable");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::ServiceUnreachable);
    }
}

TEST_CASE("external backend rejects unparseable replies after the retry budget") {
    auto transport = std::make_shared<ScriptedTransport>();
    transport->replies = {"this is not json"};
    auto annotator = make_external_annotator(external_config(), transport);
    try {
        annotator->annotate(fixture(1), fixture(1).queries[0]);
        FAIL("expected parse-failure-after-retries");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::ParseFailureAfterRetries);
    }
    CHECK(transport->calls == 3); // initial attempt + two retries
}

TEST_CASE("external backend flags settings that violate factor consistency") {
    auto transport = std::make_shared<ScriptedTransport>();
    transport->replies = {
        R"({"causal_events": {"E": {"occur": true, "order": 0, "focal": true}},
            "outcome_event": {"O": {"occur": true, "order": 1}}})",
        R"({"E": {"sufficient": false, "necessary": true, "halpern_pearl": false,
                   "norm_violated": false, "behavior_intended": false}})"};
    auto annotator = make_external_annotator(external_config(), transport);
    AnnotationResult result = annotator->annotate(fixture(1), fixture(1).queries[0]);
    CHECK(result.failed);
    REQUIRE(result.first_violation.has_value());
    CHECK(result.first_violation->rule == rules::kNcWithoutAc);
}

TEST_CASE("external backend defaults missing factor keys to false and logs it") {
    auto transport = std::make_shared<ScriptedTransport>();
    transport->replies = {kStage1Reply,
                          R"({"E one": {"sufficient": true, "necessary": true}})"};
    auto annotator = make_external_annotator(external_config(), transport);
    AnnotationResult result = annotator->annotate(fixture(1), fixture(1).queries[0]);
    const FactorVector* e1 = result.setting.find(EventName("E one"));
    REQUIRE(e1 != nullptr);
    CHECK(e1->sufficient);
    CHECK_FALSE(e1->norm_violated);
    bool logged_default = false, logged_missing_record = false;
    for (const auto& line : result.repair_log) {
        if (line.find("halpern_pearl") != std::string::npos) logged_default = true;
        if (line.find("E two") != std::string::npos) logged_missing_record = true;
    }
    CHECK(logged_default);
    CHECK(logged_missing_record);
}

TEST_CASE("resolver verdicts parse a leading Yes/No token") {
    auto transport = std::make_shared<ScriptedTransport>();
    AnnotatorConfig config = external_config();
    std::vector<EventName> comparison{EventName("A"), EventName("B")};

    transport->replies = {"Yes, the focal event is more responsible."};
    auto verdict = resolve_external(ExternalResolver::Kind::Temporal, EventName("E"), comparison,
                                    "story text", config, *transport);
    CHECK(verdict.answer == YesNo::Yes);
    CHECK(verdict.explanation == "the focal event is more responsible.");

    transport->replies = {"  no - it occurs later."};
    verdict = resolve_external(ExternalResolver::Kind::Temporal, EventName("E"), comparison,
                               "story", config, *transport);
    CHECK(verdict.answer == YesNo::No);
    CHECK(verdict.explanation == "it occurs later.");

    transport->replies = {"Maybe, hard to tell."};
    CHECK_THROWS_AS(resolve_external(ExternalResolver::Kind::Temporal, EventName("E"), comparison,
                                     "story", config, *transport),
                    Error);

    // "Note" must not parse as a leading No token.
    transport->replies = {"Notably unclear."};
    CHECK_THROWS_AS(resolve_external(ExternalResolver::Kind::Simultaneous, EventName("E"),
                                     comparison, "story", config, *transport),
                    Error);
}

TEST_CASE("resolver requests render the committed templates verbatim") {
    auto transport = std::make_shared<ScriptedTransport>();
    transport->replies = {"Yes."};
    AnnotatorConfig config = external_config();
    std::vector<EventName> comparison{EventName("Alex uses blue can")};
    resolve_external(ExternalResolver::Kind::Simultaneous, EventName("Benni uses green can"),
                     comparison, "the story", config, *transport);
    REQUIRE(transport->last_messages.size() == 3);
    std::string expected = replace_all(
        replace_all(read_asset_file("prompts/resolver_simultaneous.txt"), "{focal_event}",
                    "Benni uses green can"),
        "{S_list}", R"(["Alex uses blue can"])");
    CHECK(transport->last_messages[2].content == expected);
    CHECK(transport->last_messages[1].content == "Story: the story");
}

TEST_CASE("http transport speaks the chat-completions wire shape against a stub server") {
    httplib::Server server;
    std::atomic<int> hits{0};
    std::string seen_body, seen_auth;
    server.Post("/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        int hit = ++hits;
        seen_body = req.body;
        seen_auth = req.get_header_value("Authorization");
        if (hit <= 2) {
            res.status = 503; // injected failure, retried by the caller
            return;
        }
        Json body;
        body["choices"] = Json::array();
        Json choice;
        choice["message"]["content"] = "Yes, from the stub.";
        body["choices"].push_back(choice);
        res.set_content(body.dump(), "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread server_thread([&] { server.listen_after_bind(); });
    while (!server.is_running()) std::this_thread::yield();

    AnnotatorConfig config;
    config.kind = AnnotatorConfig::Kind::External;
    config.base_url = "http://127.0.0.1:" + std::to_string(port);
    config.api_key = "sekrit";
    config.model = "stub-model";
    config.max_retries = 2;
    config.backoff_base_seconds = 0.001;

    auto transport = make_http_transport(config);
    auto verdict = resolve_external(ExternalResolver::Kind::Temporal, EventName("E"),
                                    {EventName("F")}, "story", config, *transport);
    CHECK(verdict.answer == YesNo::Yes);
    CHECK(verdict.explanation == "from the stub.");
    CHECK(hits == 3);
    CHECK(seen_auth == "Bearer sekrit");
    Json body = Json::parse(seen_body);
    CHECK(body.at("model") == "stub-model");
    CHECK(body.at("temperature").get<double>() == 0.0);
    REQUIRE(body.at("messages").is_array());
    CHECK(body.at("messages").size() == 3);

    // A fourth failure in a row exhausts the budget.
    hits = 10;
    server.Post("/always-fails", [&](const httplib::Request&, httplib::Response& res) {
        res.status = 500;
    });
    AnnotatorConfig broken = config;
    broken.endpoint_path = "/always-fails";
    auto broken_transport = make_http_transport(broken);
    CHECK_THROWS_AS(resolve_external(ExternalResolver::Kind::Temporal, EventName("E"),
                                     {EventName("F")}, "story", broken, *broken_transport),
                    Error);

    server.stop();
    server_thread.join();
}

TEST_CASE("environment variables feed the endpoint configuration") {
    setenv("AC_API_BASE", "http://example.invalid:9", 1);
    setenv("AC_API_KEY", "from-env", 1);
    AnnotatorConfig config;
    apply_env(config);
    CHECK(config.base_url == "http://example.invalid:9");
    CHECK(config.api_key == "from-env");

    AnnotatorConfig keep;
    keep.base_url = "http://explicit";
    keep.api_key = "explicit";
    apply_env(keep);
    CHECK(keep.base_url == "http://explicit");
    CHECK(keep.api_key == "explicit");
    unsetenv("AC_API_BASE");
    unsetenv("AC_API_KEY");
}
