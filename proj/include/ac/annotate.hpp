#pragma once

#include "ac/dataset.hpp"
#include "ac/factors.hpp"
#include "ac/judge.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ac {

// Prompt templates ship as versioned text assets; rendering substitutes only
// the named {placeholders} and leaves every other byte untouched.
namespace prompts {

const std::string& stage1_causal_setting();
const std::string& stage2_factor_analysis();
const std::string& resolver_simultaneous();
const std::string& resolver_temporal();

std::string render(std::string_view tmpl,
                   const std::vector<std::pair<std::string, std::string>>& vars);

/// JSON-style list of quoted event names, as inserted for {S_list}/{H_list}.
std::string render_event_list(const std::vector<EventName>& names);

} // namespace prompts

struct FlipProbabilities {
    double sufficient = 0;
    double necessary = 0;
    double halpern_pearl = 0;
    double norm_violated = 0;
    double behavior_intended = 0;
};

struct AnnotatorConfig {
    enum class Kind { Gold, Noisy, External };

    Kind kind = Kind::Gold;

    // noisy backend
    FlipProbabilities flips;
    std::uint64_t seed = 0;

    // external backend
    std::string base_url;                        // AC_API_BASE
    std::string api_key;                         // AC_API_KEY
    std::string model = "default";
    std::string endpoint_path = "/chat/completions";
    double timeout_seconds = 30.0;
    int max_retries = 2;
    double temperature = 0.0;
    int max_in_flight = 4;
    double backoff_base_seconds = 0.05;
    std::string prompt_set = "v1";

    void validate() const; // probability/timeout/retry ranges
};

/// Fills base_url/api_key from AC_API_BASE / AC_API_KEY when unset.
void apply_env(AnnotatorConfig& config);

struct AnnotationResult {
    CausalSetting setting;
    std::vector<std::string> raw_responses; // external only
    std::vector<std::string> repair_log;    // applied normalizations
    bool failed = false;
    std::string failure;
    std::optional<Violation> first_violation;
};

class Annotator {
public:
    virtual ~Annotator() = default;
    /// Produces the causal setting for (story, query). Thread-safe.
    virtual AnnotationResult annotate(const Sample& sample, const std::string& query) const = 0;
};

// Transport for one chat-completions round trip. Tests substitute a scripted
// fake; production wires HTTP. Throws service-unreachable on transport
// failure and malformed-document when the response envelope is unusable.
class ChatTransport {
public:
    struct Message {
        std::string role;
        std::string content;
    };

    virtual ~ChatTransport() = default;
    virtual std::string complete(const std::vector<Message>& messages) const = 0;
};

/// POST {model, messages, temperature} to <base_url><endpoint_path>, bearer
/// auth from api_key, bounded in-flight requests.
std::unique_ptr<ChatTransport> make_http_transport(const AnnotatorConfig& config);

std::unique_ptr<Annotator> make_annotator(const AnnotatorConfig& config);
std::unique_ptr<Annotator> make_external_annotator(const AnnotatorConfig& config,
                                                   std::shared_ptr<const ChatTransport> transport);

/// One resolver round trip: renders the matching prompt, sends it, parses a
/// leading Yes/No token (case-insensitive) and returns the rest as the
/// explanation. Retries transport failures up to the configured budget.
ExternalResolver::Verdict resolve_external(ExternalResolver::Kind kind, const EventName& focal,
                                           const std::vector<EventName>& comparison,
                                           const std::string& story,
                                           const AnnotatorConfig& config,
                                           const ChatTransport& transport);

/// ExternalResolver adapter over resolve_external, for ResolverPolicy.
class BackendResolver : public ExternalResolver {
public:
    BackendResolver(AnnotatorConfig config, std::shared_ptr<const ChatTransport> transport)
        : config_(std::move(config)), transport_(std::move(transport)) {}

    Verdict resolve(Kind kind, const EventName& focal, const std::vector<EventName>& comparison,
                    const std::string& story) const override {
        return resolve_external(kind, focal, comparison, story, config_, *transport_);
    }

private:
    AnnotatorConfig config_;
    std::shared_ptr<const ChatTransport> transport_;
};

// Tolerant JSON normalization for model replies: code-fence stripping,
// Python-style booleans, trailing-comma removal. Purely syntactic; applied
// repairs are appended to the log.
std::string repair_json_reply(const std::string& raw, std::vector<std::string>* log);

} // namespace ac
