#include "ac/annotate.hpp"

#include "ac/assets.hpp"
#include "ac/error.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <random>
#include <thread>

namespace ac {

namespace prompts {

const std::string& stage1_causal_setting() {
    return assets::get("prompts/stage1_causal_setting.txt");
}

const std::string& stage2_factor_analysis() {
    return assets::get("prompts/stage2_factor_analysis.txt");
}

const std::string& resolver_simultaneous() {
    return assets::get("prompts/resolver_simultaneous.txt");
}

const std::string& resolver_temporal() {
    return assets::get("prompts/resolver_temporal.txt");
}

std::string render(std::string_view tmpl,
                   const std::vector<std::pair<std::string, std::string>>& vars) {
    std::string out(tmpl);
    for (const auto& [key, value] : vars) {
        const std::string needle = "{" + key + "}";
        std::size_t pos = 0;
        while ((pos = out.find(needle, pos)) != std::string::npos) {
            out.replace(pos, needle.size(), value);
            pos += value.size();
        }
    }
    return out;
}

std::string render_event_list(const std::vector<EventName>& names) {
    std::string out = "[";
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) out += ", ";
        out += "\"" + names[i].str() + "\"";
    }
    out += "]";
    return out;
}

} // namespace prompts

void AnnotatorConfig::validate() const {
    auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!in_unit(flips.sufficient) || !in_unit(flips.necessary) || !in_unit(flips.halpern_pearl) ||
        !in_unit(flips.norm_violated) || !in_unit(flips.behavior_intended)) {
        fail(Errc::InvalidArgument, "flip probabilities must lie in [0,1]");
    }
    if (timeout_seconds <= 0) {
        fail(Errc::InvalidArgument, "timeout must be positive");
    }
    if (max_retries < 0) {
        fail(Errc::InvalidArgument, "retries must be non-negative");
    }
    if (kind == Kind::External && base_url.empty()) {
        fail(Errc::InvalidArgument, "external backend needs a base address");
    }
}

void apply_env(AnnotatorConfig& config) {
    if (config.base_url.empty()) {
        if (const char* base = std::getenv("AC_API_BASE")) config.base_url = base;
    }
    if (config.api_key.empty()) {
        if (const char* key = std::getenv("AC_API_KEY")) config.api_key = key;
    }
}

// ---------------------------------------------------------------------------
// Reply normalization
// ---------------------------------------------------------------------------

std::string repair_json_reply(const std::string& raw, std::vector<std::string>* log) {
    std::string text = raw;

    auto note = [&](const char* what) {
        if (log) log->emplace_back(what);
    };

    // Code fences: keep the body of the first fenced block.
    std::size_t fence = text.find("```");
    if (fence != std::string::npos) {
        std::size_t body = text.find('\n', fence);
        if (body != std::string::npos) {
            std::size_t close = text.find("```", body);
            if (close != std::string::npos) {
                text = text.substr(body + 1, close - body - 1);
                note("stripped code fence");
            }
        }
    }

    // Python-style literals, replaced only at word boundaries.
    auto word_replace = [&](const std::string& from, const std::string& to, const char* what) {
        std::size_t pos = 0;
        bool applied = false;
        while ((pos = text.find(from, pos)) != std::string::npos) {
            bool left_ok = pos == 0 || !(std::isalnum(static_cast<unsigned char>(text[pos - 1])) ||
                                         text[pos - 1] == '_');
            std::size_t end = pos + from.size();
            bool right_ok = end >= text.size() ||
                            !(std::isalnum(static_cast<unsigned char>(text[end])) || text[end] == '_');
            if (left_ok && right_ok) {
                text.replace(pos, from.size(), to);
                pos += to.size();
                applied = true;
            } else {
                pos = end;
            }
        }
        if (applied) note(what);
    };
    word_replace("True", "true", "lowercased python boolean");
    word_replace("False", "false", "lowercased python boolean");
    word_replace("None", "null", "replaced python null");

    // Trailing commas before a closing bracket.
    {
        std::string cleaned;
        cleaned.reserve(text.size());
        bool applied = false;
        for (std::size_t i = 0; i < text.size(); ++i) {
            if (text[i] == ',') {
                std::size_t j = i + 1;
                while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
                if (j < text.size() && (text[j] == '}' || text[j] == ']')) {
                    applied = true;
                    continue; // drop the comma
                }
            }
            cleaned.push_back(text[i]);
        }
        if (applied) note("removed trailing comma");
        text = std::move(cleaned);
    }

    return text;
}

// ---------------------------------------------------------------------------
// Gold and noisy backends
// ---------------------------------------------------------------------------

namespace {

class GoldAnnotator final : public Annotator {
public:
    AnnotationResult annotate(const Sample& sample, const std::string&) const override {
        AnnotationResult result;
        result.setting = sample.reasoning;
        return result;
    }
};

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t seed, const std::string& text) {
    std::uint64_t h = splitmix64(seed ^ 0x243f6a8885a308d3ull);
    for (unsigned char c : text) {
        h = splitmix64(h ^ c);
    }
    return h;
}

class NoisyAnnotator final : public Annotator {
public:
    explicit NoisyAnnotator(AnnotatorConfig config) : config_(std::move(config)) {}

    AnnotationResult annotate(const Sample& sample, const std::string&) const override {
        AnnotationResult result;
        result.setting = sample.reasoning;
        // Seed depends only on (seed, story): reproducible regardless of
        // execution interleaving and uniform across a sample's queries.
        std::mt19937_64 rng(mix_seed(config_.seed, sample.story));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (auto& [name, f] : result.setting.events_mutable()) {
            if (unit(rng) < config_.flips.sufficient) f.sufficient = !f.sufficient;
            if (unit(rng) < config_.flips.necessary) f.necessary = !f.necessary;
            if (unit(rng) < config_.flips.halpern_pearl) f.halpern_pearl = !f.halpern_pearl;
            if (unit(rng) < config_.flips.norm_violated) f.norm_violated = !f.norm_violated;
            if (unit(rng) < config_.flips.behavior_intended)
                f.behavior_intended = !f.behavior_intended;
            if (f.necessary && !f.halpern_pearl) {
                f.halpern_pearl = true;
                result.repair_log.push_back("reimposed necessary=>halpern_pearl on '" +
                                            name.str() + "'");
            }
        }
        return result;
    }

private:
    AnnotatorConfig config_;
};

} // namespace

// ---------------------------------------------------------------------------
// External backend
// ---------------------------------------------------------------------------

namespace {

std::string request_with_retries(const ChatTransport& transport,
                                 const std::vector<ChatTransport::Message>& messages,
                                 const AnnotatorConfig& config, std::mt19937_64& jitter_rng) {
    std::string last_error;
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
        if (attempt > 0) {
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            double delay = config.backoff_base_seconds * static_cast<double>(1 << (attempt - 1)) +
                           unit(jitter_rng) * config.backoff_base_seconds;
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        }
        try {
            return transport.complete(messages);
        } catch (const Error& e) {
            if (e.code() != Errc::ServiceUnreachable) throw;
            last_error = e.what();
        }
    }
    fail(Errc::ServiceUnreachable,
         "gave up after " + std::to_string(config.max_retries + 1) + " attempts: " + last_error);
}

// Splits a template whose first line may carry a [SYSTEM] marker into the
// system message and the user body.
std::pair<std::string, std::string> split_system(const std::string& rendered) {
    const std::string marker = "[SYSTEM] ";
    if (rendered.rfind(marker, 0) == 0) {
        std::size_t eol = rendered.find('\n');
        if (eol != std::string::npos) {
            std::string system = rendered.substr(marker.size(), eol - marker.size());
            std::size_t body = rendered.find_first_not_of('\n', eol);
            return {system, body == std::string::npos ? "" : rendered.substr(body)};
        }
    }
    return {"", rendered};
}

class ExternalAnnotator final : public Annotator {
public:
    ExternalAnnotator(AnnotatorConfig config, std::shared_ptr<const ChatTransport> transport)
        : config_(std::move(config)), transport_(std::move(transport)) {}

    AnnotationResult annotate(const Sample& sample, const std::string& query) const override {
        AnnotationResult result;
        std::mt19937_64 jitter_rng(mix_seed(config_.seed, sample.story + "\n" + query));

        std::string stage1 = prompts::render(prompts::stage1_causal_setting(),
                                             {{"story", sample.story}, {"query", query}});
        auto [system, user1] = split_system(stage1);
        std::vector<ChatTransport::Message> messages;
        if (!system.empty()) messages.push_back({"system", system});
        messages.push_back({"user", user1});

        Json stage1_doc;
        std::string reply1;
        for (int attempt = 0;; ++attempt) {
            reply1 = request_with_retries(*transport_, messages, config_, jitter_rng);
            result.raw_responses.push_back(reply1);
            Json parsed = Json::parse(repair_json_reply(reply1, &result.repair_log),
                                      nullptr, false);
            if (!parsed.is_discarded() && parsed.is_object() && parsed.contains("causal_events") &&
                parsed.contains("outcome_event")) {
                stage1_doc = std::move(parsed);
                break;
            }
            if (attempt >= config_.max_retries) {
                fail(Errc::ParseFailureAfterRetries,
                     "causal-setting reply is not parseable JSON after " +
                         std::to_string(attempt + 1) + " attempts");
            }
        }

        messages.push_back({"assistant", reply1});
        messages.push_back({"user", prompts::stage2_factor_analysis()});

        Json stage2_doc;
        for (int attempt = 0;; ++attempt) {
            std::string reply2 = request_with_retries(*transport_, messages, config_, jitter_rng);
            result.raw_responses.push_back(reply2);
            Json parsed = Json::parse(repair_json_reply(reply2, &result.repair_log),
                                      nullptr, false);
            if (!parsed.is_discarded() && parsed.is_object()) {
                stage2_doc = std::move(parsed);
                break;
            }
            if (attempt >= config_.max_retries) {
                fail(Errc::ParseFailureAfterRetries,
                     "factor reply is not parseable JSON after " + std::to_string(attempt + 1) +
                         " attempts");
            }
        }

        build_setting(stage1_doc, stage2_doc, result);
        for (const auto& v : validate_setting(result.setting)) {
            result.failed = true;
            result.failure = std::string(errc_name(Errc::ValidationFailure)) + ": " + v.rule;
            result.first_violation = v;
            break;
        }
        return result;
    }

private:
    void build_setting(const Json& stage1_doc, const Json& stage2_doc,
                       AnnotationResult& result) const {
        auto read_bool = [&](const Json& rec, const char* key, const std::string& event) {
            if (!rec.contains(key)) {
                result.repair_log.push_back("defaulted missing '" + std::string(key) + "' on '" +
                                            event + "'");
                return false;
            }
            const Json& v = rec.at(key);
            if (v.is_boolean()) return v.get<bool>();
            if (v.is_number_integer()) return v.get<long>() != 0;
            result.repair_log.push_back("defaulted non-boolean '" + std::string(key) + "' on '" +
                                        event + "'");
            return false;
        };
        auto read_int = [&](const Json& rec, const char* key, const std::string& event) {
            if (rec.contains(key) && rec.at(key).is_number_integer()) return rec.at(key).get<int>();
            result.repair_log.push_back("defaulted missing '" + std::string(key) + "' on '" +
                                        event + "'");
            return 0;
        };

        // Stage-1 names carry over verbatim; stage-2 factors are joined by
        // exact name match.
        for (const auto& [name, rec] : stage1_doc.at("causal_events").items()) {
            FactorVector f;
            f.occur = read_bool(rec, "occur", name);
            f.order = read_int(rec, "order", name);
            f.focal = read_bool(rec, "focal", name);
            if (stage2_doc.contains(name)) {
                const Json& factors = stage2_doc.at(name);
                f.sufficient = read_bool(factors, "sufficient", name);
                f.necessary = read_bool(factors, "necessary", name);
                f.halpern_pearl = read_bool(factors, "halpern_pearl", name);
                f.norm_violated = read_bool(factors, "norm_violated", name);
                f.behavior_intended = read_bool(factors, "behavior_intended", name);
            } else {
                result.repair_log.push_back("no factor record for '" + name + "'; defaulted false");
            }
            result.setting.add_event(EventName(name), f);
        }
        for (const auto& [name, rec] : stage1_doc.at("outcome_event").items()) {
            OutcomeRecord o;
            o.occur = read_bool(rec, "occur", name);
            o.order = read_int(rec, "order", name);
            result.setting.set_outcome(EventName(name), o);
            break; // exactly one outcome
        }
    }

    AnnotatorConfig config_;
    std::shared_ptr<const ChatTransport> transport_;
};

} // namespace

ExternalResolver::Verdict resolve_external(ExternalResolver::Kind kind, const EventName& focal,
                                           const std::vector<EventName>& comparison,
                                           const std::string& story,
                                           const AnnotatorConfig& config,
                                           const ChatTransport& transport) {
    if (comparison.empty()) {
        fail(Errc::InvalidArgument, "empty comparison list");
    }
    const bool simultaneous = kind == ExternalResolver::Kind::Simultaneous;
    const std::string& tmpl =
        simultaneous ? prompts::resolver_simultaneous() : prompts::resolver_temporal();
    std::string prompt = prompts::render(
        tmpl, {{"focal_event", focal.str()},
               {simultaneous ? "S_list" : "H_list", prompts::render_event_list(comparison)}});

    std::vector<ChatTransport::Message> messages;
    messages.push_back({"system",
                        "You are an expert in the field of actual causality and causal judgment."});
    if (!story.empty()) {
        messages.push_back({"user", "Story: " + story});
    }
    messages.push_back({"user", prompt});

    std::mt19937_64 jitter_rng(0x5eedu ^ std::hash<std::string>{}(focal.str()));
    std::string reply = request_with_retries(transport, messages, config, jitter_rng);

    // Leading Yes/No token, case-insensitive; the remainder is the explanation.
    std::size_t pos = 0;
    while (pos < reply.size() && !std::isalpha(static_cast<unsigned char>(reply[pos]))) ++pos;
    auto matches = [&](const char* word, std::size_t len) {
        if (pos + len > reply.size()) return false;
        for (std::size_t i = 0; i < len; ++i) {
            if (std::tolower(static_cast<unsigned char>(reply[pos + i])) != word[i]) return false;
        }
        std::size_t end = pos + len;
        return end == reply.size() || !std::isalpha(static_cast<unsigned char>(reply[end]));
    };
    ExternalResolver::Verdict verdict;
    std::size_t token_len = 0;
    if (matches("yes", 3)) {
        verdict.answer = YesNo::Yes;
        token_len = 3;
    } else if (matches("no", 2)) {
        verdict.answer = YesNo::No;
        token_len = 2;
    } else {
        fail(Errc::UnparseableVerdict, "reply carries no leading Yes/No token: " +
                                           reply.substr(0, std::min<std::size_t>(reply.size(), 80)));
    }
    std::size_t rest = pos + token_len;
    while (rest < reply.size() &&
           (std::isspace(static_cast<unsigned char>(reply[rest])) || reply[rest] == ',' ||
            reply[rest] == '.' || reply[rest] == ':' || reply[rest] == ';' || reply[rest] == '-')) {
        ++rest;
    }
    verdict.explanation = reply.substr(rest);
    return verdict;
}

std::unique_ptr<Annotator> make_external_annotator(const AnnotatorConfig& config,
                                                   std::shared_ptr<const ChatTransport> transport) {
    return std::make_unique<ExternalAnnotator>(config, std::move(transport));
}

std::unique_ptr<Annotator> make_annotator(const AnnotatorConfig& config) {
    config.validate();
    switch (config.kind) {
        case AnnotatorConfig::Kind::Gold:
            return std::make_unique<GoldAnnotator>();
        case AnnotatorConfig::Kind::Noisy:
            return std::make_unique<NoisyAnnotator>(config);
        case AnnotatorConfig::Kind::External:
            return make_external_annotator(config, make_http_transport(config));
    }
    fail(Errc::InvalidArgument, "unknown backend kind");
}

} // namespace ac
