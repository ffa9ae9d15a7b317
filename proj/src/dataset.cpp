#include "ac/dataset.hpp"

#include "ac/assets.hpp"
#include "ac/error.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ac {

namespace {

std::vector<std::string> string_list(const Json& doc, const char* plural, const char* singular) {
    const Json* node = nullptr;
    if (doc.contains(plural)) {
        node = &doc.at(plural);
    } else if (doc.contains(singular)) {
        node = &doc.at(singular);
    } else {
        fail(Errc::MalformedDocument, std::string("missing '") + plural + "'");
    }
    std::vector<std::string> out;
    if (node->is_string()) {
        out.push_back(node->get<std::string>());
    } else if (node->is_array()) {
        for (const auto& item : *node) {
            if (!item.is_string()) {
                fail(Errc::MalformedDocument, std::string("'") + plural + "' holds a non-string");
            }
            out.push_back(item.get<std::string>());
        }
    } else {
        fail(Errc::MalformedDocument, std::string("'") + plural + "' is neither string nor list");
    }
    return out;
}

} // namespace

Json Sample::to_json() const {
    Json doc;
    doc["story"] = story;
    doc["queries"] = queries;
    Json ans = Json::array();
    for (YesNo a : answers) ans.push_back(yesno_str(a));
    doc["answers"] = std::move(ans);
    doc["reasoning"] = reasoning.to_json();
    return doc;
}

Sample Sample::from_json(const Json& doc) {
    if (!doc.is_object()) {
        fail(Errc::MalformedDocument, "sample is not an object");
    }
    Sample s;
    if (!doc.contains("story") || !doc.at("story").is_string()) {
        fail(Errc::MalformedDocument, "missing 'story'");
    }
    s.story = doc.at("story").get<std::string>();
    s.queries = string_list(doc, "queries", "query");
    for (const auto& a : string_list(doc, "answers", "answer")) {
        s.answers.push_back(parse_yesno(a));
    }
    if (s.queries.empty() || s.queries.size() != s.answers.size()) {
        fail(Errc::MalformedDocument, "queries and answers must be parallel and non-empty");
    }
    if (!doc.contains("reasoning")) {
        fail(Errc::MalformedDocument, "missing 'reasoning'");
    }
    s.reasoning = CausalSetting::from_json(doc.at("reasoning"));
    return s;
}

namespace {

LoadResult from_sample_array(const Json& list) {
    LoadResult result;
    std::size_t index = 0;
    for (const auto& item : list) {
        try {
            result.dataset.samples.push_back(Sample::from_json(item));
        } catch (const Error& e) {
            result.failures.push_back({index, e.what()});
        }
        ++index;
    }
    if (index == 0) {
        fail(Errc::EmptyDataset, "the document holds no samples");
    }
    return result;
}

} // namespace

LoadResult parse_dataset(const std::string& text) {
    Json doc = Json::parse(text, nullptr, false);
    if (!doc.is_discarded()) {
        if (doc.is_array()) {
            return from_sample_array(doc);
        }
        if (doc.is_object() && doc.contains("samples") && doc.at("samples").is_array()) {
            return from_sample_array(doc.at("samples"));
        }
        if (doc.is_object() && doc.contains("story") && doc.contains("reasoning")) {
            Json list = Json::array();
            list.push_back(doc);
            return from_sample_array(list);
        }
        fail(Errc::MalformedDocument, "expected a 'samples' list, a sample array, or a sample");
    }
    // Newline-delimited objects.
    LoadResult result;
    std::istringstream in(text);
    std::string line;
    std::size_t index = 0;
    bool any_line = false;
    while (std::getline(in, line)) {
        bool blank = true;
        for (char c : line) {
            if (!std::isspace(static_cast<unsigned char>(c))) {
                blank = false;
                break;
            }
        }
        if (blank) continue;
        any_line = true;
        Json item = Json::parse(line, nullptr, false);
        if (item.is_discarded()) {
            result.failures.push_back({index, "line is not valid JSON"});
        } else {
            try {
                result.dataset.samples.push_back(Sample::from_json(item));
            } catch (const Error& e) {
                result.failures.push_back({index, e.what()});
            }
        }
        ++index;
    }
    if (!any_line) {
        fail(Errc::MalformedDocument, "document is neither valid JSON nor newline-delimited JSON");
    }
    return result;
}

LoadResult load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(Errc::IoFailure, "cannot open '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_dataset(buffer.str());
}

std::string dataset_to_string(const Dataset& dataset) {
    Json doc;
    Json list = Json::array();
    for (const auto& s : dataset.samples) list.push_back(s.to_json());
    doc["samples"] = std::move(list);
    return doc.dump(4) + "\n";
}

void save_dataset(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        fail(Errc::IoFailure, "cannot write '" + path + "'");
    }
    out << dataset_to_string(dataset);
}

ValidationReport validate_dataset(const Dataset& dataset, const ResolverPolicy& policy) {
    ValidationReport report;
    report.samples_checked = dataset.samples.size();
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        const Sample& s = dataset.samples[i];
        ResolverPolicy sample_policy = policy;
        sample_policy.story = s.story;
        for (const auto& v : validate_setting(s.reasoning)) {
            report.issues.push_back(
                {i, v.rule, v.event.empty() ? v.detail : v.event + ": " + v.detail});
        }
        for (std::size_t q = 0; q < s.queries.size(); ++q) {
            try {
                if (!consistent_with_answer(s.reasoning, s.answers[q], sample_policy)) {
                    report.issues.push_back(
                        {i, "answer-inconsistent",
                         "query " + std::to_string(q) + ": engine disagrees with gold answer '" +
                             yesno_str(s.answers[q]) + "'"});
                }
            } catch (const Error& e) {
                report.issues.push_back({i, "judgment-error", e.what()});
            }
        }
    }
    return report;
}

Json ValidationReport::to_json() const {
    Json doc;
    doc["samples_checked"] = samples_checked;
    doc["failure_count"] = issues.size();
    Json list = Json::array();
    for (const auto& issue : issues) {
        Json item;
        item["sample"] = issue.sample;
        item["rule"] = issue.rule;
        item["detail"] = issue.detail;
        list.push_back(std::move(item));
    }
    doc["failures"] = std::move(list);
    return doc;
}

std::string ValidationReport::to_text() const {
    std::ostringstream out;
    out << "checked " << samples_checked << " sample(s), " << issues.size() << " failure(s)\n";
    for (const auto& issue : issues) {
        out << "  sample " << issue.sample << "  " << issue.rule << "  " << issue.detail << "\n";
    }
    return out.str();
}

std::size_t count_sentences(std::string_view text) {
    std::size_t count = 0;
    bool segment_has_content = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (!std::isspace(static_cast<unsigned char>(c))) segment_has_content = true;
        bool terminator = (c == '.' || c == '!' || c == '?') &&
                          (i + 1 == text.size() ||
                           std::isspace(static_cast<unsigned char>(text[i + 1])));
        if (terminator) {
            if (segment_has_content) ++count;
            segment_has_content = false;
        }
    }
    if (segment_has_content) ++count;
    return count;
}

std::size_t count_words(std::string_view text) {
    std::size_t count = 0;
    bool in_token = false;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_token = false;
        } else if (!in_token) {
            in_token = true;
            ++count;
        }
    }
    return count;
}

DatasetStats dataset_stats(const Dataset& dataset) {
    if (dataset.samples.empty()) {
        fail(Errc::EmptyDataset, "statistics need at least one sample");
    }
    DatasetStats stats;
    stats.sample_count = dataset.samples.size();
    double sentences = 0, words = 0, focals = 0, causes = 0, outcomes = 0;
    std::size_t answers = 0, positive = 0;
    for (const auto& s : dataset.samples) {
        sentences += static_cast<double>(count_sentences(s.story));
        words += static_cast<double>(count_words(s.story));
        focals += static_cast<double>(s.reasoning.focal_events().size());
        causes += static_cast<double>(s.reasoning.events().size());
        outcomes += s.reasoning.has_outcome() ? 1.0 : 0.0;
        for (YesNo a : s.answers) {
            ++answers;
            if (a == YesNo::Yes) ++positive;
        }
    }
    const double n = static_cast<double>(stats.sample_count);
    stats.sentences_per_sample = sentences / n;
    stats.words_per_sample = words / n;
    stats.focals_per_sample = focals / n;
    stats.causes_per_sample = causes / n;
    stats.outcomes_per_sample = outcomes / n;
    stats.events_per_sample = (causes + outcomes) / n;
    stats.positive_class_fraction =
        answers == 0 ? 0.0 : static_cast<double>(positive) / static_cast<double>(answers);
    return stats;
}

namespace {

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

} // namespace

Json DatasetStats::to_json() const {
    Json doc;
    doc["sample_count"] = sample_count;
    doc["sentences_per_sample"] = sentences_per_sample;
    doc["words_per_sample"] = words_per_sample;
    doc["focals_per_sample"] = focals_per_sample;
    doc["events_per_sample"] = events_per_sample;
    doc["causes_per_sample"] = causes_per_sample;
    doc["outcomes_per_sample"] = outcomes_per_sample;
    doc["positive_class_fraction"] = positive_class_fraction;
    return doc;
}

std::string DatasetStats::to_text() const {
    std::ostringstream out;
    out << "# Samples              " << sample_count << "\n"
        << "# Sentences/Sample     " << fixed6(sentences_per_sample) << "\n"
        << "# Words/Sample         " << fixed6(words_per_sample) << "\n"
        << "# Focals/Sample        " << fixed6(focals_per_sample) << "\n"
        << "# Events/Sample        " << fixed6(events_per_sample) << "\n"
        << "# Causes/Sample        " << fixed6(causes_per_sample) << "\n"
        << "# Outcomes/Sample      " << fixed6(outcomes_per_sample) << "\n"
        << "Positive Class         " << fixed6(positive_class_fraction) << "\n";
    return out.str();
}

namespace fixtures {

const std::string& samples_json() {
    return assets::get("fixtures/bench_samples.json");
}

const std::string& benni_case_json() {
    return assets::get("fixtures/benni_case.json");
}

Dataset samples() {
    LoadResult result = parse_dataset(samples_json());
    if (!result.failures.empty()) {
        fail(Errc::MalformedDocument, "bundled fixtures failed to parse");
    }
    return std::move(result.dataset);
}

std::vector<std::pair<std::string, std::string>> files() {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& name : assets::names()) {
        if (name.rfind("fixtures/", 0) == 0) {
            out.emplace_back(name.substr(std::string("fixtures/").size()), assets::get(name));
        }
    }
    return out;
}

} // namespace fixtures

} // namespace ac
