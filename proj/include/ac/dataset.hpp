#pragma once

#include "ac/factors.hpp"
#include "ac/judge.hpp"

#include <string>
#include <vector>

namespace ac {

// One benchmark sample: a story, causal queries with gold answers, and the
// annotated reasoning (the causal setting).
struct Sample {
    std::string story;
    std::vector<std::string> queries;
    std::vector<YesNo> answers; // parallel to queries
    CausalSetting reasoning;

    bool operator==(const Sample&) const = default;

    Json to_json() const;
    /// Accepts the field aliases "query"/"queries" and "answer"/"answers";
    /// scalars are promoted to singleton lists.
    static Sample from_json(const Json& doc);
};

struct Dataset {
    std::vector<Sample> samples;

    bool operator==(const Dataset&) const = default;
};

struct LoadFailure {
    std::size_t index = 0; // position in the input document
    std::string message;
};

struct LoadResult {
    Dataset dataset;
    std::vector<LoadFailure> failures;
};

// Accepts a JSON object with a "samples" list, a bare JSON array of samples,
// a single sample object, or newline-delimited sample objects. Per-sample
// parse failures are reported by index instead of aborting the batch.
LoadResult parse_dataset(const std::string& text);
LoadResult load_dataset(const std::string& path);

void save_dataset(const Dataset& dataset, const std::string& path);
std::string dataset_to_string(const Dataset& dataset);

struct ValidationIssue {
    std::size_t sample = 0;
    std::string rule;
    std::string detail;
};

struct ValidationReport {
    std::size_t samples_checked = 0;
    std::vector<ValidationIssue> issues;

    bool ok() const noexcept { return issues.empty(); }
    Json to_json() const;
    std::string to_text() const;
};

/// Per sample: setting validation plus engine/gold answer consistency for
/// every query/answer pair. Violations are reported, never thrown.
ValidationReport validate_dataset(const Dataset& dataset, const ResolverPolicy& policy = {});

struct DatasetStats {
    std::size_t sample_count = 0;
    double sentences_per_sample = 0;
    double words_per_sample = 0;
    double focals_per_sample = 0;
    double events_per_sample = 0;
    double causes_per_sample = 0;
    double outcomes_per_sample = 0;
    double positive_class_fraction = 0;

    Json to_json() const;
    std::string to_text() const;
};

DatasetStats dataset_stats(const Dataset& dataset);

/// Sentence boundaries are '.', '!', or '?' followed by whitespace or end of
/// text; only segments with non-whitespace content count.
std::size_t count_sentences(std::string_view text);
/// Whitespace-delimited tokens.
std::size_t count_words(std::string_view text);

namespace fixtures {

/// Bundled samples transcribed from published benchmark material.
const std::string& samples_json();
const std::string& benni_case_json();
Dataset samples();

/// name -> contents, for `ac fixtures emit`.
std::vector<std::pair<std::string, std::string>> files();

} // namespace fixtures

} // namespace ac
