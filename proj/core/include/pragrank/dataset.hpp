#pragma once

// JSONL datasets: instances, candidate pools and selections.
//
// Instance line:  {"id", "source", "query", "references": [..], "gold_answer"?, "latent"?}
// Pool line:      {"instance_id", "answer"?, "candidates": [{"text", "logp_s0"?,
//                  "logp_answer_rec"?, "logp_source_rec"?, "logp_latent_rec"?}]}
// Selection line: {"instance_id", "rule": {...}, "chosen_index", "combined_scores"?}
//
// Files are UTF-8 with one record per line; blank lines are ignored. Unknown
// members survive a load/save cycle.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pragrank/types.hpp"

namespace pragrank {

// Load errors carry the file name and 1-based line number.
// Throws SchemaError, DuplicateId, IoError.
std::vector<Instance> load_instances(const std::filesystem::path& path);
std::vector<CandidatePool> load_pools(const std::filesystem::path& path);
std::vector<Selection> load_selections(const std::filesystem::path& path);

std::vector<Instance> parse_instances(std::string_view jsonl, const std::string& origin = "<memory>");

void save_instances(const std::filesystem::path& path, std::span<const Instance> instances);
void save_pools(const std::filesystem::path& path, std::span<const CandidatePool> pools);
void save_selections(const std::filesystem::path& path, std::span<const Selection> selections);

enum class TruncationUnit { WhitespaceToken, Byte };

TruncationUnit parse_truncation_unit(std::string_view text);

// Drops trailing source units until at most `max_units` remain. Query and
// references are untouched. Whitespace mode keeps the original text up to
// the end of the last kept token; byte mode never splits a UTF-8 sequence.
// Idempotent. Throws InvalidArgument when max_units == 0.
Instance truncate(const Instance& instance, std::size_t max_units,
                  TruncationUnit unit = TruncationUnit::WhitespaceToken);
std::string truncate_text(std::string_view text, std::size_t max_units, TruncationUnit unit);

// Number of whitespace-separated tokens.
std::size_t whitespace_length(std::string_view text);

struct DatasetStats {
    std::size_t test_size = 0;  // unique (source, query) pairs
    double avg_source_len = 0.0;
    double avg_query_len = 0.0;
    double avg_reference_len = 0.0;  // per instance: mean over its references

    bool operator==(const DatasetStats&) const = default;
};

// Averages are taken over instances. Throws EmptyDataset.
DatasetStats stats(std::span<const Instance> instances);

struct FixtureSpec {
    std::uint64_t seed = 7;
    std::size_t count = 20;
    std::size_t filler_sentences = 4;   // per source
};

// Deterministic synthetic instances over the toy alphabet (lowercase letters
// and spaces). Each source embeds a fact sentence that answers the query; the
// gold answer is that sentence and the references restate it alongside other
// source content. Throws InvalidArgument when count == 0.
std::vector<Instance> make_fixture(const FixtureSpec& spec);

}  // namespace pragrank
