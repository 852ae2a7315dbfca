/**
 * @file csv.hpp
 * @brief CSV tables exchanged by the CLI (comma separated, header row, '.' decimal, LF).
 */
#pragma once

#include "grainscope/classify.hpp"
#include "grainscope/morphology.hpp"
#include "grainscope/synth.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace grainscope::csv {

inline constexpr std::string_view kFeatureHeader = "sno,area,major_axis,minor_axis,eccentricity,perimeter";
inline constexpr std::string_view kSampleHeader = "sample_id,grain_count,mean_pc1,elapsed_sec,predicted,truth";
inline constexpr std::string_view kAccuracyHeader = "variety,total_samples,accuracy_pct";
inline constexpr std::string_view kTruthHeader =
    "grain,center_row,center_col,semi_major,semi_minor,angle,intensity,area,eccentricity";

/// Shortest decimal that reads back to the same double.
std::string format_number(double value);

/// Splits one CSV record; honours double-quoted fields.
std::vector<std::string> split_record(std::string_view line);
std::string quote_field(std::string_view field);

struct FeatureRow {
    std::size_t sno = 0;
    morphology::GrainFeatures features;
    std::optional<std::string> variety;  ///< present when the table has a trailing `variety` column
};

/// Feature table, rows numbered from `first_sno`.
std::string features_csv(std::span<const morphology::GrainFeatures> rows, std::size_t first_sno = 1);

/// Parses a feature table; an optional seventh `variety` column labels rows.
/// Throws ParseError naming `source` and the 1-based line of the bad row.
std::vector<FeatureRow> parse_features_csv(std::string_view text, std::string_view source = "<input>");

/// One row per report. `truths` may be empty (unknown truth). With
/// `deterministic` the elapsed column is written as zero.
std::string samples_csv(std::span<const classify::SampleReport> reports, const std::vector<std::string>& varieties,
                        std::span<const std::string> truths, bool deterministic);

/// Per-variety rows then an "Overall" row; accuracy as a half-up integer percentage.
std::string accuracy_csv(const classify::AccuracyTable& table);

std::string truth_csv(std::span<const synth::GrainTruth> truth);

std::string read_text_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe a partial file.
void atomic_write(const std::filesystem::path& path, std::string_view content);

}  // namespace grainscope::csv
