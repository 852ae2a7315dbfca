#include "grainscope/csv.hpp"

#include "grainscope/error.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>
#include <system_error>
#include <unistd.h>

namespace grainscope::csv {

namespace {

std::string parse_error(std::string_view source, std::size_t line, const std::string& what) {
    return std::string(source) + ": line " + std::to_string(line) + ": " + what;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool parse_double(std::string_view text, double& out) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && ptr == text.data() + text.size() && !text.empty();
}

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

std::string format_number(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc()) throw std::logic_error("to_chars failed");
    return std::string(buf, ptr);
}

std::vector<std::string> split_record(std::string_view line) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back() += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                fields.back() += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.emplace_back();
        } else if (ch != '\r') {
            fields.back() += ch;
        }
    }
    return fields;
}

std::string quote_field(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

std::string features_csv(std::span<const morphology::GrainFeatures> rows, std::size_t first_sno) {
    std::string out(kFeatureHeader);
    out += '\n';
    std::size_t sno = first_sno;
    for (const auto& f : rows) {
        out += std::to_string(sno++);
        for (double v : f.as_array()) {
            out += ',';
            out += format_number(v);
        }
        out += '\n';
    }
    return out;
}

std::vector<FeatureRow> parse_features_csv(std::string_view text, std::string_view source) {
    std::vector<FeatureRow> rows;
    std::size_t line_no = 0;
    bool labeled = false;
    bool seen_header = false;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view line = trim(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.empty()) continue;

        auto fields = split_record(line);
        for (auto& f : fields) f = std::string(trim(f));
        if (!seen_header) {
            std::string joined;
            for (std::size_t i = 0; i < fields.size() && i < 6; ++i) joined += (i ? "," : "") + fields[i];
            labeled = fields.size() == 7 && fields[6] == "variety";
            if (joined != kFeatureHeader || (fields.size() != 6 && !labeled)) {
                throw Error(ErrorCode::ParseError,
                            parse_error(source, line_no, "expected header '" + std::string(kFeatureHeader) +
                                                             "' (optionally followed by ',variety')"));
            }
            seen_header = true;
            continue;
        }
        const std::size_t expected = labeled ? 7 : 6;
        if (fields.size() != expected) {
            throw Error(ErrorCode::ParseError, parse_error(source, line_no, "expected " + std::to_string(expected) +
                                                                                " fields, found " +
                                                                                std::to_string(fields.size())));
        }
        FeatureRow row;
        double sno = 0.0;
        if (!parse_double(fields[0], sno) || sno < 0 || sno != static_cast<double>(static_cast<std::size_t>(sno))) {
            throw Error(ErrorCode::ParseError, parse_error(source, line_no, "bad sno '" + fields[0] + "'"));
        }
        row.sno = static_cast<std::size_t>(sno);
        double* targets[5] = {&row.features.area, &row.features.major_axis, &row.features.minor_axis,
                              &row.features.eccentricity, &row.features.perimeter};
        for (std::size_t i = 0; i < 5; ++i) {
            if (!parse_double(fields[i + 1], *targets[i]) || !std::isfinite(*targets[i])) {
                throw Error(ErrorCode::ParseError,
                            parse_error(source, line_no, "bad " + std::string(morphology::kFeatureNames[i]) + " '" +
                                                             fields[i + 1] + "'"));
            }
        }
        if (labeled) {
            if (fields[6].empty()) throw Error(ErrorCode::ParseError, parse_error(source, line_no, "empty variety"));
            row.variety = fields[6];
        }
        rows.push_back(std::move(row));
    }
    if (!seen_header) throw Error(ErrorCode::ParseError, std::string(source) + ": missing header row");
    return rows;
}

std::string samples_csv(std::span<const classify::SampleReport> reports, const std::vector<std::string>& varieties,
                        std::span<const std::string> truths, bool deterministic) {
    if (!truths.empty() && truths.size() != reports.size()) {
        throw Error(ErrorCode::DimensionMismatch, "truth count differs from report count");
    }
    std::string out(kSampleHeader);
    out += '\n';
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        out += quote_field(r.sample_id) + ',' + std::to_string(r.grain_count) + ',';
        out += r.mean_scores.size() > 0 ? format_number(r.mean_scores[0]) : std::string("0");
        out += ',' + fixed6(deterministic ? 0.0 : r.elapsed_seconds) + ',';
        out += quote_field(varieties.at(r.majority)) + ',';
        if (!truths.empty()) out += quote_field(truths[i]);
        out += '\n';
    }
    return out;
}

std::string accuracy_csv(const classify::AccuracyTable& table) {
    std::string out(kAccuracyHeader);
    out += '\n';
    for (const auto& row : table.per_variety) {
        out += quote_field(row.variety) + ',' + std::to_string(row.samples) + ',' + std::to_string(row.percent()) + '\n';
    }
    out += "Overall," + std::to_string(table.overall.samples) + ',' + std::to_string(table.overall.percent()) + '\n';
    return out;
}

std::string truth_csv(std::span<const synth::GrainTruth> truth) {
    std::string out(kTruthHeader);
    out += '\n';
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const auto& t = truth[i];
        out += std::to_string(i + 1) + ',' + format_number(t.grain.center_row) + ',' + format_number(t.grain.center_col) +
               ',' + format_number(t.grain.semi_major) + ',' + format_number(t.grain.semi_minor) + ',' +
               format_number(t.grain.angle) + ',' + std::to_string(t.grain.intensity) + ',' + format_number(t.area) +
               ',' + format_number(t.eccentricity) + '\n';
    }
    return out;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) throw Error(ErrorCode::FileNotFound, path.string());
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(ErrorCode::FileNotFound, path.string());
    return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
}

void atomic_write(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw Error(ErrorCode::IoError, "cannot open " + tmp.string() + " for writing");
        os.write(content.data(), static_cast<std::streamsize>(content.size()));
        os.flush();
        if (!os) {
            std::error_code ignored;
            std::filesystem::remove(tmp, ignored);
            throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignored;
        std::filesystem::remove(tmp, ignored);
        throw Error(ErrorCode::IoError, "cannot rename onto " + path.string() + ": " + ec.message());
    }
}

}  // namespace grainscope::csv
