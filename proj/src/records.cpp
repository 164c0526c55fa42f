#include "irsbf/harness/records.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

namespace irsbf::harness {

namespace {

std::string fmt(const char* spec, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> fields;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, ','))
        fields.push_back(cur);
    if (!line.empty() && line.back() == ',')
        fields.emplace_back();
    return fields;
}

template <class T> T parse_number(const std::string& text, const char* column, std::size_t line)
{
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || text.empty())
        throw ConfigError("CSV line " + std::to_string(line) + ": column '" + column + "' has invalid value '" + text + "'");
    return value;
}

} // namespace

std::string format_record(const SweepRecord& r)
{
    return r.sweep_name + "," + fmt("%.10g", r.sweep_value) + "," + to_string(r.method) + "," + std::to_string(r.bits) +
           "," + std::to_string(r.seed) + "," + fmt("%.12g", r.wsr_bps_hz) + "," + std::to_string(r.outer_iterations) +
           "," + fmt("%.3f", r.wall_time_ms);
}

std::vector<SweepRecord> parse_records(std::istream& in)
{
    static const char* columns[] = {"sweep_name", "sweep_value",      "method",          "bits",
                                    "seed",       "wsr_bps_hz", "outer_iterations", "wall_time_ms"};
    std::string line;
    if (!std::getline(in, line))
        throw ConfigError("CSV: missing header");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    const auto header = split(line);
    for (std::size_t c = 0; c < std::size(columns); ++c)
        if (c >= header.size() || header[c] != columns[c])
            throw ConfigError(std::string("CSV header: expected column '") + columns[c] + "' at position " +
                              std::to_string(c + 1));
    if (header.size() != std::size(columns))
        throw ConfigError("CSV header: unexpected column '" + header[std::size(columns)] + "'");

    std::vector<SweepRecord> records;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const auto f = split(line);
        if (f.size() != std::size(columns))
            throw ConfigError("CSV line " + std::to_string(lineno) + ": expected 8 columns, found " +
                              std::to_string(f.size()));
        SweepRecord r;
        r.sweep_name = f[0];
        if (r.sweep_name.empty())
            throw ConfigError("CSV line " + std::to_string(lineno) + ": column 'sweep_name' is empty");
        r.sweep_value = parse_number<double>(f[1], columns[1], lineno);
        try {
            r.method = parse_method(f[2]);
        } catch (const ConfigError&) {
            throw ConfigError("CSV line " + std::to_string(lineno) + ": column 'method' has invalid value '" + f[2] + "'");
        }
        r.bits = parse_number<int>(f[3], columns[3], lineno);
        r.seed = parse_number<std::uint64_t>(f[4], columns[4], lineno);
        r.wsr_bps_hz = parse_number<double>(f[5], columns[5], lineno);
        if (!(r.wsr_bps_hz >= 0))
            throw ConfigError("CSV line " + std::to_string(lineno) + ": column 'wsr_bps_hz' must be >= 0");
        r.outer_iterations = parse_number<int>(f[6], columns[6], lineno);
        r.wall_time_ms = parse_number<double>(f[7], columns[7], lineno);
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<SweepRecord> read_records(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read '" + path + "'");
    return parse_records(in);
}

CsvWriter::CsvWriter(const std::string& path) : out_(path, std::ios::trunc), path_(path)
{
    if (!out_)
        throw IoError("cannot open '" + path + "' for writing");
    out_ << csv_header << '\n' << std::flush;
    if (!out_)
        throw IoError("write to '" + path + "' failed");
}

void CsvWriter::write(const std::vector<SweepRecord>& rows)
{
    std::string block;
    for (const auto& r : rows)
        block += format_record(r) + '\n';
    std::lock_guard lock(mutex_);
    out_ << block << std::flush;
    if (!out_)
        throw IoError("write to '" + path_ + "' failed");
}

std::vector<SummaryRow> summarize(const std::vector<SweepRecord>& records)
{
    using Key = std::tuple<std::string, double, int, int>;
    std::map<Key, std::vector<double>> groups;
    for (const auto& r : records)
        groups[{r.sweep_name, r.sweep_value, static_cast<int>(r.method), r.bits}].push_back(r.wsr_bps_hz);

    std::vector<SummaryRow> rows;
    for (auto& [key, values] : groups) {
        std::sort(values.begin(), values.end());
        const double n = static_cast<double>(values.size());
        double sum = 0;
        for (double v : values)
            sum += v;
        const double mean = sum / n;
        double ss = 0;
        for (double v : values)
            ss += (v - mean) * (v - mean);
        SummaryRow row;
        row.sweep_name = std::get<0>(key);
        row.sweep_value = std::get<1>(key);
        row.method = static_cast<Method>(std::get<2>(key));
        row.bits = std::get<3>(key);
        row.n = values.size();
        row.mean = mean;
        row.ci95 = values.size() > 1 ? 1.96 * std::sqrt(ss / (n - 1)) / std::sqrt(n) : 0.0;
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows)
{
    out << summary_header << '\n';
    for (const auto& r : rows)
        out << r.sweep_name << ',' << fmt("%.10g", r.sweep_value) << ',' << to_string(r.method) << ',' << r.bits << ','
            << r.n << ',' << fmt("%.10g", r.mean) << ',' << fmt("%.10g", r.ci95) << '\n';
}

} // namespace irsbf::harness
