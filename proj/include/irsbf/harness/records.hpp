#pragma once

#include <fstream>
#include <iosfwd>
#include <mutex>
#include <string>
#include <vector>

#include "irsbf/harness/experiment.hpp"

namespace irsbf::harness {

inline constexpr const char* csv_header =
    "sweep_name,sweep_value,method,bits,seed,wsr_bps_hz,outer_iterations,wall_time_ms";

std::string format_record(const SweepRecord& r);

/// Parses CSV text with the exact header above. A malformed field throws
/// ConfigError naming its column and line.
std::vector<SweepRecord> parse_records(std::istream& in);

/// parse_records on a file; an unreadable file throws IoError.
std::vector<SweepRecord> read_records(const std::string& path);

/// Appends rows to a CSV file, writing the header on open. Thread-safe; each
/// write() call lands as one block and is flushed before returning.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path);
    void write(const std::vector<SweepRecord>& rows);

private:
    std::ofstream out_;
    std::string path_;
    std::mutex mutex_;
};

struct SummaryRow {
    std::string sweep_name;
    double sweep_value = 0;
    Method method = Method::MM;
    int bits = 0;
    std::size_t n = 0;
    double mean = 0;
    /// Half-width of the normal-approximation 95% interval, 1.96 sd / sqrt(n); 0 when n = 1.
    double ci95 = 0;
};

/// Groups by (sweep_name, sweep_value, method, bits). The result does not
/// depend on the order of `records`.
std::vector<SummaryRow> summarize(const std::vector<SweepRecord>& records);

inline constexpr const char* summary_header = "sweep_name,sweep_value,method,bits,n,mean_wsr_bps_hz,ci95_bps_hz";

void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows);

} // namespace irsbf::harness
