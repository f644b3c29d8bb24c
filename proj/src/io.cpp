#include "stes/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace stes {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    size_t start = 0;
    while (true) {
        const size_t pos = line.find('\t', start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

bool parse_double(std::string_view s, double& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

}  // namespace

std::vector<CheckIn> read_checkins_stream(std::istream& in, ReadStats* stats) {
    std::vector<CheckIn> out;
    ReadStats local;
    std::string raw;
    while (std::getline(in, raw)) {
        ++local.lines;
        std::string_view line = strip_cr(raw);
        if (line.empty() || line[0] == '#') {
            ++local.skipped;
            continue;
        }
        const auto fields = split_tabs(line);
        if (fields.size() != 6) {
            ++local.skipped;
            continue;
        }
        CheckIn c;
        c.user_id = std::string(fields[0]);
        c.venue_id = std::string(fields[1]);
        c.category = std::string(fields[2]);
        const auto ts = parse_iso8601(fields[3]);
        double lat, lon;
        if (!ts || c.user_id.empty() || c.venue_id.empty() || c.category.empty() ||
            !parse_double(fields[4], lat) || !parse_double(fields[5], lon) ||
            !valid_coordinates(lat, lon)) {
            ++local.skipped;
            continue;
        }
        c.epoch_seconds = *ts;
        c.lat = lat;
        c.lon = lon;
        out.push_back(std::move(c));
        ++local.records;
    }
    if (stats) *stats = local;
    return out;
}

std::vector<CheckIn> read_checkins_tsv(const std::string& path, ReadStats* stats) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open check-in file: " + path);
    return read_checkins_stream(in, stats);
}

void write_checkins_tsv(const std::string& path, const std::vector<CheckIn>& checkins) {
    std::ostringstream out;
    out << "# user_id\tvenue_id\tcategory\ttimestamp\tlat\tlon\n";
    char buf[64];
    for (const auto& c : checkins) {
        out << c.user_id << '\t' << c.venue_id << '\t' << c.category << '\t'
            << format_iso8601_utc(c.epoch_seconds) << '\t';
        std::snprintf(buf, sizeof(buf), "%.17g\t%.17g\n", c.lat, c.lon);
        out << buf;
    }
    write_text_file_atomic(path, out.str());
}

std::vector<CrimeRecord> read_crimes_stream(std::istream& in, ReadStats* stats) {
    std::vector<CrimeRecord> out;
    ReadStats local;
    std::string raw;
    while (std::getline(in, raw)) {
        ++local.lines;
        std::string_view line = strip_cr(raw);
        if (line.empty() || line[0] == '#') {
            ++local.skipped;
            continue;
        }
        const auto fields = split_tabs(line);
        if (fields.size() != 4) {
            ++local.skipped;
            continue;
        }
        CrimeRecord r;
        const auto ts = parse_iso8601(fields[0]);
        double lat, lon;
        if (!ts || !parse_double(fields[1], lat) || !parse_double(fields[2], lon) ||
            !valid_coordinates(lat, lon) || fields[3].empty()) {
            ++local.skipped;
            continue;
        }
        r.epoch_seconds = *ts;
        r.lat = lat;
        r.lon = lon;
        r.offense = std::string(fields[3]);
        out.push_back(std::move(r));
        ++local.records;
    }
    if (stats) *stats = local;
    return out;
}

std::vector<CrimeRecord> read_crimes_tsv(const std::string& path, ReadStats* stats) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open crime file: " + path);
    return read_crimes_stream(in, stats);
}

void write_crimes_tsv(const std::string& path, const std::vector<CrimeRecord>& crimes) {
    std::ostringstream out;
    out << "# timestamp\tlat\tlon\toffense\n";
    char buf[64];
    for (const auto& r : crimes) {
        out << format_iso8601_utc(r.epoch_seconds) << '\t';
        std::snprintf(buf, sizeof(buf), "%.17g\t%.17g\t", r.lat, r.lon);
        out << buf << r.offense << '\n';
    }
    write_text_file_atomic(path, out.str());
}

void write_text_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
        out << content;
        if (!out) throw std::runtime_error("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw std::runtime_error("rename failed: " + path);
    }
}

}  // namespace stes
