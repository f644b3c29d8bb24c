#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "stes/checkin.hpp"

namespace stes {

struct CrimeRecord {
    int64_t epoch_seconds = 0;
    double lat = 0.0;
    double lon = 0.0;
    std::string offense;
};

struct ReadStats {
    size_t lines = 0;
    size_t records = 0;
    size_t skipped = 0;  // comments, blanks, malformed
};

// Line format: user_id <TAB> venue_id <TAB> category <TAB> ISO-8601 <TAB> lat <TAB> lon
// '#'-prefixed lines and blank lines are skipped. Malformed lines are counted
// and dropped.
std::vector<CheckIn> read_checkins_tsv(const std::string& path, ReadStats* stats = nullptr);
std::vector<CheckIn> read_checkins_stream(std::istream& in, ReadStats* stats = nullptr);
void write_checkins_tsv(const std::string& path, const std::vector<CheckIn>& checkins);

// Line format: ISO-8601 <TAB> lat <TAB> lon <TAB> offense
std::vector<CrimeRecord> read_crimes_tsv(const std::string& path, ReadStats* stats = nullptr);
std::vector<CrimeRecord> read_crimes_stream(std::istream& in, ReadStats* stats = nullptr);
void write_crimes_tsv(const std::string& path, const std::vector<CrimeRecord>& crimes);

// Writes to "<path>.tmp" then renames, so readers never observe a torn file.
void write_text_file_atomic(const std::string& path, const std::string& content);

}  // namespace stes
