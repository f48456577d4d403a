#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rwpm {

// One output record. Numeric cells print as %.17g (round-trip exact);
// stderr_ is nullable ("" -> literal "null") for exact (non-MC) values.
struct Record {
    std::string experiment;  // experiment id
    std::string params;      // canonical param tuple "k1=v1;k2=v2;..."
    double value = 0;
    bool has_stderr = false;
    double stderr_ = 0;
    std::string method;        // method tag, e.g. "exact-dp", "mc", "fft"
    std::uint64_t seed = 0;    // task seed lineage (0 for deterministic)
};

// Versioned CSV: first row "# rwpm-csv v1", then the header, then records in
// the order given. Deterministic bytes for identical record sequences.
std::string to_csv(const std::vector<Record>& records);
void write_csv(const std::string& path, const std::vector<Record>& records);
std::vector<Record> parse_csv(const std::string& text);  // round-trip for tests

std::string format_double(double v);  // %.17g with nan/inf spelled out

// Canonical "k=v;..." builder: keys in the order provided by the caller
// (callers fix a canonical order per experiment).
class ParamTuple {
public:
    ParamTuple& add(const std::string& key, const std::string& v);
    ParamTuple& add(const std::string& key, double v);
    ParamTuple& add(const std::string& key, int v);
    ParamTuple& add(const std::string& key, std::uint64_t v);
    std::string str() const { return s_; }

private:
    std::string s_;
};

}  // namespace rwpm
