#include "rwpm/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include "rwpm/version.hpp"

namespace rwpm {

namespace {

const char* kHeader = "experiment,params,value,stderr,method,seed";

bool needs_quote(const std::string& s) {
    return s.find_first_of(",\"\n\r") != std::string::npos;
}

std::string quote(const std::string& s) {
    if (!needs_quote(s)) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

// Splits one CSV line honouring quoted fields.
std::vector<std::string> split_fields(const std::string& line, std::size_t lineno) {
    std::vector<std::string> fields;
    std::string cur;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (in_quotes)
        throw std::runtime_error("parse_csv: unterminated quote on line " + std::to_string(lineno));
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& s, std::size_t lineno) {
    const char* b = s.c_str();
    char* end = nullptr;
    double v = std::strtod(b, &end);
    if (end == b || *end != '\0')
        throw std::runtime_error("parse_csv: bad numeric cell '" + s + "' on line " + std::to_string(lineno));
    return v;
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string to_csv(const std::vector<Record>& records) {
    std::string out = "# ";
    out += kCsvSchema;
    out += '\n';
    out += kHeader;
    out += '\n';
    for (const Record& r : records) {
        out += quote(r.experiment);
        out += ',';
        out += quote(r.params);
        out += ',';
        out += format_double(r.value);
        out += ',';
        out += r.has_stderr ? format_double(r.stderr_) : "null";
        out += ',';
        out += quote(r.method);
        out += ',';
        out += std::to_string(r.seed);
        out += '\n';
    }
    return out;
}

void write_csv(const std::string& path, const std::vector<Record>& records) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_csv: cannot open " + path);
    f << to_csv(records);
    if (!f) throw std::runtime_error("write_csv: write failed for " + path);
}

std::vector<Record> parse_csv(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            if (!cur.empty() && cur.back() == '\r') cur.pop_back();
            lines.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) lines.push_back(cur);
    if (lines.size() < 2) throw std::runtime_error("parse_csv: missing schema/header rows");
    if (lines[0] != std::string("# ") + kCsvSchema)
        throw std::runtime_error("parse_csv: schema row mismatch, expected '# " + std::string(kCsvSchema) + "'");
    if (lines[1] != kHeader) throw std::runtime_error("parse_csv: header row mismatch");

    std::vector<Record> records;
    for (std::size_t i = 2; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        std::vector<std::string> f = split_fields(lines[i], i + 1);
        if (f.size() != 6)
            throw std::runtime_error("parse_csv: expected 6 cells on line " + std::to_string(i + 1) +
                                     ", got " + std::to_string(f.size()));
        Record r;
        r.experiment = f[0];
        r.params = f[1];
        r.value = parse_double(f[2], i + 1);
        if (f[3] == "null") {
            r.has_stderr = false;
        } else {
            r.has_stderr = true;
            r.stderr_ = parse_double(f[3], i + 1);
        }
        r.method = f[4];
        r.seed = std::strtoull(f[5].c_str(), nullptr, 10);
        records.push_back(std::move(r));
    }
    return records;
}

ParamTuple& ParamTuple::add(const std::string& key, const std::string& v) {
    if (!s_.empty()) s_ += ';';
    s_ += key;
    s_ += '=';
    s_ += v;
    return *this;
}

ParamTuple& ParamTuple::add(const std::string& key, double v) { return add(key, format_double(v)); }
ParamTuple& ParamTuple::add(const std::string& key, int v) { return add(key, std::to_string(v)); }
ParamTuple& ParamTuple::add(const std::string& key, std::uint64_t v) { return add(key, std::to_string(v)); }

}  // namespace rwpm
