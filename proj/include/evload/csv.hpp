#pragma once

// Small RFC4180-ish CSV reader/writer. Quoted fields with embedded commas,
// quotes and newlines are handled; everything is kept as strings.

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace evload {

class CsvReader {
public:
    explicit CsvReader(const std::string& path) : in_(path) {
        if (!in_) throw std::runtime_error("cannot open file: " + path);
        std::vector<std::string> hdr;
        if (!read_row(hdr)) throw std::runtime_error("empty CSV: " + path);
        if (!hdr.empty() && hdr[0].size() >= 3 &&
            static_cast<unsigned char>(hdr[0][0]) == 0xEF)
            hdr[0].erase(0, 3);  // UTF-8 BOM
        header_ = hdr;
        for (size_t i = 0; i < hdr.size(); ++i) index_[hdr[i]] = i;
    }

    const std::vector<std::string>& header() const { return header_; }

    bool has_column(const std::string& name) const { return index_.count(name) > 0; }

    size_t column(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end())
            throw std::runtime_error("column not found: " + name);
        return it->second;
    }

    // Returns false at EOF. Rows shorter than the header are padded with
    // empty fields.
    bool next(std::vector<std::string>& row) {
        if (!read_row(row)) return false;
        row.resize(std::max(row.size(), header_.size()));
        return true;
    }

private:
    bool read_row(std::vector<std::string>& row) {
        row.clear();
        std::string field;
        bool in_quotes = false, any = false;
        int ch;
        while ((ch = in_.get()) != EOF) {
            any = true;
            char c = static_cast<char>(ch);
            if (in_quotes) {
                if (c == '"') {
                    if (in_.peek() == '"') { field += '"'; in_.get(); }
                    else in_quotes = false;
                } else field += c;
            } else if (c == '"') {
                in_quotes = true;
            } else if (c == ',') {
                row.push_back(std::move(field));
                field.clear();
            } else if (c == '\n') {
                row.push_back(std::move(field));
                return true;
            } else if (c != '\r') {
                field += c;
            }
        }
        if (!any) return false;
        row.push_back(std::move(field));
        return true;
    }

    std::ifstream in_;
    std::vector<std::string> header_;
    std::map<std::string, size_t> index_;
};

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string csv_join(const std::vector<std::string>& fields) {
    std::string out;
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += csv_escape(fields[i]);
    }
    out += '\n';
    return out;
}

// Fixed-format double rendering so outputs are byte-reproducible.
inline std::string format_double(double v, int precision = 9) {
    std::ostringstream os;
    os.precision(precision);
    os << std::defaultfloat << v;
    return os.str();
}

}  // namespace evload
