#include "csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>

namespace cfml::detail {

std::string manifest_path(const std::string& csv_path) {
    auto pos = csv_path.find_last_of('.');
    auto slash = csv_path.find_last_of('/');
    if (pos == std::string::npos || (slash != std::string::npos && pos < slash))
        return csv_path + ".json";
    return csv_path.substr(0, pos) + ".json";
}

void write_rows(const std::string& path, const std::vector<CsvRow>& rows) {
    std::FILE* out = std::fopen(path.c_str(), "w");
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    for (const CsvRow& row : rows) {
        std::fprintf(out, "%d,%d", row.label_a, row.label_b);
        for (double v : row.x) std::fprintf(out, ",%.17g", v);
        std::fputc('\n', out);
    }
    std::fclose(out);
}

std::vector<CsvRow> read_rows(const std::string& path, std::size_t dim) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::vector<CsvRow> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        CsvRow row;
        row.x.reserve(dim);
        const char* p = line.data();
        const char* end = line.data() + line.size();
        std::size_t field = 0;
        while (p <= end) {
            const char* comma = std::find(p, end, ',');
            if (field == 0 || field == 1) {
                int v;
                auto [ptr, ec] = std::from_chars(p, comma, v);
                if (ec != std::errc{} || ptr != comma)
                    throw Error(ErrorCode::FormatError,
                                path + ": bad label at line " + std::to_string(lineno));
                (field == 0 ? row.label_a : row.label_b) = v;
            } else {
                double v;
                auto [ptr, ec] = std::from_chars(p, comma, v);
                if (ec != std::errc{} || ptr != comma)
                    throw Error(ErrorCode::FormatError,
                                path + ": bad value at line " + std::to_string(lineno));
                row.x.push_back(v);
            }
            ++field;
            if (comma == end) break;
            p = comma + 1;
        }
        if (row.x.size() != dim)
            throw Error(ErrorCode::FormatError,
                        path + ": expected " + std::to_string(dim + 2) + " fields at line " +
                            std::to_string(lineno));
        rows.push_back(std::move(row));
    }
    return rows;
}

nlohmann::json read_manifest(const std::string& csv_path) {
    const std::string mpath = manifest_path(csv_path);
    std::ifstream in(mpath);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + mpath);
    nlohmann::json manifest;
    try {
        in >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::FormatError, mpath + ": " + e.what());
    }
    return manifest;
}

void write_manifest(const std::string& csv_path, const nlohmann::json& manifest) {
    std::ofstream out(manifest_path(csv_path));
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + manifest_path(csv_path));
    out << manifest.dump(2) << "\n";
}

} // namespace cfml::detail
