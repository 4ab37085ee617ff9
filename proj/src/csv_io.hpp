#pragma once

// Internal CSV + manifest plumbing shared by the dataset writers. Rows are
// `label_a,label_b,x_0,...` with %.17g doubles so values round-trip bit
// exactly; each CSV has a JSON manifest next to it (same base name).

#include <string>
#include <vector>

#include <json.hpp>

#include "cfml/errors.hpp"
#include "cfml/numerics.hpp"

namespace cfml::detail {

std::string manifest_path(const std::string& csv_path);

struct CsvRow {
    int label_a = 0;
    int label_b = 0;
    Vector x;
};

void write_rows(const std::string& path, const std::vector<CsvRow>& rows);
std::vector<CsvRow> read_rows(const std::string& path, std::size_t dim);

nlohmann::json read_manifest(const std::string& csv_path);
void write_manifest(const std::string& csv_path, const nlohmann::json& manifest);

} // namespace cfml::detail
