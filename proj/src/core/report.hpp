#pragma once

#include <string>
#include <vector>

namespace archbench::report {

// Joins one or more eval JSON documents and an analyze CSV into a single
// Markdown document with an accuracy table and a complexity table.
// Throws Error(SchemaMismatch) when an input lacks the expected fields.
std::string combined_report(const std::vector<std::string>& eval_jsons,
                            const std::string& analyze_csv);

} // namespace archbench::report
