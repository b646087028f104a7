#ifndef FRACFACT_IO_HPP
#define FRACFACT_IO_HPP

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fracfact/design.hpp"
#include "fracfact/intmat.hpp"
#include "fracfact/model.hpp"

namespace fracfact {

/// 4ti2-style matrix text: first line "rows cols", then whitespace-separated
/// integer entries row by row.
IntMatrix read_matrix_4ti2(std::istream& in);
void write_matrix_4ti2(std::ostream& out, const IntMatrix& m);

/// Design file: line 1 "p q", then q lines "X=WORD" (e.g. "E=ABC").
/// '#' starts a comment; blank lines are skipped.
DesignSpec read_design_file(std::istream& in);
DesignSpec read_design_path(const std::string& path);

/// Model file: a single line of slash-separated words.
ModelSpec read_model_file(std::istream& in, int p, bool closure);
ModelSpec read_model_path(const std::string& path, int p, bool closure);

struct DataSet {
    std::vector<long long> counts;
    std::optional<std::vector<long long>> denominators; // present for binomial data
};

/// Data file: one line per run, "count" (poisson) or "successes denominator"
/// (binomial); the column count must be consistent across lines.
DataSet read_data_file(std::istream& in);
DataSet read_data_path(const std::string& path);

/// FNV-1a 64-bit digest of a file's bytes, as 16 hex digits.
std::string file_digest(const std::string& path);

struct RunManifest {
    std::string version;
    std::string command;
    std::map<std::string, std::string> input_digests; // path -> digest
    std::map<std::string, std::string> config;        // resolved settings
    std::map<std::string, std::string> outputs;       // label -> path

    std::string to_json() const;
};

void write_manifest(const RunManifest& m, const std::string& path);

std::string read_text_file(const std::string& path);

} // namespace fracfact

#endif
