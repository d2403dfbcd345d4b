#pragma once

#include <string>
#include <vector>

#include "shiftlab/samples.hpp"

namespace shiftlab {

// RFC-4180-style CSV: fields containing commas, quotes, or newlines are
// quoted, embedded quotes doubled. All numerics are written with 15
// significant digits.

std::string format_number(double v);

std::string csv_escape(const std::string& field);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv_file(const std::string& path);

void write_csv_file(const std::string& path, const CsvTable& table);

// Dataset files carry the header `period,x,y1,y2`; unobserved outcomes are
// empty fields. Rows that violate the per-period observability pattern are
// rejected with their line number.
SampleSet load_dataset(const std::string& path);

void save_dataset(const SampleSet& samples, const std::string& path);

}  // namespace shiftlab
