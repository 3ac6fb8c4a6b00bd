#pragma once

#include <string>
#include <vector>

#include "abx/grid.hpp"

namespace abx {

// ABXF field container, little-endian:
//   "ABXF" | version u32 = 1 | nx u32 | ny u32 | origin f64 x2 | spacing f64 x2
//   | payload u8 (0 = real, 1 = complex interleaved) | row-major f64 data.
// Round trips are bit-exact; readers reject wrong magic, version or size.
void write_abxf_real(const std::string& path, const ScalarGridField& f);
void write_abxf_complex(const std::string& path, const ComplexGridField& f);
ScalarGridField read_abxf_real(const std::string& path);
ComplexGridField read_abxf_complex(const std::string& path);

// is_complex is filled from the payload flag without reading the data
bool abxf_is_complex(const std::string& path);

// CSV with '.' decimal separator and %.17g formatting, locale independent.
struct CsvWriter {
    explicit CsvWriter(const std::string& path);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void header(const std::vector<std::string>& cols);
    void row(const std::vector<double>& vals);
    void row_mixed(const std::vector<std::string>& vals);

  private:
    void* f_ = nullptr;
};

std::string format_double(double v);  // shortest round-trippable decimal

} // namespace abx
