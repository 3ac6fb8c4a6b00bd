#include "abx/io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>

#include "abx/errors.hpp"

namespace abx {

namespace {

const char kMagic[4] = {'A', 'B', 'X', 'F'};
const std::uint32_t kVersion = 1;

struct FileCloser {
    std::FILE* f;
    ~FileCloser() {
        if (f) std::fclose(f);
    }
};

void put_u32(std::FILE* f, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    std::fwrite(b, 1, 4, f);
}

std::uint32_t get_u32(std::FILE* f) {
    unsigned char b[4];
    if (std::fread(b, 1, 4, f) != 4) throw config_error("abxf: truncated header");
    return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
           std::uint32_t(b[3]) << 24;
}

void put_f64(std::FILE* f, double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
    std::fwrite(b, 1, 8, f);
}

double get_f64(std::FILE* f) {
    unsigned char b[8];
    if (std::fread(b, 1, 8, f) != 8) throw config_error("abxf: truncated data");
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= std::uint64_t(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &u, 8);
    return v;
}

std::FILE* open_write(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw config_error("abxf: cannot open for writing: " + path);
    return f;
}

std::FILE* open_read(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw config_error("abxf: cannot open: " + path);
    return f;
}

void write_header(std::FILE* f, const Grid2D& g, unsigned char payload) {
    std::fwrite(kMagic, 1, 4, f);
    put_u32(f, kVersion);
    put_u32(f, std::uint32_t(g.nx));
    put_u32(f, std::uint32_t(g.ny));
    put_f64(f, g.origin.x);
    put_f64(f, g.origin.y);
    put_f64(f, g.spacing.x);
    put_f64(f, g.spacing.y);
    std::fputc(payload, f);
}

Grid2D read_header(std::FILE* f, unsigned char* payload) {
    char magic[4];
    if (std::fread(magic, 1, 4, f) != 4 || std::memcmp(magic, kMagic, 4) != 0)
        throw config_error("abxf: bad magic");
    std::uint32_t ver = get_u32(f);
    if (ver != kVersion) throw config_error("abxf: unsupported version " + std::to_string(ver));
    Grid2D g;
    g.nx = int(get_u32(f));
    g.ny = int(get_u32(f));
    if (g.nx <= 0 || g.ny <= 0 || std::size_t(g.nx) * g.ny > (std::size_t(1) << 28))
        throw config_error("abxf: implausible grid size");
    g.origin.x = get_f64(f);
    g.origin.y = get_f64(f);
    g.spacing.x = get_f64(f);
    g.spacing.y = get_f64(f);
    int p = std::fgetc(f);
    if (p != 0 && p != 1) throw config_error("abxf: bad payload flag");
    *payload = static_cast<unsigned char>(p);
    return g;
}

} // namespace

void write_abxf_real(const std::string& path, const ScalarGridField& fld) {
    std::FILE* f = open_write(path);
    FileCloser fc{f};
    write_header(f, fld.grid, 0);
    for (double v : fld.data) put_f64(f, v);
    if (std::ferror(f)) throw config_error("abxf: write failure: " + path);
}

void write_abxf_complex(const std::string& path, const ComplexGridField& fld) {
    std::FILE* f = open_write(path);
    FileCloser fc{f};
    write_header(f, fld.grid, 1);
    for (const auto& v : fld.data) {
        put_f64(f, v.real());
        put_f64(f, v.imag());
    }
    if (std::ferror(f)) throw config_error("abxf: write failure: " + path);
}

ScalarGridField read_abxf_real(const std::string& path) {
    std::FILE* f = open_read(path);
    FileCloser fc{f};
    unsigned char payload;
    Grid2D g = read_header(f, &payload);
    if (payload != 0) throw config_error("abxf: expected real payload: " + path);
    ScalarGridField fld(g);
    for (auto& v : fld.data) v = get_f64(f);
    return fld;
}

ComplexGridField read_abxf_complex(const std::string& path) {
    std::FILE* f = open_read(path);
    FileCloser fc{f};
    unsigned char payload;
    Grid2D g = read_header(f, &payload);
    if (payload != 1) throw config_error("abxf: expected complex payload: " + path);
    ComplexGridField fld(g);
    for (auto& v : fld.data) {
        double re = get_f64(f);
        double im = get_f64(f);
        v = {re, im};
    }
    return fld;
}

bool abxf_is_complex(const std::string& path) {
    std::FILE* f = open_read(path);
    FileCloser fc{f};
    unsigned char payload;
    read_header(f, &payload);
    return payload == 1;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw config_error("csv: cannot open for writing: " + path);
    f_ = f;
}

CsvWriter::~CsvWriter() {
    if (f_) std::fclose(static_cast<std::FILE*>(f_));
}

void CsvWriter::header(const std::vector<std::string>& cols) {
    row_mixed(cols);
}

void CsvWriter::row(const std::vector<double>& vals) {
    std::FILE* f = static_cast<std::FILE*>(f_);
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (i) std::fputc(',', f);
        std::fputs(format_double(vals[i]).c_str(), f);
    }
    std::fputc('\n', f);
}

void CsvWriter::row_mixed(const std::vector<std::string>& vals) {
    std::FILE* f = static_cast<std::FILE*>(f_);
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (i) std::fputc(',', f);
        std::fputs(vals[i].c_str(), f);
    }
    std::fputc('\n', f);
}

} // namespace abx
