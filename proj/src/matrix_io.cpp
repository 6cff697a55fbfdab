#include "dppc/matrix_io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace dppc {

namespace {

constexpr char kMagic[4] = {'D', 'P', 'K', 'M'};

void write_u64(std::ostream& out, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(buf, 8);
}

std::uint64_t read_u64(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

void write_doubles(std::ostream& out, const std::vector<double>& v) {
    write_u64(out, v.size());
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> read_doubles(std::istream& in) {
    std::vector<double> v(read_u64(in));
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    return v;
}

template <typename T>
void write_ints(std::ostream& out, const std::vector<T>& v) {
    write_u64(out, v.size());
    for (T x : v) write_u64(out, static_cast<std::uint64_t>(x));
}

template <typename T>
std::vector<T> read_ints(std::istream& in) {
    std::vector<T> v(read_u64(in));
    for (auto& x : v) x = static_cast<T>(read_u64(in));
    return v;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path, MatrixKind expected, std::uint64_t& order) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    char magic[4];
    in.read(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("bad matrix magic: " + path);
    order = read_u64(in);
    char kind = 0;
    in.get(kind);
    if (static_cast<MatrixKind>(kind) != expected)
        throw std::runtime_error("unexpected matrix kind in " + path);
    return in;
}

void write_header(std::ostream& out, std::uint64_t order, MatrixKind kind) {
    out.write(kMagic, 4);
    write_u64(out, order);
    out.put(static_cast<char>(kind));
}

}  // namespace

void write_matrix(const std::string& path, const SymmetricDense& m) {
    auto out = open_out(path);
    write_header(out, m.order(), MatrixKind::dense);
    write_doubles(out, m.packed());
    write_ints(out, m.global_indices);
}

void write_matrix(const std::string& path, const SparseSym& m) {
    auto out = open_out(path);
    write_header(out, m.order(), MatrixKind::sparse);
    write_ints(out, m.row_ptr());
    write_ints(out, m.cols());
    write_doubles(out, m.values());
}

void write_matrix(const std::string& path, const NNGPFactor& f) {
    auto out = open_out(path);
    write_header(out, f.order, MatrixKind::factor);
    write_u64(out, f.m);
    write_ints(out, f.row_ptr);
    write_ints(out, f.neighbors);
    write_doubles(out, f.a_values);
    write_doubles(out, f.d);
}

MatrixKind peek_matrix_kind(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    char magic[4];
    in.read(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("bad matrix magic: " + path);
    read_u64(in);
    char kind = 0;
    in.get(kind);
    return static_cast<MatrixKind>(kind);
}

SymmetricDense read_dense_matrix(const std::string& path) {
    std::uint64_t order = 0;
    auto in = open_in(path, MatrixKind::dense, order);
    SymmetricDense m(order);
    m.packed() = read_doubles(in);
    if (m.packed().size() != order * (order + 1) / 2) throw std::runtime_error("corrupt dense payload: " + path);
    m.global_indices = read_ints<std::size_t>(in);
    return m;
}

SparseSym read_sparse_matrix(const std::string& path) {
    std::uint64_t order = 0;
    auto in = open_in(path, MatrixKind::sparse, order);
    auto row_ptr = read_ints<std::size_t>(in);
    auto cols = read_ints<std::uint32_t>(in);
    auto values = read_doubles(in);
    if (row_ptr.size() != order + 1 || cols.size() != values.size())
        throw std::runtime_error("corrupt sparse payload: " + path);
    std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(order);
    for (std::size_t i = 0; i < order; ++i)
        for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) rows[i].emplace_back(cols[k], values[k]);
    return SparseSym::from_rows(order, rows);
}

NNGPFactor read_factor(const std::string& path) {
    std::uint64_t order = 0;
    auto in = open_in(path, MatrixKind::factor, order);
    NNGPFactor f;
    f.order = order;
    f.m = read_u64(in);
    f.row_ptr = read_ints<std::size_t>(in);
    f.neighbors = read_ints<std::uint32_t>(in);
    f.a_values = read_doubles(in);
    f.d = read_doubles(in);
    if (f.row_ptr.size() != order + 1 || f.neighbors.size() != f.a_values.size() || f.d.size() != order)
        throw std::runtime_error("corrupt factor payload: " + path);
    return f;
}

void write_matrix_csv(const std::string& path, const SymmetricDense& m) {
    std::FILE* out = std::fopen(path.c_str(), "w");
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (std::size_t i = 0; i < m.order(); ++i) {
        for (std::size_t j = 0; j < m.order(); ++j)
            std::fprintf(out, j + 1 == m.order() ? "%.17g\n" : "%.17g,", m.at(i, j));
    }
    std::fclose(out);
}

}  // namespace dppc
