#pragma once

#include <string>

#include "dppc/nngp.hpp"
#include "dppc/sparse_sym.hpp"
#include "dppc/symmetric_dense.hpp"

namespace dppc {

/// Binary matrix container: little-endian, magic "DPKM", u64 order, u8 kind,
/// then the payload. Kinds: 0 dense packed upper triangle, 1 sparse CSR,
/// 2 NNGP factor.
void write_matrix(const std::string& path, const SymmetricDense& m);
void write_matrix(const std::string& path, const SparseSym& m);
void write_matrix(const std::string& path, const NNGPFactor& f);

enum class MatrixKind : std::uint8_t { dense = 0, sparse = 1, factor = 2 };

MatrixKind peek_matrix_kind(const std::string& path);
SymmetricDense read_dense_matrix(const std::string& path);
SparseSym read_sparse_matrix(const std::string& path);
NNGPFactor read_factor(const std::string& path);

/// Full (unpacked) matrix as CSV; intended for small orders.
void write_matrix_csv(const std::string& path, const SymmetricDense& m);

}  // namespace dppc
