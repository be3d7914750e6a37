#pragma once

// Sign conventions shared by the superdeterminant, loop and zeta assemblies.
namespace rbf::signs {

constexpr int parity(int k) { return (k % 2 == 0) ? 1 : -1; }

// Exponent of the k-th factor in a superdeterminant / alternating product.
constexpr int form_degree(int k) { return parity(k); }

// Loop diagrams on form degree k: the ghost grading is shifted by one.
constexpr int loop(int k) { return -parity(k); }

// Overall exponent of the Ruelle zeta function for rank m stable bundle.
constexpr int rank(int m) { return parity(m); }

}  // namespace rbf::signs
