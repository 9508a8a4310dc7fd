#pragma once

#include "sscl/numgrad/tape.hpp"

namespace sscl::contrastive {

using numgrad::Index;
using numgrad::RowMatrix;

// Pairwise cosine similarities of the rows of z. Throws Error{DegenerateVector}
// if a row has zero norm.
RowMatrix similarity_matrix(const RowMatrix& z);

// -log( exp(s_ij / tau) / sum_{k != i} exp(s_ik / tau) ). Throws
// Error{InvalidPair} when i == j or an index is out of range.
double pair_loss(Index i, Index j, const RowMatrix& similarity, double tau);

// Rows (2k, 2k+1) are positive pairs (0-based). Symmetric mean of the pair
// losses over all 2N rows. Throws Error{InvalidBatch} for an odd or empty row
// count.
double batch_loss(const RowMatrix& z, double tau);

// Same value as batch_loss, recorded on the tape with an analytic backward.
// Input is [2N, d].
numgrad::Var nt_xent(numgrad::Tape& tape, numgrad::Var z, double tau);

}  // namespace sscl::contrastive
