"""Exact matrix rank over a prime field, for the exact controllability theorem."""

import numpy as np

from .errors import GraphError, ShapeError
from .graph import Graph

# Mersenne prime 2^61 - 1; residue products reduce with shifts and masks in uint64.
MERSENNE_61 = (1 << 61) - 1
DEFAULT_PRIME = MERSENNE_61

_INT64_SAFE_PRIME = 3037000499  # floor(sqrt(2^63 - 1))

_M61 = np.uint64(MERSENNE_61)
_LOW31 = np.uint64((1 << 31) - 1)
_LOW30 = np.uint64((1 << 30) - 1)


def _reduce61(x: np.ndarray) -> np.ndarray:
    """x mod 2^61 - 1 for any uint64 x."""
    x = (x & _M61) + (x >> np.uint64(61))
    x = (x & _M61) + (x >> np.uint64(61))
    return np.where(x >= _M61, x - _M61, x)


def mulmod61(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    Element-wise a·b mod 2^61 - 1 for uint64 residues, without overflow.

    Both factors split into a 30-bit high and 31-bit low limb; 2^61 ≡ 1 folds
    the high partial products back below 2^64.
    """
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    a1, a0 = a >> np.uint64(31), a & _LOW31
    b1, b0 = b >> np.uint64(31), b & _LOW31
    mid = a1 * b0 + a0 * b1
    total = ((a1 * b1) << np.uint64(1)) + (mid >> np.uint64(30)) + ((mid & _LOW30) << np.uint64(31)) + a0 * b0
    return _reduce61(total)


def _eliminate(work: np.ndarray, prime: int, mulmod, submod) -> int:
    rows, cols = work.shape
    rank = 0
    for col in range(cols):
        if rank == rows:
            break
        nonzero = np.flatnonzero(work[rank:, col] != 0)
        if len(nonzero) == 0:
            continue
        pivot = rank + int(nonzero[0])
        if pivot != rank:
            work[[rank, pivot], :] = work[[pivot, rank], :]
        inverse = pow(int(work[rank, col]), -1, prime)
        work[rank, col:] = mulmod(work[rank, col:], inverse)
        below = rank + 1 + np.flatnonzero(work[rank + 1:, col] != 0)
        if len(below):
            block = np.ix_(below, np.arange(col, cols))
            factors = work[below, col].reshape(-1, 1)
            work[block] = submod(work[block], mulmod(factors, work[rank, col:][None, :]))
        rank += 1
    return rank


def rank_mod_p(matrix: np.ndarray, prime: int = DEFAULT_PRIME) -> int:
    """
    Rank of an integer matrix over GF(prime) by Gaussian elimination.

    2^61 - 1 runs vectorized in uint64, primes below sqrt(2^63) in int64, and
    any other prime falls back to exact Python integers.

    Args:
        matrix: 2-D integer array (0/1 adjacency in practice)
        prime: Field characteristic

    Returns:
        Rank over GF(prime)
    """
    matrix = np.asarray(matrix)
    if matrix.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got shape {matrix.shape}")
    if matrix.size == 0:
        return 0

    if prime == MERSENNE_61:
        work = np.mod(matrix.astype(np.int64), prime).astype(np.uint64)
        return _eliminate(
            work,
            prime,
            lambda x, y: mulmod61(x, np.uint64(y) if isinstance(y, int) else y),
            lambda x, y: _reduce61(x + (_M61 - y)),
        )

    work = np.mod(matrix.astype(np.int64 if prime < _INT64_SAFE_PRIME else object), prime)
    return _eliminate(work, prime, lambda x, y: (x * y) % prime, lambda x, y: (x - y) % prime)


def driver_count_ect(graph: Graph, prime: int = DEFAULT_PRIME) -> int:
    """Driver nodes by the exact controllability theorem: max(1, N - rank(A))."""
    if graph.n_alive < 1:
        raise GraphError("graph has no live nodes")
    rank = rank_mod_p(graph.adjacency_matrix(), prime)
    return max(1, graph.n_alive - rank)
