"""
gf2.py - Álgebra linear densa sobre GF(2)

Eliminação de Gauss com XOR de linhas em arrays uint8. Usada para bases de
ciclos, soluções de ∂x = b no mapa de gauging e representantes canônicos
de classes laterais.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
import scipy.sparse as sp


def as_dense(M) -> np.ndarray:
    """Converte matriz (densa ou esparsa) para uint8 mod 2"""
    if sp.issparse(M):
        M = M.toarray()
    return (np.asarray(M) & 1).astype(np.uint8, copy=True)


def row_reduce(M, n_pivot_cols: Optional[int] = None) -> tuple[np.ndarray, list[int]]:
    """Forma escalonada reduzida (RREF) sobre GF(2).

    Só procura pivôs nas primeiras ``n_pivot_cols`` colunas; as operações de
    linha ainda valem para a largura toda (matrizes aumentadas).

    Returns:
        (R, pivots) com R do mesmo formato de M e ``len(pivots)`` igual ao posto.
    """
    A = as_dense(M)
    m, n = A.shape
    if n_pivot_cols is None:
        n_pivot_cols = n

    pivots: list[int] = []
    r = 0
    for c in range(n_pivot_cols):
        if r >= m:
            break
        rows = np.flatnonzero(A[r:, c])
        if rows.size == 0:
            continue
        p = r + int(rows[0])
        if p != r:
            A[[r, p], :] = A[[p, r], :]
        ones = np.flatnonzero(A[:, c])
        ones = ones[ones != r]
        if ones.size:
            A[ones, :] ^= A[r, :]
        pivots.append(c)
        r += 1
    return A, pivots


def rank(M) -> int:
    _, pivots = row_reduce(M)
    return len(pivots)


def kernel_basis(M) -> np.ndarray:
    """Base do núcleo {x : Mx = 0}, uma linha por vetor"""
    R, pivots = row_reduce(M)
    n = R.shape[1]
    pivot_set = set(pivots)
    free = [c for c in range(n) if c not in pivot_set]
    K = np.zeros((len(free), n), dtype=np.uint8)
    if not free:
        return K
    K[np.arange(len(free)), free] = 1
    if pivots:
        K[:, pivots] = R[: len(pivots), :][:, free].T
    return K


def solve(M, b) -> Optional[np.ndarray]:
    """Uma solução de Mx = b, ou None se o sistema for inconsistente"""
    X = solve_many(M, np.asarray(b).reshape(-1, 1))
    return None if X is None else X[:, 0]


def solve_many(M, B) -> Optional[np.ndarray]:
    """Resolve MX = B coluna a coluna com uma única eliminação.

    Retorna None se alguma coluna de B estiver fora da imagem de M.
    """
    A = as_dense(M)
    B = (np.asarray(B) & 1).astype(np.uint8)
    m, n = A.shape
    aug = np.concatenate([A, B], axis=1)
    R, pivots = row_reduce(aug, n_pivot_cols=n)
    r = len(pivots)
    if R[r:, n:].any():
        return None
    X = np.zeros((n, B.shape[1]), dtype=np.uint8)
    if pivots:
        X[pivots, :] = R[:r, n:]
    return X


class RowSpace:
    """Subespaço gerado por linhas, com redução canônica de vetores.

    Dois vetores têm o mesmo representante canônico se e somente se diferem
    por um elemento do subespaço.
    """

    def __init__(self, generators):
        R, pivots = row_reduce(generators)
        self.basis = R[: len(pivots)].copy()
        self.pivots = list(pivots)

    @property
    def dim(self) -> int:
        return len(self.pivots)

    def reduce(self, v) -> np.ndarray:
        v = (np.asarray(v) & 1).astype(np.uint8, copy=True)
        for row, c in zip(self.basis, self.pivots):
            if v[c]:
                v ^= row
        return v

    def contains(self, v) -> bool:
        return not self.reduce(v).any()
