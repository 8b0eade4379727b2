"""Arithmetic in GF(2^m) for small m via log/antilog tables."""

from __future__ import annotations

import numpy as np

from ..validation import ValidationError

# primitive polynomials, bit i = coefficient of x^i
PRIMITIVE = {1: 0b11, 2: 0b111, 3: 0b1011, 4: 0b10011, 5: 0b100101, 6: 0b1000011,
             7: 0b10001001, 8: 0b100011101, 9: 0b1000010001, 10: 0b10000001001}


class GF2m:
    def __init__(self, m):
        if m not in PRIMITIVE:
            raise ValidationError(f"GF(2^{m}) not supported (m must be 1..{max(PRIMITIVE)})")
        self.m = m
        self.q = 1 << m
        exp = np.zeros(2 * self.q, dtype=np.int64)
        log = np.zeros(self.q, dtype=np.int64)
        x = 1
        for i in range(self.q - 1):
            exp[i] = x
            log[x] = i
            x <<= 1
            if x & self.q:
                x ^= PRIMITIVE[m]
        exp[self.q - 1:2 * (self.q - 1)] = exp[:self.q - 1]
        self.exp = exp
        self.log = log

    def mul(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        r = self.exp[(self.log[a] + self.log[b]) % (self.q - 1)]
        return np.where((a == 0) | (b == 0), 0, r)

    def inv(self, a):
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError("inverse of zero in GF(2^m)")
        return self.exp[(self.q - 1 - self.log[a]) % (self.q - 1)]

    def pow(self, a, e):
        if e == 0:
            return 1
        if a == 0:
            return 0
        return int(self.exp[(int(self.log[a]) * e) % (self.q - 1)])

    def matmul(self, A, B):
        """``A @ B`` over the field; ``A`` is ``(r, k)``, ``B`` is ``(k, c)``."""
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
        for j in range(A.shape[1]):
            out ^= self.mul(A[:, j:j + 1], B[j:j + 1, :])
        return out

    def row_reduce(self, M):
        """Reduced row echelon form (pivots left to right)."""
        M = np.array(M, dtype=np.int64)
        r = 0
        for c in range(M.shape[1]):
            piv = next((i for i in range(r, M.shape[0]) if M[i, c]), None)
            if piv is None:
                continue
            M[[r, piv]] = M[[piv, r]]
            M[r] = self.mul(M[r], self.inv(M[r, c]))
            for i in range(M.shape[0]):
                if i != r and M[i, c]:
                    M[i] ^= self.mul(M[r], M[i, c])
            r += 1
            if r == M.shape[0]:
                break
        return M
