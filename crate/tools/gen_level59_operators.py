#!/usr/bin/env python3
"""Synthetic F_2 Hecke operators at level 59 with the published eigenspace data.

The three conjugate type-II packets are realized on F_2^3 (x) F_2^4, with
T(l,1) = T(l,3) = p_l(C) (x) I_4 where C is the companion matrix of x^3+x+1
and p_l(w) is the printed eigenvalue: w^2, w, w^2+w at l = 3, 5, 7.
The remaining blocks are scalar: the dimension-15 packet with traces 1, 1, 1,
the dimension-4 type-IV packet with traces 0, 0, 1 and a type-I line.
Everything is conjugated by a fixed random invertible matrix.

Usage: gen_level59_operators.py [out.json]
"""

import json
import random
import sys

N = 32


def mat_mul(a, b):
    n, m, p = len(a), len(b), len(b[0])
    return [[sum(a[i][k] & b[k][j] for k in range(m)) & 1 for j in range(p)] for i in range(n)]


def mat_add(a, b):
    return [[x ^ y for x, y in zip(r, s)] for r, s in zip(a, b)]


def identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def zeros(n):
    return [[0] * n for _ in range(n)]


def kron(a, b):
    return [[a[i // len(b)][j // len(b)] & b[i % len(b)][j % len(b)]
             for j in range(len(a) * len(b))] for i in range(len(a) * len(b))]


def block_diag(blocks):
    n = sum(len(b) for b in blocks)
    out = zeros(n)
    o = 0
    for b in blocks:
        for i, r in enumerate(b):
            out[o + i][o:o + len(r)] = r
        o += len(b)
    return out


def inverse(a):
    n = len(a)
    m = [r[:] + identity(n)[i] for i, r in enumerate(a)]
    for c in range(n):
        p = next((i for i in range(c, n) if m[i][c]), None)
        if p is None:
            return None
        m[c], m[p] = m[p], m[c]
        for i in range(n):
            if i != c and m[i][c]:
                m[i] = [x ^ y for x, y in zip(m[i], m[c])]
    return [r[n:] for r in m]


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "crates/core/tests/fixtures/level59_operators.json"
    # companion matrix of x^3 + x + 1 acting on row vectors
    c = [[0, 1, 0], [0, 0, 1], [1, 1, 0]]
    c2 = mat_mul(c, c)
    poly_of = {3: c2, 5: c, 7: mat_add(c2, c)}
    # (dimension-15, type IV, type I) traces
    scalar = {3: (1, 0, 0), 5: (1, 0, 0), 7: (1, 1, 0)}
    rng = random.Random(59)
    while True:
        g = [[rng.randrange(2) for _ in range(N)] for _ in range(N)]
        gi = inverse(g)
        if gi is not None:
            break
    ops = []
    for ell in (3, 5, 7):
        t15, t4, t1 = scalar[ell]
        t = block_diag([
            kron(poly_of[ell], identity(4)),
            [[t15 * int(i == j) for j in range(15)] for i in range(15)],
            [[t4 * int(i == j) for j in range(4)] for i in range(4)],
            [[t1]],
        ])
        for k, m in ((1, t), (2, zeros(N)), (3, t)):
            conj = mat_mul(mat_mul(gi, m), g)
            ops.append({"ell": ell, "k": k, "kind": "T", "field_degree": 1, "rows": conj})
    with open(out, "w") as fh:
        json.dump({"level": 59, "ambient_dim": N, "operators": ops}, fh)
        fh.write("\n")


if __name__ == "__main__":
    main()
