"""Independent oracles used by the tests.

Nothing here calls the package's evaluation code; everything is recomputed
from first principles so agreement is meaningful.
"""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction

import numpy as np


# ---------------------------------------------------------------------------
# Plain brute force on edge lists
# ---------------------------------------------------------------------------


def gauss_mul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def gauss_pow(a, k):
    out = (Fraction(1), Fraction(0))
    for _ in range(k):
        out = gauss_mul(out, a)
    return out


def brute_partition(n, edges, lam, b, pins=None):
    """``Σ_σ λ^{#plus} b^{#disagreements}`` as a pair of Fractions."""
    lam = (Fraction(lam[0]), Fraction(lam[1]))
    b = Fraction(b)
    pins = pins or {}
    total = [Fraction(0), Fraction(0)]
    for spins in itertools.product((1, -1), repeat=n):
        if any(spins[v] != s for v, s in pins.items()):
            continue
        plus = sum(s == 1 for s in spins)
        dis = sum(spins[u] != spins[v] for u, v in edges)
        w = gauss_pow(lam, plus)
        f = b ** dis
        total[0] += w[0] * f
        total[1] += w[1] * f
    return tuple(total)


def spin_count_table(n, edges, pins=None):
    """``C[j, d]``: configurations with ``j`` plus spins and ``d`` disagreeing edges, via numpy."""
    configs = np.arange(1 << n, dtype=np.int64)
    bits = (configs[:, None] >> np.arange(n)[None, :]) & 1
    keep = np.ones(len(configs), dtype=bool)
    for v, s in (pins or {}).items():
        keep &= bits[:, v] == (1 if s == 1 else 0)
    bits = bits[keep]
    plus = bits.sum(axis=1)
    dis = np.zeros(len(bits), dtype=np.int64)
    for a, c in edges:
        dis += bits[:, a] ^ bits[:, c]
    m = len(edges)
    flat = np.bincount(plus * (m + 1) + dis, minlength=(n + 1) * (m + 1))
    return flat.reshape(n + 1, m + 1)


def table_partition(table, lam, b):
    """Exact ``Σ C[j, d] λ^j b^d`` as a pair of Fractions."""
    lam = (Fraction(lam[0]), Fraction(lam[1]))
    b = Fraction(b)
    n1, m1 = table.shape
    bpow = [b ** d for d in range(m1)]
    total = [Fraction(0), Fraction(0)]
    lp = (Fraction(1), Fraction(0))
    for j in range(n1):
        row = sum((int(c) * bpow[d] for d, c in enumerate(table[j]) if c), Fraction(0))
        total[0] += lp[0] * row
        total[1] += lp[1] * row
        lp = gauss_mul(lp, lam)
    return tuple(total)


def random_tree_edges(n, rng):
    """Uniform random labelled tree through a Prüfer sequence."""
    if n == 1:
        return []
    if n == 2:
        return [(0, 1)]
    seq = [rng.randrange(n) for _ in range(n - 2)]
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    edges = []
    for x in seq:
        leaf = min(i for i in range(n) if degree[i] == 1)
        edges.append((leaf, x))
        degree[leaf] -= 1
        degree[x] -= 1
    u, v = [i for i in range(n) if degree[i] == 1]
    edges.append((u, v))
    return edges


def random_pythagorean_point(rng, max_m=8):
    """Random rational point on the unit circle with denominator ``m² + n²``."""
    while True:
        m = rng.randint(2, max_m)
        k = rng.randint(1, m - 1)
        if math.gcd(m, k) == 1 and (m - k) % 2 == 1:
            break
    r = m * m + k * k
    x, y = m * m - k * k, 2 * m * k
    if rng.random() < 0.5:
        x, y = y, x
    return Fraction(rng.choice((1, -1)) * x, r), Fraction(rng.choice((1, -1)) * y, r)


def brute_perfect_matchings(n, edges):
    """Perfect matchings by trying every set of ``n/2`` edges; parallel edges listed repeatedly."""
    if n % 2:
        return 0
    count = 0
    for chosen in itertools.combinations(range(len(edges)), n // 2):
        seen = set()
        for i in chosen:
            seen.update(edges[i])
        count += len(seen) == n
    return count


def brute_odd_subgraphs(n, edges):
    """Edge subsets in which every vertex has odd degree, by size."""
    out = [0] * (len(edges) + 1)
    for mask in range(1 << len(edges)):
        deg = [0] * n
        size = 0
        for i, (a, c) in enumerate(edges):
            if mask >> i & 1:
                deg[a] += 1
                deg[c] += 1
                size += 1
        if all(d % 2 for d in deg):
            out[size] += 1
    return out


# ---------------------------------------------------------------------------
# Multi-modular conjugation check
# ---------------------------------------------------------------------------


def _is_prime(p):
    if p < 2:
        return False
    for q in range(2, int(p ** 0.5) + 1):
        if p % q == 0:
            return False
    return True


def split_primes(count, below=1 << 20):
    """Largest ``count`` primes ``p ≡ 1 (mod 4)`` below ``below``, each with a root of -1."""
    out = []
    p = below - 1
    while len(out) < count:
        if p % 4 == 1 and _is_prime(p):
            for g in range(2, p):
                s = pow(g, (p - 1) // 4, p)
                if s * s % p == p - 1:
                    out.append((p, s))
                    break
        p -= 1
    return out


def conjugation_count_tables(n, graphs, u=0, v=1):
    """Counts ``C[g, j, d]`` of configurations with ``u, v`` both plus (and both minus)."""
    configs = np.arange(1 << n)
    bits = ((configs[:, None] >> np.arange(n)[None, :]) & 1).astype(np.int64)
    pairs = list(itertools.combinations(range(n), 2))
    pair_index = {p: i for i, p in enumerate(pairs)}
    xor = np.stack([bits[:, a] ^ bits[:, c] for a, c in pairs], axis=1) if pairs else np.zeros((1 << n, 0), np.int64)
    adj = np.zeros((len(graphs), len(pairs)), dtype=np.int64)
    for g, edges in enumerate(graphs):
        for a, c in edges:
            adj[g, pair_index[(min(a, c), max(a, c))]] = 1
    dis = adj @ xor.T
    plus = bits.sum(axis=1)
    M = len(pairs)
    width = (n + 1) * (M + 1)
    tables = []
    for mask in (bits[:, u] & bits[:, v], (1 - bits[:, u]) & (1 - bits[:, v])):
        sel = np.nonzero(mask)[0]
        idx = plus[sel][None, :] * (M + 1) + dis[:, sel]
        flat = idx + (np.arange(len(graphs)) * width)[:, None]
        counts = np.bincount(flat.ravel(), minlength=len(graphs) * width)
        tables.append(counts.reshape(len(graphs), width).astype(np.float64))
    return tables[0], tables[1], M


def _monomials(n, M, lam_mod, b_mod, p):
    """Vector of ``λ^j b^d mod p`` in the layout of the count tables."""
    lp = [1]
    for _ in range(n):
        lp.append(lp[-1] * lam_mod % p)
    bp = [1]
    for _ in range(M):
        bp.append(bp[-1] * b_mod % p)
    return np.array([lp[j] * bp[d] % p for j in range(n + 1) for d in range(M + 1)], dtype=np.float64)


def primes_needed(n, M, pairs, bits_per_prime=19):
    """Primes whose product exceeds ``|D'|²`` for the scaled difference ``D'``."""
    r = max(lam[0].denominator for lam, _ in pairs)
    r = max(r, max(lam[1].denominator for lam, _ in pairs))
    t = max(b.denominator for _, b in pairs)
    bound_bits = 2 * (n + 2 * n * math.log2(r) + M * math.log2(t)) + 2
    return int(bound_bits // bits_per_prime) + 1


def conjugation_check(n, graphs, pairs, u=0, v=1, primes=None, negative_control=False):
    """Exact check of ``Z_{+u,+v} = λ^n conj(Z_{-u,-v})`` for every graph and pair.

    Each side is evaluated modulo split primes; the difference, scaled to a
    Gaussian integer ``D'``, vanishes at a degree-one prime above each ``p``,
    and the product of the primes exceeds ``|D'|²``, so agreement modulo all
    of them proves exact equality.  Returns a boolean array ``(graphs, pairs)``.

    ``negative_control`` drops the conjugation to confirm the check can fail.
    """
    Cpp, Cmm, M = conjugation_count_tables(n, graphs, u, v)
    if primes is None:
        primes = split_primes(primes_needed(n, M, pairs))
    ok = np.ones((len(graphs), len(pairs)), dtype=bool)
    for p, s in primes:
        cols_l, cols_r, lam_n = [], [], []
        for lam, b in pairs:
            x, y = lam
            den = pow(x.denominator * y.denominator, -1, p)
            xm = x.numerator * y.denominator % p * den % p
            ym = y.numerator * x.denominator % p * den % p
            lam_mod = (xm + ym * s) % p
            conj_mod = (xm - ym * s) % p
            b_mod = b.numerator * pow(b.denominator, -1, p) % p
            cols_l.append(_monomials(n, M, lam_mod, b_mod, p))
            cols_r.append(_monomials(n, M, lam_mod if negative_control else conj_mod, b_mod, p))
            lam_n.append(pow(lam_mod, n, p))
        L = np.mod(Cpp @ np.stack(cols_l, axis=1), p).astype(np.int64)
        R = np.mod(Cmm @ np.stack(cols_r, axis=1), p).astype(np.int64)
        R = (R * np.array(lam_n, dtype=np.int64)[None, :]) % p
        ok &= L == R
    return ok


def random_parameter_pairs(count, seed=0):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        lam = random_pythagorean_point(rng)
        t = rng.randint(2, 16)
        out.append((lam, Fraction(rng.randint(1, t - 1), t)))
    return out
