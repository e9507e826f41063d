#!/usr/bin/env python3
"""Generate the newform fixture database with PARI/GP (via cypari2).

For every odd N1 given on the command line this writes all newforms of
  * weight 2 and 4 with trivial nebentype, and
  * weight 2 and 3 with nebentype of 2-power order,
as records in the newform DB schema read by the `m2galois` crate. Each record
carries the coefficient field's maximal order (integral basis multiplication
table), coordinates of a_l in that basis, and PARI's own reductions of a_l
modulo every prime above 2, mapped into the canonical (Conway) field of the
residue degree. The reductions give an independent cross-check of the Rust
reduction engine.

Usage: python3 tools/gen_newforms.py OUT.json N1 [N1 ...]
"""
import itertools
import json
import sys
from math import gcd

import cypari2

pari = cypari2.Pari()
pari.allocatemem(2 * 10**9)

PRIMES = [3, 5, 7, 11, 13, 17]

# canonical defining polynomials as bitmasks (bit i = coefficient of x^i)
CONWAY = {
    1: 0b11, 2: 0b111, 3: 0b1011, 4: 0b10011, 5: 0b100101, 6: 0b1011011,
    7: 0b10000011, 8: 0b100011101, 9: 0b1000010001, 10: 0b10001101111,
    11: 0b100000000101, 12: 0b1000011101011, 13: 0b10000000011011,
    14: 0b100000010101001, 15: 0b1000000000110101, 16: 0b10000000000101101,
}

GP = r"""
ffint(z) = {
  if (type(z) == "t_FFELT", return (fromdigits(apply(c -> c % 2, Vec(z.pol)), 2)));
  if (type(z) == "t_INTMOD", return (lift(z) % 2));
  if (type(z) == "t_INT", return (z % 2));
  if (type(z) == "t_POL", return (fromdigits(apply(c -> lift(c) % 2, Vec(z)), 2)));
  error("ffint: ", type(z));
}

\\ absolute field data of a coefficient sequence v = mfcoefs(f, n)
\\ returns [nf, vector of absolute algebraic numbers]
absfield(v, chiord) = {
  my(rel = 0, base, R, absp, ysub, tsub = 0, out, red);
  for (i = 1, #v, if (type(v[i]) == "t_POLMOD", rel = liftall(v[i].mod); break));
  if (rel == 0 || poldegree(rel, 'y) == 0, rel = 'y);
  if (chiord > 2,
    base = polcyclo(chiord, 't);
    R = rnfequation(nfinit(base), rel, 1);
    absp = R[1]; tsub = R[2];
    ysub = Mod('y, absp) - R[3] * tsub,
    absp = rel; ysub = Mod('y, absp));
  out = vector(#v, i, my(c = liftall(v[i]));
    if (tsub != 0, c = subst(c, 't, tsub));
    lift(Mod(subst(liftall(c), 'y, ysub), absp)));
  if (poldegree(absp) == 1,
    out = apply(c -> polcoef(lift(Mod(c, absp)), 0), out);
    return ([nfinit('y), out]));
  red = polredbest(absp, 1);
  out = apply(c -> lift(subst(lift(Mod(c, absp)), 'y, red[2])), out);
  [nfinit(red[1]), out];
}

multtable(nf) = {
  my(zk = nf.zk, d = #zk);
  vector(d, i, vector(d, j, nfalgtobasis(nf, zk[i] * zk[j])));
}

reductions(nf, vals, conway) = {
  my(P = idealprimedec(nf, 2), res = vector(#P));
  for (i = 1, #P,
    my(pr = P[i], modpr = nfmodprinit(nf, pr), zs, src = 0, tgt, emb);
    zs = vector(#vals, j, nfmodpr(nf, vals[j], modpr));
    if (pr.f > 1,
      tgt = ffgen(Mod(1, 2) * conway[pr.f], 'w);
      for (j = 1, #zs, if (type(zs[j]) == "t_FFELT", src = ffgen(zs[j]); break));
      if (src == 0, src = ffgen(nfmodpr(nf, nf.zk[#nf.zk], modpr)));
      emb = ffembed(src, tgt);
      zs = vector(#zs, j, if (type(zs[j]) == "t_FFELT", ffmap(emb, zs[j]), zs[j])));
    res[i] = [pr.e, pr.f, apply(ffint, zs)]);
  res;
}
"""
for block in GP.strip().split("\n\n"):
    pari(block)


def conway_vec():
    out = []
    for f in range(1, 17):
        mask = CONWAY[f]
        out.append("+".join(f"x^{i}" for i in range(f + 1) if mask >> i & 1))
    return pari("[" + ",".join(out) + "]")


CONWAY_GP = conway_vec()


def gp(name, *args):
    return pari(name)(*args)


def factorint(n):
    return [(int(p), int(e)) for p, e in zip(*pari.factor(n))] if n > 1 else []


def unit_group(n):
    """CRT generators: smallest primitive root per odd prime-power factor."""
    gens, orders = [], []
    for p, e in factorint(n):
        q = p**e
        phi = q // p * (p - 1)
        divs = [r for r, _ in factorint(phi)]
        g = next(g for g in range(2, q + 1) if g % p
                 and all(pow(g, phi // r, q) != 1 for r in divs))
        rest = n // q
        x = g if rest == 1 else int(pari(f"lift(chinese(Mod({g},{q}),Mod(1,{rest})))"))
        gens.append(x)
        orders.append(phi)
    return gens, orders


def two_power_chars(n):
    _, orders = unit_group(n)
    out = []
    for exps in itertools.product(*[range(o) for o in orders]):
        if all(((o // gcd(e, o)) & (o // gcd(e, o) - 1)) == 0 for e, o in zip(exps, orders)):
            out.append(list(exps))
    return out


def pari_char(n, exps):
    gens, orders = unit_group(n)
    G = pari(f"znstar({n},1)")
    cyc = [int(c) for c in G.getattr("cyc")]
    want = [pari(f"{e}/{o}") for e, o in zip(exps, orders)]
    for c in itertools.product(*[range(m) for m in cyc]):
        cv = pari(list(c))
        if all(pari.chareval(G, cv, g) == w for g, w in zip(gens, want)):
            return G, cv
    raise RuntimeError(f"no PARI character for {n} {exps}")


def record_for(N, k, exps, form, chi_order):
    top = max(PRIMES)
    v = pari.mfcoefs(form, top)
    nf, vals = gp('absfield', v, chi_order)
    d = int(pari.poldegree(nf.getattr("pol")))
    mult = [[[int(x) for x in c] for c in row] for row in gp('multtable', nf)]
    a = {}
    for l in PRIMES:
        b = pari.nfalgtobasis(nf, vals[l])
        assert all(pari.denominator(x) == 1 for x in b), "non-integral a_l"
        a[str(l)] = [int(x) for x in b]
    lv = pari([vals[l] for l in PRIMES])
    reds = []
    for i, (e, f, zs) in enumerate(gp('reductions', nf, lv, CONWAY_GP)):
        reds.append({"ideal": i, "f": int(f), "e": int(e),
                     "a_mod2": {str(l): int(z) for l, z in zip(PRIMES, zs)}})
    traces = [int(pari.trace(pari.Mod(vals[n], nf.getattr("pol")))) if d > 1 else int(vals[n])
              for n in range(1, top + 1)]
    return {
        "level": N,
        "weight": k,
        "nebentype": {"modulus": N, "exponents": exps},
        "degree": d,
        "disc": int(nf.getattr("disc")),
        "defining_poly": [int(c) for c in pari.Vecrev(nf.getattr("pol"))],
        "mult_table": mult,
        "a": a,
        "reductions": reds,
        "traces": traces,
    }


def query(N, k, exps):
    if N == 1:
        return []
    if any(exps):
        G, cv = pari_char(N, exps)
        mf = pari.mfinit([N, k, [G, cv]], 0)
        order = int(pari.charorder(G, cv))
    else:
        mf = pari.mfinit([N, k], 0)
        order = 1
    return [record_for(N, k, exps, f, order) for f in pari.mfeigenbasis(mf)]


def main():
    out_path = sys.argv[1]
    levels = [int(a) for a in sys.argv[2:]]
    records, coverage = [], []
    for N in levels:
        trivial = [0] * len(unit_group(N)[0])
        queries = [(2, trivial), (4, trivial)]
        for exps in two_power_chars(N):
            queries.append((3, exps))
            if any(exps):
                queries.append((2, exps))
        for k, exps in queries:
            recs = query(N, k, exps)
            recs.sort(key=lambda r: (r["degree"], abs(r["disc"]), r["traces"]))
            tag = "-".join(map(str, exps)) or "0"
            for i, r in enumerate(recs):
                r["label"] = f"{N}.{k}.{tag}.{chr(97 + i)}"
                del r["traces"]
            records.extend(recs)
            coverage.append({"level": N, "weight": k,
                             "nebentype": {"modulus": N, "exponents": exps}})
            print(N, k, exps, [r["degree"] for r in recs], file=sys.stderr)
    with open(out_path, "w") as fh:
        json.dump({"records": records, "coverage": coverage}, fh, indent=None, separators=(",", ":"))


if __name__ == "__main__":
    main()
