"""Best uniform rational approximation of exp(-x) on [0, inf).

Runs a rational Remez exchange in extended precision (mpmath) on the Moebius
variable u = (x - c) / (x + c) in [-1, 1), converts the type (r, r) result to
the form  a0 + sum_j a_j / (1 + b_j x)  and prints a Rust constant table.

    python3 tools/exp_rational_remez.py > crates/core/src/filters/exp_table.rs
"""
import sys
import mpmath as mp

mp.mp.dps = 60


def f_u(u, c):
    if u >= 1:
        return mp.mpf(0)
    x = c * (1 + u) / (1 - u)
    return mp.exp(-x)


def cheb(k, u):
    return mp.chebyt(k, u)


def ratval(p, q, u):
    num = sum(p[k] * cheb(k, u) for k in range(len(p)))
    den = sum(q[k] * cheb(k, u) for k in range(len(q)))
    return num / den


def solve_reference(ref, n, c, E0=0):
    fvals = [f_u(u, c) for u in ref]
    m = 2 * n + 2
    E = mp.mpf(E0)
    qold = None
    for _ in range(60):
        A = mp.matrix(m, m)
        rhs = mp.matrix(m, 1)
        for i, u in enumerate(ref):
            s = (-1) ** i
            qo = 1 if qold is None else sum(qold[k] * cheb(k, u) for k in range(n + 1))
            for k in range(n + 1):
                A[i, k] = cheb(k, u)
            # q0 = 1 fixed; unknowns q1..qn
            for k in range(1, n + 1):
                A[i, n + k] = -fvals[i] * cheb(k, u)
            A[i, 2 * n + 1] = s * qo
            rhs[i] = fvals[i]
        sol = mp.lu_solve(A, rhs)
        p = [sol[k] for k in range(n + 1)]
        q = [mp.mpf(1)] + [sol[n + k] for k in range(1, n + 1)]
        Enew = sol[2 * n + 1]
        if qold is not None and abs(Enew - E) < mp.mpf(10) ** (-45) * abs(Enew):
            E = Enew
            qold = q
            break
        E = Enew
        qold = q
    return p, q, E


def err(p, q, u, c):
    return f_u(u, c) - ratval(p, q, u)


def find_extrema(p, q, n, c):
    # dense sample then local refinement
    N = 4000
    grid = [mp.cos(mp.pi * (N - i) / N) for i in range(N + 1)]
    vals = [err(p, q, u, c) for u in grid]
    # split into sign runs, take max |e| in each run
    runs = []
    cur = [0]
    for i in range(1, len(grid)):
        if mp.sign(vals[i]) == mp.sign(vals[cur[-1]]) or vals[i] == 0:
            cur.append(i)
        else:
            runs.append(cur)
            cur = [i]
    runs.append(cur)
    ext = []
    for run in runs:
        i = max(run, key=lambda j: abs(vals[j]))
        if i == 0 or i == len(grid) - 1:
            ext.append(grid[i])
            continue
        a, b = grid[i - 1], grid[i + 1]
        g = lambda u: -abs(err(p, q, u, c))
        # golden section
        phi = (mp.sqrt(5) - 1) / 2
        x1 = b - phi * (b - a)
        x2 = a + phi * (b - a)
        f1, f2 = g(x1), g(x2)
        for _ in range(80):
            if f1 < f2:
                b, x2, f2 = x2, x1, f1
                x1 = b - phi * (b - a)
                f1 = g(x1)
            else:
                a, x1, f1 = x1, x2, f2
                x2 = a + phi * (b - a)
                f2 = g(x2)
        ext.append((a + b) / 2)
    return ext


def remez(n, c):
    m = 2 * n + 2
    ref = [mp.cos(mp.pi * (m - 1 - i) / (m - 1)) for i in range(m)]
    E = 0
    for it in range(100):
        p, q, E = solve_reference(ref, n, c, E)
        ext = find_extrema(p, q, n, c)
        if len(ext) < m:
            raise RuntimeError("lost alternation at n=%d (got %d)" % (n, len(ext)))
        if len(ext) > m:
            # keep m consecutive points that contain the global maximum,
            # choosing the window with the largest minimum |e|
            mags = [abs(err(p, q, u, c)) for u in ext]
            top = mags.index(max(mags))
            best = None
            for s in range(max(0, top - m + 1), min(top, len(ext) - m) + 1):
                window = ext[s : s + m]
                score = min(abs(err(p, q, u, c)) for u in window)
                if best is None or score > best[0]:
                    best = (score, window)
            ext = best[1]
        errs = [abs(err(p, q, u, c)) for u in ext]
        spread = (max(errs) - min(errs)) / max(errs)
        ref = ext
        if spread < mp.mpf(10) ** (-20):
            break
    return p, q, abs(E), spread


def to_x_poly(coeffs_cheb, n, c):
    # polynomial in u (Chebyshev basis) -> (1 - u)^n * P(u) expressed in x:
    # u = (x - c)/(x + c), 1 - u = 2c/(x + c)
    # P(u) * (x + c)^n = sum_k a_k T_k(u) (x+c)^n ; expand T_k as monomials in u
    mono = [mp.mpf(0)] * (n + 1)
    for k, a in enumerate(coeffs_cheb):
        tk = mp.chebyt  # unused
        # monomial coefficients of T_k via recurrence
        T = [[mp.mpf(1)], [mp.mpf(0), mp.mpf(1)]]
        while len(T) <= k:
            prev, prev2 = T[-1], T[-2]
            nxt = [mp.mpf(0)] + [2 * v for v in prev]
            for j, v in enumerate(prev2):
                nxt[j] -= v
            T.append(nxt)
        for j, v in enumerate(T[k]):
            mono[j] += a * v
    # sum_j mono_j (x - c)^j (x + c)^(n - j)  as a polynomial in x
    out = [mp.mpf(0)] * (n + 1)
    for j, mj in enumerate(mono):
        poly = [mp.mpf(1)]
        for _ in range(j):
            poly = polymul(poly, [-c, mp.mpf(1)])
        for _ in range(n - j):
            poly = polymul(poly, [c, mp.mpf(1)])
        for i, v in enumerate(poly):
            out[i] += mj * v
    return out


def polymul(a, b):
    out = [mp.mpf(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def polyval(c, x):
    acc = 0
    for v in reversed(c):
        acc = acc * x + v
    return acc


def partial_fractions(P, Q):
    n = len(Q) - 1
    # roots of Q (low-to-high coefficients)
    roots = mp.polyroots(list(reversed(Q)), maxsteps=500, extraprec=200)
    a0 = P[-1] / Q[-1]
    dQ = [k * Q[k] for k in range(1, n + 1)]
    terms = []
    for z in roots:
        res = polyval(P, z) / polyval(dQ, z)
        # res / (x - z) = (-res / z) / (1 - x / z)
        terms.append((-res / z, -1 / z))
    return a0, terms


def main():
    out = sys.stdout
    out.write("// Generated by tools/exp_rational_remez.py; do not edit by hand.\n")
    out.write("// Best uniform type (r, r) rational approximations of exp(-s) on [0, inf)\n")
    out.write("// in the form a0 + sum_j a_j / (1 + b_j s). Only one member of each\n")
    out.write("// conjugate pair is stored (imaginary part > 0); real poles have im = 0.\n\n")
    out.write("pub(crate) struct ExpTable {\n    pub degree: usize,\n    pub max_error: f64,\n    pub constant: f64,\n    pub poles: &'static [((f64, f64), (f64, f64))],\n}\n\n")
    out.write("pub(crate) static EXP_TABLES: &[ExpTable] = &[\n")
    for n in range(3, 15):
        best = None
        for c in [mp.mpf(v) for v in (n / 2.0, n / 1.5, n, n * 1.5, n * 2.0, n / 3.0)]:
            try:
                p, q, E, spread = remez(n, c)
            except Exception as e:  # noqa
                sys.stderr.write("n=%d c=%s failed: %s\n" % (n, c, e))
                continue
            sys.stderr.write("n=%d c=%s E=%s spread=%s\n" % (n, mp.nstr(c, 4), mp.nstr(E, 8), mp.nstr(spread, 3)))
            if spread < 1e-10 and (best is None or E < best[2]):
                best = (p, q, E, c)
            if spread < 1e-10:
                break
        if best is None:
            raise SystemExit("no convergence for n=%d" % n)
        p, q, E, c = best
        P = to_x_poly(p, n, c)
        Q = to_x_poly(q, n, c)
        a0, terms = partial_fractions(P, Q)
        # check against the definition on a grid
        worst = 0
        for s in [mp.mpf(0)] + [mp.mpf(10) ** (mp.mpf(k) / 50) for k in range(-400, 301)]:
            v = a0 + sum(a / (1 + b * s) for a, b in terms)
            worst = max(worst, abs(v.real - mp.exp(-s)) if isinstance(v, mp.mpc) else abs(v - mp.exp(-s)))
        sys.stderr.write("  n=%d pf check worst=%s\n" % (n, mp.nstr(worst, 6)))
        kept = []
        for a, b in terms:
            a, b = mp.mpc(a), mp.mpc(b)
            if abs(b.imag) < mp.mpf(10) ** (-30):
                kept.append((mp.mpc(a.real, 0), mp.mpc(b.real, 0)))
            elif b.imag > 0:
                kept.append((a, b))
        kept.sort(key=lambda ab: (float(ab[1].imag), float(ab[1].real)))
        out.write("    ExpTable {\n        degree: %d,\n        max_error: %s,\n        constant: %s,\n        poles: &[\n" % (
            n, mp.nstr(E, 17, min_fixed=1, max_fixed=0), mp.nstr(a0.real if isinstance(a0, mp.mpc) else a0, 17, min_fixed=1, max_fixed=0)))
        for a, b in kept:
            out.write("            ((%s, %s), (%s, %s)),\n" % tuple(
                mp.nstr(v, 17, min_fixed=1, max_fixed=0) for v in (a.real, a.imag, b.real, b.imag)))
        out.write("        ],\n    },\n")
    out.write("];\n")


if __name__ == "__main__":
    main()
