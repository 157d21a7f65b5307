"""Numerics kernels: bracketed root finding, real cubics, dense complex
eigendecomposition and finite-difference operators.

All kernels are pure; callers may invoke them concurrently on disjoint
inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg


class NumericsError(RuntimeError):
    """Kernel-level numerical failure."""


@dataclass
class Root:
    x: float
    residual: float
    bracket: tuple[float, float]


@dataclass
class RootSet:
    """Ordered real roots with residual magnitudes and brackets."""

    roots: list[Root] = field(default_factory=list)

    @property
    def values(self) -> list[float]:
        return [r.x for r in self.roots]

    def __len__(self) -> int:
        return len(self.roots)

    def __iter__(self):
        return iter(self.roots)


def _bisect(f, a, b, fa, fb, tol):
    # fa, fb have opposite signs; refine to |f| < tol or machine-width bracket
    for _ in range(200):
        m = 0.5 * (a + b)
        fm = f(m)
        if not np.isfinite(fm):
            raise NumericsError(f"non-finite function value at x={m!r}")
        if abs(fm) < tol or (b - a) < 4.0 * np.finfo(float).eps * max(1.0, abs(m)):
            return m, fm, (a, b)
        if (fa < 0) != (fm < 0):
            b, fb = m, fm
        else:
            a, fa = m, fm
    m = 0.5 * (a + b)
    return m, f(m), (a, b)


def find_roots_scan(f, interval, n_scan=1024, tol=1e-12) -> RootSet:
    """All sign-change roots of f on interval, refined by bisection.

    Scans n_scan equally spaced points; each sign change is bisected until
    |f| < tol or the bracket width falls below tol*max(1, |x|) (machine
    precision in practice).  Tangent roots without a sign change are not
    guaranteed.  Non-finite f values during the scan raise NumericsError
    naming the abscissa.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not (hi > lo):
        raise NumericsError(f"empty interval {interval!r}")
    if n_scan < 2:
        raise NumericsError("n_scan must be >= 2")
    xs = np.linspace(lo, hi, int(n_scan))
    fs = np.empty_like(xs)
    for i, x in enumerate(xs):
        fx = f(x)
        if not np.isfinite(fx):
            raise NumericsError(f"non-finite function value at x={x!r}")
        fs[i] = fx

    out = RootSet()
    for i in range(len(xs) - 1):
        fa, fb = fs[i], fs[i + 1]
        if fa == 0.0:
            out.roots.append(Root(xs[i], 0.0, (xs[i], xs[i])))
            continue
        if (fa < 0) != (fb < 0):
            x, fx, bracket = _bisect(f, xs[i], xs[i + 1], fa, fb, tol)
            out.roots.append(Root(x, abs(fx), bracket))
    if fs[-1] == 0.0:
        out.roots.append(Root(xs[-1], 0.0, (xs[-1], xs[-1])))

    out.roots.sort(key=lambda r: r.x)
    # collapse duplicates from adjacent brackets hitting the same root
    deduped: list[Root] = []
    for r in out.roots:
        if deduped and abs(r.x - deduped[-1].x) < 1e-12 * max(1.0, abs(r.x)):
            continue
        deduped.append(r)
    out.roots = deduped
    return out


def solve_cubic_real(a3, a2, a1, a0, tol=1e-6) -> RootSet:
    """Real roots of a3 x^3 + a2 x^2 + a1 x + a0, multiplicity collapsed.

    Companion-matrix solve followed by one Newton polish per root.  The
    tolerance governs both the imaginary-part filter and the multiplicity
    collapse; double roots are resolved by the companion solve only to the
    square root of machine precision, so it cannot be much tighter.
    """
    if a3 == 0.0:
        raise NumericsError("not cubic: leading coefficient is zero")
    coeffs = np.array([a3, a2, a1, a0], dtype=float)
    roots = np.roots(coeffs)
    scale = max(1.0, float(np.max(np.abs(roots))))

    def poly(x):
        return ((a3 * x + a2) * x + a1) * x + a0

    def dpoly(x):
        return (3.0 * a3 * x + 2.0 * a2) * x + a1

    real_roots = []
    for z in roots:
        if abs(z.imag) > tol * scale:
            continue
        x = z.real
        d = dpoly(x)
        if d != 0.0:
            candidate = x - poly(x) / d
            # near a double root Newton divides noise by noise; keep the
            # step only when it actually improves the residual
            if abs(candidate - x) < 0.5 * scale and abs(poly(candidate)) <= abs(poly(x)):
                x = candidate
        real_roots.append(x)

    real_roots.sort()
    out = RootSet()
    for x in real_roots:
        if out.roots and abs(x - out.roots[-1].x) <= tol * max(1.0, abs(x)):
            continue  # collapse multiplicity
        out.roots.append(Root(x, abs(poly(x)), (x, x)))
    return out


@dataclass
class EigenDecomposition:
    """Eigenpairs of a square complex matrix, sorted by (Re, Im).

    Eigenvectors are normalized so their largest-magnitude component is 1,
    which also fixes the phase deterministically.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # column i pairs with eigenvalues[i]

    def __len__(self) -> int:
        return len(self.eigenvalues)


def eig_dense(A: np.ndarray, check: bool = True, eig_tol_factor: float = 1e-8) -> EigenDecomposition:
    """Full spectrum of a dense complex matrix with a residual guarantee.

    Eigenpairs are sorted by (Re, Im) so results are permutation-stable
    across runs.  With check=True each pair must satisfy
    ||A v - w v||_inf / ||v||_inf < eig_tol_factor * ||A||_inf.
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NumericsError(f"matrix must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A.real)) or not np.all(np.isfinite(A.imag if np.iscomplexobj(A) else A.real)):
        raise NumericsError("matrix has non-finite entries")

    try:
        w, v = scipy.linalg.eig(A)
    except Exception as exc:  # LAPACK convergence failure
        norm = float(np.linalg.norm(A, np.inf))
        raise NumericsError(
            f"eigendecomposition failed for dimension {A.shape[0]}, inf-norm {norm:.3e}"
        ) from exc

    order = np.lexsort((w.imag, w.real))
    w = w[order]
    v = v[:, order]

    # normalize: unit max-magnitude component (also fixes the phase)
    for i in range(v.shape[1]):
        j = int(np.argmax(np.abs(v[:, i])))
        v[:, i] = v[:, i] / v[j, i]

    if check:
        norm = float(np.linalg.norm(A, np.inf))
        tol = eig_tol_factor * max(norm, 1e-300)
        resid = A @ v - v * w[np.newaxis, :]
        vmax = np.max(np.abs(v), axis=0)
        rmax = np.max(np.abs(resid), axis=0) / vmax
        worst = float(np.max(rmax))
        if worst >= tol:
            raise NumericsError(
                f"eigenpair residual {worst:.3e} exceeds {tol:.3e} "
                f"(dimension {A.shape[0]}, inf-norm {norm:.3e})"
            )
    return EigenDecomposition(eigenvalues=w, eigenvectors=v)


def refine_smallest_eigenpair(A: np.ndarray, v0: np.ndarray | None = None,
                              n_iter: int = 3) -> tuple[complex, np.ndarray]:
    """Smallest-magnitude eigenpair of A, refined by inverse iteration.

    Symmetry-protected zero modes sit in (near-)defective pairs, where a
    plain dense eigensolve only resolves them to sqrt(machine epsilon).
    Inverse iteration at shift zero converges onto the genuine eigenvector,
    and the Rayleigh quotient then measures the eigenvalue to full
    precision.  Falls back to a tiny shift if A is exactly singular to LU.
    """
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    if v0 is None:
        w, v = scipy.linalg.eig(A)
        i = int(np.argmin(np.abs(w)))
        x = v[:, i].copy()
    else:
        x = np.asarray(v0, dtype=complex).copy()
    x /= np.linalg.norm(x)
    shift = 0.0
    import warnings

    for _ in range(n_iter):
        try:
            with warnings.catch_warnings():
                # inverting a numerically singular matrix is the point here
                warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
                y = scipy.linalg.solve(A - shift * np.eye(n), x)
        except scipy.linalg.LinAlgError:
            shift = np.finfo(float).eps * np.linalg.norm(A, np.inf)
            continue
        norm = np.linalg.norm(y)
        if not np.isfinite(norm) or norm == 0.0:
            break
        x = y / norm
    lam = complex(np.vdot(x, A @ x) / np.vdot(x, x))
    return lam, x


def laplacian_1d(n_points: int, h: float) -> np.ndarray:
    """Dense second-order central-difference d^2/dx^2 with Dirichlet walls.

    The matrix acts on samples at n_points interior nodes; function values
    one node beyond each end are taken to be zero.  Interior rows applied to
    samples of x^2 return exactly 2.
    """
    if n_points < 3:
        raise NumericsError("n_points must be >= 3")
    if h <= 0:
        raise NumericsError("spacing h must be positive")
    L = np.zeros((n_points, n_points))
    inv_h2 = 1.0 / (h * h)
    idx = np.arange(n_points)
    L[idx, idx] = -2.0 * inv_h2
    L[idx[:-1], idx[:-1] + 1] = inv_h2
    L[idx[1:], idx[1:] - 1] = inv_h2
    return L
