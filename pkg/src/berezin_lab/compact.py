"""Haar sampling on SO(n), U(n), Sp(n) and the corner reduction calculus.

Quaternionic matrices are stored in the interleaved 2n x 2n complex
realization: the quaternion a + b i + c j + d k occupies a 2 x 2 block

    [[a + b i,  c + d i],
     [-c + d i, a - b i]]

so a matrix M is quaternionic iff M Jhat = Jhat conj(M) with
Jhat = diag([[0, -1], [1, 0]], ...).  Even-indexed columns determine the
odd-indexed ones through the antilinear map S(u) = Jhat conj(u).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from .errors import InvalidParams, NegativeRealDeterminant, SingularCayley, SingularUpsilon
from .rngs import as_generator

REAL = "real"
COMPLEX = "complex"
QUATERNION = "quaternion"
FIELDS = (REAL, COMPLEX, QUATERNION)

# Haar group per field label, in the sampled realization.
GROUPS = {REAL: "SO(n)", COMPLEX: "U(n)", QUATERNION: "Sp(n)"}

_SINGULAR_TOL = 1e-12


@dataclass
class CompactGroupElement:
    """One sampled group element.

    ``entries`` is (n, n) for the real and complex fields and (2n, 2n)
    complex for the quaternion field.
    """

    field: str
    n: int
    entries: np.ndarray

    def __post_init__(self) -> None:
        if self.field not in FIELDS:
            raise InvalidParams(f"unknown field {self.field!r}; expected one of {FIELDS}")
        d = matrix_dim(self.field, self.n)
        if self.entries.shape != (d, d):
            raise InvalidParams(
                f"{self.field} element of size {self.n} needs a {d} x {d} matrix, "
                f"got shape {self.entries.shape}"
            )

    @property
    def matrix_dim(self) -> int:
        return matrix_dim(self.field, self.n)

    def unitarity_residual(self) -> float:
        g = self.entries
        return float(np.max(np.abs(g.conj().T @ g - np.eye(g.shape[0]))))


def matrix_dim(field: str, n: int) -> int:
    """Side length of the stored matrix: n, except 2n for quaternions."""
    return 2 * n if field == QUATERNION else n


# ---------------------------------------------------------------------------
# Haar samplers
# ---------------------------------------------------------------------------


def _qr_positive_diag(gauss: np.ndarray) -> np.ndarray:
    """Batched QR with the R diagonal rotated positive.

    Raw LAPACK Q is not Haar distributed; multiplying each column by the
    phase of the matching R diagonal entry makes the factorization unique
    (R_jj > 0) and the resulting Q exactly Haar.
    """
    q, r = np.linalg.qr(gauss)
    diag = np.einsum("...ii->...i", r)
    scale = np.abs(diag)
    phase = np.where(scale > 0, diag / np.where(scale > 0, scale, 1.0), 1.0)
    return q * phase[..., None, :]


def _haar_orthogonal_batch(n: int, size: int, gen: np.random.Generator) -> np.ndarray:
    """Haar O(n), both determinant components."""
    return _qr_positive_diag(gen.standard_normal((size, n, n)))


def _haar_so_batch(n: int, size: int, gen: np.random.Generator) -> np.ndarray:
    """Haar SO(n): Haar O(n) with the last column flipped on det = -1."""
    q = _haar_orthogonal_batch(n, size, gen)
    dets = np.linalg.det(q)
    q[dets < 0, :, -1] *= -1.0
    return q


def _haar_u_batch(n: int, size: int, gen: np.random.Generator) -> np.ndarray:
    gauss = gen.standard_normal((size, n, n)) + 1j * gen.standard_normal((size, n, n))
    return _qr_positive_diag(gauss / sqrt(2.0))


def _structure_map(u: np.ndarray) -> np.ndarray:
    """S(u) = Jhat conj(u) along the last axis; S pairs quaternionic columns."""
    out = np.empty_like(u)
    out[..., 0::2] = -np.conj(u[..., 1::2])
    out[..., 1::2] = np.conj(u[..., 0::2])
    return out


def block_j(n: int) -> np.ndarray:
    """The antisymmetric structure matrix Jhat = diag([[0,-1],[1,0]], ...)."""
    j2 = np.array([[0.0, -1.0], [1.0, 0.0]])
    out = np.zeros((2 * n, 2 * n))
    for i in range(n):
        out[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = j2
    return out


def quaternionic_structure_residual(mat: np.ndarray) -> float:
    """How far a 2n x 2n complex matrix is from M Jhat = Jhat conj(M)."""
    n2 = mat.shape[0]
    jh = block_j(n2 // 2)
    return float(np.max(np.abs(mat @ jh - jh @ np.conj(mat))))


def _haar_sp_batch(n: int, size: int, gen: np.random.Generator) -> np.ndarray:
    """Haar Sp(n) via structured Gram-Schmidt in the complex realization.

    Column pairs are built one quaternionic column at a time: draw a complex
    Gaussian vector, project out the span of the finished columns (which is
    S-invariant), normalize by the real norm, and append the S-partner.
    This is QR with quaternionic R_jj real positive, hence Haar.
    """
    d = 2 * n
    q = np.zeros((size, d, d), dtype=complex)
    for j in range(n):
        col = gen.standard_normal((size, d)) + 1j * gen.standard_normal((size, d))
        while True:
            col = _project_out(q[:, :, : 2 * j], col)
            norm = np.linalg.norm(col, axis=1)
            bad = norm < 1e-8
            if not bad.any():
                break
            nbad = int(bad.sum())
            col[bad] = gen.standard_normal((nbad, d)) + 1j * gen.standard_normal((nbad, d))
        col = col / norm[:, None]
        q[:, :, 2 * j] = col
        q[:, :, 2 * j + 1] = _structure_map(col)
    return q


def _project_out(basis: np.ndarray, col: np.ndarray) -> np.ndarray:
    if basis.shape[2] == 0:
        return col
    for _ in range(2):  # second pass controls cancellation error
        coef = np.einsum("bdk,bd->bk", basis.conj(), col)
        col = col - np.einsum("bdk,bk->bd", basis, coef)
    return col


_BATCH_SAMPLERS = {REAL: _haar_so_batch, COMPLEX: _haar_u_batch, QUATERNION: _haar_sp_batch}


def haar_sample_batch(
    field: str, n: int, size: int, rng: int | np.random.Generator | None = None
) -> np.ndarray:
    """Stack of ``size`` Haar samples, shape (size, d, d) with d = matrix_dim."""
    if field not in FIELDS:
        raise InvalidParams(f"unknown field {field!r}; expected one of {FIELDS}")
    if n < 1 or size < 0:
        raise InvalidParams("need n >= 1 and size >= 0")
    return _BATCH_SAMPLERS[field](n, size, as_generator(rng))


def haar_sample(
    field: str, n: int, rng: int | np.random.Generator | None = None
) -> CompactGroupElement:
    """One Haar sample from SO(n), U(n) or Sp(n) by field label."""
    mat = haar_sample_batch(field, n, 1, rng)[0]
    return CompactGroupElement(field, n, mat)


def haar_sample_uncorrected(
    field: str, n: int, rng: int | np.random.Generator | None = None, size: int = 1
) -> np.ndarray:
    """Raw-QR sampler WITHOUT the diagonal correction.  Not Haar.

    Kept as the negative control: LAPACK's sign convention skews the
    distribution (for the real field the top-left entry never changes sign),
    which a one-sample KS test against the true marginal detects instantly.
    """
    gen = as_generator(rng)
    if field == REAL:
        q, _ = np.linalg.qr(gen.standard_normal((size, n, n)))
        dets = np.linalg.det(q)
        q[dets < 0, :, -1] *= -1.0
        return q
    if field == COMPLEX:
        q, _ = np.linalg.qr(gen.standard_normal((size, n, n)) + 1j * gen.standard_normal((size, n, n)))
        return q
    raise InvalidParams("uncorrected sampler exists for the real and complex fields only")


# ---------------------------------------------------------------------------
# Corner reduction calculus
# ---------------------------------------------------------------------------


def _unit(field: str) -> int:
    """Stored rows per group unit of size: 2 for quaternions else 1."""
    return 2 if field == QUATERNION else 1


def corner(g: CompactGroupElement | np.ndarray, k: int, field: str = REAL) -> np.ndarray:
    """Leading principal k x k corner [g]_k (2k x 2k for quaternions)."""
    if isinstance(g, CompactGroupElement):
        mat, field, n = g.entries, g.field, g.n
    else:
        mat, n = np.asarray(g), np.asarray(g).shape[0] // _unit(field)
    if not 1 <= k <= n:
        raise InvalidParams(f"corner index must satisfy 1 <= k <= {n}, got {k}")
    s = _unit(field) * k
    return mat[:s, :s]


def _upsilon_matrix(mat: np.ndarray, m_rows: int) -> np.ndarray:
    """T - R (1 + P)^(-1) Q for the (m_rows + rest) block split of ``mat``."""
    p_blk = mat[:m_rows, :m_rows]
    q_blk = mat[:m_rows, m_rows:]
    r_blk = mat[m_rows:, :m_rows]
    t_blk = mat[m_rows:, m_rows:]
    lhs = np.eye(m_rows, dtype=mat.dtype) + p_blk
    sign, logdet = np.linalg.slogdet(lhs)
    if sign == 0 or logdet < np.log(_SINGULAR_TOL):
        raise SingularUpsilon(
            f"det(1 + corner) ~ {np.exp(logdet) if sign != 0 else 0.0:.3e} is below threshold"
        )
    return t_blk - r_blk @ np.linalg.solve(lhs, q_blk)


def upsilon(g: CompactGroupElement, m: int) -> CompactGroupElement:
    """Corner reduction by m units: blocks (P Q; R T) |-> T - R (1+P)^(-1) Q.

    Maps the group of size n onto the group of size n - m and sends Haar
    measure to Haar measure.  Composes additively: upsilon(k) o upsilon(m)
    equals upsilon(k + m).
    """
    if not 1 <= m < g.n:
        raise InvalidParams(f"reduction step must satisfy 1 <= m < {g.n}, got {m}")
    out = _upsilon_matrix(g.entries, _unit(g.field) * m)
    return CompactGroupElement(g.field, g.n - m, out)


def cayley(g: CompactGroupElement | np.ndarray) -> np.ndarray:
    """Cayley transform (g - 1)(g + 1)^(-1); defined when det(g + 1) != 0."""
    mat = g.entries if isinstance(g, CompactGroupElement) else np.asarray(g)
    d = mat.shape[0]
    lhs = mat + np.eye(d, dtype=mat.dtype)
    sign, logdet = np.linalg.slogdet(lhs)
    if sign == 0 or logdet < np.log(_SINGULAR_TOL):
        raise SingularCayley("det(g + 1) is below threshold")
    # solve X (g+1) = (g-1) through the plain-transposed system
    rhs = mat - np.eye(d, dtype=mat.dtype)
    return np.linalg.solve(lhs.T, rhs.T).T


@dataclass
class CubeCoordinates:
    """Coordinates (x_1, ..., x_{n-1}) of an SO(n) element.

    x_j is the (1, 1) entry after n - 1 - j corner reduction steps; under
    Haar measure the x_j are independent with density c (1 - x^2)^((j-2)/2).
    """

    n: int
    x: np.ndarray


def cube_coords(g: CompactGroupElement) -> CubeCoordinates:
    """Cube coordinates of one SO(n) element (n >= 2)."""
    if g.field != REAL:
        raise InvalidParams("cube coordinates are defined for the real field")
    if g.n < 2:
        raise InvalidParams("cube coordinates need n >= 2")
    ys = []
    mat = g.entries
    for step in range(g.n - 1):
        ys.append(float(mat[0, 0]))
        if step < g.n - 2:
            mat = _upsilon_matrix(mat, 1)
    return CubeCoordinates(g.n, np.array(ys[::-1]))


def cube_coords_batch(
    n: int, size: int, rng: int | np.random.Generator | None = None
) -> np.ndarray:
    """Cube coordinates of ``size`` fresh Haar SO(n) samples, shape (size, n-1).

    Samples whose reduction chain comes within 1e-12 of the singular set
    are redrawn; the event has probability zero and only guards roundoff.
    """
    if n < 2:
        raise InvalidParams("cube coordinates need n >= 2")
    gen = as_generator(rng)
    out = np.empty((size, n - 1))
    todo = np.arange(size)
    while todo.size:
        mats = _haar_so_batch(n, todo.size, gen)
        coords, ok = _cube_coords_of_batch(mats)
        out[todo[ok]] = coords[ok]
        todo = todo[~ok]
    return out


def _cube_coords_of_batch(mats: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    size, n = mats.shape[0], mats.shape[1]
    ys = np.empty((size, n - 1))
    ok = np.ones(size, dtype=bool)
    cur = mats
    for step in range(n - 1):
        ys[:, step] = cur[:, 0, 0]
        if step == n - 2:
            break
        lhs = cur[:, :1, :1] + 1.0
        ok &= np.abs(lhs[:, 0, 0]) > _SINGULAR_TOL
        safe = np.where(ok, lhs[:, 0, 0], 1.0)[:, None, None]
        cur = cur[:, 1:, 1:] - cur[:, 1:, :1] @ cur[:, :1, 1:] / safe
    return ys[:, ::-1], ok


def equivariance_residual(
    g: CompactGroupElement, a: CompactGroupElement, b: CompactGroupElement, m: int
) -> float:
    """Residual of upsilon_m(diag(1, A) g diag(1, B)) = A upsilon_m(g) B.

    A and B are group elements of size n - m; the reduction only sees the
    left-upper corner, so framing the complement acts by outer translation.
    """
    if a.field != g.field or b.field != g.field or a.n != g.n - m or b.n != g.n - m:
        raise InvalidParams("A and B must live in the size n - m group over the same field")
    u = _unit(g.field)
    d = g.matrix_dim
    left = np.eye(d, dtype=complex if g.field != REAL else float)
    right = left.copy()
    left[u * m :, u * m :] = a.entries
    right[u * m :, u * m :] = b.entries
    framed = CompactGroupElement(g.field, g.n, left @ g.entries @ right)
    lhs = upsilon(framed, m).entries
    rhs = a.entries @ upsilon(g, m).entries @ b.entries
    return float(np.max(np.abs(lhs - rhs)))


def cayley_corner_residual(g: CompactGroupElement, p: int) -> float:
    """Scale-aware residual of {cayley(g)}_p = cayley(upsilon(g, n-p)).

    The braces take the lower-right p x p corner (2p x 2p for
    quaternions).  Cayley entries grow like the reciprocal distance to the
    singular set, so the comparison is normalized by the corner magnitude.
    """
    if not 1 <= p < g.n:
        raise InvalidParams(f"corner size must satisfy 1 <= p < {g.n}, got {p}")
    u = _unit(g.field)
    m = g.n - p
    lhs = cayley(g)[u * m :, u * m :]
    rhs = cayley(upsilon(g, m))
    scale = max(1.0, float(np.max(np.abs(lhs))))
    return float(np.max(np.abs(lhs - rhs))) / scale


def corner_det_multiplicativity_residual(g: CompactGroupElement, m: int, p: int) -> float:
    """Residual of det(1+[g]_p) = det(1+[g]_m) det(1+[upsilon_m(g)]_{p-m})."""
    if not 1 <= m < p <= g.n:
        raise InvalidParams(f"need 1 <= m < p <= {g.n}, got m={m}, p={p}")
    u = _unit(g.field)
    full = np.linalg.det(np.eye(u * p) + corner(g, p))
    part = np.linalg.det(np.eye(u * m) + corner(g, m))
    red = upsilon(g, m)
    rest = np.linalg.det(np.eye(u * (p - m)) + corner(red, p - m))
    return float(abs(full - part * rest) / max(abs(full), 1e-30))


# ---------------------------------------------------------------------------
# Quaternionic determinant
# ---------------------------------------------------------------------------


def _real_realization(mat: np.ndarray) -> np.ndarray:
    """4n x 4n real left-multiplication realization from the complex one."""
    n = mat.shape[0] // 2
    out = np.zeros((4 * n, 4 * n))
    for i in range(n):
        for j in range(n):
            alpha = mat[2 * i, 2 * j]
            beta = mat[2 * i, 2 * j + 1]
            a, b = float(np.real(alpha)), float(np.imag(alpha))
            c, d = float(np.real(beta)), float(np.imag(beta))
            out[4 * i : 4 * i + 4, 4 * j : 4 * j + 4] = [
                [a, -b, -c, -d],
                [b, a, -d, c],
                [c, d, a, -b],
                [d, -c, b, a],
            ]
    return out


def quaternionic_det(a: CompactGroupElement | np.ndarray, tol: float = 1e-9) -> float:
    """Nonnegative quaternionic determinant of a quaternionic matrix.

    Computed as sqrt(det) of the 2n x 2n complex realization and
    cross-checked against det^(1/4) of the 4n x 4n real realization,
    which must come out nonnegative.
    """
    mat = a.entries if isinstance(a, CompactGroupElement) else np.asarray(a, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] % 2:
        raise InvalidParams("expected a 2n x 2n complex realization")
    scale = max(float(np.max(np.abs(mat))), 1.0)
    if quaternionic_structure_residual(mat) > tol * scale:
        raise InvalidParams("matrix does not satisfy the quaternionic structure relation")
    sign_c, log_c = np.linalg.slogdet(mat)
    if sign_c == 0:
        return 0.0
    if abs(np.imag(sign_c)) > 1e-6 or np.real(sign_c) < 0:
        raise NegativeRealDeterminant(f"complex-realization determinant has sign {sign_c:.6f}")
    sign_r, log_r = np.linalg.slogdet(_real_realization(mat))
    if sign_r < 0:
        raise NegativeRealDeterminant("real-realization determinant is negative")
    if sign_r != 0 and abs(log_r / 4.0 - log_c / 2.0) > 1e-6 * max(1.0, abs(log_c)):
        raise InvalidParams("complex and real realizations disagree on the determinant")
    return float(np.exp(log_c / 2.0))
