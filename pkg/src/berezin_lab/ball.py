"""The matrix ball, its Moebius action and pseudo-orthogonal transport.

Points are real p x q matrices of spectral norm below one (p <= q).  The
group O(p, q), block-decomposed as g = (a b; c d) with g^t J g = J and
J = diag(1_p, -1_q), acts by z |-> (a + z c)^(-1) (b + z d); the scalar
cocycle of the action is det(a + z c).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compact import _haar_orthogonal_batch
from .errors import InvalidParams, NearSingularCocycle
from .rngs import as_generator

_COND_BOUND = 1e12


@dataclass
class BallPoint:
    """A p x q matrix of spectral norm < 1, or <= 1 when ``closure`` is set."""

    p: int
    q: int
    entries: np.ndarray
    closure: bool = False


def ball_point(entries: np.ndarray, closure: bool = False, tol: float = 1e-9) -> BallPoint:
    """Validating constructor: checks the shape and the norm constraint."""
    entries = np.asarray(entries, dtype=float)
    if entries.ndim != 2:
        raise InvalidParams("a ball point is a 2-d real matrix")
    p, q = entries.shape
    if p > q:
        raise InvalidParams(f"need p <= q, got shape ({p}, {q})")
    norm = float(np.linalg.norm(entries, 2)) if entries.size else 0.0
    limit_ok = norm <= 1.0 + tol if closure else norm < 1.0
    if not limit_ok:
        raise InvalidParams(f"spectral norm {norm:.6f} violates the ball constraint")
    return BallPoint(p, q, entries, closure)


def origin(p: int, q: int) -> BallPoint:
    return ball_point(np.zeros((p, q)))


def random_ball_point(
    p: int,
    q: int,
    rng: int | np.random.Generator | None = None,
    norm_min: float = 0.0,
    norm_max: float = 0.95,
) -> BallPoint:
    """Gaussian direction rescaled to a uniform spectral norm in [min, max)."""
    if not 0.0 <= norm_min <= norm_max < 1.0:
        raise InvalidParams("need 0 <= norm_min <= norm_max < 1")
    gen = as_generator(rng)
    z = gen.standard_normal((p, q))
    cur = np.linalg.norm(z, 2)
    target = gen.uniform(norm_min, norm_max)
    return ball_point(z * (target / cur))


@dataclass
class PseudoOrthogonalElement:
    """An O(p, q) element in block form g = (a b; c d)."""

    p: int
    q: int
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        top = np.hstack([self.a, self.b])
        bot = np.hstack([self.c, self.d])
        return np.vstack([top, bot])

    @classmethod
    def from_matrix(cls, p: int, q: int, mat: np.ndarray) -> "PseudoOrthogonalElement":
        mat = np.asarray(mat, dtype=float)
        if mat.shape != (p + q, p + q):
            raise InvalidParams(f"expected a {(p + q)} x {(p + q)} matrix")
        return cls(p, q, mat[:p, :p].copy(), mat[:p, p:].copy(), mat[p:, :p].copy(), mat[p:, p:].copy())

    @classmethod
    def identity(cls, p: int, q: int) -> "PseudoOrthogonalElement":
        return cls.from_matrix(p, q, np.eye(p + q))


def signature_matrix(p: int, q: int) -> np.ndarray:
    return np.diag(np.concatenate([np.ones(p), -np.ones(q)]))


def validate_pseudo_orthogonal(g: PseudoOrthogonalElement, tol: float = 1e-9) -> float:
    """Frobenius residual of g^t J g = J; raises when it exceeds ``tol``."""
    j = signature_matrix(g.p, g.q)
    mat = g.matrix
    res = float(np.linalg.norm(mat.T @ j @ mat - j)) / np.sqrt(g.p + g.q)
    if res > tol:
        raise InvalidParams(f"g^t J g - J residual {res:.3e} exceeds tolerance {tol:.1e}")
    return res


def _action_base(g: PseudoOrthogonalElement, z: BallPoint) -> np.ndarray:
    if (z.p, z.q) != (g.p, g.q):
        raise InvalidParams(f"point shape ({z.p}, {z.q}) does not match group ({g.p}, {g.q})")
    m = g.a + z.entries @ g.c
    if np.linalg.cond(m) > _COND_BOUND:
        raise NearSingularCocycle("a + z c is too ill conditioned")
    return m

def moebius_act(g: PseudoOrthogonalElement, z: BallPoint) -> BallPoint:
    """z |-> (a + z c)^(-1) (b + z d); preserves the ball and its closure."""
    m = _action_base(g, z)
    w = np.linalg.solve(m, g.b + z.entries @ g.d)
    return BallPoint(z.p, z.q, w, closure=z.closure)


def cocycle(g: PseudoOrthogonalElement, z: BallPoint) -> float:
    """det(a + z c), the multiplier attached to the Moebius action at z."""
    return float(np.linalg.det(_action_base(g, z)))


@dataclass
class OrbitRank:
    """Numerical rank h of 1 - z z^t; h = p in the interior, h < p on boundary orbits."""

    h: int


def orbit_rank(z: BallPoint, tol: float = 1e-9) -> OrbitRank:
    s = np.linalg.svd(np.eye(z.p) - z.entries @ z.entries.T, compute_uv=False)
    floor = tol * max(float(s[0]) if s.size else 0.0, 1.0)
    return OrbitRank(int(np.sum(s > floor)))


def boost(p: int, q: int, t: np.ndarray) -> PseudoOrthogonalElement:
    """The diagonal boost B(t): cosh/sinh in p planes, identity elsewhere."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.shape != (p,):
        raise InvalidParams(f"boost needs {p} rapidities, got shape {t.shape}")
    a = np.diag(np.cosh(t))
    b = np.zeros((p, q))
    b[:, :p] = np.diag(np.sinh(t))
    c = np.zeros((q, p))
    c[:p, :] = np.diag(np.sinh(t))
    d = np.eye(q)
    d[:p, :p] = np.diag(np.cosh(t))
    return PseudoOrthogonalElement(p, q, a, b, c, d)


def compose(g: PseudoOrthogonalElement, h: PseudoOrthogonalElement) -> PseudoOrthogonalElement:
    if (g.p, g.q) != (h.p, h.q):
        raise InvalidParams("cannot compose elements of different signatures")
    return PseudoOrthogonalElement.from_matrix(g.p, g.q, g.matrix @ h.matrix)


def transport_to_origin(z: BallPoint) -> PseudoOrthogonalElement:
    """An element g with z^[g] = 0, built from the SVD of z.

    With z = U diag(sigma) V^t, the product diag(U, V) B(-atanh sigma)
    moves z to the origin; its cocycle at z is prod(1 / cosh(atanh sigma)).
    """
    u, sig, vt = np.linalg.svd(z.entries)
    if sig.size and sig[0] >= 1.0:
        raise InvalidParams("transport needs an interior point")
    if np.linalg.det(u) < 0:
        # flip one singular pair jointly: z is unchanged and the cocycle
        # at z comes out positive, as advertised
        u[:, -1] *= -1.0
        vt[z.p - 1, :] *= -1.0
    frame = np.zeros((z.p + z.q, z.p + z.q))
    frame[: z.p, : z.p] = u
    frame[z.p :, z.p :] = vt.T
    k = PseudoOrthogonalElement.from_matrix(z.p, z.q, frame)
    return compose(k, boost(z.p, z.q, -np.arctanh(sig)))


def random_pseudo_orthogonal(
    p: int,
    q: int,
    rng: int | np.random.Generator | None = None,
    boost_range: float = 2.0,
) -> PseudoOrthogonalElement:
    """KAK sample: k1 B(t) k2 with k_i in O(p) x O(q), |t_j| <= boost_range."""
    gen = as_generator(rng)
    t = gen.uniform(-boost_range, boost_range, size=p)
    ks = []
    for _ in range(2):
        frame = np.zeros((p + q, p + q))
        frame[:p, :p] = _haar_orthogonal_batch(p, 1, gen)[0]
        frame[p:, p:] = _haar_orthogonal_batch(q, 1, gen)[0]
        ks.append(PseudoOrthogonalElement.from_matrix(p, q, frame))
    return compose(ks[0], compose(boost(p, q, t), ks[1]))
