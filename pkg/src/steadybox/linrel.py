"""Numerical linear relations between real coordinate spaces.

A relation from R^m to R^n is a linear subspace of R^(m+n), stored as an
orthonormal basis with the source coordinates in the first m rows.  Relations
compose by eliminating the middle variable, which here is a null-space
computation; all rank decisions go through a single relative singular-value
threshold (``RANK_TOL`` by default).

Coordinate conventions, shared by every module in this package:

* a product of "potential/population" and "current/flow" data over a port set
  is ordered (all potentials, then all currents);
* a relation's ambient space is ordered (source block, target block);
* the port relation's codomain is ordered (input potentials, input currents,
  output potentials, output currents).

Symplectic forms are weighted: ``omega((a, b), (a', b')) = <b', a>_w -
<b, a'>_w`` with ``<u, v>_w = sum(u_k * v_k / w_k)``.  Unit weights give the
standard form on potential-current pairs; taking the equilibrium populations
as weights gives the form on population-flow pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

#: Relative singular-value threshold deciding numerical rank everywhere.
RANK_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Subspace:
    """A linear subspace of R^ambient_dim with an orthonormal column basis.

    A zero-dimensional subspace has a basis of shape ``(ambient_dim, 0)``.
    """

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.ndim != 2 or b.shape[0] != self.ambient_dim:
            raise ValueError(
                f"basis must be ({self.ambient_dim}, k), got {b.shape}")
        gram = b.T @ b
        if gram.size and np.max(np.abs(gram - np.eye(b.shape[1]))) > 1e-12:
            raise ValueError("basis columns are not orthonormal")
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def contains(self, v, tol: float = 1e-9) -> bool:
        """Whether ``v`` lies in the subspace up to relative tolerance."""
        v = np.asarray(v, dtype=float)
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return True
        resid = v - self.basis @ (self.basis.T @ v)
        return bool(np.linalg.norm(resid) <= tol * nv)

    @classmethod
    def from_columns(cls, columns, ambient_dim: int | None = None,
                     rank_tol: float = RANK_TOL) -> "Subspace":
        """Orthonormalize the column span of a matrix.

        Singular values below ``rank_tol`` times the largest are treated as
        zero.  ``ambient_dim`` is required when ``columns`` is empty.
        """
        a = np.asarray(columns, dtype=float)
        if a.size == 0:
            if ambient_dim is None:
                if a.ndim == 2 and a.shape[0] > 0:
                    ambient_dim = a.shape[0]
                else:
                    raise ValueError(
                        "ambient_dim required for an empty spanning set")
            return cls(ambient_dim, np.zeros((ambient_dim, 0)))
        if a.ndim != 2:
            raise ValueError("expected a 2-d array of columns")
        if ambient_dim is not None and ambient_dim != a.shape[0]:
            raise ValueError("ambient_dim does not match the columns")
        u, s, _ = np.linalg.svd(a, full_matrices=False)
        rank = int(np.sum(s > rank_tol * s[0])) if s.size else 0
        return cls(a.shape[0], u[:, :rank])

    @classmethod
    def from_spanning(cls, vectors, ambient_dim: int | None = None,
                      rank_tol: float = RANK_TOL) -> "Subspace":
        """Orthonormalize a sequence of spanning vectors (one per row)."""
        a = np.asarray(vectors, dtype=float)
        if a.size == 0:
            return cls.from_columns(a, ambient_dim=ambient_dim,
                                    rank_tol=rank_tol)
        return cls.from_columns(a.T, ambient_dim=ambient_dim,
                                rank_tol=rank_tol)


def null_space(a: np.ndarray, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the kernel of ``a``."""
    a = np.asarray(a, dtype=float)
    if a.shape[0] == 0 or a.shape[1] == 0:
        return np.eye(a.shape[1])
    _, s, vt = np.linalg.svd(a)
    rank = int(np.sum(s > rank_tol * s[0])) if s.size and s[0] > 0 else 0
    return vt[rank:].T


def subspace_distance(a: Subspace, b: Subspace) -> float:
    """Spectral norm of the difference of orthogonal projectors.

    For subspaces of equal dimension this equals the sine of the largest
    principal angle, which resolves tiny angles far better than taking
    arccos of the singular values of ``A^T B``.
    """
    if a.ambient_dim != b.ambient_dim:
        raise ValueError("subspaces live in different ambient spaces")
    return float(np.linalg.norm(a.projector() - b.projector(), 2))


def subspace_equal(a: Subspace, b: Subspace, tol: float = 1e-8) -> bool:
    """Equal dimension and largest principal angle below ``tol``."""
    if a.ambient_dim != b.ambient_dim:
        raise ValueError("subspaces live in different ambient spaces")
    return a.dim == b.dim and subspace_distance(a, b) < tol


@dataclass(frozen=True, eq=False)
class LinearRelation:
    """A linear subspace of source + target coordinates."""

    source_dim: int
    target_dim: int
    space: Subspace

    def __post_init__(self):
        if self.space.ambient_dim != self.source_dim + self.target_dim:
            raise ValueError("relation blocks do not add up to the ambient")

    @property
    def dim(self) -> int:
        return self.space.dim

    def source_block(self) -> np.ndarray:
        return self.space.basis[:self.source_dim]

    def target_block(self) -> np.ndarray:
        return self.space.basis[self.source_dim:]


def relation_from_map(a) -> LinearRelation:
    """The graph ``{(x, Ax)}`` of a linear map as a relation."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    n, m = a.shape
    cols = np.vstack([np.eye(m), a])
    return LinearRelation(m, n, Subspace.from_columns(cols, ambient_dim=m + n))


def identity_relation(dim: int) -> LinearRelation:
    return relation_from_map(np.eye(dim))


def compose_relations(first: LinearRelation, second: LinearRelation,
                      rank_tol: float = RANK_TOL) -> LinearRelation:
    """Relational composite: pairs (u, w) linked through some middle v.

    Found by intersecting in coefficient space: a basis of the null space of
    ``[V-block(first) | -V-block(second)]`` parameterizes all matched pairs,
    which are then projected to (source, target) coordinates.
    """
    if first.target_dim != second.source_dim:
        raise ValueError(
            f"cannot compose: middle dimensions {first.target_dim} and "
            f"{second.source_dim} differ")
    b1, b2 = first.space.basis, second.space.basis
    k1 = b1.shape[1]
    mid = np.hstack([first.target_block(), -b2[:second.source_dim]])
    coeffs = null_space(mid, rank_tol)
    pairs = np.vstack([
        b1[:first.source_dim] @ coeffs[:k1],
        b2[second.source_dim:] @ coeffs[k1:],
    ])
    space = Subspace.from_columns(
        pairs, ambient_dim=first.source_dim + second.target_dim,
        rank_tol=rank_tol)
    return LinearRelation(first.source_dim, second.target_dim, space)


def oplus(l1: LinearRelation, l2: LinearRelation) -> LinearRelation:
    """Direct sum; sources are stacked first, then targets, in order."""
    s1, t1, s2, t2 = l1.source_dim, l1.target_dim, l2.source_dim, l2.target_dim
    k1, k2 = l1.dim, l2.dim
    basis = np.zeros((s1 + s2 + t1 + t2, k1 + k2))
    basis[:s1, :k1] = l1.source_block()
    basis[s1:s1 + s2, k1:] = l2.source_block()
    basis[s1 + s2:s1 + s2 + t1, :k1] = l1.target_block()
    basis[s1 + s2 + t1:, k1:] = l2.target_block()
    return LinearRelation(
        s1 + s2, t1 + t2, Subspace(s1 + s2 + t1 + t2, basis))


def transpose_relation(l: LinearRelation) -> LinearRelation:
    """Swap the roles of source and target (the relational dagger)."""
    basis = np.vstack([l.target_block(), l.source_block()])
    return LinearRelation(
        l.target_dim, l.source_dim, Subspace(l.space.ambient_dim, basis))


def permute_coordinates(l: LinearRelation,
                        source_perm: Sequence[int],
                        target_perm: Sequence[int]) -> LinearRelation:
    """Reorder coordinates: new source i is old source ``source_perm[i]``."""
    sp = np.asarray(source_perm, dtype=int)
    tp = np.asarray(target_perm, dtype=int)
    if sp.shape != (l.source_dim,) or tp.shape != (l.target_dim,):
        raise ValueError("permutations must cover the blocks exactly")
    basis = np.vstack([l.source_block()[sp], l.target_block()[tp]])
    return LinearRelation(
        l.source_dim, l.target_dim, Subspace(l.space.ambient_dim, basis))


def port_relation(input_terminals: Sequence[int],
                  output_terminals: Sequence[int],
                  num_terminals: int,
                  rank_tol: float = RANK_TOL) -> LinearRelation:
    """How terminal data splits across the ports touching each terminal.

    Source coordinates: (potential, current) over the terminal set T.  Target
    coordinates: (potential, current) over the input ports X followed by the
    output ports Y.  The relation consists of all tuples satisfying

    * the potential at a port equals the potential at its terminal, and
    * the current at a terminal is the sum of the output-port currents there
      minus the sum of the input-port currents there (input ports count
      current inflow, the negative of outflow).

    ``input_terminals[k]`` is the terminal index port k attaches to.
    """
    i_map = np.asarray(input_terminals, dtype=int)
    o_map = np.asarray(output_terminals, dtype=int)
    nt, nx, ny = num_terminals, i_map.size, o_map.size
    if nt and (np.any(i_map >= nt) or np.any(o_map >= nt)):
        raise ValueError("port maps must land in the terminal set")
    ambient = 2 * nt + 2 * nx + 2 * ny
    pot_t, cur_t = 0, nt
    pot_x, cur_x = 2 * nt, 2 * nt + nx
    pot_y, cur_y = 2 * nt + 2 * nx, 2 * nt + 2 * nx + ny

    rows = []
    for k, n in enumerate(i_map):
        row = np.zeros(ambient)
        row[pot_x + k] = 1.0
        row[pot_t + n] = -1.0
        rows.append(row)
    for k, n in enumerate(o_map):
        row = np.zeros(ambient)
        row[pot_y + k] = 1.0
        row[pot_t + n] = -1.0
        rows.append(row)
    for n in range(nt):
        row = np.zeros(ambient)
        row[cur_t + n] = 1.0
        for k in np.flatnonzero(o_map == n):
            row[cur_y + k] -= 1.0
        for k in np.flatnonzero(i_map == n):
            row[cur_x + k] += 1.0
        rows.append(row)

    constraints = np.asarray(rows) if rows else np.zeros((0, ambient))
    basis = null_space(constraints, rank_tol)
    return LinearRelation(
        2 * nt, 2 * nx + 2 * ny, Subspace(ambient, basis))


def apply_relation_to_subspace(r: LinearRelation, s: Subspace,
                               rank_tol: float = RANK_TOL) -> Subspace:
    """Pointwise image ``{y : exists x in s with (x, y) in r}``."""
    if s.ambient_dim != r.source_dim:
        raise ValueError("subspace must live in the relation's source")
    as_relation = LinearRelation(0, s.ambient_dim,
                                 Subspace(s.ambient_dim, s.basis))
    return compose_relations(as_relation, r, rank_tol).space


def population_rescaling(q) -> tuple[LinearRelation, LinearRelation]:
    """Potential-current pairs to population-flow pairs, and back.

    The forward relation is the graph of ``(phi, iota) |-> (q * phi, iota)``
    for a positive weight vector ``q``; the second return value is its
    inverse, the same construction with ``1/q``.
    """
    q = np.asarray(q, dtype=float)
    if q.ndim != 1 or np.any(q <= 0) or not np.all(np.isfinite(q)):
        raise ValueError("weights must be a vector of positive finite reals")
    fwd = np.diag(np.concatenate([q, np.ones_like(q)]))
    inv = np.diag(np.concatenate([1.0 / q, np.ones_like(q)]))
    return relation_from_map(fwd), relation_from_map(inv)


@dataclass(frozen=True, eq=False)
class SymplecticForm:
    """The weighted form on (potential, current) pairs described above."""

    dim: int
    weights: np.ndarray

    def __post_init__(self):
        if self.dim % 2:
            raise ValueError("symplectic spaces are even-dimensional")
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (self.dim // 2,):
            raise ValueError("one weight per half-dimension required")
        if np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be positive and finite")
        object.__setattr__(self, "weights", w)

    @classmethod
    def standard(cls, half_dim: int) -> "SymplecticForm":
        return cls(2 * half_dim, np.ones(half_dim))

    def gram(self) -> np.ndarray:
        h = self.dim // 2
        w_inv = np.diag(1.0 / self.weights)
        g = np.zeros((self.dim, self.dim))
        g[:h, h:] = w_inv
        g[h:, :h] = -w_inv
        return g

    def __call__(self, u, v) -> float:
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return float(u @ self.gram() @ v)


def is_lagrangian(l: LinearRelation,
                  source_weights=None,
                  target_weights=None,
                  tol: float = 1e-8) -> bool:
    """Whether a relation is Lagrangian for the weighted symplectic forms.

    The relation must have half the ambient dimension and the form
    ``(-omega_source) (+) omega_target`` (source conjugated) must vanish on
    it; the isotropy residual is compared to ``tol`` after normalizing by the
    largest form coefficient.
    """
    if l.source_dim % 2 or l.target_dim % 2:
        raise ValueError("source and target must be even-dimensional")
    if source_weights is None:
        source_weights = np.ones(l.source_dim // 2)
    if target_weights is None:
        target_weights = np.ones(l.target_dim // 2)
    if l.dim != (l.source_dim + l.target_dim) // 2:
        return False
    src = SymplecticForm(l.source_dim, source_weights)
    tgt = SymplecticForm(l.target_dim, target_weights)
    gram = np.zeros((l.space.ambient_dim, l.space.ambient_dim))
    gram[:l.source_dim, :l.source_dim] = -src.gram()
    gram[l.source_dim:, l.source_dim:] = tgt.gram()
    b = l.space.basis
    residual = float(np.max(np.abs(b.T @ gram @ b))) if l.dim else 0.0
    scale = max(1.0, float(np.max(np.abs(gram))))
    return residual <= tol * scale


def rescaling_preserves_symplectic_form(q, tol: float = 1e-12,
                                        trials: int = 100,
                                        rng=None) -> bool:
    """Numerically verify that population rescaling is a symplectomorphism.

    Checks ``omega_q(Au, Av) = omega(u, v)`` on random pairs, where A is the
    forward map of :func:`population_rescaling` and omega_q weights the form
    by ``q``.
    """
    q = np.asarray(q, dtype=float)
    n = q.size
    rng = np.random.default_rng(0) if rng is None else rng
    plain = SymplecticForm.standard(n)
    weighted = SymplecticForm(2 * n, q)
    scale_vec = np.concatenate([q, np.ones(n)])
    for _ in range(trials):
        u = rng.uniform(-1.0, 1.0, 2 * n)
        v = rng.uniform(-1.0, 1.0, 2 * n)
        if abs(weighted(scale_vec * u, scale_vec * v) - plain(u, v)) > tol:
            return False
    return True
