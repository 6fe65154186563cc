"""Curvature data at a point: jets of R (and optionally T), their symmetry
validation, the generating series used by the transport equations, the
higher holomorphic sectional curvatures and reconstruction of R and grad R.

Index convention for stored tensors (also used by the JSON format):
``terms[k][v1, .., vk, a, b, c, o]`` is the o-th component of
(nabla^k_{e_v1 .. e_vk} R)_{e_a, e_b} e_c, symmetrized in the k derivative
slots.  ``torsion_terms[k][v1, .., vk, a, b, o]`` likewise for T.
Second derivatives follow nabla^2_{X,Y} = nabla_X nabla_Y - nabla_{nabla_X Y}.
"""

from __future__ import annotations

import itertools
import json
import math

import numpy as np

from . import graded_ops
from .series import Series
from .tensor_core import KahlerPoint, SymTensor, poly_from_raw

MODES = ("kahler", "balanced", "affine")
INDEX_CONVENTION = "derivative slots first, then A, B, C; last axis is the value component"


def _sym_slots(arr: np.ndarray, k: int) -> np.ndarray:
    """Average over permutations of the first k axes."""
    if k < 2:
        return np.array(arr, dtype=float)
    rest = tuple(range(k, arr.ndim))
    perms = list(itertools.permutations(range(k)))
    return sum(np.transpose(arr, p + rest) for p in perms) / len(perms)


class CurvatureJet:
    """The stack R, nabla R, ..., nabla^m R (and optional torsion stack) at a point."""

    def __init__(self, point: KahlerPoint, terms, torsion_terms=None, mode: str | None = None):
        if mode is None:
            mode = "kahler" if point.is_kahler else "affine"
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        if mode != "affine" and not point.is_kahler:
            raise ValueError(f"mode {mode!r} needs a complex structure")
        dim = point.dim
        clean = []
        for k, t in enumerate(terms):
            t = np.asarray(t, dtype=float)
            if t.shape != (dim,) * (k + 4):
                raise ValueError(f"term {k} has shape {t.shape}, expected {(dim,) * (k + 4)}")
            t = _sym_slots(t, k)
            t.setflags(write=False)
            clean.append(t)
        if not clean:
            raise ValueError("a jet needs at least the curvature tensor")
        tors = []
        for k, t in enumerate(torsion_terms or []):
            t = np.asarray(t, dtype=float)
            if t.shape != (dim,) * (k + 3):
                raise ValueError(f"torsion term {k} has shape {t.shape}")
            t = _sym_slots(t, k)
            t.setflags(write=False)
            tors.append(t)
        if mode != "affine" and any(np.any(t) for t in tors):
            raise ValueError("Kaehler and balanced jets are torsion free")
        self.point = point
        self.terms = clean
        self.torsion_terms = tors
        self.mode = mode

    @property
    def dim(self) -> int:
        return self.point.dim

    @property
    def order(self) -> int:
        return len(self.terms) - 1

    @property
    def R(self) -> np.ndarray:
        return self.terms[0]

    @property
    def has_torsion(self) -> bool:
        return any(np.any(t) for t in self.torsion_terms)

    @classmethod
    def flat(cls, point: KahlerPoint, order: int = 3) -> "CurvatureJet":
        d = point.dim
        return cls(point, [np.zeros((d,) * (k + 4)) for k in range(order + 1)])

    def scaled(self, eps: float) -> "CurvatureJet":
        """Multiply every curvature and torsion term by eps."""
        return CurvatureJet(
            self.point, [eps * t for t in self.terms], [eps * t for t in self.torsion_terms], self.mode
        )

    def with_order(self, order: int) -> "CurvatureJet":
        d = self.dim
        terms = [self.terms[k] if k < len(self.terms) else np.zeros((d,) * (k + 4)) for k in range(order + 1)]
        return CurvatureJet(self.point, terms, self.torsion_terms, self.mode)

    def replace_terms(self, terms) -> "CurvatureJet":
        return CurvatureJet(self.point, terms, self.torsion_terms, self.mode)

    def restrict(self, indices, tol: float = 1e-10) -> "CurvatureJet":
        """Jet of a coordinate subspace that is closed under the curvature terms.

        The subspace must be I-invariant and g-orthogonal to its complement,
        and every term with all inputs in it must have its output there too
        (as for a Lie triple system).
        """
        idx = np.asarray(indices, dtype=int)
        rest = np.setdiff1d(np.arange(self.dim), idx)
        g = self.point.metric
        if rest.size and np.max(np.abs(g[np.ix_(idx, rest)]), initial=0.0) > tol:
            raise ValueError("subspace is not orthogonal to its complement")
        cplx = None
        if self.point.cplx is not None:
            if rest.size and np.max(np.abs(self.point.cplx[np.ix_(rest, idx)]), initial=0.0) > tol:
                raise ValueError("subspace is not I-invariant")
            cplx = self.point.cplx[np.ix_(idx, idx)]
        terms = []
        for t in self.terms + self.torsion_terms:
            sub = t[np.ix_(*[idx] * (t.ndim - 1), np.arange(self.dim))]
            if rest.size and np.max(np.abs(sub[..., rest]), initial=0.0) > tol:
                raise ValueError("subspace is not closed under the jet")
            terms.append(sub[..., idx])
        n = len(self.terms)
        point = KahlerPoint(g[np.ix_(idx, idx)], cplx)
        return CurvatureJet(point, terms[:n], terms[n:], self.mode)

    # -- application helpers ------------------------------------------------
    def apply(self, k: int, derivs, A, B, C) -> np.ndarray:
        """(nabla^k_{derivs} R)_{A,B} C."""
        t = self.terms[k] if k < len(self.terms) else None
        if t is None:
            return np.zeros(self.dim)
        out = t
        for v in list(derivs) + [A, B, C]:
            out = np.tensordot(np.asarray(v, dtype=float), out, axes=(0, 0))
        return out

    def Rv(self, A, B, C) -> np.ndarray:
        return self.apply(0, [], A, B, C)

    def lowered(self, k: int) -> np.ndarray:
        """g((nabla^k R)_{A,B} C, D) as a full array."""
        return np.tensordot(self.terms[k], self.point.metric, axes=([-1], [0]))

    # -- serialization --------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "kind": "curvature_jet",
            "mode": self.mode,
            "index_convention": INDEX_CONVENTION,
            **self.point.to_dict(),
            "order": self.order,
            "terms": [t.tolist() for t in self.terms],
            "torsion_terms": [t.tolist() for t in self.torsion_terms],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CurvatureJet":
        point = KahlerPoint.from_dict(d)
        terms = [np.asarray(t, dtype=float) for t in d["terms"]]
        tors = [np.asarray(t, dtype=float) for t in d.get("torsion_terms", [])]
        jet = cls(point, terms, tors, d.get("mode"))
        if "order" in d and int(d["order"]) != jet.order:
            raise ValueError("declared order disagrees with the number of terms")
        return jet

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "CurvatureJet":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# validation


def _cyclic_abc(t: np.ndarray, k: int) -> np.ndarray:
    """Cyclic sum over the A, B, C slots."""
    ax = list(range(t.ndim))
    a, b, c = k, k + 1, k + 2
    p1 = ax.copy()
    p1[a], p1[b], p1[c] = b, c, a
    p2 = ax.copy()
    p2[a], p2[b], p2[c] = c, a, b
    return t + np.transpose(t, p1) + np.transpose(t, p2)


def _slot_I(t: np.ndarray, slot: int, cplx: np.ndarray) -> np.ndarray:
    """Replace the argument in ``slot`` by I of it."""
    return np.moveaxis(np.tensordot(t, cplx, axes=([slot], [0])), -1, slot)


def symmetry_residuals(jet: CurvatureJet) -> dict:
    """Max residual per symmetry class, relative to max(1, |term|)."""
    res = {"antisymmetry": 0.0, "bianchi1": 0.0, "pair": 0.0, "type11": 0.0, "commutes_I": 0.0, "bianchi2": 0.0}
    g = jet.point.metric
    cplx = jet.point.cplx
    for k, t in enumerate(jet.terms):
        scale = max(1.0, float(np.max(np.abs(t))))
        a, b, c = k, k + 1, k + 2
        swap = list(range(t.ndim))
        swap[a], swap[b] = b, a
        res["antisymmetry"] = max(res["antisymmetry"], np.max(np.abs(t + np.transpose(t, swap))) / scale)
        if jet.mode == "affine":
            continue
        if jet.mode == "kahler" or jet.mode == "balanced":
            pass
        comm = np.tensordot(t, cplx, axes=([-1], [1])) - _slot_I(t, c, cplx)
        res["commutes_I"] = max(res["commutes_I"], np.max(np.abs(comm)) / scale)
        t11 = _slot_I(_slot_I(t, a, cplx), b, cplx) - t
        res["type11"] = max(res["type11"], np.max(np.abs(t11)) / scale)
        res["bianchi1"] = max(res["bianchi1"], np.max(np.abs(_cyclic_abc(t, k))) / scale)
        if jet.mode == "kahler":
            low = np.tensordot(t, g, axes=([-1], [0]))
            perm = list(range(k)) + [k + 2, k + 3, k, k + 1]
            res["pair"] = max(res["pair"], np.max(np.abs(low - np.transpose(low, perm))) / scale)
    if len(jet.terms) > 1 and jet.mode != "affine":
        t = jet.terms[1]
        scale = max(1.0, float(np.max(np.abs(t))))
        # cyclic over (V, A, B) = axes 0, 1, 2
        ax = list(range(t.ndim))
        p1 = ax.copy()
        p1[0], p1[1], p1[2] = 1, 2, 0
        p2 = ax.copy()
        p2[0], p2[1], p2[2] = 2, 0, 1
        cyc = t + np.transpose(t, p1) + np.transpose(t, p2)
        res["bianchi2"] = float(np.max(np.abs(cyc)) / scale)
    for tt in jet.torsion_terms:
        k = tt.ndim - 3
        swap = list(range(tt.ndim))
        swap[k], swap[k + 1] = k + 1, k
        scale = max(1.0, float(np.max(np.abs(tt))))
        res["antisymmetry"] = max(res["antisymmetry"], np.max(np.abs(tt + np.transpose(tt, swap))) / scale)
    return {key: float(v) for key, v in res.items()}


def validate(jet: CurvatureJet, tol: float = 1e-10) -> dict:
    """Symmetry residual report; ``passed`` iff every residual is below tol."""
    res = symmetry_residuals(jet)
    return {"residuals": res, "tol": tol, "passed": all(v < tol for v in res.values())}


# ---------------------------------------------------------------------------
# generating series


def curvature_series(jet: CurvatureJet, trunc: int | None = None) -> Series:
    """Endo series R(X) Y = sum_k (1/k!) (nabla^k_{X..X} R)_{X,Y} X.

    Derivatives beyond the stored order are taken to vanish.
    """
    dim = jet.dim
    trunc = jet.order + 2 if trunc is None else trunc
    polys = [None] * (trunc + 1)
    for k, t in enumerate(jet.terms):
        if k + 2 > trunc:
            break
        # slots (v.., a, c) and endo value [o, b]
        raw = np.moveaxis(t, k + 1, -1)  # (v.., a, c, o, b)
        polys[k + 2] = poly_from_raw(raw, dim, k + 2) / math.factorial(k)
    return Series(dim, "endo", trunc, polys)


def torsion_series(jet: CurvatureJet, trunc: int | None = None) -> Series:
    """Endo series T(X) Y = sum_k (1/k!) (nabla^k_{X..X} T)(X, Y)."""
    dim = jet.dim
    trunc = jet.order + 2 if trunc is None else trunc
    polys = [None] * (trunc + 1)
    for k, t in enumerate(jet.torsion_terms):
        if k + 1 > trunc:
            break
        raw = np.moveaxis(t, k + 1, -1)  # (v.., a, o, b)
        polys[k + 1] = poly_from_raw(raw, dim, k + 1) / math.factorial(k)
    return Series(dim, "endo", trunc, polys)


# ---------------------------------------------------------------------------
# holomorphic sectional curvature


class SectionalData:
    """Higher holomorphic sectional curvatures S_k, k >= 4, of a jet."""

    def __init__(self, point: KahlerPoint, S: dict):
        self.point = point
        self.S = S

    def bigraded(self, kappa: int, kappabar: int) -> SymTensor:
        k = kappa + kappabar
        return graded_ops.bigrade_project(self.S[k], self.point, kappa, kappabar)

    def total(self, trunc: int) -> Series:
        dim = self.point.dim
        polys = [None] * (trunc + 1)
        for k, s in self.S.items():
            if k <= trunc:
                polys[k] = s.poly
        return Series(dim, "scalar", trunc, polys)


def sectional_poly(jet: CurvatureJet, k: int) -> np.ndarray:
    """Polynomial coefficients of S_k(X) = g((nabla^{k-4} R)_{X,IX} IX, X)/(k-4)!."""
    if k - 4 > jet.order:
        raise ValueError(f"jet order {jet.order} too small for S_{k}")
    cplx = jet.point.cplx
    low = jet.lowered(k - 4)  # (v.., a, b, c, d)
    j = k - 4
    raw = _slot_I(_slot_I(low, j + 1, cplx), j + 2, cplx)
    return poly_from_raw(raw, jet.dim, k) / math.factorial(j)


def sectional_from_jet(jet: CurvatureJet, kmax: int | None = None) -> SectionalData:
    if not jet.point.is_kahler:
        raise ValueError("sectional curvature needs a complex structure")
    kmax = jet.order + 4 if kmax is None else kmax
    S = {}
    for k in range(4, kmax + 1):
        S[k] = SymTensor.from_poly(jet.dim, k, "scalar", sectional_poly(jet, k))
    return SectionalData(jet.point, S)


def s4_from_definition(jet: CurvatureJet) -> np.ndarray:
    """Full S(X,Y,U,V) = 8(g(R_{X,IY}IU,V) + g(R_{X,IU}IV,Y) + g(R_{X,IV}IY,U))."""
    cplx = jet.point.cplx
    low = jet.lowered(0)  # [x, y, u, v] = g(R_{x,y}u, v)
    t = _slot_I(_slot_I(low, 1, cplx), 2, cplx)  # g(R_{x, I y} I u, v)
    # terms with argument order (X, Y, U, V)
    term1 = t
    term2 = np.transpose(t, (0, 3, 1, 2))  # g(R_{X,IU}IV, Y): t[x, u, v, y]
    term3 = np.transpose(t, (0, 2, 3, 1))  # g(R_{X,IV}IY, U): t[x, v, y, u]
    return 8.0 * (term1 + term2 + term3)


def reconstruct_R(S4: SymTensor, point: KahlerPoint, tol: float = 1e-10) -> np.ndarray:
    """Curvature tensor [a, b, c, o] from the holomorphic sectional curvature tensor."""
    cplx = point.cplx
    dI = graded_ops.der_I(S4, point)
    if np.max(np.abs(dI.coeffs), initial=0.0) > tol * max(1.0, float(np.max(np.abs(S4.coeffs), initial=0.0))):
        raise ValueError("Der_I S4 does not vanish")
    S = S4.to_raw()
    a = _slot_I(_slot_I(S, 1, cplx), 2, cplx)  # S(X, IY, IU, V)
    b = _slot_I(_slot_I(S, 1, cplx), 3, cplx)  # S(X, IY, U, IV)
    low = (a - b) / 32.0
    return np.tensordot(low, np.linalg.inv(point.metric), axes=([3], [1]))


def reconstruct_gradR(S5: SymTensor, point: KahlerPoint) -> np.ndarray:
    """(nabla R) tensor [x, y, z, u, o] from S_5."""
    cplx = point.cplx
    S = S5.to_raw()  # slots (X, Y, Z, U, V)
    t1 = _slot_I(_slot_I(S, 2, cplx), 3, cplx)  # S(X, Y, IZ, IU, V)
    t2 = _slot_I(_slot_I(S, 2, cplx), 4, cplx)  # S(X, Y, IZ, U, IV)
    t3 = _slot_I(_slot_I(S, 1, cplx), 4, cplx)  # S(X, IY, Z, U, IV)
    t4 = _slot_I(_slot_I(S, 1, cplx), 3, cplx)  # S(X, IY, Z, IU, V)
    low = (t1 - t2 + t3 - t4) / 192.0
    return np.tensordot(low, np.linalg.inv(point.metric), axes=([4], [1]))


# ---------------------------------------------------------------------------
# Jacobi operators and the commutator identity


def jacobi_matrix(jet: CurvatureJet, X) -> np.ndarray:
    """Matrix of A -> R_{X,A} X."""
    X = np.asarray(X, dtype=float)
    return np.einsum("abco,a,c->ob", jet.R, X, X)


def curvature_action(jet: CurvatureJet, U, V) -> np.ndarray:
    """(R_{U,V} . R) as a full [a, b, c, o] tensor (R acting as a derivation)."""
    R = jet.R
    E = np.einsum("abco,a,b->oc", R, U, V)  # endomorphism R_{U,V}
    out = np.einsum("oq,abcq->abco", E, R)
    out -= np.einsum("qa,qbco->abco", E, R)
    out -= np.einsum("qb,aqco->abco", E, R)
    out -= np.einsum("abqo,qc->abco", R, E)
    return out


def second_derivative(jet: CurvatureJet, U, V) -> np.ndarray:
    """Full (nabla^2_{U,V} R) tensor [a, b, c, o].

    The jet stores the symmetric part; the antisymmetric part follows from
    the Ricci identity nabla^2_{U,V} - nabla^2_{V,U} = R_{U,V} . R.
    """
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    if jet.order >= 2:
        sym = np.einsum("uvabco,u,v->abco", jet.terms[2], U, V)
    else:
        sym = np.zeros((jet.dim,) * 4)
    return sym + 0.5 * curvature_action(jet, U, V)


def fcc_residual(jet: CurvatureJet, X, A) -> np.ndarray:
    """3 [R_{X,.}X, R_{IX,.}IX] A minus the four second-derivative terms."""
    X = np.asarray(X, dtype=float)
    A = np.asarray(A, dtype=float)
    cplx = jet.point.cplx
    IX = cplx @ X
    jx, jix = jacobi_matrix(jet, X), jacobi_matrix(jet, IX)
    lhs = 3.0 * (jx @ jix - jix @ jx) @ A

    def anti(U, V):
        return second_derivative(jet, U, V) - second_derivative(jet, V, U)

    def app(T, P, Q, W):
        return np.einsum("abco,a,b,c->o", T, P, Q, W)

    rhs = 0.5 * app(anti(X, IX), X, IX, A)
    rhs = rhs + app(anti(X, IX), A, X, IX)
    rhs = rhs + app(anti(A, X), X, IX, IX)
    rhs = rhs + app(anti(A, IX), X, IX, X)
    return lhs - rhs


def scc_residual(jet: CurvatureJet, X) -> float:
    """(nabla^2_{X,IX} - nabla^2_{IX,X})R restricted to (X, IX) plus 2 R_{R_{X,IX}X, IX}, as endomorphisms."""
    X = np.asarray(X, dtype=float)
    IX = jet.point.cplx @ X
    anti = second_derivative(jet, X, IX) - second_derivative(jet, IX, X)
    lhs = np.einsum("abco,a,b->oc", anti, X, IX)
    w = jet.Rv(X, IX, X)
    rhs = -2.0 * np.einsum("abco,a,b->oc", jet.R, w, IX)
    return float(np.max(np.abs(lhs - rhs)))


# ---------------------------------------------------------------------------
# synthetic jets


def holomorphic_frame(point: KahlerPoint) -> np.ndarray:
    """Complex n x 2n matrix Z whose rows are (1,0)-forms: Z I = i Z, unitary for g."""
    cplx = point.cplx
    dim = point.dim
    w, v = np.linalg.eig(cplx.T)
    rows = v[:, np.abs(w - 1j) < 1e-8].T
    # orthonormalize rows for the hermitian form induced by g^{-1}
    ginv = np.linalg.inv(point.metric)
    gram = rows.conj() @ ginv @ rows.T
    L = np.linalg.cholesky(gram)
    rows = np.linalg.solve(L.conj(), rows) * math.sqrt(2.0)
    if rows.shape[0] != dim // 2:
        raise ValueError("could not find a holomorphic frame")
    return rows


def _random_hermitian_sym(rng, n, p, q):
    """Complex tensor symmetric in p holomorphic and q antiholomorphic slots."""
    shape = (n,) * (p + q)
    W = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    W = _sym_slots(W, p) if p > 1 else W
    if q > 1:
        W = np.moveaxis(_sym_slots(np.moveaxis(W, list(range(p, p + q)), list(range(q))), q), list(range(q)), list(range(p, p + q)))
    return W


def _conj_swap(W, p, q):
    """conj(W) with the holomorphic and antiholomorphic slot groups exchanged."""
    return np.conj(np.transpose(W, list(range(p, p + q)) + list(range(p))))


def synthetic_jet(point: KahlerPoint, order: int = 3, rng=None, scale=None) -> CurvatureJet:
    """Random Kaehler jet built from complex tensors W^(p,q).

    W^(p,q) is symmetric in p+2 holomorphic and q+2 antiholomorphic slots and
    W^(q,p) is its conjugate; the real tensor
    R(V; A, B, C, D) = sum over splits of the derivative slots of
    W(V_h, A, C; V_a, B, D) - W(V_h, B, C; V_a, A, D) - W(V_h, A, D; V_a, B, C) + W(V_h, B, D; V_a, A, C)
    then satisfies antisymmetry, both Bianchi identities (first order),
    pair symmetry, (1,1)-type and symmetry of the derivative slots exactly.
    """
    rng = np.random.default_rng() if rng is None else rng
    n = point.dim // 2
    Z = holomorphic_frame(point)
    Zb = np.conj(Z)
    scale = [1.0] * (order + 1) if scale is None else scale
    terms = []
    for k in range(order + 1):
        Ws = {}
        for p in range(k + 1):
            q = k - p
            if p < q:
                continue
            W = _random_hermitian_sym(rng, n, p + 2, q + 2)
            if p == q:
                W = 0.5 * (W + _conj_swap(W, p + 2, q + 2))
            Ws[(p, q)] = W
            if p != q:
                Ws[(q, p)] = _conj_swap(W, p + 2, q + 2)
        total = np.zeros((point.dim,) * (k + 4), dtype=complex)
        for (p, q), W in Ws.items():
            # contract holomorphic slots with Z and antiholomorphic slots with conj(Z)
            U = W
            for _ in range(p + 2):
                U = np.tensordot(U, Z, axes=([0], [0]))
            for _ in range(q + 2):
                U = np.tensordot(U, Zb, axes=([0], [0]))
            # U axes: rolled so that real slots appear in order h1..h_{p+2}, a1..a_{q+2}
            for S in itertools.combinations(range(k), p):
                Sc = [i for i in range(k) if i not in S]
                # holo positions: S (derivs), then two of A,B,C,D; anti: Sc, then the other two
                for (h1, h2, a1, a2), sign in (((0, 2, 1, 3), 1), ((1, 2, 0, 3), -1), ((0, 3, 1, 2), -1), ((1, 3, 0, 2), 1)):
                    target = list(S) + [k + h1, k + h2] + Sc + [k + a1, k + a2]
                    perm = np.argsort(target)
                    total += sign * np.transpose(U, perm)
        real = total.real * (scale[k] / math.sqrt(max(1, math.comb(k, k // 2))))
        low_to_vec = np.tensordot(real, np.linalg.inv(point.metric), axes=([-1], [1]))
        terms.append(low_to_vec)
    return CurvatureJet(point, terms)


# -- projection-based generator for small dimensions


def _constraint_ops(point: KahlerPoint, k: int):
    cplx, g = point.cplx, point.metric
    dim = point.dim

    def ops(t):
        a, b, c = k, k + 1, k + 2
        swap = list(range(t.ndim))
        swap[a], swap[b] = b, a
        out = [t + np.transpose(t, swap), _cyclic_abc(t, k)]
        out.append(_slot_I(_slot_I(t, a, cplx), b, cplx) - t)
        out.append(np.tensordot(t, cplx, axes=([-1], [1])) - _slot_I(t, c, cplx))
        low = np.tensordot(t, g, axes=([-1], [0]))
        perm = list(range(k)) + [k + 2, k + 3, k, k + 1]
        out.append(low - np.transpose(low, perm))
        for i in range(k):
            for j in range(i + 1, k):
                sw = list(range(t.ndim))
                sw[i], sw[j] = j, i
                out.append(t - np.transpose(t, sw))
        if k == 1:
            ax = list(range(t.ndim))
            p1 = ax.copy()
            p1[0], p1[1], p1[2] = 1, 2, 0
            p2 = ax.copy()
            p2[0], p2[1], p2[2] = 2, 0, 1
            out.append(t + np.transpose(t, p1) + np.transpose(t, p2))
        return np.concatenate([o.ravel() for o in out])

    return ops


_NULL_CACHE: dict = {}


def symmetry_subspace(point: KahlerPoint, k: int) -> np.ndarray:
    """Orthonormal basis of nabla^k R tensors obeying the linear symmetry constraints."""
    dim = point.dim
    key = (graded_ops._key(point.cplx), graded_ops._key(point.metric), k)
    if key in _NULL_CACHE:
        return _NULL_CACHE[key]
    size = dim ** (k + 4)
    if size > 5000:
        raise ValueError("constraint projection is limited to small dimensions")
    ops = _constraint_ops(point, k)
    cols = []
    for j in range(size):
        e = np.zeros(size)
        e[j] = 1.0
        cols.append(ops(e.reshape((dim,) * (k + 4))))
    M = np.array(cols)
    w, v = np.linalg.eigh(M @ M.T)
    ns = v[:, w < 1e-10 * max(1.0, w[-1])]
    _NULL_CACHE[key] = ns
    return ns


def project_to_symmetries(raw: np.ndarray, point: KahlerPoint, k: int) -> np.ndarray:
    """Orthogonal projection of a full tensor onto the constraint subspace."""
    ns = symmetry_subspace(point, k)
    flat = np.asarray(raw, dtype=float).ravel()
    return (ns @ (ns.T @ flat)).reshape(raw.shape)


def projected_jet(point: KahlerPoint, order: int = 1, rng=None) -> CurvatureJet:
    """Random jet by projecting Gaussian tensors onto the symmetry constraints."""
    rng = np.random.default_rng() if rng is None else rng
    terms = []
    for k in range(order + 1):
        raw = rng.standard_normal((point.dim,) * (k + 4))
        terms.append(project_to_symmetries(raw, point, k))
    return CurvatureJet(point, terms)
