"""First-principles verification of the invariant tensor formulas.

Everything downstream of the flow rests on closed-form expressions for the
connection operator, torsion, curvature, the second Ricci trace, the torsion
quadratic, and their combination driving the flow.  This module rebuilds all
of those objects from nothing but raw matrix brackets on an explicit
realization of a two-factor torus-fibered model (two Grassmannian blocks
sharing a two-torus fiber) and reports the residual of every closed-form
claim:

* the connection operator is defined on mixed-type arguments by projected
  brackets and extended to holomorphic arguments by metric compatibility;
* torsion and curvature follow from the standard homogeneous-space formulas;
* the Ricci trace and torsion quadratic are frame sums over a unitary frame.

The residuals should all vanish to machine precision for any positive
metric; they are the package's deepest self-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cspace import (
    CSpaceModel,
    ComplexStructureInput,
    FactorSpec,
    FiberSpec,
    InvariantMetric,
    build_cspace,
    fiber_coeffs_from_complex_structure,
)
from .errors import ShapeMismatch
from .flow import gamma_system
from .roots import ResidualReport, RootRealization, grassmannian_realization

Element = tuple[np.ndarray, ...]    # one matrix per simple factor


@dataclass(frozen=True)
class CERealization:
    """Two commuting Grassmannian blocks with an explicit torus fiber.

    The blocks are represented as per-factor matrices, so they commute
    structurally; the fiber is the real span of the two central elements,
    with an arbitrary complex structure ``cs_input.IF`` on it, and ``fiber``
    holds the coefficient vectors derived from that structure.  ``model`` is
    the corresponding validated model (initial base coefficients default
    to one; metrics are supplied separately to the verifier).
    """

    blocks: tuple[RootRealization, RootRealization]
    cs_input: ComplexStructureInput
    fiber: FiberSpec
    model: CSpaceModel


def calabi_eckmann_realization(pq1: tuple[int, int] = (1, 2),
                               pq2: tuple[int, int] = (1, 2),
                               IF=None) -> CERealization:
    """Build the realization for two Grassmannian factors.

    The default arguments give the smallest honest example: two projective
    planes with the standard fiber complex structure rotating the two central
    directions into each other.
    """
    blocks = (grassmannian_realization(*pq1), grassmannian_realization(*pq2))
    if IF is None:
        IF = np.array([[0.0, -1.0], [1.0, 0.0]])
    cs = ComplexStructureInput(Zf_coords=(np.array([1.0, 0.0]),
                                          np.array([0.0, 1.0])),
                               IF=np.asarray(IF, dtype=float))
    factors = (FactorSpec.grassmannian(*pq1), FactorSpec.grassmannian(*pq2))
    fiber = fiber_coeffs_from_complex_structure(cs, factors)
    model = build_cspace(factors, fiber, ce_blocks=((0, 1),))
    return CERealization(blocks=blocks, cs_input=cs, fiber=fiber, model=model)


class _TensorCalculator:
    """Workspace carrying the bases, projections, metric, and operators."""

    def __init__(self, ce: CERealization, metric: InvariantMetric):
        self.blocks = ce.blocks
        self.IF = np.asarray(ce.cs_input.IF, dtype=float)
        self.h = tuple(float(x) for x in metric.h_base)
        self.H = np.asarray(metric.H_fiber, dtype=complex)
        self.k = ce.fiber.k
        self.Ns = tuple(b.N for b in self.blocks)
        self._sizes = tuple(N * N for N in self.Ns)

        # -- full-algebra basis: semisimple isotropy | fiber | base roots ----
        self.Z_els = tuple(self._emb(i, b.Z) for i, b in enumerate(self.blocks))
        self.Zsum = self._add(*self.Z_els)
        l_els, f_els, n_els = [], list(self.Z_els), []
        self._n_meta = []       # (factor, root) per n-basis column
        for i, blk in enumerate(self.blocks):
            l_els += [self._emb(i, m) for m in blk.s_part_basis()]
            for root in blk.roots_plus_n:
                n_els.append(self._emb(i, blk.E[root]))
                self._n_meta.append((i, root))
                n_els.append(self._emb(i, blk.E[(root[1], root[0])]))
                self._n_meta.append((i, (root[1], root[0])))
        self._g_els = l_els + f_els + n_els
        nl, nf, nn = len(l_els), len(f_els), len(n_els)
        self._l_slice = slice(0, nl)
        self._f_slice = slice(nl, nl + nf)
        self._n_slice = slice(nl + nf, nl + nf + nn)
        self._Bg = np.column_stack([self._flat(e) for e in self._g_els])
        self._Bg_pinv = np.linalg.pinv(self._Bg)

        # -- holomorphic frame of the fiber (fixed convention) ---------------
        twok = 2 * self.k
        X = np.eye(twok)[:, :self.k]
        self._Vcoords = 0.5 * (X - 1j * (self.IF @ X))    # (2k, k), in Z-coords
        self._VVbar = np.hstack([self._Vcoords, self._Vcoords.conj()])
        self.V_els = tuple(self._from_f_coords(self._Vcoords[:, a])
                           for a in range(self.k))

        # -- basis of the complexified tangent space: (1,0) part then its
        #    conjugate ---------------------------------------------------------
        self.P_els: list[Element] = []
        self.P_labels: list[tuple] = []
        for i, blk in enumerate(self.blocks):
            for root in blk.roots_plus_n:
                self.P_els.append(self._emb(i, blk.E[root]))
                self.P_labels.append(("root", i, root))
        for a in range(self.k):
            self.P_els.append(self.V_els[a])
            self.P_labels.append(("fiber", a))
        self.d2 = len(self.P_els)
        self.m_els = self.P_els + [self.sigma(x) for x in self.P_els]
        self.d = 2 * self.d2
        self._Mb = np.column_stack([self._flat(e) for e in self.m_els])
        self._Mb_pinv = np.linalg.pinv(self._Mb)
        self._swap = np.r_[np.arange(self.d2, self.d), np.arange(0, self.d2)]

        self._m_coef_cache = [self.mcoords(e) for e in self.m_els]
        self.Bmat = np.empty((self.d, self.d), dtype=complex)
        for a in range(self.d):
            for b in range(a, self.d):
                val = self._B_elems(self.m_els[a], self.m_els[b])
                self.Bmat[a, b] = val
                self.Bmat[b, a] = val
        self._lam_ops = self._build_connection_ops()

    # -- element arithmetic ---------------------------------------------------

    def _emb(self, i: int, M: np.ndarray) -> Element:
        out = [np.zeros((N, N), dtype=complex) for N in self.Ns]
        out[i] = np.asarray(M, dtype=complex)
        return tuple(out)

    @staticmethod
    def _add(*els: Element) -> Element:
        return tuple(sum(parts) for parts in zip(*els))

    @staticmethod
    def _scale(c: complex, el: Element) -> Element:
        return tuple(c * part for part in el)

    @staticmethod
    def bracket(X: Element, Y: Element) -> Element:
        return tuple(x @ y - y @ x for x, y in zip(X, Y))

    @staticmethod
    def sigma(X: Element) -> Element:
        """Conjugation with respect to the compact real form."""
        return tuple(-part.conj().T for part in X)

    def _flat(self, X: Element) -> np.ndarray:
        return np.concatenate([part.ravel() for part in X])

    def _unflat(self, v: np.ndarray) -> Element:
        parts, pos = [], 0
        for N, size in zip(self.Ns, self._sizes):
            parts.append(v[pos:pos + size].reshape(N, N))
            pos += size
        return tuple(parts)

    @staticmethod
    def flat_max(X: Element) -> float:
        return max(float(np.max(np.abs(part))) for part in X)

    # -- decomposition and projections ---------------------------------------

    def decompose(self, X: Element) -> np.ndarray:
        return self._Bg_pinv @ self._flat(X)

    def _part(self, coef: np.ndarray, sl: slice) -> Element:
        masked = np.zeros_like(coef)
        masked[sl] = coef[sl]
        return self._unflat(self._Bg @ masked)

    def proj_m(self, X: Element) -> Element:
        coef = self.decompose(X)
        masked = np.zeros_like(coef)
        masked[self._f_slice] = coef[self._f_slice]
        masked[self._n_slice] = coef[self._n_slice]
        return self._unflat(self._Bg @ masked)

    def proj_l(self, X: Element) -> Element:
        return self._part(self.decompose(X), self._l_slice)

    def f_coords(self, X: Element) -> np.ndarray:
        """Fiber component in the central-direction coordinates."""
        return self.decompose(X)[self._f_slice]

    def _from_f_coords(self, z: np.ndarray) -> Element:
        return self._add(*(self._scale(z[j], self.Z_els[j]) for j in range(2 * self.k)))

    def _n_factor_matrix(self, coef: np.ndarray, factor: int) -> np.ndarray:
        """Base component of one factor, as a matrix in that factor."""
        out = np.zeros((self.Ns[factor], self.Ns[factor]), dtype=complex)
        base = self._n_slice.start
        for pos, (i, root) in enumerate(self._n_meta):
            if i == factor:
                out += coef[base + pos] * np.asarray(self.blocks[i].E[root])
        return out

    # -- complex structure on the tangent space ------------------------------

    def Jop(self, X: Element) -> Element:
        """The invariant complex structure: the fiber structure on the fiber
        component, the bracket with the central elements on the base part."""
        coef = self.decompose(X)
        newf = self._from_f_coords(self.IF.astype(complex) @ coef[self._f_slice])
        Xn = self._part(coef, self._n_slice)
        return self._add(newf, self.bracket(self.Zsum, Xn))

    def p01(self, X: Element) -> Element:
        return self._scale(0.5, self._add(X, self._scale(1j, self.Jop(X))))

    def p10(self, X: Element) -> Element:
        return self._scale(0.5, self._add(X, self._scale(-1j, self.Jop(X))))

    # -- metric ----------------------------------------------------------------

    def _B_elems(self, X: Element, Y: Element) -> complex:
        """Complex-bilinear extension of the invariant metric to the
        complexified tangent space."""
        cx, cy = self.decompose(X), self.decompose(Y)
        ax, bx = np.split(np.linalg.solve(self._VVbar, cx[self._f_slice]), 2)
        ay, by = np.split(np.linalg.solve(self._VVbar, cy[self._f_slice]), 2)
        val = ax @ self.H @ by + ay @ self.H @ bx
        for i, blk in enumerate(self.blocks):
            Xi = self._n_factor_matrix(cx, i)
            Yi = self._n_factor_matrix(cy, i)
            val += -self.h[i] * blk.kappa_scale * np.trace(Xi @ Yi)
        return complex(val)

    # -- tangent-space coordinates and operators ------------------------------

    def mcoords(self, X: Element) -> np.ndarray:
        return self._Mb_pinv @ self._flat(X)

    def melem(self, coef: np.ndarray) -> Element:
        return self._unflat(self._Mb @ coef)

    def conj_coords(self, coef: np.ndarray) -> np.ndarray:
        """Coordinates of the conjugate element (conjugate and swap halves)."""
        return np.conj(coef[self._swap])

    def _conj_operator(self, L: np.ndarray) -> np.ndarray:
        return np.conj(L[np.ix_(self._swap, self._swap)])

    def _build_connection_ops(self) -> list[np.ndarray]:
        """Connection operator of every tangent basis vector, as a matrix.

        On antiholomorphic arguments the operator of a holomorphic basis
        vector is the type-(0,1) part of the projected bracket; on
        holomorphic arguments it is recovered from metric compatibility
        against the antiholomorphic basis.  Operators of conjugate basis
        vectors follow by conjugation.
        """
        d, d2 = self.d, self.d2
        gram = self.Bmat[:d2, d2:]          # pairing of (1,0) with (0,1) basis
        ops: list[np.ndarray] = []
        for x in range(d2):
            A = self.P_els[x]
            L = np.zeros((d, d), dtype=complex)
            for z in range(d2):
                img = self.p01(self.proj_m(self.bracket(A, self.m_els[d2 + z])))
                L[:, d2 + z] = self.mcoords(img)
            pairing = self.Bmat @ L[:, d2:]             # B(e_y, Lambda(A) zbar)
            for y in range(d2):
                rhs = -pairing[y, :]
                L[:d2, y] = np.linalg.solve(gram.T, rhs)
            ops.append(L)
        ops += [self._conj_operator(L) for L in ops[:d2]]
        return ops

    def lam_of_coef(self, coef: np.ndarray) -> np.ndarray:
        out = np.zeros((self.d, self.d), dtype=complex)
        for c, op in zip(coef, self._lam_ops):
            if c != 0:
                out += c * op
        return out

    def lam_of(self, X: Element) -> np.ndarray:
        return self.lam_of_coef(self.mcoords(X))

    def ad_m_op(self, W: Element) -> np.ndarray:
        cols = [self.mcoords(self.proj_m(self.bracket(W, e))) for e in self.m_els]
        return np.column_stack(cols)

    def torsion_coords(self, X: Element, Y: Element) -> np.ndarray:
        tx = self.lam_of(X) @ self.mcoords(Y) - self.lam_of(Y) @ self.mcoords(X)
        return tx - self.mcoords(self.proj_m(self.bracket(X, Y)))

    def curvature_op(self, X: Element, Y: Element) -> np.ndarray:
        lx, ly = self.lam_of(X), self.lam_of(Y)
        br = self.bracket(X, Y)
        return (lx @ ly - ly @ lx
                - self.lam_of_coef(self.mcoords(self.proj_m(br)))
                - self.ad_m_op(self.proj_l(br)))

    # -- unitary frame ---------------------------------------------------------

    def unitary_frame_coords(self) -> np.ndarray:
        """Columns: coordinates (in the (1,0) basis) of a frame in which the
        Hermitian pairing is the identity."""
        W = np.zeros((self.d2, self.d2), dtype=complex)
        pos = 0
        for i, blk in enumerate(self.blocks):
            nroots = len(blk.roots_plus_n)
            for _ in range(nroots):
                W[pos, pos] = 1.0 / np.sqrt(self.h[i])
                pos += 1
        L = np.linalg.cholesky(self.H)
        W[pos:, pos:] = np.linalg.inv(L).T
        return W


def verify_chern_tensors(ce: CERealization, metric: InvariantMetric) -> ResidualReport:
    """Check every closed-form tensor claim against the bracket-built objects.

    Residual groups (all bounded by machine noise when the formulas hold):

    * sanity of the construction: type decomposition, metric compatibility of
      the connection, vanishing mixed-type torsion, and the expansion of the
      fiber components of the coroots in terms of the coefficient vectors;
    * the connection-operator values on all argument combinations;
    * the torsion values;
    * the curvature values;
    * the Ricci-trace and torsion-quadratic values on base roots and fiber;
    * the combined flow tensor: constant -1/2 on normalized base roots,
      the negated metric-sandwiched coupling on the fiber, zero mixing.
    """
    if metric.s != 2 or metric.k != ce.fiber.k:
        raise ShapeMismatch(
            f"metric has (s, k) = ({metric.s}, {metric.k}), realization needs "
            f"(2, {ce.fiber.k})")
    calc = _TensorCalculator(ce, metric)
    d2, k = calc.d2, calc.k
    nroots = d2 - k
    vals: dict[str, float] = {}

    # -- construction sanity ---------------------------------------------------
    type_res = 0.0
    for x, el in enumerate(calc.m_els):
        sign = 1j if x < d2 else -1j
        diff = calc._add(calc.Jop(el), calc._scale(-sign, el))
        type_res = max(type_res, calc.flat_max(diff))
    vals["type_decomposition"] = type_res

    compat = 0.0
    for op in calc._lam_ops:
        compat = max(compat, float(np.max(np.abs(op.T @ calc.Bmat + calc.Bmat @ op))))
    vals["metric_compatibility"] = compat

    root_meta = [(x, lab[1], lab[2]) for x, lab in enumerate(calc.P_labels)
                 if lab[0] == "root"]
    fiber_idx = [x for x, lab in enumerate(calc.P_labels) if lab[0] == "fiber"]

    def h_pair(Xel, Yel):
        return calc._B_elems(Xel, Yel)

    # fiber components of the coroots and their coefficient expansion
    coroot01: dict[int, dict] = {0: {}, 1: {}}
    expansion_res = 0.0
    for x, i, root in root_meta:
        H01 = calc.p01(calc.proj_m(calc._emb(i, calc.blocks[i].Hco[root])))
        coroot01[i][root] = H01
        cvec = ce.fiber.c[i]
        target = calc._add(*(calc._scale(cvec[a], calc.sigma(calc.V_els[a]))
                             for a in range(k)))
        expansion_res = max(expansion_res, calc.flat_max(
            calc._add(H01, calc._scale(-1.0, target))))
    vals["coroot_fiber_expansion"] = expansion_res

    # -- connection-operator values -------------------------------------------
    lam_a = lam_b = lam_c = 0.0
    for x, i, root in root_meta:
        op = calc._lam_ops[x]
        for y, j, rooty in root_meta:
            # holomorphic root arguments always annihilate
            lam_a = max(lam_a, float(np.max(np.abs(op[:, y]))))
            if i != j:
                # other factor, antiholomorphic: annihilate
                lam_a = max(lam_a, float(np.max(np.abs(op[:, d2 + y]))))
            else:
                target = np.zeros(calc.d, dtype=complex)
                if rooty == root:
                    target = -calc.mcoords(coroot01[i][root])
                lam_b = max(lam_b, float(np.max(np.abs(op[:, d2 + y] - target))))
        for a in range(k):
            # antiholomorphic fiber arguments annihilate
            lam_a = max(lam_a, float(np.max(np.abs(op[:, d2 + fiber_idx[a]]))))
            # holomorphic fiber argument maps into the root line
            coeff = h_pair(calc.V_els[a],
                           calc.proj_m(calc._emb(i, calc.blocks[i].Hco[root])))
            target = np.zeros(calc.d, dtype=complex)
            target[x] = coeff / calc.h[i]
            lam_c = max(lam_c, float(np.max(np.abs(op[:, fiber_idx[a]] - target))))
    vals["connection_on_roots"] = lam_a
    vals["connection_root_pairing"] = lam_b
    vals["connection_on_fiber"] = lam_c

    lam_d = 0.0
    for v in list(calc.V_els) + [calc.sigma(V) for V in calc.V_els]:
        op = calc.lam_of(v)
        for y, el in enumerate(calc.m_els):
            ad = calc.mcoords(calc.proj_m(calc.bracket(v, el)))
            lam_d = max(lam_d, float(np.max(np.abs(op[:, y] - ad))))
    vals["connection_equals_ad_on_fiber"] = lam_d

    # -- torsion ----------------------------------------------------------------
    tor_mixed = tor_roots = tor_fiber_root = tor_fiber = 0.0
    for x in range(d2):
        for y in range(d2):
            t = calc.torsion_coords(calc.P_els[x], calc.m_els[d2 + y])
            tor_mixed = max(tor_mixed, float(np.max(np.abs(t))))
    for x, i, root in root_meta:
        for y, j, rooty in root_meta:
            t = calc.torsion_coords(calc.P_els[x], calc.P_els[y])
            tor_roots = max(tor_roots, float(np.max(np.abs(t))))
        for a in range(k):
            t = calc.torsion_coords(calc.V_els[a], calc.P_els[x])
            coeff = h_pair(calc.V_els[a],
                           calc.proj_m(calc._emb(i, calc.blocks[i].Hco[root])))
            target = np.zeros(calc.d, dtype=complex)
            target[x] = -coeff / calc.h[i]
            tor_fiber_root = max(tor_fiber_root, float(np.max(np.abs(t - target))))
    for a in range(k):
        for b in range(k):
            t = calc.torsion_coords(calc.V_els[a], calc.V_els[b])
            tor_fiber = max(tor_fiber, float(np.max(np.abs(t))))
    vals["torsion_mixed_type"] = tor_mixed
    vals["torsion_on_roots"] = tor_roots
    vals["torsion_fiber_root"] = tor_fiber_root
    vals["torsion_on_fiber"] = tor_fiber

    # -- curvature ---------------------------------------------------------------
    curv_a = curv_b = curv_c = curv_d = 0.0
    for x, i, root in root_meta:
        R = calc.curvature_op(calc.P_els[x], calc.sigma(calc.P_els[x]))
        lam_x = calc._lam_ops[x]
        lam_xbar = calc._lam_ops[d2 + x]
        for y, j, rooty in root_meta:
            if j != i:
                curv_b = max(curv_b, float(np.max(np.abs(R[:, y]))))
                continue
            unit = np.zeros(calc.d, dtype=complex)
            unit[y] = 1.0
            target = lam_x @ (lam_xbar @ unit)
            target[y] += RootRealization.root_value(
                rooty, np.asarray(calc.blocks[i].Hco[root]))
            curv_a = max(curv_a, float(np.max(np.abs(R[:, y] - target))))
        for a in range(k):
            coeff = h_pair(calc.V_els[a],
                           calc.proj_m(calc._emb(i, calc.blocks[i].Hco[root])))
            target = (coeff / calc.h[i]) * calc.mcoords(calc.sigma(coroot01[i][root]))
            curv_c = max(curv_c, float(np.max(np.abs(R[:, fiber_idx[a]] - target))))
    fiber_cone = list(calc.V_els) + [calc.sigma(V) for V in calc.V_els]
    for v1 in fiber_cone:
        for v2 in fiber_cone:
            R = calc.curvature_op(v1, v2)
            curv_d = max(curv_d, float(np.max(np.abs(R))))
    vals["curvature_same_factor"] = curv_a
    vals["curvature_cross_factor"] = curv_b
    vals["curvature_on_fiber_argument"] = curv_c
    vals["curvature_fiber_pair"] = curv_d

    # -- Ricci trace, torsion quadratic, flow tensor ------------------------------
    W = calc.unitary_frame_coords()
    frame_els = [calc.melem(np.r_[W[:, A], np.zeros(d2)]) for A in range(d2)]

    S_P = np.zeros((d2, d2), dtype=complex)
    for A in range(d2):
        R_A = calc.curvature_op(frame_els[A], calc.sigma(frame_els[A]))
        S_P += (R_A.T @ calc.Bmat)[:d2, d2:]

    t_comp = np.zeros((d2, d2, d2), dtype=complex)      # [C, A, B]
    for A in range(d2):
        for Bx in range(d2):
            t = calc.torsion_coords(frame_els[A], frame_els[Bx])
            for C in range(d2):
                sig = calc.conj_coords(np.r_[W[:, C], np.zeros(d2)])
                t_comp[C, A, Bx] = t @ calc.Bmat @ sig
    Q_frame = -0.5 * np.einsum("cab,dab->cd", t_comp, t_comp.conj())
    Winv = np.linalg.inv(W)
    Q_P = Winv.T @ Q_frame @ Winv.conj()

    s_roots = q_roots = 0.0
    for x, i, root in root_meta:
        H01 = coroot01[i][root]
        norm01 = h_pair(calc.sigma(H01), H01)
        s_roots = max(s_roots, abs(S_P[x, x] - (-norm01 / calc.h[i] + 0.5)))
        q_roots = max(q_roots, abs(Q_P[x, x] - (-norm01 / calc.h[i])))
    vals["ricci_trace_on_roots"] = s_roots
    vals["torsion_quadratic_on_roots"] = q_roots

    fib = np.ix_(fiber_idx, fiber_idx)
    gs = gamma_system(ce.model)
    HGH = np.zeros((k, k), dtype=complex)
    for i in range(2):
        HGH += (calc.H @ gs.Gamma[i] @ calc.H) / calc.h[i] ** 2
    vals["ricci_trace_on_fiber"] = float(np.max(np.abs(S_P[fib] - HGH)))
    vals["torsion_quadratic_on_fiber"] = float(np.max(np.abs(Q_P[fib])))
    mixed = np.ix_(fiber_idx, range(nroots))
    mixed_t = np.ix_(range(nroots), fiber_idx)
    vals["torsion_quadratic_mixed"] = max(
        float(np.max(np.abs(Q_P[mixed]))), float(np.max(np.abs(Q_P[mixed_t]))))

    K_P = -S_P + Q_P
    root_block = K_P[:nroots, :nroots]
    vals["flow_tensor_on_roots"] = float(
        np.max(np.abs(root_block + 0.5 * np.eye(nroots))))
    vals["flow_tensor_on_fiber"] = float(np.max(np.abs(K_P[fib] + HGH)))
    vals["flow_tensor_mixed"] = max(
        float(np.max(np.abs(K_P[mixed]))), float(np.max(np.abs(K_P[mixed_t]))))
    return ResidualReport(values=vals)
