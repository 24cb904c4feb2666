"""Graded pieces of Jacobian rings R = k[x_0..x_n]/(dF/dx_0..dF/dx_n).

A graded piece R_p is presented as the cokernel of the ideal matrix whose
rows are the monomial multiples of the partials, expressed in the fixed
monomial basis of degree p.  Ranks over Z/p certify dimensions; a vanishing
piece one past the socle degree (n+1)(d-2) certifies that the partials are
a regular sequence, hence that the form is smooth and R is the complete
intersection quotient with the standard Hilbert series.
"""

from __future__ import annotations

import math

from .exactla import EchelonResult, FieldMatrix, SizeGuardExceeded, rref
from .polyring import (
    HomogeneousForm,
    Monomial,
    PrimeField,
    enumerate_monomials,
    monomial_count,
    monomial_index,
    partial_derivatives,
)

IDEAL_MATRIX_COLUMN_LIMIT = 2 * 10 ** 6


class CharacteristicError(Exception):
    """The modulus is too small for the degree: exponents up to d must be
    invertible, so p > d is required."""


class HilbertMismatch(Exception):
    """Smoothness was certified but a graded dimension disagrees with the
    complete-intersection series; indicates an internal arithmetic bug."""


def _comb0(m: int, k: int) -> int:
    return math.comb(m, k) if m >= k >= 0 else 0


def ci_hilbert_coefficients(n: int, d: int) -> list[int]:
    """Coefficients of ((1 - t^(d-1)) / (1 - t))^(n+1), degrees 0..(n+1)(d-2).

    This is the Hilbert function of the Jacobian ring of any smooth
    degree-d hypersurface in n+1 variables."""
    if n < 0 or d < 2:
        raise ValueError("need n >= 0 and d >= 2")
    top = (n + 1) * (d - 2)
    out = []
    for p in range(top + 1):
        s = 0
        for j in range(n + 2):
            term = _comb0(n + 1, j) * _comb0(n + p - j * (d - 1), n)
            s += term if j % 2 == 0 else -term
        out.append(s)
    return out


class JacobianRing:
    """Exact model of the Jacobian ring of one form at one prime."""

    def __init__(self, form: HomogeneousForm):
        if form.degree < 2:
            raise ValueError("Jacobian ring needs degree >= 2")
        if form.field.p <= form.degree:
            raise CharacteristicError(
                f"prime {form.field.p} must exceed the degree {form.degree}")
        self.form = form
        self.field = form.field
        self.n = form.n
        self.degree = form.degree
        self.socle = (self.n + 1) * (self.degree - 2)
        self.partials = partial_derivatives(form)
        self._dims: dict[int, int] = {}
        self._ech: dict[int, EchelonResult] = {}
        self._smooth: bool | None = None

    def ideal_matrix(self, p: int) -> FieldMatrix:
        """Rows span the degree-p piece of the partials' ideal; columns are
        the degree-p monomials.  Rebuilt on each call (rows are cheap, the
        expensive part is the echelon, which is what gets cached)."""
        cols = monomial_count(self.n, p)
        if cols > IDEAL_MATRIX_COLUMN_LIMIT:
            raise SizeGuardExceeded(
                f"degree-{p} piece has {cols} monomials, over the "
                f"{IDEAL_MATRIX_COLUMN_LIMIT} limit")
        idx = monomial_index(self.n, p)
        mult_deg = p - (self.degree - 1)
        rows: list[dict[int, int]] = []
        if mult_deg >= 0:
            for m in enumerate_monomials(self.n, mult_deg):
                for fi in self.partials:
                    rows.append({idx[tuple(a + b for a, b in zip(m, mm))]: c
                                 for mm, c in fi.terms.items()})
        return FieldMatrix(self.field.p, len(rows), cols, rows)

    def echelon(self, p: int) -> EchelonResult:
        if p not in self._ech:
            e = rref(self.ideal_matrix(p))
            self._ech[p] = e
            self._dims[p] = e.ncols - e.rank
        return self._ech[p]

    def graded_dim(self, p: int) -> int:
        """dim R_p; does not retain the echelon for degrees it computes."""
        if p < 0:
            return 0
        if p not in self._dims:
            if p in self._ech:
                e = self._ech[p]
            else:
                e = rref(self.ideal_matrix(p))
            self._dims[p] = e.ncols - e.rank
        return self._dims[p]

    def quotient_basis(self, p: int) -> tuple[Monomial, ...]:
        """Monomials at the non-pivot columns of the ideal matrix echelon;
        their classes are a basis of R_p."""
        if p < 0:
            return ()
        e = self.echelon(p)
        mons = enumerate_monomials(self.n, p)
        return tuple(mons[j] for j in e.free_columns())

    def set_dim(self, p: int, dim: int) -> None:
        """Install an externally cached dimension (trusted, e.g. from a
        previous run at the same prime)."""
        self._dims[p] = dim

    def known_dims(self) -> dict[int, int]:
        return dict(self._dims)

    def certify_smooth(self) -> bool:
        """True when the piece past the socle vanishes, which proves the
        partials form a regular sequence (smoothness) at this prime and,
        by rank semicontinuity, in characteristic zero for any lift."""
        if self._smooth is None:
            self._smooth = self.graded_dim(self.socle + 1) == 0
        return self._smooth

    def hilbert_function(self) -> tuple[int, ...]:
        """dim R_p for p = 0..socle+1.  For a certified-smooth ring this
        must coincide with the complete-intersection series; any deviation
        is raised as an internal error."""
        dims = tuple(self.graded_dim(p) for p in range(self.socle + 2))
        if self.certify_smooth():
            expected = tuple(ci_hilbert_coefficients(self.n, self.degree)) + (0,)
            if dims != expected:
                raise HilbertMismatch(
                    f"certified smooth but dims {dims} != series {expected}")
        return dims


def fermat_ring(n: int, d: int, field: PrimeField) -> JacobianRing:
    one = {tuple(d if j == i else 0 for j in range(n + 1)): 1 for i in range(n + 1)}
    return JacobianRing(HomogeneousForm.from_terms(n, d, one, field))
