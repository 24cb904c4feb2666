"""Multiplication maps between graded pieces and randomized max-rank
certificates.

Maximal rank of x h: R_{p-e} -> R_p is a Zariski-open condition on the
coefficients of h, so a single random sample that achieves it proves the
statement for general h; repeated failure only yields a quantified
ProbablyDeficient verdict, never a disproof.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .exactla import FieldMatrix, kernel_witness, rref
from .jacobian import JacobianRing
from .polyring import HomogeneousForm, enumerate_monomials, monomial_index, multiply, random_form

CERTIFIED_MAX_RANK = "CertifiedMaxRank"
PROBABLY_DEFICIENT = "ProbablyDeficient"
INDETERMINATE = "Indeterminate"  # reserved; no current code path produces it

DEFAULT_TRIALS = 3


class DegreeMismatch(Exception):
    pass


def trial_rng(seed: int, prime: int, e: int, p: int, trial: int) -> random.Random:
    """Independent stream per (seed, prime, multiplier degree, target degree,
    trial), so serial and parallel sweeps draw identical samples."""
    digest = hashlib.sha256(f"{seed}|{prime}|{e}|{p}|{trial}".encode()).digest()
    return random.Random(int.from_bytes(digest, "big"))


@dataclass
class GradedMap:
    """x h: R_{p-e} -> R_p written in the quotient-basis coordinates."""

    ring: JacobianRing
    h: HomogeneousForm
    source_degree: int
    target_degree: int
    matrix: FieldMatrix  # target_dim rows x source_dim columns
    rank: int

    @property
    def source_dim(self) -> int:
        return self.matrix.ncols

    @property
    def target_dim(self) -> int:
        return self.matrix.nrows

    @property
    def required_rank(self) -> int:
        return min(self.source_dim, self.target_dim)

    def is_injective(self) -> bool:
        return self.rank == self.source_dim

    def kernel_form(self) -> Optional[HomogeneousForm]:
        """Lift of a kernel vector to a degree-(p-e) form G with h*G = 0 in
        R_p, re-verified by an independent multiplication before return."""
        vec = kernel_witness(self.matrix)
        if vec is None:
            return None
        basis = self.ring.quotient_basis(self.source_degree)
        terms = {m: c for m, c in zip(basis, vec) if c}
        g = HomogeneousForm.from_terms(self.ring.n, self.source_degree, terms,
                                       self.ring.field)
        prod = multiply(self.h, g)
        idx = monomial_index(self.ring.n, self.target_degree)
        dense = [0] * len(idx)
        for m, c in prod.terms.items():
            dense[idx[m]] = c
        if any(self.ring.echelon(self.target_degree).reduce_vector(dense)):
            raise AssertionError("kernel form fails h*G = 0 re-verification")
        return g


def mult_map(ring: JacobianRing, h: HomogeneousForm, p: int) -> GradedMap:
    """The map x h into degree p; h must be homogeneous of degree >= 1."""
    e = h.degree
    a = p - e
    if e < 1 or a < 0:
        raise DegreeMismatch(f"need deg h >= 1 and target {p} >= deg h")
    if h.n != ring.n or h.field.p != ring.field.p:
        raise DegreeMismatch("multiplier lives in a different ring")
    source_basis = ring.quotient_basis(a)
    target_ech = ring.echelon(p)
    free = target_ech.free_columns()
    idx = monomial_index(ring.n, p)
    block = np.zeros((len(source_basis), len(idx)), dtype=np.int64)
    for i, m in enumerate(source_basis):
        for mm, c in h.terms.items():
            block[i, idx[tuple(x + y for x, y in zip(m, mm))]] += c
    block %= ring.field.p
    reduced = target_ech.reduce_block(block) if len(source_basis) else block
    cols = reduced[:, list(free)] if len(free) else np.zeros((len(source_basis), 0), dtype=np.int64)
    mat = FieldMatrix.from_dense(ring.field.p, cols.T.tolist(), ncols=len(source_basis))
    return GradedMap(ring, h, a, p, mat, rref(mat).rank)


@dataclass
class RankVerdict:
    outcome: str
    best_rank: int
    required_rank: int
    source_dim: int
    target_dim: int
    trials_used: int
    failure_bound: Fraction
    witness: Optional[HomogeneousForm] = None
    multiplier: Optional[HomogeneousForm] = None

    @property
    def certified(self) -> bool:
        return self.outcome == CERTIFIED_MAX_RANK

    def certifies_injectivity(self) -> bool:
        return self.certified and self.best_rank == self.source_dim


def certify_general_max_rank(ring: JacobianRing, e: int, p: int,
                             trials: int = DEFAULT_TRIALS,
                             rng_seed: int = 0) -> RankVerdict:
    """Sample h uniformly over all degree-e coefficient vectors; the first
    sample of maximal rank certifies the generic statement.  All-trials
    failure returns ProbablyDeficient with a verified kernel witness for the
    last h and the miss bound (required_rank / prime)^trials."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    prime = ring.field.p
    dim_a = ring.graded_dim(p - e)
    dim_b = ring.graded_dim(p)
    required = min(dim_a, dim_b)
    if required == 0:
        return RankVerdict(CERTIFIED_MAX_RANK, 0, 0, dim_a, dim_b,
                           trials_used=0, failure_bound=Fraction(0))
    best = -1
    gm = None
    for trial in range(trials):
        rng = trial_rng(rng_seed, prime, e, p, trial)
        h = random_form(ring.n, e, ring.field, rng)
        gm = mult_map(ring, h, p)
        best = max(best, gm.rank)
        if gm.rank == required:
            return RankVerdict(CERTIFIED_MAX_RANK, gm.rank, required, dim_a,
                               dim_b, trials_used=trial + 1,
                               failure_bound=Fraction(0), multiplier=h)
    bound = Fraction(required, prime) ** trials
    return RankVerdict(PROBABLY_DEFICIENT, best, required, dim_a, dim_b,
                       trials_used=trials, failure_bound=min(bound, Fraction(1)),
                       witness=gm.kernel_form(), multiplier=gm.h)


@dataclass
class WlpReport:
    verdicts: dict[int, RankVerdict]
    holds: bool
    shared_multiplier: HomogeneousForm


def wlp_sweep(ring: JacobianRing, trials: int = DEFAULT_TRIALS,
              rng_seed: int = 0) -> WlpReport:
    """Certify maximal rank of x l: R_{p-1} -> R_p for every p in 1..socle.

    One shared linear form is tried across all degrees first (a single
    generic l should work everywhere at once); degrees it fails fall back
    to independent sampling."""
    prime = ring.field.p
    shared = random_form(ring.n, 1, ring.field, trial_rng(rng_seed, prime, 1, 0, 0))
    verdicts: dict[int, RankVerdict] = {}
    for p in range(1, ring.socle + 1):
        dim_a = ring.graded_dim(p - 1)
        dim_b = ring.graded_dim(p)
        required = min(dim_a, dim_b)
        if required == 0:
            verdicts[p] = RankVerdict(CERTIFIED_MAX_RANK, 0, 0, dim_a, dim_b,
                                      trials_used=0, failure_bound=Fraction(0))
            continue
        gm = mult_map(ring, shared, p)
        if gm.rank == required:
            verdicts[p] = RankVerdict(CERTIFIED_MAX_RANK, gm.rank, required,
                                      dim_a, dim_b, trials_used=1,
                                      failure_bound=Fraction(0), multiplier=shared)
        else:
            verdicts[p] = certify_general_max_rank(ring, 1, p, trials, rng_seed)
    holds = all(v.certified for v in verdicts.values())
    return WlpReport(verdicts, holds, shared)


def injectivity_descends(ring: JacobianRing, ell: HomogeneousForm) -> bool:
    """Cross-validation property: once x l: R_{d-1} -> R_d is injective,
    x l: R_{p-1} -> R_p must be injective for every p <= d (an element
    killed by l is killed by all of R_{d-p+1}, hence zero by duality)."""
    d = ring.degree
    top = mult_map(ring, ell, d)
    if not top.is_injective():
        raise ValueError("precondition: x l must be injective into degree d")
    return all(mult_map(ring, ell, p).is_injective() for p in range(1, d + 1))
