"""Shared fixtures.

The corpus is a frozen family of random integer-coefficient forms, ten per
shape, each certified smooth at PRIME_A during sampling.  The same integer
coefficients can be reduced at any prime, which is what the two-prime
stability checks rely on.  Rings are memoized per (form, prime) so graded
dimensions computed by one test are reused by later ones.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field

import pytest

from varcert.jacobian import JacobianRing
from varcert.polyring import HomogeneousForm, PrimeField, enumerate_monomials

PRIME_A = 1048573
PRIME_B = 1048583
CORPUS_SHAPES = ((3, 4), (3, 5), (4, 3), (4, 4), (2, 6))
FORMS_PER_SHAPE = 10
COEFF_BOUND = 9
MAX_ATTEMPTS = 8


@dataclass
class CorpusForm:
    n: int
    d: int
    label: str
    coeffs: dict
    _rings: dict = field(default_factory=dict)

    def form(self, prime: int) -> HomogeneousForm:
        return self.ring(prime).form

    def ring(self, prime: int) -> JacobianRing:
        if prime not in self._rings:
            f = HomogeneousForm.from_terms(self.n, self.d, self.coeffs,
                                           PrimeField(prime))
            self._rings[prime] = JacobianRing(f)
        return self._rings[prime]


def sample_corpus_form(n: int, d: int, index: int) -> CorpusForm:
    for attempt in range(MAX_ATTEMPTS):
        digest = hashlib.sha256(f"corpus|{n}|{d}|{index}|{attempt}".encode()).digest()
        rng = random.Random(int.from_bytes(digest[:8], "big"))
        coeffs = {m: rng.randint(-COEFF_BOUND, COEFF_BOUND)
                  for m in enumerate_monomials(n, d)}
        coeffs = {m: c for m, c in coeffs.items() if c}
        entry = CorpusForm(n, d, f"n{n}d{d}-{index:02d}", coeffs)
        if entry.ring(PRIME_A).certify_smooth():
            return entry
    raise RuntimeError(f"no smooth form found for shape ({n},{d})")


@pytest.fixture(scope="session")
def corpus() -> dict[tuple[int, int], tuple[CorpusForm, ...]]:
    return {shape: tuple(sample_corpus_form(*shape, i)
                         for i in range(FORMS_PER_SHAPE))
            for shape in CORPUS_SHAPES}


@pytest.fixture(scope="session")
def corpus_flat(corpus) -> tuple[CorpusForm, ...]:
    return tuple(f for shape in CORPUS_SHAPES for f in corpus[shape])
