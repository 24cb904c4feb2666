"""Command-line front end.

One command per process: parse the input form (or build a Fermat form),
validate the run configuration, drive the library, and emit a text or JSON
report.  JSON output is schema-stable with top-level keys {command, input,
config, verdict, dims, rank, failure_bound?, witness?, detail?, timings_ms};
identical invocations produce identical bytes apart from timings_ms.
"""

from __future__ import annotations

import argparse
import fcntl
import hashlib
import json
import re
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .exactla import MatrixFormatError, SizeGuardExceeded, dense_rank_oracle, load_matrix, rref
from .jacobian import CharacteristicError, JacobianRing, ci_hilbert_coefficients
from .lefschetz import wlp_sweep
from .polyring import (
    HomogeneousForm,
    PolyError,
    PrimeField,
    form_to_str,
    is_prime,
    monomial_count,
    parse_form,
)
from .variation import (
    KIND_DOUBLE_COVER,
    KIND_HYPERSURFACE,
    MAXIMAL_VARIATION_CERTIFIED,
    NO_EVIDENCE,
    PRECONDITION_VIOLATED,
    SMOOTHNESS_NOT_CERTIFIED,
    TRIVIALLY_CERTIFIED,
    GeometryInput,
    maxvar_double_cover,
    maxvar_hypersurface,
)

# 2^62 - 57, the largest prime below 2^62; fixed so published results carry
# their modulus implicitly
DEFAULT_PRIME = 4611686018427387847

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_CERTIFIED = 2
EXIT_PRECONDITION = 3
EXIT_NOT_SMOOTH = 4


class CliError(Exception):
    """Input or configuration problem; message goes to stderr, exit 1."""


@dataclass
class RunConfig:
    prime: int = DEFAULT_PRIME
    seed: int = 0
    trials: int = 3
    fmt: str = "text"
    cache: Optional[Path] = None

    def as_json(self) -> dict:
        return {"prime": self.prime, "seed": self.seed, "trials": self.trials}


def form_fingerprint(form: HomogeneousForm) -> str:
    text = f"{form.n}|{form.degree}|{form_to_str(form)}"
    return hashlib.sha256(text.encode()).hexdigest()[:16]


class RankCache:
    """Append-only JSON-lines store of ideal-matrix ranks, keyed by
    (form fingerprint, prime, degree).  Appends hold an advisory lock so
    concurrent processes interleave whole lines; unreadable lines are
    skipped on load."""

    def __init__(self, path: Path):
        self.path = path
        self.hits = 0

    def preload(self, ring: JacobianRing, fingerprint: str) -> None:
        if not self.path.exists():
            return
        with open(self.path) as fh:
            for line in fh:
                try:
                    entry = json.loads(line)
                except ValueError:
                    continue
                if (entry.get("form") == fingerprint
                        and entry.get("prime") == ring.field.p
                        and isinstance(entry.get("degree"), int)
                        and isinstance(entry.get("rank"), int)
                        and entry.get("cols") == monomial_count(ring.n, entry["degree"])):
                    ring.set_dim(entry["degree"], entry["cols"] - entry["rank"])
                    self.hits += 1

    def store(self, ring: JacobianRing, fingerprint: str, skip: set[int]) -> None:
        lines = []
        for degree, dim in sorted(ring.known_dims().items()):
            if degree in skip:
                continue
            cols = monomial_count(ring.n, degree)
            lines.append(json.dumps({"form": fingerprint, "prime": ring.field.p,
                                     "degree": degree, "cols": cols,
                                     "rank": cols - dim}) + "\n")
        if not lines:
            return
        with open(self.path, "a") as fh:
            fcntl.flock(fh, fcntl.LOCK_EX)
            fh.writelines(lines)
            fcntl.flock(fh, fcntl.LOCK_UN)


def infer_variable_count(text: str) -> int:
    indices = [int(m.group(1)) for m in re.finditer(r"x(\d+)", text)]
    if not indices:
        raise CliError("no variables found in the input form")
    return max(indices)


def load_input_form(args, field: PrimeField) -> tuple[HomogeneousForm, dict]:
    if args.fermat is not None:
        n, d = args.fermat
        if not (1 <= n <= 8 and d >= 2):
            raise CliError(f"--fermat needs 1 <= n <= 8 and d >= 2, got {n} {d}")
        terms = {tuple(d if j == i else 0 for j in range(n + 1)): 1
                 for i in range(n + 1)}
        form = HomogeneousForm.from_terms(n, d, terms, field)
        source = f"fermat({n},{d})"
    else:
        if args.form_file is None:
            raise CliError("provide a form file or --fermat N D")
        path = Path(args.form_file)
        try:
            text = path.read_text()
        except OSError as exc:
            raise CliError(f"cannot read {path}: {exc}") from None
        form = parse_form(text, infer_variable_count(text), field)
        source = str(path)
    return form, {"source": source, "form": form_to_str(form),
                  "n": form.n, "d": form.degree}


def make_field(args) -> PrimeField:
    try:
        return PrimeField(args.prime)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def check_prime_exceeds_degree(prime: int, d: int) -> None:
    if prime <= d:
        raise CliError(f"prime {prime} must exceed the form degree {d}")


def emit(report: dict, cfg: RunConfig, text_lines: list[str]) -> None:
    if cfg.fmt == "json":
        print(json.dumps(report, indent=2))
    else:
        print("\n".join(text_lines))


def _timings(t0: float, cache: Optional[RankCache]) -> dict:
    out = {"total": round((time.perf_counter() - t0) * 1000, 3)}
    if cache is not None:
        out["cache_hits"] = cache.hits
    return out


def _with_cache(cfg: RunConfig, ring: JacobianRing, fingerprint: str):
    cache = RankCache(cfg.cache) if cfg.cache else None
    preloaded: set[int] = set()
    if cache:
        cache.preload(ring, fingerprint)
        preloaded = set(ring.known_dims())
    return cache, preloaded


def cmd_hilbert(args, cfg: RunConfig) -> int:
    t0 = time.perf_counter()
    field = make_field(args)
    form, input_desc = load_input_form(args, field)
    check_prime_exceeds_degree(cfg.prime, form.degree)
    ring = JacobianRing(form)
    fp = form_fingerprint(form)
    cache, preloaded = _with_cache(cfg, ring, fp)
    dims = list(ring.hilbert_function())
    certified = ring.certify_smooth()
    if cache:
        cache.store(ring, fp, preloaded)
    verdict = "Certified" if certified else "NotCertified"
    expected = ci_hilbert_coefficients(ring.n, ring.degree)
    report = {
        "command": "hilbert", "input": input_desc, "config": cfg.as_json(),
        "verdict": verdict, "dims": dims, "rank": None,
        "timings_ms": _timings(t0, cache),
    }
    lines = [
        f"hilbert: n={ring.n} d={ring.degree} prime={cfg.prime}",
        f"dims R_0..R_{ring.socle + 1}: {dims}",
        f"CI series (socle {ring.socle}): {expected}",
        f"smoothness: {verdict}",
    ]
    emit(report, cfg, lines)
    return EXIT_OK if certified else EXIT_NOT_CERTIFIED


def cmd_wlp(args, cfg: RunConfig) -> int:
    t0 = time.perf_counter()
    field = make_field(args)
    form, input_desc = load_input_form(args, field)
    check_prime_exceeds_degree(cfg.prime, form.degree)
    ring = JacobianRing(form)
    fp = form_fingerprint(form)
    cache, preloaded = _with_cache(cfg, ring, fp)
    if not ring.certify_smooth():
        report = {
            "command": "wlp", "input": input_desc, "config": cfg.as_json(),
            "verdict": "SmoothnessNotCertified", "dims": None, "rank": None,
            "timings_ms": _timings(t0, cache),
        }
        emit(report, cfg, [f"wlp: smoothness not certified at prime {cfg.prime}"])
        return EXIT_NOT_CERTIFIED
    sweep = wlp_sweep(ring, trials=cfg.trials, rng_seed=cfg.seed)
    dims = list(ring.hilbert_function())
    if cache:
        cache.store(ring, fp, preloaded)
    detail = {str(p): {"outcome": v.outcome, "required": v.required_rank,
                       "best": v.best_rank, "trials": v.trials_used}
              for p, v in sorted(sweep.verdicts.items())}
    verdict = "WLPCertified" if sweep.holds else "WLPNotCertified"
    report = {
        "command": "wlp", "input": input_desc, "config": cfg.as_json(),
        "verdict": verdict, "dims": dims, "rank": None, "detail": detail,
        "timings_ms": _timings(t0, cache),
    }
    lines = [f"wlp: n={ring.n} d={ring.degree} prime={cfg.prime} seed={cfg.seed}",
             f"dims: {dims}"]
    for p, v in sorted(sweep.verdicts.items()):
        lines.append(f"  degree {p}: {v.outcome} rank {v.best_rank}/{v.required_rank}")
    lines.append(f"weak Lefschetz: {verdict}")
    emit(report, cfg, lines)
    return EXIT_OK if sweep.holds else EXIT_NOT_CERTIFIED


_MAXVAR_EXIT = {
    MAXIMAL_VARIATION_CERTIFIED: EXIT_OK,
    TRIVIALLY_CERTIFIED: EXIT_OK,
    NO_EVIDENCE: EXIT_NOT_CERTIFIED,
    PRECONDITION_VIOLATED: EXIT_PRECONDITION,
    SMOOTHNESS_NOT_CERTIFIED: EXIT_NOT_SMOOTH,
}


def cmd_maxvar(args, cfg: RunConfig) -> int:
    t0 = time.perf_counter()
    field = make_field(args)
    form, input_desc = load_input_form(args, field)
    check_prime_exceeds_degree(cfg.prime, form.degree)
    input_desc["kind"] = args.kind
    input_desc["e"] = args.e
    geom = GeometryInput(args.kind, form, args.e)
    cache = RankCache(cfg.cache) if cfg.cache else None
    preloaded: set[int] = set()
    ring = None
    if cache and geom.gate_violation() is None:
        ring = JacobianRing(form)
        cache.preload(ring, form_fingerprint(form))
        preloaded = set(ring.known_dims())
    if args.kind == KIND_HYPERSURFACE:
        rep = maxvar_hypersurface(geom, trials=cfg.trials, seed=cfg.seed, ring=ring)
    else:
        rep = maxvar_double_cover(geom, trials=cfg.trials, seed=cfg.seed, ring=ring)
    if cache and ring is not None:
        cache.store(ring, form_fingerprint(form), preloaded)
    prov = rep.provenance
    report = {
        "command": "maxvar", "input": input_desc, "config": cfg.as_json(),
        "verdict": rep.verdict,
        "dims": [prov.get("dim_source"), prov.get("dim_target")],
        "rank": prov.get("rank"),
        "detail": {"criterion": rep.criterion, "reason": rep.detail,
                   "note": rep.note},
        "timings_ms": _timings(t0, cache),
    }
    if rep.failure_bound is not None:
        report["failure_bound"] = str(rep.failure_bound)
    if rep.witness is not None:
        report["witness"] = form_to_str(rep.witness)
    lines = [f"maxvar {args.kind}: n={form.n} d={form.degree} e={args.e} "
             f"prime={cfg.prime} seed={cfg.seed}",
             f"criterion: {rep.criterion}",
             f"verdict: {rep.verdict}",
             f"  {rep.detail}"]
    if rep.note:
        lines.append(f"  note: {rep.note}")
    if rep.failure_bound is not None:
        lines.append(f"  failure bound: {rep.failure_bound}")
    if rep.witness is not None:
        lines.append(f"  kernel witness G: {form_to_str(rep.witness)}")
    emit(report, cfg, lines)
    return _MAXVAR_EXIT[rep.verdict]


def cmd_rank_oracle(args, cfg: RunConfig) -> int:
    t0 = time.perf_counter()
    path = Path(args.matrix_file)
    try:
        mat = load_matrix(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from None
    except MatrixFormatError as exc:
        raise CliError(f"bad matrix dump: {exc}") from None
    if not is_prime(mat.p):
        raise CliError(f"matrix modulus {mat.p} is not prime")
    sparse_rank = rref(mat).rank
    try:
        oracle_rank = dense_rank_oracle(mat)
    except SizeGuardExceeded as exc:
        raise CliError(str(exc)) from None
    agree = sparse_rank == oracle_rank
    verdict = "RankAgreement" if agree else "RankMismatch"
    report = {
        "command": "rank-oracle",
        "input": {"source": str(path), "nrows": mat.nrows, "ncols": mat.ncols,
                  "modulus": mat.p},
        "config": cfg.as_json(),
        "verdict": verdict, "dims": [mat.nrows, mat.ncols],
        "rank": sparse_rank, "detail": {"oracle_rank": oracle_rank},
        "timings_ms": _timings(t0, None),
    }
    lines = [f"rank-oracle: {mat.nrows}x{mat.ncols} mod {mat.p}",
             f"echelon rank = {sparse_rank}, oracle rank = {oracle_rank}",
             verdict]
    emit(report, cfg, lines)
    return EXIT_OK if agree else EXIT_NOT_CERTIFIED


def _add_common(sub: argparse.ArgumentParser, with_form: bool = True) -> None:
    sub.add_argument("--prime", type=int, default=DEFAULT_PRIME,
                     help="field modulus (prime, < 2^62)")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--trials", type=int, default=3)
    sub.add_argument("--format", dest="fmt", choices=["text", "json"],
                     default="text")
    sub.add_argument("--cache", type=Path, default=None,
                     help="JSON-lines rank cache file")
    if with_form:
        sub.add_argument("form_file", nargs="?",
                         help="file containing one form in the input grammar")
        sub.add_argument("--fermat", nargs=2, type=int, metavar=("N", "D"),
                         help="use the Fermat form of degree D in N+1 variables")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="varcert",
        description="certify maximal-variation and weak-Lefschetz rank "
                    "conditions on Jacobian rings by exact linear algebra "
                    "over a prime field")
    subs = parser.add_subparsers(dest="command", required=True)
    hil = subs.add_parser("hilbert", help="graded dimensions and smoothness certificate")
    _add_common(hil)
    hil.set_defaults(func=cmd_hilbert)
    wlp = subs.add_parser("wlp", help="weak Lefschetz sweep over all degrees")
    _add_common(wlp)
    wlp.set_defaults(func=cmd_wlp)
    mv = subs.add_parser("maxvar", help="maximal-variation criterion")
    mv.add_argument("kind", choices=[KIND_HYPERSURFACE, KIND_DOUBLE_COVER])
    mv.add_argument("-e", type=int, default=1, help="line-bundle twist (default 1)")
    _add_common(mv)
    mv.set_defaults(func=cmd_maxvar)
    ro = subs.add_parser("rank-oracle",
                         help="cross-check echelon rank against the dense oracle")
    ro.add_argument("matrix_file", help="matrix dump (nrows ncols modulus header)")
    _add_common(ro, with_form=False)
    ro.set_defaults(func=cmd_rank_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(prime=args.prime, seed=args.seed, trials=args.trials,
                    fmt=args.fmt, cache=args.cache)
    try:
        return args.func(args, cfg)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CharacteristicError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PolyError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
