"""Batch command-line front end.

Subcommands:
  slopes      Fredholm series of U_p and its Newton polygon slopes
  datum       slope datum + decomposition at a bound h, written as JSON
  eigen       local eigencurve piece: factor, Hecke algebra, eigenpackets
  classical   exact-rational oracle run (dimensions, Hecke matrices)
  verify      acceptance-style suites; nonzero exit on any failure
  amice       Amice transform of a moment vector file

Configuration is a flat key = value file (see --config), overridden by
flags.  All emitted JSON is deterministic (sorted keys, no floats), and
every p-adic number carries its precision.  Exit codes: 0 success,
2 configuration error, 3 mathematical failure at the given truncation
(no vertex, precision exhausted, disk too large), 4 internal invariant
violation (a bug), 1 verification suite failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
from dataclasses import dataclass
from fractions import Fraction

from .classical import charpoly_rational, classical_space
from .distributions import MomentDistribution, amice_transform
from .errors import ConfigError, InvariantViolation, MathFailure
from .padics import PadicRing, PadicScalar
from .symbols import build_presentation
from .weights import ArithmeticWeight, WeightDisk, WeightFamilyElement

SCHEMA_VERSION = 1


@dataclass
class JobConfig:
    p: int = 5
    level: int = 1
    k: int | None = None  # pointwise weight
    k0: int = 0  # disk center
    r: Fraction | None = Fraction(1)
    prec: int = 8
    moments: int = 6
    w_trunc: int = 5
    degree: int | None = None
    h: Fraction = Fraction(0)
    hecke: tuple[int, ...] = (2, 3)
    out: str | None = None
    cache_dir: str | None = None

    def validate(self):
        if self.p < 3 or self.p % 2 == 0:
            raise ConfigError("p must be an odd prime >= 3")
        from math import gcd

        if gcd(self.level, self.p) != 1:
            raise ConfigError("tame level must be coprime to p")
        if self.h < 0:
            raise ConfigError("slope bound h must be >= 0")
        if self.moments < 1 or self.prec < 1 or self.w_trunc < 1:
            raise ConfigError("truncation parameters must be >= 1")

    def weight(self) -> ArithmeticWeight:
        return ArithmeticWeight(self.k if self.k is not None else self.k0)

    def disk(self) -> WeightDisk:
        return WeightDisk(self.p, self.k0, self.r, self.prec, self.w_trunc)

    def cache_key(self, command: str) -> str:
        payload = json.dumps(
            {
                "cmd": command,
                "p": self.p,
                "level": self.level,
                "k": self.k,
                "k0": self.k0,
                "r": str(self.r),
                "prec": self.prec,
                "moments": self.moments,
                "w_trunc": self.w_trunc,
                "degree": self.degree,
                "h": str(self.h),
                "hecke": list(self.hecke),
                "schema": SCHEMA_VERSION,
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:24]


def parse_config_file(path: str) -> dict:
    """Flat key = value lines; '#' starts a comment."""
    out = {}
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key = value")
                key, val = (part.strip() for part in line.split("=", 1))
                out[key] = val
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    return out


_KEY_PARSERS = {
    "p": int,
    "level": int,
    "k": int,
    "k0": int,
    "r": lambda s: None if s.lower() == "none" else Fraction(s),
    "prec": int,
    "moments": int,
    "w_trunc": int,
    "degree": int,
    "h": Fraction,
    "hecke": lambda s: tuple(int(x) for x in s.split(",") if x.strip()),
    "out": str,
    "cache_dir": str,
}


def build_config(args) -> JobConfig:
    cfg = JobConfig()
    values = {}
    if args.config:
        values.update(parse_config_file(args.config))
    for key in _KEY_PARSERS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    for key, raw in values.items():
        if key not in _KEY_PARSERS:
            raise ConfigError(f"unknown configuration key {key!r}")
        try:
            parsed = _KEY_PARSERS[key](raw) if isinstance(raw, str) else raw
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad value for {key}: {raw!r} ({exc})") from exc
        setattr(cfg, key, parsed)
    cfg.hecke = tuple(cfg.hecke)
    cfg.validate()
    return cfg


# -- serialization -------------------------------------------------------------


def encode_value(x):
    if isinstance(x, PadicScalar):
        return {"v": None if x.is_zero() else x.val, "u": x.unit, "N": x.prec}
    if isinstance(x, WeightFamilyElement):
        return {"w_coeffs": [encode_value(c) for c in x.coeffs]}
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (list, tuple)):
        return [encode_value(e) for e in x]
    return x


def encode_matrix(mat):
    return [[encode_value(e) for e in row] for row in mat]


def dump_json(obj, path: str | None):
    text = json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"
    if path is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".slopekit-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _cache_dir(cfg: JobConfig) -> str | None:
    return cfg.cache_dir or os.environ.get("SLOPEKIT_CACHE")


def cached_json(cfg: JobConfig, command: str, compute):
    cache = _cache_dir(cfg)
    if cache:
        path = os.path.join(cache, cfg.cache_key(command) + ".json")
        if os.path.exists(path):
            with open(path) as fh:
                return json.load(fh)
    result = compute()
    if cache:
        dump_json(result, path)
    return result


# -- subcommands ---------------------------------------------------------------


def cmd_slopes(cfg: JobConfig) -> int:
    from .slopes import fredholm

    def compute():
        pres = build_presentation(cfg.level, cfg.p)
        fd = fredholm(pres, cfg.weight(), cfg.moments, D=cfg.degree, prec=cfg.prec)
        return {
            "schema": SCHEMA_VERSION,
            "provenance": fd.provenance,
            "fredholm_coeffs": encode_matrix([fd.series.coeffs])[0],
            "polygon": fd.polygon.json(),
            "slopes": [str(s) for s in fd.polygon.slope_multiset()],
        }

    result = cached_json(cfg, "slopes", compute)
    dump_json(result, cfg.out)
    if cfg.out:
        print("slopes:", " ".join(result["slopes"]))
    return 0


def cmd_datum(cfg: JobConfig) -> int:
    from .slopes import make_slope_datum

    def compute():
        from . import linalg

        pres = build_presentation(cfg.level, cfg.p)
        weight = cfg.weight() if cfg.k is not None else cfg.disk()
        datum, dec, fd = make_slope_datum(
            pres, weight, cfg.h, cfg.moments, prec=cfg.prec, hecke_primes=cfg.hecke
        )
        restricted = {"U" + str(cfg.p): dec.u_restricted, **dec.hecke_restricted}
        if isinstance(weight, WeightDisk):
            from .weights import FamilyRing

            ring = FamilyRing(weight)
        else:
            ring = PadicRing(cfg.p, cfg.prec)
        charpolys = {
            label: encode_matrix([linalg.charpoly_monic(ring, mat)])[0] if mat else []
            for label, mat in restricted.items()
        }
        return {
            "schema": SCHEMA_VERSION,
            "datum": {
                "operator": datum.operator,
                "weight": weight.json() if isinstance(weight, WeightDisk) else {"k": weight.k},
                "h": str(datum.h),
            },
            "fredholm_coeffs": encode_matrix([fd.series.coeffs])[0],
            "polygon": fd.polygon.json(),
            "rank": dec.rank,
            "factor": encode_matrix([dec.factor.coeffs])[0],
            "basis": encode_matrix(dec.basis),
            "restricted": {k: encode_matrix(v) for k, v in restricted.items()},
            "restricted_charpolys": charpolys,
        }

    result = cached_json(cfg, "datum", compute)
    dump_json(result, cfg.out)
    return 0


def cmd_eigen(cfg: JobConfig) -> int:
    from .eigen import eigenpackets_at, local_hecke_algebra, spectral_piece

    def compute():
        pres = build_presentation(cfg.level, cfg.p)
        piece = spectral_piece(pres, cfg.disk(), cfg.h, cfg.moments, hecke_primes=cfg.hecke)
        algebra = local_hecke_algebra(piece, cfg.hecke)
        packets = []
        weights = [cfg.k] if cfg.k is not None else [cfg.k0]
        for k in weights:
            for packet in eigenpackets_at(piece, k):
                packets.append(packet.json())
        packets.append(eigenpackets_at(piece, None)[0].json())
        doc = piece.json()
        doc["schema"] = SCHEMA_VERSION
        doc["commutators"] = algebra.commutator_floors
        doc["eigenpackets"] = packets
        return doc

    result = cached_json(cfg, "eigen", compute)
    dump_json(result, cfg.out)
    return 0


def cmd_classical(cfg: JobConfig) -> int:
    k = cfg.k if cfg.k is not None else 0
    sp = classical_space(cfg.level, cfg.p, k)
    doc = {
        "schema": SCHEMA_VERSION,
        "level": cfg.level,
        "p": cfg.p,
        "k": k,
        "dim": sp.dim,
        "cuspidal_rank": sp.cuspidal_rank(),
        "hecke": {},
        "charpolys": {},
    }
    for ell in sorted(set(cfg.hecke) | {cfg.p}):
        mat = sp.hecke_matrix(ell)
        label = ("U" if ell == cfg.p else "T") + str(ell)
        doc["hecke"][label] = [[str(x) for x in row] for row in mat]
        doc["charpolys"][label] = [str(c) for c in charpoly_rational(mat)]
    dump_json(doc, cfg.out)
    return 0


def cmd_amice(cfg: JobConfig, moments_path: str, out_degree: int | None) -> int:
    try:
        with open(moments_path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read moments file: {exc}") from exc
    if not isinstance(data, list) or not data:
        raise ConfigError("moments file must be a nonempty JSON list of integers")
    ring = PadicRing(cfg.p, cfg.prec)
    mu = MomentDistribution(
        ring, ArithmeticWeight(0), [ring.from_int(int(x)) for x in data]
    )
    D = out_degree if out_degree is not None else len(data)
    series = amice_transform(mu, D)
    dump_json(
        {
            "schema": SCHEMA_VERSION,
            "p": cfg.p,
            "degree": D,
            "coeffs": encode_matrix([series.coeffs])[0],
        },
        cfg.out,
    )
    return 0


def cmd_verify(cfg: JobConfig, suite: str) -> int:
    from . import verify as verify_mod

    results = verify_mod.run_suite(suite, cfg)
    failures = [r for r in results if not r["ok"]]
    for r in results:
        status = "PASS" if r["ok"] else "FAIL"
        print(f"[{status}] {r['name']}: {r['detail']}")
    return 1 if failures else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="slopekit", description=__doc__)
    parser.add_argument("--config", help="flat key = value configuration file")
    for key, typ in _KEY_PARSERS.items():
        parser.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("slopes")
    sub.add_parser("datum")
    sub.add_parser("eigen")
    sub.add_parser("classical")
    amice = sub.add_parser("amice")
    amice.add_argument("moments_file", help="JSON file with an integer moment list")
    amice.add_argument("--T-degree", dest="t_degree", type=int, default=None)
    verify = sub.add_parser("verify")
    verify.add_argument("--suite", default="all", choices=[
        "all", "independence", "classicality", "factorization", "family", "uct", "projdim", "amice", "heckewell", "determinism"
    ])
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        if args.command == "slopes":
            return cmd_slopes(cfg)
        if args.command == "datum":
            return cmd_datum(cfg)
        if args.command == "eigen":
            return cmd_eigen(cfg)
        if args.command == "classical":
            return cmd_classical(cfg)
        if args.command == "amice":
            return cmd_amice(cfg, args.moments_file, args.t_degree)
        if args.command == "verify":
            return cmd_verify(cfg, args.suite)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except MathFailure as exc:
        print(f"mathematical failure: {exc}", file=sys.stderr)
        return 3
    except InvariantViolation as exc:
        print(f"internal invariant violated (bug): {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
