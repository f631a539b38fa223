"""Command-line entry point: JSON configs in, deterministic JSON reports out.

Exit codes: 0 success, 1 invalid input, 2 an internal invariant failed.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from fractions import Fraction

from . import __version__
from .brauer import REAL, QuaternionClass, hilbert_symbol, relevant_places
from .clifford import OmegaElement, UPoint, _verify_lift, algebra_for, image_map, lift_similitude_to_omega
from .errors import ConfigError, InvariantViolation, SpinorLabError
from .exactfield import SquareClass
from .npharness import ExtensionSpec, counterexample_search, map_name, weak_np_experiment
from .obstruction import (
    SpecialStatus,
    Verdict,
    h1_mu4Z_finite_field,
    is_special,
    is_spinor_norm,
    obstruction_alpha,
    omega_from_json,
    omega_to_json,
)
from .quadform import Isometry, QuadSpace, compose_reflections, spinor_norm_certificate
from .similitude import Similitude, random_proper_similitude

SCHEMA = "v1"
MAX_SEED = 2**64


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# -- config parsing ---------------------------------------------------------------

def _load_json(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what} is not valid JSON: {exc}") from None


def _read_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = _load_json(fh.read(), path)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    schema = cfg.get("schema", SCHEMA)
    if schema != SCHEMA:
        raise ConfigError(f"unsupported schema {schema!r}, expected {SCHEMA!r}")
    return cfg


def _merged(args) -> dict:
    cfg = _read_config(getattr(args, "config", None))
    for key in ("form", "ext", "similitude", "theta", "witness", "isometry", "vectors", "alpha"):
        raw = getattr(args, key, None)
        if raw is not None:
            cfg[key] = _load_json(raw, f"--{key}")
    for key in ("samples", "seed", "bound"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _seed(cfg) -> int:
    seed = cfg.get("seed", 0)
    if not isinstance(seed, int) or not 0 <= seed < MAX_SEED:
        raise ConfigError(f"seed must be an integer in [0, 2^64), got {seed!r}")
    return seed


def _positive(cfg, key, default) -> int:
    val = cfg.get(key, default)
    if not isinstance(val, int) or val < 1:
        raise ConfigError(f"{key} must be a positive integer, got {val!r}")
    return val


def _space(cfg) -> QuadSpace:
    if "form" not in cfg:
        raise ConfigError("a form is required (--form or 'form' in the config)")
    return QuadSpace.from_json(cfg["form"])


def _matrix(space, rows, what):
    if not isinstance(rows, list) or len(rows) != space.dim:
        raise ConfigError(f"{what} must be a {space.dim}x{space.dim} matrix")
    out = []
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != space.dim:
            raise ConfigError(f"{what} row {i} must have {space.dim} entries")
        out.append([space.field.from_json(x) for x in row])
    return out


def similitude_from_json(space, obj) -> Similitude:
    if isinstance(obj, list):
        obj = {"matrix": obj}
    if not isinstance(obj, dict) or "matrix" not in obj:
        raise ConfigError("similitude literal needs a 'matrix'")
    mult = obj.get("multiplier")
    mult = None if mult is None else space.field.from_json(mult)
    return Similitude.checked(space, _matrix(space, obj["matrix"], "similitude"), mult)


def theta_from_json(space, obj):
    Z = algebra_for(space).center_field
    if space.half_dim % 2:
        if not isinstance(obj, dict) or "f" not in obj or "z" not in obj:
            raise ConfigError("for n odd theta is {'f': ..., 'z': [a, b]}")
        return UPoint(Z.base.from_json(obj["f"]), Z.from_json(obj["z"]))
    return Z.from_json(obj)


def _vectors(space, rows):
    if not isinstance(rows, list):
        raise ConfigError("vectors must be a list of coordinate lists")
    return [space.vector([space.field.from_json(x) for x in v]) for v in rows]


# -- commands ----------------------------------------------------------------------

def cmd_spinor_norm(cfg):
    space = _space(cfg)
    if "alpha" in cfg:
        alpha = space.field.from_json(cfg["alpha"])
        decision = is_spinor_norm(alpha, space, bound=_positive(cfg, "bound", 50))
        return {"form": space.to_json(), "alpha": alpha.to_json()}, [decision.to_json()]
    if "vectors" in cfg:
        g = compose_reflections(space, _vectors(space, cfg["vectors"]))
    elif "isometry" in cfg:
        g = Isometry.checked(space, _matrix(space, cfg["isometry"], "isometry"))
    else:
        g = Isometry.identity(space)
    vectors, prod = spinor_norm_certificate(g)
    sq = SquareClass(prod)
    result = {
        "isometry": [[x.to_json() for x in row] for row in g.matrix],
        "vectors": [[x.to_json() for x in v] for v in vectors],
        "product": prod.to_json(),
        "spinor_norm": sq.rep.to_json(),
        "trivial": sq.is_trivial(),
    }
    return {"form": space.to_json()}, [result]


def cmd_lift(cfg):
    space = _space(cfg)
    seed = _seed(cfg)
    if "similitude" in cfg:
        g = similitude_from_json(space, cfg["similitude"])
    else:
        g = random_proper_similitude(space, random.Random(seed), height=2, max_reflections=4)
    omega = lift_similitude_to_omega(g)
    result = {
        "similitude": g.to_json(),
        "omega": omega_to_json(omega.value),
        "map": map_name(space),
        "image": image_map(omega).to_json(),
    }
    return {"form": space.to_json(), "seed": seed}, [result]


def cmd_obstruction(cfg):
    space = _space(cfg)
    seed = _seed(cfg)
    bound = _positive(cfg, "bound", 50)
    if "theta" in cfg:
        theta = theta_from_json(space, cfg["theta"])
    else:
        rng = random.Random(seed)
        g0 = random_proper_similitude(space, rng, height=2, max_reflections=4)
        theta = image_map(lift_similitude_to_omega(g0))
    echo = {"form": space.to_json(), "seed": seed, "bound": bound}
    if "witness" in cfg:
        g = similitude_from_json(space, cfg["witness"])
    else:
        special = is_special(theta, space, bound=bound)
        if special.status is not SpecialStatus.SPECIAL:
            return echo, [{"theta": theta.to_json(), "special": special.status.value,
                           "target": special.target.rep.to_json()}]
        g = special.witness
    return echo, [obstruction_alpha(theta, g, space, bound=bound).to_json()]


def cmd_np_check(cfg):
    space = _space(cfg)
    if "ext" not in cfg:
        raise ConfigError("np-check needs an extension (--ext)")
    ext = ExtensionSpec.from_json(space.field, cfg["ext"])
    seed = _seed(cfg)
    samples = _positive(cfg, "samples", 10)
    bound = _positive(cfg, "bound", 50)
    report = weak_np_experiment(space, ext, samples, seed, bound=bound)
    echo = {"form": space.to_json(), "ext": ext.to_json(), "samples": samples, "seed": seed, "bound": bound}
    return echo, [report.to_json()]


def _rational(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"{text!r} is not a rational number") from None


def _json_rational(x: Fraction):
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def cmd_hilbert(cfg):
    a, b = _rational(cfg["a"]), _rational(cfg["b"])
    echo = {"a": _json_rational(a), "b": _json_rational(b)}
    if cfg.get("place") is not None:
        place = cfg["place"]
        if place != REAL:
            try:
                place = int(place)
            except ValueError:
                raise ConfigError(f"place must be a prime or {REAL!r}") from None
            if place < 2 or any(place % d == 0 for d in range(2, int(place**0.5) + 1)):
                raise ConfigError(f"place {place} is not prime")
        echo["place"] = place
        return echo, [{"place": place, "symbol": hilbert_symbol(a, b, place)}]
    quat = QuaternionClass(a, b)
    symbols = [{"place": v, "symbol": hilbert_symbol(a, b, v)} for v in relevant_places(a, b)]
    ramified = sorted(quat.ramification, key=lambda v: (v == REAL, v if v != REAL else 0))
    return echo, [{"symbols": symbols, "ramified": ramified, "split": quat.is_split()}]


def cmd_h1(cfg):
    space = _space(cfg)
    report = h1_mu4Z_finite_field(space)
    if report.order != report.quotient_order:
        raise InvariantViolation(f"H^1 order {report.order} differs from |U/U0| = {report.quotient_order}")
    return {"form": space.to_json()}, [report.to_json()]


def cmd_search(cfg):
    runs = cfg.get("runs")
    if not isinstance(runs, list) or not runs:
        raise ConfigError("search needs a config with a nonempty 'runs' list")
    bound = _positive(cfg, "bound", 50)
    normalized = []
    for i, run in enumerate(runs):
        if not isinstance(run, dict) or "form" not in run or "ext" not in run:
            raise ConfigError(f"runs[{i}] needs 'form' and 'ext'")
        space = QuadSpace.from_json(run["form"])
        ext = ExtensionSpec.from_json(space.field, run["ext"])
        normalized.append({"form": space.to_json(), "ext": ext.to_json(),
                           "samples": _positive(run, "samples", 10), "seed": _seed(run)})
    results = []
    for run_index, outcome in counterexample_search({"runs": normalized, "bound": bound}):
        results.append({"run": run_index, **outcome.to_json()})
    return {"runs": normalized, "bound": bound}, results


COMMANDS = {
    "spinor-norm": cmd_spinor_norm,
    "lift": cmd_lift,
    "obstruction": cmd_obstruction,
    "np-check": cmd_np_check,
    "hilbert": cmd_hilbert,
    "h1": cmd_h1,
    "search": cmd_search,
}


# -- certificate replay -----------------------------------------------------------

def _check_spinor_decision(space, entry) -> bool:
    if entry.get("verdict") != Verdict.SPINOR_NORM.value:
        return True
    F = space.field
    alpha = F.from_json(entry["alpha"])
    scale = F.from_json(entry["scale"])
    prod = F.one
    for v in _vectors(space, entry["vectors"]):
        prod = prod * space.evaluate(v)
    return prod == alpha * scale * scale


def _check_obstruction(space, entry) -> bool:
    if "certificate" not in entry:
        return True
    theta = theta_from_json(space, entry["theta"])
    sim = similitude_from_json(space, entry["certificate"]["similitude"])
    omega = OmegaElement(omega_from_json(space, entry["certificate"]["omega"]), sim)
    _verify_lift(omega)
    return image_map(omega) == theta and _check_spinor_decision(space, entry["spinor_norm"])


def verify_report(report: dict) -> tuple[int, int]:
    """Recompute every certificate in a report; returns (checked, failed)."""
    command = report.get("command")
    config = report.get("config", {})
    checked = failed = 0

    def tick(ok):
        nonlocal checked, failed
        checked += 1
        failed += not ok

    if command == "spinor-norm":
        space = QuadSpace.from_json(config["form"])
        for entry in report["results"]:
            if "isometry" in entry:
                g = compose_reflections(space, _vectors(space, entry["vectors"]))
                tick(g.matrix == tuple(tuple(r) for r in _matrix(space, entry["isometry"], "isometry")))
            else:
                tick(_check_spinor_decision(space, entry))
    elif command == "lift":
        space = QuadSpace.from_json(config["form"])
        for entry in report["results"]:
            sim = similitude_from_json(space, entry["similitude"])
            omega = OmegaElement(omega_from_json(space, entry["omega"]), sim)
            _verify_lift(omega)
            tick(image_map(omega).to_json() == entry["image"])
    elif command == "obstruction":
        space = QuadSpace.from_json(config["form"])
        for entry in report["results"]:
            tick(_check_obstruction(space, entry))
    elif command == "np-check":
        space = QuadSpace.from_json(config["form"])
        for entry in report["results"]:
            for outcome in entry["outcomes"]:
                if outcome["status"] == "yes":
                    tick(_check_obstruction(space, outcome))
    elif command == "search":
        for entry in report["results"]:
            space = QuadSpace.from_json(config["runs"][entry["run"]]["form"])
            tick(_check_obstruction(space, entry))
    elif command not in ("hilbert", "h1"):
        raise ConfigError(f"unknown report command {command!r}")
    return checked, failed


# -- entry point -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spinorlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"spinorlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, seed=False, bound=False, samples=False):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--verify", action="store_true", help="replay all certificates in the report")
        p.add_argument("--timing", action="store_true", help="include wall-clock timing")
        if seed:
            p.add_argument("--seed", type=int)
        if bound:
            p.add_argument("--bound", type=int)
        if samples:
            p.add_argument("--samples", type=int)

    form_help = 'form literal, e.g. \'{"field": {"kind": "Fp", "p": 3}, "diagonal": [1, 1, 1, 2]}\''
    p = sub.add_parser("spinor-norm", help="spinor norm of an isometry, or decide whether alpha is one")
    common(p, bound=True)
    p.add_argument("--form", help=form_help)
    p.add_argument("--isometry", help="matrix as JSON")
    p.add_argument("--vectors", help="reflection vectors as JSON")
    p.add_argument("--alpha", help="scalar to test for membership in the spinor norm group")

    p = sub.add_parser("lift", help="lift a proper similitude to the extended Clifford group")
    common(p, seed=True)
    p.add_argument("--form", help=form_help)
    p.add_argument("--similitude", help='{"matrix": [...], "multiplier": ...}')

    p = sub.add_parser("obstruction", help="scalar obstruction of a special element")
    common(p, seed=True, bound=True)
    p.add_argument("--form", help=form_help)
    p.add_argument("--theta", help='{"f": ..., "z": [a, b]} for n odd, [a, b] for n even')
    p.add_argument("--witness", help="similitude with j(theta) = [multiplier]")

    p = sub.add_parser("np-check", help="weak norm-principle experiment over an extension")
    common(p, seed=True, bound=True, samples=True)
    p.add_argument("--form", help=form_help)
    p.add_argument("--ext", help='{"kind": "finite", "degree": 3} or {"kind": "quadratic", "d": 5}')

    p = sub.add_parser("hilbert", help="Hilbert symbols (a, b)_v over Q")
    common(p)
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--place", help="a prime or 'inf'; default: all relevant places")

    p = sub.add_parser("h1", help="H^1(k, mu_4[Z]) against |U/U0| over a finite field")
    common(p)
    p.add_argument("--form", help=form_help)

    p = sub.add_parser("search", help="stream No/Unknown outcomes of norm-principle runs")
    common(p, bound=True)

    p = sub.add_parser("verify", help="replay the certificates of a saved report")
    p.add_argument("report")
    p.add_argument("--out")
    return parser


def _emit(doc, out):
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fail(code: int, exc: Exception) -> int:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            try:
                with open(args.report) as fh:
                    report = _load_json(fh.read(), args.report)
            except OSError as exc:
                raise ConfigError(f"cannot read report {args.report}: {exc}") from None
            try:
                checked, failed = verify_report(report)
            except (KeyError, TypeError, IndexError) as exc:
                raise ConfigError(f"malformed report: missing or invalid {exc}") from None
            _emit({"schema": SCHEMA, "command": "verify", "checked": checked, "failed": failed}, args.out)
            return 2 if failed else 0
        cfg = _merged(args)
        if args.command == "hilbert":
            cfg.update(a=args.a, b=args.b, place=args.place)
        start = time.perf_counter()
        echo, results = COMMANDS[args.command](cfg)
        report = {
            "schema": SCHEMA,
            "command": args.command,
            "version": __version__,
            "config": echo,
            "results": results,
        }
        if args.timing:
            report["timing"] = {"seconds": round(time.perf_counter() - start, 6)}
        if args.verify:
            checked, failed = verify_report(report)
            report["verification"] = {"checked": checked, "failed": failed}
            if failed:
                _emit(report, args.out)
                return 2
        _emit(report, args.out)
        return 0
    except InvariantViolation as exc:
        return _fail(2, exc)
    except SpinorLabError as exc:
        return _fail(1, exc)
