"""Command-line entry point: ``gentree <command> [flags]``.

Exit status is 0 on success, 1 for invalid input (unknown family, bad
pattern, infeasible size, ...) and 2 when a size cap or budget is hit.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

from . import __version__
from .errors import DomainError, GentreeError, ResourceError
from .families import FAMILY_IDS, get_family
from .perm import parse_perm, perm_str

COMMANDS = ("enumerate", "sample", "solve-pq", "pat", "mu", "gamma",
            "clt-check", "limit-order", "verify")
DEFAULT_SEED = 0


@dataclass(frozen=True)
class RunConfig:
    command: str
    family: str
    n: Optional[int] = None
    reps: Optional[int] = None
    trials: Optional[int] = None
    pattern: Optional[str] = None
    jumps: Optional[str] = None
    truncation: int = 30
    seed: int = DEFAULT_SEED
    sampler: str = "cycle"
    h: int = 1
    out: Optional[str] = None
    format: Optional[str] = None

    def digest(self) -> str:
        # out and format do not change the numbers, so they stay out of the hash
        d = asdict(self)
        d.pop("out")
        d.pop("format")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def meta(self) -> dict:
        return {"tool": "gentree", "version": __version__, "config_hash": self.digest(),
                "config": asdict(self)}


# --- output -----------------------------------------------------------------

def _num(x) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(int(obj))
    if isinstance(obj, float):
        return _num(obj)
    if hasattr(obj, "item") and not hasattr(obj, "__len__"):   # numpy scalar
        return dumps(obj.item(), indent, _level)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)) or hasattr(obj, "tolist"):
        seq = obj.tolist() if hasattr(obj, "tolist") else obj
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in seq):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in seq) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv_header(cfg: RunConfig) -> str:
    return f"# gentree {__version__} config_hash={cfg.digest()}\n"


def _emit(cfg: RunConfig, text: str, path: Optional[str] = None):
    path = path or cfg.out
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_json(cfg: RunConfig, payload: dict, path: Optional[str] = None):
    _emit(cfg, dumps({"meta": cfg.meta(), **payload}) + "\n", path)


def _emit_csv(cfg: RunConfig, header: list, rows, path: Optional[str] = None):
    lines = [_csv_header(cfg), ",".join(header) + "\n"]
    for r in rows:
        lines.append(",".join(_num(v) if isinstance(v, float) else str(v) for v in r) + "\n")
    _emit(cfg, "".join(lines), path)


# --- commands -----------------------------------------------------------------

def _need(cfg, *names):
    for name in names:
        if getattr(cfg, name) is None:
            raise DomainError(f"{cfg.command} needs --{name}")


def _positive(cfg, *names):
    for name in names:
        v = getattr(cfg, name)
        if v is not None and v < 1:
            raise DomainError(f"--{name} must be >= 1")


def cmd_enumerate(cfg, threads):
    from .oracle import brute_enumerate
    from .tree import count_level
    _need(cfg, "n")
    lev = brute_enumerate(cfg.family, cfg.n)
    if lev.count != count_level(cfg.family, cfg.n):
        raise GentreeError("tree count disagrees with brute force")
    if cfg.format == "csv":
        _emit_csv(cfg, ["perm"], ([s] for s in lev.lines()))
    else:
        _emit_json(cfg, {"family": lev.family, "n": lev.n, "count": lev.count,
                         "members": lev.lines()})


def cmd_sample(cfg, threads):
    from .walks import make_rng, uniform_permutations
    _need(cfg, "n")
    reps = cfg.reps or 1
    P = uniform_permutations(cfg.family, cfg.n, reps, make_rng(cfg.seed, 0), sampler=cfg.sampler)
    lines = [perm_str(row) for row in P.tolist()]
    if cfg.format == "json":
        _emit_json(cfg, {"family": cfg.family, "n": cfg.n, "perms": lines})
    elif cfg.out:
        _emit(cfg, _csv_header(cfg) + "".join(s + "\n" for s in lines))
    else:
        _emit(cfg, "".join(s + "\n" for s in lines))


def cmd_solve_pq(cfg, threads):
    from .walks import solve_pq
    _emit_json(cfg, solve_pq(cfg.family).to_json())


def cmd_pat(cfg, threads):
    from .stats import pat_of_jumps
    from .tree import format_jumps, parse_jumps
    _need(cfg, "jumps")
    js = parse_jumps(cfg.jumps)
    p = pat_of_jumps(cfg.family, js)
    if cfg.format == "json":
        _emit_json(cfg, {"family": cfg.family, "jumps": format_jumps(cfg.family, js),
                         "pattern": perm_str(p)})
    else:
        _emit(cfg, perm_str(p) + "\n")


def cmd_mu(cfg, threads):
    from .stats import mu
    _need(cfg, "pattern")
    lo, hi = mu(cfg.family, cfg.pattern, cfg.truncation)
    _emit_json(cfg, {"family": cfg.family, "pi": cfg.pattern, "M": cfg.truncation,
                     "mu": {"lo": lo, "hi": hi}})


def cmd_gamma(cfg, threads):
    from .stats import gamma_sq
    _need(cfg, "pattern")
    _emit_json(cfg, gamma_sq(cfg.family, cfg.pattern, cfg.truncation).to_json())


def cmd_clt_check(cfg, threads):
    from .stats import clt_sample
    _need(cfg, "pattern", "n", "reps")
    z, rep = clt_sample(cfg.family, cfg.pattern, cfg.n, cfg.reps, seed=cfg.seed,
                        M=cfg.truncation, sampler=cfg.sampler, threads=threads)
    report = {"report": asdict(rep)}
    if cfg.out:
        _emit_csv(cfg, ["z"], ([float(v)] for v in z))
        _emit_json(cfg, report, str(Path(cfg.out).with_suffix(".report.json")))
    elif cfg.format == "csv":
        _emit_csv(cfg, ["z"], ([float(v)] for v in z))
    else:
        _emit_json(cfg, report)


def cmd_limit_order(cfg, threads):
    from .stats import limit_order_restriction
    from .walks import make_rng
    trials = cfg.trials or 10**5
    pmf = limit_order_restriction(cfg.family, cfg.h, trials, make_rng(cfg.seed, 0))
    if cfg.format == "json":
        _emit_json(cfg, {"family": cfg.family, "h": cfg.h, "trials": trials,
                         "pmf": {perm_str(p): v for p, v in pmf.items()}})
    else:
        _emit_csv(cfg, ["pattern", "probability"], ([perm_str(p), float(v)] for p, v in pmf.items()))


def cmd_verify(cfg, threads):
    from .oracle import verify_bijection, verify_sampler
    from .walks import make_rng
    _need(cfg, "n")
    out = {"bijection": verify_bijection(cfg.family, cfg.n)}
    if cfg.trials:
        out["sampler"] = verify_sampler(cfg.family, cfg.n, cfg.trials,
                                        make_rng(cfg.seed, 0), sampler=cfg.sampler)
    _emit_json(cfg, out)
    if not out["bijection"]["ok"]:
        raise GentreeError(f"bijection check failed for {cfg.family} at n = {cfg.n}")


HANDLERS = {
    "enumerate": cmd_enumerate, "sample": cmd_sample, "solve-pq": cmd_solve_pq,
    "pat": cmd_pat, "mu": cmd_mu, "gamma": cmd_gamma, "clt-check": cmd_clt_check,
    "limit-order": cmd_limit_order, "verify": cmd_verify,
}


# --- parsing ------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise DomainError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--family", required=True, help="one of: " + ", ".join(FAMILY_IDS))
    common.add_argument("--n", type=int, help="permutation size")
    common.add_argument("--reps", type=int, help="number of samples")
    common.add_argument("--trials", type=int, help="Monte Carlo trials")
    common.add_argument("--pattern", help="pattern in one-line notation, e.g. 21")
    common.add_argument("--jumps", help='colored jumps, e.g. "-2,+1B,+1T,-7"')
    common.add_argument("--truncation", type=int, default=30, help="jump depth M (default 30)")
    common.add_argument("--seed", type=int, help="64-bit seed (falls back to $GENTREE_SEED)")
    common.add_argument("--threads", type=int, help="worker processes (default: all CPUs)")
    common.add_argument("--sampler", choices=("cycle", "rejection"), default="cycle")
    common.add_argument("--h", type=int, default=1, help="half-width for limit-order")
    common.add_argument("--out", help="write the primary output here")
    common.add_argument("--format", choices=("json", "csv"))

    p = _Parser(prog="gentree", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"gentree {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return p


def _seed(arg) -> int:
    if arg is None:
        env = os.environ.get("GENTREE_SEED")
        if env is None or not env.strip():
            return DEFAULT_SEED
        try:
            arg = int(env, 0)
        except ValueError:
            raise DomainError(f"GENTREE_SEED is not an integer: {env!r}") from None
    if not 0 <= arg < 2**64:
        raise DomainError("seed must fit in 64 bits (0 <= seed < 2^64)")
    return arg


def config_from_args(ns) -> RunConfig:
    fam = get_family(ns.family).id
    pattern = perm_str(parse_perm(ns.pattern)) if ns.pattern is not None else None
    cfg = RunConfig(ns.command, fam, ns.n, ns.reps, ns.trials, pattern, ns.jumps,
                    ns.truncation, _seed(ns.seed), ns.sampler, ns.h, ns.out, ns.format)
    _positive(cfg, "n", "reps", "trials", "truncation")
    if cfg.h < 0:
        raise DomainError("--h must be >= 0")
    return cfg


def _glue_values(argv):
    # jump lists start with "-", which argparse would read as a flag
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in ("--jumps", "--pattern") and i + 1 < len(argv):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def run(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        ns = build_parser().parse_args(_glue_values(argv))
        cfg = config_from_args(ns)
        threads = ns.threads
        if threads is None:
            from .parallel import default_threads
            threads = default_threads()
        elif threads < 1:
            raise DomainError("--threads must be >= 1")
        HANDLERS[cfg.command](cfg, threads)
        return 0
    except ResourceError as e:
        print(f"gentree: resource limit: {e}", file=sys.stderr)
        return 2
    except MemoryError:
        print("gentree: resource limit: out of memory", file=sys.stderr)
        return 2
    except DomainError as e:
        print(f"gentree: error: {e}", file=sys.stderr)
        return 1
    except GentreeError as e:
        print(f"gentree: error: {e}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    return run(argv)
