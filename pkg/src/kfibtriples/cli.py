"""Command-line entry point.

Every subcommand writes its data output (stdout or ``--out``) and exactly one
JSON run manifest.  Exit codes: 0 all checks passed, 1 a check failed,
2 usage error, 3 precision cap reached.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from contextlib import contextmanager
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Iterator, Optional, Sequence

from . import __version__
from .enclosures import MAX_BITS, START_BITS, PrecisionCapError, complex_json, real_json

log = logging.getLogger("kfibtriples")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_PRECISION = 0, 1, 2, 3


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument types
# ---------------------------------------------------------------------------

def _int_at_least(lo: int, what: str) -> Callable[[str], int]:
    def conv(s: str) -> int:
        try:
            v = int(s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{what} must be an integer, got {s!r}")
        if v < lo:
            raise argparse.ArgumentTypeError(f"{what} must be >= {lo}, got {v}")
        return v
    conv.__name__ = what
    return conv


order_k = _int_at_least(2, "k")


def _triple(s: str) -> tuple[int, int, int]:
    try:
        x, y, z = (int(p) for p in s.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X,Y,Z, got {s!r}")
    return x, y, z


def _int_list(s: str) -> list[int]:
    try:
        return [int(p) for p in s.split(",") if p]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}")


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

@contextmanager
def _sink(path: Optional[str]) -> Iterator:
    if path is None or path == "-":
        yield sys.stdout
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _dump(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)


def _write_json(path: Optional[str], obj: Any) -> None:
    with _sink(path) as fh:
        fh.write(_dump(obj) + "\n")


def _write_jsonl(path: Optional[str], records: Sequence[dict]) -> None:
    with _sink(path) as fh:
        for r in records:
            fh.write(json.dumps(r) + "\n")


def _check(name: str, k, records: Sequence[dict] = (), passed: Optional[bool] = None,
           **extra) -> dict:
    failures = [r for r in records if not r.get("ok", True) and not r.get("informational")]
    if passed is None:
        passed = not failures
    return {"check": name, "k": k, "passed": bool(passed), "records": len(records),
            "failures": failures[:20], **extra}


# ---------------------------------------------------------------------------
# subcommands; each returns a list of check summaries
# ---------------------------------------------------------------------------

def cmd_seq(args) -> list[dict]:
    from .sequence import kfib
    if args.to < args.from_:
        raise UsageError("--to must be >= --from")
    if args.from_ < -(args.k - 2):
        raise UsageError(f"--from must be >= -(k-2) = {-(args.k - 2)}")
    with _sink(args.out) as fh:
        for n in range(args.from_, args.to + 1):
            fh.write(f"{kfib(args.k, n)}\n")
    return []


def cmd_roots(args) -> list[dict]:
    import mpmath
    from .charpoly import certified_roots
    from .enclosures import working_bits
    rs = certified_roots(args.k, args.bits)
    with working_bits(rs.working_precision):
        others = [{"center": {"re": mpmath.nstr(d.center.real, 30, strip_zeros=False),
                              "im": mpmath.nstr(d.center.imag, 30, strip_zeros=False)},
                   "radius": mpmath.nstr(d.radius, 6),
                   "modulus": real_json(d.modulus())} for d in rs.others]
        prod = rs.product()
    out = {
        "k": args.k,
        "requested_bits": args.bits,
        "working_precision": rs.working_precision,
        "dominant": real_json(rs.dominant),
        "others": others,
        "product": complex_json(prod),
    }
    _write_json(args.out, out)
    return [_check("roots", args.k, passed=True)]


def cmd_norms(args) -> list[dict]:
    from .charpoly import certified_roots, norm_linear_form, norm_linear_form_numeric
    from .enclosures import contains
    from .squares import discriminant
    k = args.k
    rs = certified_roots(k, args.bits)
    n1 = norm_linear_form(k, 1, 0)
    n2 = norm_linear_form(k, 1, 1)
    n3 = norm_linear_form(k, k + 1, 2 * k)
    closed = Fraction(2 ** (k + 1) * k ** k - (k + 1) ** (k + 1), k - 1)
    numeric = norm_linear_form_numeric(rs, k + 1, 2 * k)
    checks = {
        "norm_alpha1_is_1": n1 == 1,
        "norm_alpha1_minus_1_is_k_minus_1": n2 == k - 1,
        "linear_norm_matches_closed_form": n3 == closed,
        "linear_norm_times_k_minus_1_is_discriminant": n3 * (k - 1) == discriminant(k),
        "numeric_product_contains_exact": contains(numeric, n3),
    }
    out = {
        "k": k,
        "norm_alpha1": _frac_str(n1),
        "norm_alpha1_minus_1": _frac_str(n2),
        "norm_linear_form": _frac_str(n3),
        "discriminant": str(discriminant(k)),
        "numeric_root_product": real_json(numeric),
        "checks": checks,
        "ok": all(checks.values()),
    }
    _write_json(args.out, out)
    return [_check("norm-identities", k, [out])]


def _frac_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def cmd_verify(args) -> list[dict]:
    from .bounds import size_bound_records, verify_binet_residuals, verify_root_window
    k = args.k
    window = {"check": "root-window", "k": k, "ok": verify_root_window(k, args.bits)}
    sizes = []
    for r in size_bound_records(k, max(args.n_max, 2), args.bits):
        d = r.to_json()
        if r.n < 3:
            d["informational"] = True
        sizes.append(d)
    residuals = [r.to_json() for r in verify_binet_residuals(k, args.n_max, bits=args.bits)]
    _write_jsonl(args.out, [window] + sizes + residuals)
    return [_check("root-window", k, [window]),
            _check("size-bounds", k, sizes),
            _check("binet-residual", k, residuals)]


def cmd_gcd_scan(args) -> list[dict]:
    from .bounds import gcd_scan
    recs = [r.to_json() for r in gcd_scan(args.k, args.x_max, args.bits)]
    _write_jsonl(args.out, recs)
    return [_check("gcd-bound", args.k, recs)]


def cmd_indep(args) -> list[dict]:
    from .charpoly import certified_roots
    from .multindep import independence_certificate, is_all_ones_multiple, relation_probe
    rs = certified_roots(args.k, args.bits)
    cert = independence_certificate(rs, args.subset)
    out = cert.to_json()
    checks = [_check("independence", args.k, [out])]
    if args.probe_bound:
        rel = relation_probe(rs, args.probe_bound)
        ok = all(is_all_ones_multiple(m) for m in rel)
        out["relation_probe"] = {"bound": args.probe_bound,
                                 "relations": [list(m) for m in rel],
                                 "only_all_ones_multiples": ok}
        checks.append(_check("relation-probe", args.k, passed=ok,
                             failures_detail=[list(m) for m in rel if not is_all_ones_multiple(m)]))
    _write_json(args.out, out)
    return checks


def cmd_search(args) -> list[dict]:
    from .triples import SearchCheckpoint, search, verify_solution, write_jsonl
    ckpt = SearchCheckpoint.load(args.resume) if args.resume else None
    ckpt_path = args.checkpoint
    if ckpt_path is None and args.out not in (None, "-"):
        ckpt_path = args.out + ".ckpt.json"
    sols = search(args.k, args.z_max, checkpoint=ckpt, prune=not args.no_prune,
                  jobs=args.jobs, checkpoint_path=ckpt_path)
    recs = []
    for s in sols:
        d = s.to_json()
        idx = verify_solution(s.k, s.a, s.b, s.c)
        d["ok"] = idx is not None
        recs.append(d)
    if args.out in (None, "-"):
        _write_jsonl(None, [s.to_json() for s in sols])
    else:
        write_jsonl(sols, args.out)
    # solutions are findings, not failures; only unverifiable witnesses fail
    return [_check("triple-search", args.k, recs, z_max=args.z_max,
                   solutions=len(sols), prune=not args.no_prune)]


def cmd_expand(args) -> list[dict]:
    from .asymptotics import (ExpansionConfig, eval_expansion, exact_c, expand_c,
                              monomial_decay_check)
    from .charpoly import binet_coefficients, certified_roots
    from .enclosures import working_bits
    x, y, z = args.at
    if not (1 <= x <= y <= z):
        raise UsageError("--at needs 1 <= X <= Y <= Z")
    rs = certified_roots(args.k, args.bits)
    coeffs = binet_coefficients(rs)
    cfg = ExpansionConfig.for_point(args.T, x, y, z)
    terms = expand_c(args.k, cfg, rs, coeffs)
    approx = eval_expansion(terms, cfg, x, y, z, rs, coeffs)
    exact = exact_c(args.k, x, y, z, rs.working_precision)
    decay = monomial_decay_check(terms, x, y, z, rs) if len(terms) > 1 else []
    with working_bits(rs.working_precision):
        err = abs(approx - exact)
        rel = err / exact
    out = {
        "k": args.k, "T": args.T, "epsilon": cfg.epsilon, "at": [x, y, z],
        "terms": [{"coefficient": complex_json(t.coefficient),
                   "exponents": [list(f) for f in t.exponents]} for t in terms],
        "report": {"approximation": real_json(approx), "exact_c": real_json(exact),
                   "abs_error": real_json(err), "rel_error": real_json(rel),
                   "monomial_decay_ok": all(decay),
                   "sign_constraints_ok": all(t.signs_ok() for t in terms)},
    }
    _write_json(args.out, out)
    ok = out["report"]["monomial_decay_ok"] and out["report"]["sign_constraints_ok"]
    return [_check("expansion", args.k, passed=ok, T=args.T)]


def cmd_square_scan(args) -> list[dict]:
    from .squares import scan
    recs = [r.to_json() for r in scan(args.k_max)]
    _write_jsonl(args.out, recs)
    return [_check("square-scan", f"2..{args.k_max}", recs)]


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

def _collect_manifests(paths: Sequence[str]) -> list[tuple[Path, dict]]:
    files: list[Path] = []
    for p in map(Path, paths):
        if p.is_dir():
            files.extend(sorted(p.glob("*.json")))
        elif p.is_file():
            files.append(p)
        else:
            raise UsageError(f"no such manifest: {p}")
    if not files:
        raise UsageError("no manifests found")
    out = []
    for f in files:
        try:
            m = json.loads(f.read_text(encoding="utf-8"))
        except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise UsageError(f"unreadable manifest {f}: {exc}")
        if not isinstance(m, dict) or "subcommand" not in m or "outcome" not in m:
            raise UsageError(f"not a run manifest: {f}")
        out.append((f, m))
    return out


def build_report(manifests: Sequence[tuple[Path, dict]], color: bool = False) -> tuple[str, bool]:
    """Markdown pass/fail matrix (rows: subcommand, columns: k)."""
    cells: dict[str, dict[str, bool]] = {}
    failures: list[str] = []
    for path, m in manifests:
        row = cells.setdefault(m["subcommand"], {})
        for chk in m["outcome"].get("checks", []):
            col = str(chk.get("k"))
            row[col] = row.get(col, True) and chk["passed"]
            if not chk["passed"]:
                for rec in chk.get("failures") or [{}]:
                    failures.append(f"- {path.name}: {chk['check']} k={col} "
                                    f"{json.dumps(rec, sort_keys=True)}")
        if m["outcome"].get("status") == "error":
            row["-"] = False
            failures.append(f"- {path.name}: {m['outcome'].get('error')}")
    cols = sorted({c for r in cells.values() for c in r}, key=_col_key)

    def mark(v: Optional[bool]) -> str:
        if v is None:
            return "."
        s = "PASS" if v else "FAIL"
        if color:
            s = f"\x1b[32m{s}\x1b[0m" if v else f"\x1b[31m{s}\x1b[0m"
        return s

    lines = ["| run | " + " | ".join(f"k={c}" for c in cols) + " |",
             "|---|" + "---|" * len(cols)]
    for name in sorted(cells):
        lines.append(f"| {name} | " + " | ".join(mark(cells[name].get(c)) for c in cols) + " |")
    all_ok = not failures
    lines.append("")
    lines.append("All checks passed." if all_ok else "Failing records:")
    lines.extend(failures)
    return "\n".join(lines) + "\n", all_ok


def _col_key(c: str):
    head = c.split("..")[-1]
    return (0, int(head), c) if head.lstrip("-").isdigit() else (1, 0, c)


def cmd_report(args) -> list[dict]:
    manifests = _collect_manifests(args.paths)
    color = args.out in (None, "-") and sys.stdout.isatty() and "NO_COLOR" not in os.environ
    text, ok = build_report(manifests, color=color)
    with _sink(args.out) as fh:
        fh.write(text)
    return [_check("report", "-", passed=ok, manifests=len(manifests))]


# ---------------------------------------------------------------------------
# parser and dispatch
# ---------------------------------------------------------------------------

COMMANDS = {
    "seq": cmd_seq, "roots": cmd_roots, "norms": cmd_norms, "verify": cmd_verify,
    "gcd-scan": cmd_gcd_scan, "indep": cmd_indep, "search": cmd_search,
    "expand": cmd_expand, "square-scan": cmd_square_scan, "report": cmd_report,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    common = _Parser(add_help=False)
    common.add_argument("--out", "-o", help="output file (default stdout)")
    common.add_argument("--manifest", help="manifest file path")
    common.add_argument("--manifest-dir", default=os.environ.get("KFIB_MANIFEST_DIR", "runs"),
                        help="directory for run manifests (default ./runs)")
    common.add_argument("--config", help="JSON file with option defaults")
    common.add_argument("-v", "--verbose", action="store_true")

    bits = _Parser(add_help=False)
    bits.add_argument("--bits", type=_int_at_least(64, "bits"), default=START_BITS,
                      help=f"starting precision in bits (doubles up to {MAX_BITS})")

    parser = _Parser(prog="kfib", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    subs = {}

    p = subs["seq"] = sub.add_parser("seq", parents=[common], help="print sequence terms")
    p.add_argument("--k", type=order_k, required=True)
    p.add_argument("--from", dest="from_", type=int, default=1)
    p.add_argument("--to", type=int, required=True)

    p = subs["roots"] = sub.add_parser("roots", parents=[common, bits], help="certified roots")
    p.add_argument("--k", type=order_k, required=True)

    p = subs["norms"] = sub.add_parser("norms", parents=[common, bits], help="exact norms")
    p.add_argument("--k", type=order_k, required=True)

    p = subs["verify"] = sub.add_parser("verify", parents=[common, bits],
                                        help="root window, Binet residuals, size bounds")
    p.add_argument("--k", type=order_k, required=True)
    p.add_argument("--n-max", type=_int_at_least(1, "n-max"), required=True)

    p = subs["gcd-scan"] = sub.add_parser("gcd-scan", parents=[common, bits], help="gcd bound scan")
    p.add_argument("--k", type=order_k, required=True)
    p.add_argument("--x-max", type=_int_at_least(4, "x-max"), required=True)

    p = subs["indep"] = sub.add_parser("indep", parents=[common, bits],
                                       help="independence certificate")
    p.add_argument("--k", type=order_k, required=True)
    p.add_argument("--probe-bound", type=_int_at_least(0, "probe-bound"), default=0)
    p.add_argument("--subset", type=_int_list, default=None,
                   help="root indices (0 = dominant) of the k-1 roots to certify")

    p = subs["search"] = sub.add_parser("search", parents=[common], help="triple search")
    p.add_argument("--k", type=order_k, required=True)
    p.add_argument("--z-max", type=_int_at_least(6, "z-max"), required=True)
    p.add_argument("--resume", help="checkpoint file to resume from")
    p.add_argument("--checkpoint", help="checkpoint file to write (default OUT.ckpt.json)")
    p.add_argument("--no-prune", action="store_true")
    p.add_argument("--jobs", type=_int_at_least(1, "jobs"), default=1)

    p = subs["expand"] = sub.add_parser("expand", parents=[common, bits], help="expansion of c")
    p.add_argument("--k", type=order_k, required=True)
    p.add_argument("--T", type=_int_at_least(0, "T"), required=True)
    p.add_argument("--at", type=_triple, required=True, metavar="X,Y,Z")

    p = subs["square-scan"] = sub.add_parser("square-scan", parents=[common],
                                             help="non-square scan of D(k)")
    p.add_argument("--k-max", type=order_k, required=True)

    p = subs["report"] = sub.add_parser("report", parents=[common], help="summarize manifests")
    p.add_argument("paths", nargs="+", help="manifest files or directories")
    return parser, subs


def _peek_option(argv: Sequence[str], flag: str) -> Optional[str]:
    for i, a in enumerate(argv):
        if a == flag and i + 1 < len(argv):
            return argv[i + 1]
        if a.startswith(flag + "="):
            return a.split("=", 1)[1]
    return None


def _apply_config(sp: argparse.ArgumentParser, path: str) -> None:
    try:
        cfg = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"unreadable config {path}: {exc}")
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    known = {a.dest: a for a in sp._actions}
    defaults = {}
    for key, val in cfg.items():
        dest = key.replace("-", "_")
        dest = "from_" if dest == "from" else dest
        if dest not in known:
            raise UsageError(f"unknown config key {key!r}")
        action = known[dest]
        if action.type is not None and isinstance(val, (str, int)) and not isinstance(val, bool):
            try:
                val = action.type(str(val))
            except argparse.ArgumentTypeError as exc:
                raise UsageError(str(exc))
        defaults[dest] = val
        # options supplied by the config are no longer mandatory on the command line
        action.required = False
    sp.set_defaults(**defaults)


def _parse(argv: Sequence[str]) -> argparse.Namespace:
    parser, subs = build_parser()
    cfg_path = _peek_option(argv, "--config")
    name = next((a for a in argv if a in subs), None)
    if cfg_path and name:
        _apply_config(subs[name], cfg_path)
    return parser.parse_args(argv)


def _params(args: argparse.Namespace) -> dict:
    skip = {"manifest", "manifest_dir", "config", "verbose"}
    out = {}
    for key, val in sorted(vars(args).items()):
        if key in skip:
            continue
        out[key] = list(val) if isinstance(val, tuple) else val
    return out


def _argv_from_params(params: dict) -> list[str]:
    """Reconstruct an argument vector from manifest parameters."""
    argv = [params["subcommand"]]
    for key, val in params.items():
        if key in ("subcommand", "paths") or val is None or val is False:
            continue
        flag = "--" + ("from" if key == "from_" else key.replace("_", "-"))
        if key == "T":
            flag = "--T"
        if val is True:
            argv.append(flag)
        elif isinstance(val, list):
            argv += [flag, ",".join(str(v) for v in val)]
        else:
            argv += [flag, str(val)]
    if "paths" in params:
        argv += list(params["paths"])
    return argv


def _write_manifest(args, argv, started, outcome) -> Optional[Path]:
    if args is None:
        return None
    if args.manifest:
        path = Path(args.manifest)
    else:
        stamp = datetime.fromtimestamp(started, timezone.utc).strftime("%Y%m%dT%H%M%S%fZ")
        path = Path(args.manifest_dir) / f"{args.subcommand}-{stamp}-{os.getpid()}.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    params = _params(args)
    manifest = {
        "tool": "kfibtriples",
        "version": __version__,
        "subcommand": args.subcommand,
        "params": params,
        "argv": _argv_from_params(params),
        "precision": {"start_bits": getattr(args, "bits", None), "max_bits": MAX_BITS},
        "started": datetime.fromtimestamp(started, timezone.utc).isoformat(),
        "finished": datetime.now(timezone.utc).isoformat(),
        "outcome": outcome,
    }
    path.write_text(_dump(manifest) + "\n", encoding="utf-8")
    return path


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    started = time.time()
    args = None
    try:
        args = _parse(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        checks = COMMANDS[args.subcommand](args)
        code = EXIT_OK if all(c["passed"] for c in checks) else EXIT_FAIL
        outcome = {"status": "pass" if code == EXIT_OK else "fail", "exit_code": code,
                   "checks": checks}
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (UsageError, ValueError) as exc:
        print(f"kfib: {exc}", file=sys.stderr)
        code = EXIT_USAGE
        outcome = {"status": "error", "exit_code": code, "error": str(exc), "checks": []}
    except PrecisionCapError as exc:
        print(f"kfib: precision fault: {exc}", file=sys.stderr)
        code = EXIT_PRECISION
        outcome = {"status": "error", "exit_code": code, "error": str(exc), "checks": []}
    try:
        _write_manifest(args, argv, started, outcome)
    except OSError as exc:
        print(f"kfib: cannot write manifest: {exc}", file=sys.stderr)
    return code


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
