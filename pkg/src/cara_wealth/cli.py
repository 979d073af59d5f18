"""Command-line front end driven by INI scenario files.

    cara-wealth shadow      --scenario FILE
    cara-wealth quantiles   --scenario FILE
    cara-wealth simulate    --scenario FILE [--dump-path N FILE] [--histogram FILE]
    cara-wealth probability --scenario FILE [--convention published|gbm]
    cara-wealth price       --scenario FILE [--t T] [--shadow-x X]

Scenario file sections and keys:

    [market]    r, mu, sigma, T
    [investor]  alpha, x0            (x0 = optimal uses the t=0 optimal amount)
    [bounds]    k_lower, k_upper     (both optional)
    [strategy]  kind, cap_investment (kind defaults to the one implied by bounds)
    [sim]       s, h, seed, probabilities   (h may be a fraction such as 1/49)

Output is CSV with LF line endings and fixed six-decimal floats
(twelve for histogram masses). Exit
codes: 0 ok, 2 invalid input, 3 solver failure.
"""

from __future__ import annotations

import argparse
import configparser
import io
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .analytics import restriction_probabilities
from .distribution import terminal_law
from .errors import DomainError, ParameterError, SolverError
from .market import InvestorParams, MarketParams
from .shadow import solve_shadow
from .simulation import SimConfig, deviation_report, simulate, summarize
from .strategies import (
    Bounds,
    Scenario,
    StrategyKind,
    StrategySpec,
    call_price,
    call_replication_fraction,
    d_lower,
    d_upper,
    optimal_amount,
    put_price,
    put_replication_fraction,
    strategy_amount,
)

EXIT_OK, EXIT_INVALID, EXIT_SOLVER = 0, 2, 3

_SCHEMA = {
    "market": {"r", "mu", "sigma", "T"},
    "investor": {"alpha", "x0"},
    "bounds": {"k_lower", "k_upper"},
    "strategy": {"kind", "cap_investment"},
    "sim": {"s", "h", "seed", "probabilities"},
}
_REQUIRED = {"market": {"r", "mu", "sigma", "T"}, "investor": {"alpha", "x0"}}
DEFAULT_PROBABILITIES = (0.25, 0.5, 0.75, 0.95)


class ScenarioFileError(ParameterError):
    pass


@dataclass(frozen=True)
class ScenarioFile:
    scenario: Scenario
    spec: StrategySpec
    sim: Optional[SimConfig]
    probabilities: tuple


def _number(section, key, text) -> float:
    try:
        return float(Fraction(text.strip())) if "/" in text else float(text)
    except (ValueError, ZeroDivisionError):
        raise ScenarioFileError(f"[{section}] {key}: not a number: {text!r}") from None


def _bool(section, key, text) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ScenarioFileError(f"[{section}] {key}: not a boolean: {text!r}")


def parse_scenario(text: str) -> ScenarioFile:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ScenarioFileError(f"malformed scenario file: {exc}") from None

    for sec in cp.sections():
        if sec not in _SCHEMA:
            raise ScenarioFileError(f"unknown section [{sec}]")
        unknown = set(cp[sec]) - _SCHEMA[sec]
        if unknown:
            raise ScenarioFileError(f"unknown key(s) in [{sec}]: {', '.join(sorted(unknown))}")
    for sec, keys in _REQUIRED.items():
        if sec not in cp:
            raise ScenarioFileError(f"missing section [{sec}]")
        missing = keys - set(cp[sec])
        if missing:
            raise ScenarioFileError(f"missing key(s) in [{sec}]: {', '.join(sorted(missing))}")

    mk = cp["market"]
    market = MarketParams(*(_number("market", k, mk[k]) for k in ("r", "mu", "sigma", "T")))
    alpha = _number("investor", "alpha", cp["investor"]["alpha"])
    x0_text = cp["investor"]["x0"].strip()
    x0 = optimal_amount(market, alpha, 0.0) if x0_text.lower() == "optimal" else _number("investor", "x0", x0_text)
    investor = InvestorParams(alpha, x0)

    b = cp["bounds"] if "bounds" in cp else {}
    bounds = Bounds(
        _number("bounds", "k_lower", b["k_lower"]) if "k_lower" in b else None,
        _number("bounds", "k_upper", b["k_upper"]) if "k_upper" in b else None,
    )
    scenario = Scenario(market, investor, bounds)

    st = cp["strategy"] if "strategy" in cp else {}
    kind = StrategyKind.parse(st["kind"]) if "kind" in st else bounds.natural_kind
    cap = _bool("strategy", "cap_investment", st["cap_investment"]) if "cap_investment" in st else False
    spec = StrategySpec(kind, cap)
    if kind is not bounds.natural_kind:
        raise ScenarioFileError(
            f"[strategy] kind {kind.value!r} does not match the bounds given (implies {bounds.natural_kind.value!r})"
        )

    sim = None
    probs = DEFAULT_PROBABILITIES
    if "sim" in cp:
        sm = cp["sim"]
        if "probabilities" in sm:
            probs = tuple(_number("sim", "probabilities", p) for p in sm["probabilities"].split(",") if p.strip())
            if not probs or any(not 0 < p < 1 for p in probs):
                raise ScenarioFileError("[sim] probabilities must lie in (0, 1)")
        if {"s", "h", "seed"} & set(sm):
            if "seed" not in sm:
                raise ScenarioFileError("[sim] seed is required (no implicit seeding)")
            for k in ("s", "h"):
                if k not in sm:
                    raise ScenarioFileError(f"missing key in [sim]: {k}")
            s = _number("sim", "s", sm["s"])
            seed = _number("sim", "seed", sm["seed"])
            if s != int(s) or seed != int(seed) or seed < 0:
                raise ScenarioFileError("[sim] s and seed must be non-negative integers")
            sim = SimConfig(int(s), _number("sim", "h", sm["h"]), int(seed))
    return ScenarioFile(scenario, spec, sim, probs)


def load_scenario(path: str) -> ScenarioFile:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_scenario(fh.read())
    except OSError as exc:
        raise ScenarioFileError(f"cannot read scenario file: {exc}") from None


def _fmt(v) -> str:
    if v is None:
        return ""
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    out = f"{v:.6f}"
    return "0.000000" if out == "-0.000000" else out


def _csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(c if isinstance(c, str) else _fmt(c) for c in row) + "\n")
    return buf.getvalue()


def _resolved(sf: ScenarioFile):
    sol = solve_shadow(sf.scenario)
    return sf.scenario.with_shadow(sol.shadow_x0), sol


def _need_sim(sf: ScenarioFile) -> SimConfig:
    if sf.sim is None:
        raise ScenarioFileError("this command needs a [sim] section with s, h and seed")
    return sf.sim


def cmd_shadow(sf: ScenarioFile, args) -> str:
    _, sol = _resolved(sf)
    return _csv(["shadow_x0", "residual", "iterations"], [(sol.shadow_x0, sol.residual, str(sol.iterations))])


def cmd_quantiles(sf: ScenarioFile, args) -> str:
    sc, _ = _resolved(sf)
    cfg = _need_sim(sf)
    batch = simulate(sc, sf.spec, cfg, workers=args.workers)
    summary = summarize(batch, sf.probabilities, sc.bounds.k_lower, sc.bounds.k_upper)
    rows = [(e.p, e.theoretical, e.empirical, e.deviation) for e in deviation_report(summary, terminal_law(sc))]
    return _csv(["p", "theoretical", "empirical", "deviation"], rows)


def cmd_simulate(sf: ScenarioFile, args) -> str:
    sc, _ = _resolved(sf)
    cfg = _need_sim(sf)
    dump = args.dump_path
    if dump is not None and not 0 <= dump[0] < cfg.s:
        raise ScenarioFileError(f"--dump-path index must be in [0, {cfg.s - 1}]")
    batch = simulate(sc, sf.spec, cfg, record_paths=dump is not None, workers=args.workers)
    if dump is not None:
        rec = batch[dump[0]]
        rows = zip(rec.times, rec.stock, rec.shadow, [None if math.isnan(a) else a for a in rec.invested], rec.wealth)
        _write(dump[1], _csv(["t", "stock", "shadow", "invested", "wealth"], rows))
    if args.histogram:
        summary = summarize(batch, sf.probabilities, bins=args.bins)
        edges = summary.hist_edges
        # 12 decimals keep the printed masses summing to 1 within 1e-9
        rows = ((lo, hi, f"{m:.12f}") for lo, hi, m in zip(edges[:-1], edges[1:], summary.hist_mass))
        _write(args.histogram, _csv(["lower", "upper", "mass"], rows))
    rows = ((str(i), w, x) for i, (w, x) in enumerate(zip(batch.terminal_wealth, batch.terminal_shadow)))
    return _csv(["path", "terminal_wealth", "terminal_shadow"], rows)


def cmd_probability(sf: ScenarioFile, args) -> str:
    sc = sf.scenario
    res = restriction_probabilities(sc.market, sc.investor.alpha, sc.investor.x0, args.convention)
    return _csv(["quantity", "value"], [("p_no_effect", res.p_no_effect), ("p_fully_constrained", res.p_fully_constrained)])


def cmd_price(sf: ScenarioFile, args) -> str:
    sc, _ = _resolved(sf)
    m, a = sc.market, sc.investor.alpha
    t = args.t
    m.check_time(t)
    if t >= m.T:
        raise DomainError("price reports need t < T")
    x = sc.effective_shadow_x0 * math.exp(m.r * t) if args.shadow_x is None else args.shadow_x
    kl, ku = sc.bounds.k_lower, sc.bounds.k_upper
    rows = [("t", t), ("shadow_x", x), ("optimal_amount", optimal_amount(m, a, t))]
    if kl is not None:
        rows += [
            ("d_lower", d_lower(m, a, kl, t, x)),
            ("put_price", put_price(m, a, kl, t, x)),
            ("put_fraction", put_replication_fraction(m, a, kl, t, x)),
        ]
    if ku is not None:
        rows += [
            ("d_upper", d_upper(m, a, ku, t, x)),
            ("call_price", call_price(m, a, ku, t, x)),
            ("call_fraction", call_replication_fraction(m, a, ku, t, x)),
        ]
    if not sf.spec.cap_investment:
        rows.append(("strategy_amount", strategy_amount(sf.spec, sc, t, x)))
    return _csv(["quantity", "value"], rows)


COMMANDS = {
    "shadow": cmd_shadow,
    "quantiles": cmd_quantiles,
    "simulate": cmd_simulate,
    "probability": cmd_probability,
    "price": cmd_price,
}


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cara-wealth", description="Exponential-utility strategies with wealth bounds.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--scenario", required=True, help="INI scenario file")
        p.add_argument("--out", default=None, help="output file (default stdout)")
        p.add_argument("--format", choices=["csv"], default="csv")
        if name in ("quantiles", "simulate"):
            p.add_argument("--workers", type=int, default=1, help="threads; results do not depend on it")
        if name == "simulate":
            p.add_argument("--dump-path", nargs=2, metavar=("INDEX", "FILE"), default=None)
            p.add_argument("--histogram", metavar="FILE", default=None)
            p.add_argument("--bins", type=int, default=50)
        if name == "probability":
            p.add_argument("--convention", choices=["published", "gbm"], default="published")
        if name == "price":
            p.add_argument("--t", type=float, default=0.0)
            p.add_argument("--shadow-x", type=float, default=None)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "dump_path", None) is not None:
        try:
            args.dump_path = (int(args.dump_path[0]), args.dump_path[1])
        except ValueError:
            print("error: --dump-path INDEX must be an integer", file=sys.stderr)
            return EXIT_INVALID
    if getattr(args, "workers", 1) < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    try:
        sf = load_scenario(args.scenario)
        text = COMMANDS[args.command](sf, args)
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ParameterError, DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    _write(args.out, text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
