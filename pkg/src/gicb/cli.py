"""
Command-line front end.

Commands: ``bounds``, ``region``, ``threshold-sweep``, ``network-bounds`` and
``verify``.  Exit codes: 0 success, 1 property failure, 2 input error,
3 domain error (for example strong interference or an infeasible genie).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import gaussian_core, network, two_user
from ._numeric import from_db
from ._parallel import pmap
from .channel_model import InterferenceNetwork, classify, is_many_to_one, is_one_to_many
from .errors import (DomainError, GICBError, InfeasibleGenieError, InputError, InvalidChannelError,
                     InvalidGenieError, InvalidOrderingError, LabelError, PreconditionError)
from .genies import GenieSpec2, GenieSpec3Sym
from .io import (__version__, csv_text, emit, json_text, load_channel,
                 parse_range, two_user_channel)
from .regions import CONTAIN_TOL
from .verify import VerifyConfig, run_suites

EXIT_OK, EXIT_PROPERTY, EXIT_INPUT, EXIT_DOMAIN = 0, 1, 2, 3

REGION_COLUMNS = ("R1", "R2_tin_corner", "R2_hk", "R2_etw", "R2_bc", "R2_epi")
SWEEP_COLUMNS = {
    "two-user": ("snr_db", "inr_db_two_user"),
    "three-user-sym": ("snr_db", "inr_total_db_vector_genie", "inr_db_two_user"),
}
DEFAULT_SWEEP = "0:60:5"
JSON_ONLY = ("bounds", "network-bounds", "verify")


@dataclass(frozen=True)
class RunConfig:
    """Validated command-line settings."""

    command: str
    channel: Optional[str] = None
    p1: Optional[float] = None
    p2: Optional[float] = None
    h12: Optional[float] = None
    h21: Optional[float] = None
    snr_db_range: Optional[str] = None
    mode: str = "two-user"
    out: Optional[str] = None
    fmt: Optional[str] = None
    tol: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        if self.tol is not None and not self.tol > 0:
            raise InputError("--tol must be positive")
        if self.snr_db_range is not None:
            parse_range(self.snr_db_range)
        if self.fmt == "csv" and self.command in JSON_ONLY:
            raise InputError(f"command {self.command} writes JSON only")

    def tolerances(self) -> dict:
        return {
            "psd": gaussian_core.PSD_TOL,
            "mutual_information": gaussian_core.MI_TOL,
            "pinv_rcond": gaussian_core.PINV_RCOND,
            "region_containment": CONTAIN_TOL,
            "genie_slack_floor": two_user.SLACK_FLOOR,
            "smart_genie": two_user.SMART_TOL,
            "three_user_psd": network.PSD_TOL,
            "override": self.tol,
        }


def _two_user_net(cfg: RunConfig) -> InterferenceNetwork:
    if cfg.channel is not None:
        net = load_channel(cfg.channel)
        if net.M != 2:
            raise InputError(f"command {cfg.command} needs a two-user channel, file has M={net.M}")
        return net
    vals = (cfg.p1, cfg.p2, cfg.h12, cfg.h21)
    if any(v is None for v in vals):
        raise InputError("give --channel or all of --p1 --p2 --h12 --h21")
    return two_user_channel(*vals)


def _header(cfg: RunConfig, net: Optional[InterferenceNetwork] = None) -> dict:
    out = {"tool": "gicb", "version": __version__, "command": cfg.command,
           "tolerances": cfg.tolerances()}
    if net is not None:
        out["channel"] = {"M": net.M, "H": net.H, "P": net.P, "class": classify(net).value}
    return out


def _describe(witness):
    if isinstance(witness, (GenieSpec2, GenieSpec3Sym)):
        return {"genie": type(witness).__name__, **witness.as_dict()}
    return witness


def _sum_result(res) -> dict:
    return {"established": res.established, "value": res.value,
            "inner": res.inner.value, "outer": res.outer.value, "gap": res.gap,
            "outer_source": _describe(res.outer.witness)}


# --------------------------------------------------------------------------
# Commands


def cmd_bounds(cfg: RunConfig) -> int:
    net = _two_user_net(cfg)
    two_user.require_weak(net)
    r1, r2 = two_user.tin_rates(net)
    lt = two_user.low_interference_test(net)
    epi = two_user.epi_outer_region(net)
    bc = two_user.broadcast_outer_region(net)
    report = _header(cfg, net)
    report.update({
        "tin": {"R1": r1, "R2": r2, "sum": r1 + r2},
        "low_interference": {"holds": lt.holds, "value": lt.value, "witness": _describe(lt.witness)},
        "etw_constraints": [{"a1": a, "a2": b, "c": c, "name": n}
                            for a, b, c, n in two_user.etw_constraints(net)],
        "broadcast_boundary": bc.boundary,
        "epi_boundary": epi.boundary,
        "epi_max_sum": epi.max_sum(),
        "sum_capacity": _sum_result(two_user.sum_capacity(net)),
    })
    _emit_json(cfg, report)
    return EXIT_OK


def region_table(net: InterferenceNetwork, n: int = 512) -> np.ndarray:
    """Rows ``(R1, R2_tin_corner, R2_hk, R2_etw, R2_bc, R2_epi)`` on ``n`` points of ``[0, C1]``.

    Entries are ``-inf`` where the region has no point at that ``R1``.
    """
    two_user.require_weak(net)
    r1 = np.linspace(0.0, two_user.capacity(net.P1), n)
    t1, t2 = two_user.tin_rates(net)
    tin = np.where(r1 <= t1 * (1 + 1e-12), t2, -np.inf)
    regions = (two_user.hk_gaussian_inner_region(net, n=n), two_user.etw_outer_region(net, n=n),
               two_user.broadcast_outer_region(net, n=n), two_user.epi_outer_region(net))
    return np.column_stack([r1, tin] + [reg.upper(r1) for reg in regions])


def cmd_region(cfg: RunConfig) -> int:
    net = _two_user_net(cfg)
    table = region_table(net)
    if (cfg.fmt or "csv") == "csv":
        emit(csv_text(REGION_COLUMNS, table), cfg.out)
    else:
        report = _header(cfg, net)
        report["columns"] = list(REGION_COLUMNS)
        report["rows"] = table
        _emit_json(cfg, report)
    return EXIT_OK


def _sweep_row(args):
    snr_db, mode = args
    snr = float(from_db(snr_db))
    two = two_user.inr_threshold(snr)
    if mode == "two-user":
        return (snr_db, two.inr_db), None
    three = network.three_user_inr_threshold(snr)
    return (snr_db, three.inr_total_db, two.inr_db), three


def cmd_threshold_sweep(cfg: RunConfig) -> int:
    snr_db = parse_range(cfg.snr_db_range or DEFAULT_SWEEP)
    out = pmap(_sweep_row, [(float(s), cfg.mode) for s in snr_db])
    rows = [r for r, _ in out]
    cols = SWEEP_COLUMNS[cfg.mode]
    if (cfg.fmt or "csv") == "csv":
        emit(csv_text(cols, rows), cfg.out)
    else:
        report = _header(cfg)
        report.update({"mode": cfg.mode, "columns": list(cols), "rows": rows})
        if cfg.mode == "three-user-sym":
            report["witnesses"] = [{"snr_db": r[0], "h": t.h, "witness": _describe(t.witness)}
                                   for r, t in out]
        _emit_json(cfg, report)
    return EXIT_OK


def _network_from_cfg(cfg: RunConfig) -> InterferenceNetwork:
    if cfg.channel is not None:
        return load_channel(cfg.channel)
    if cfg.mode == "three-user-sym":
        if cfg.p1 is None or cfg.h12 is None:
            raise InputError("three-user-sym needs --p1 (power) and --h12 (cross gain)")
        try:
            return InterferenceNetwork.symmetric(3, cfg.p1, cfg.h12)
        except GICBError as exc:
            raise InputError(str(exc)) from None
    return _two_user_net(cfg)


def cmd_network_bounds(cfg: RunConfig) -> int:
    net = _network_from_cfg(cfg)
    report = _header(cfg, net)
    report.update({
        "tin_sum_rate": network.m_user_tin_sum_rate(net),
        "single_user_sum": network.single_user_sum(net),
        "vector_genie_sum_bound": network.vector_genie_sum_bound(net),
    })
    if is_many_to_one(net):
        report["many_to_one"] = {"condition": network.many_to_one_condition_value(net),
                                 "sum_capacity": _sum_result(network.many_to_one_sum_capacity(net))}
    if is_one_to_many(net):
        test = network.one_to_many_test(net)
        report["one_to_many"] = {"condition": test.value, "lambda": test.lam,
                                 "sum_capacity": _sum_result(network.one_to_many_sum_capacity(net))}
    off = net.H[~np.eye(net.M, dtype=bool)]
    if net.M == 3 and np.all(off == off[0]) and np.all(net.P == net.P[0]):
        P, h = float(net.P[0]), float(off[0])
        res = network.three_user_feasible(P, h)
        entry = {"feasible": res.feasible, "score": res.score, "witness": _describe(res.witness)}
        if res.feasible:
            entry["sum_capacity"] = network.m_user_tin_sum_rate(net)
            entry["witness_sum_bound"] = network.three_user_genie_sum_bound(P, h, res.witness)
        report["three_user_symmetric"] = entry
    _emit_json(cfg, report)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    report = run_suites(VerifyConfig(seed=cfg.seed, tol=cfg.tol))
    doc = _header(cfg)
    doc.update(report.as_dict())
    _emit_json(cfg, doc)
    if not report.passed:
        for name in report.failures:
            print(f"property failed: {name}", file=sys.stderr)
        return EXIT_PROPERTY
    return EXIT_OK


def _emit_json(cfg: RunConfig, doc: dict):
    emit(json_text(doc), cfg.out)


COMMANDS = {
    "bounds": cmd_bounds,
    "region": cmd_region,
    "threshold-sweep": cmd_threshold_sweep,
    "network-bounds": cmd_network_bounds,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gicb", description="Gaussian interference channel bounds")
    parser.add_argument("--version", action="version", version=f"gicb {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--channel", help="JSON channel file with H, P and optional noise")
        for flag in ("--p1", "--p2", "--h12", "--h21"):
            p.add_argument(flag, type=float)
        p.add_argument("--snr-db-range", help="start:stop:step in dB")
        p.add_argument("--mode", choices=sorted(SWEEP_COLUMNS), default="two-user")
        p.add_argument("--out", help="output path (standard output if omitted)")
        p.add_argument("--format", dest="fmt", choices=("csv", "json"))
        p.add_argument("--tol", type=float, help="tolerance override for property checks")
        p.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        cfg = RunConfig(**vars(args))
        return COMMANDS[cfg.command](cfg)
    except (InputError, InvalidChannelError, InvalidGenieError, InvalidOrderingError,
            LabelError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DomainError, InfeasibleGenieError, PreconditionError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
