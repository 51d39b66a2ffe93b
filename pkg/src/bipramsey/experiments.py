"""Seeded experiment drivers and CSV/JSON report emission.

Each experiment returns a :class:`Report`: flat rows for CSV, a summary dict,
and a verdict (True pass, False fail, None informational). Per-trial seeds
come from ``sub_seed(master, trial)`` so results do not depend on ``jobs``.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .config import load_defaults
from .construction import (ConstructionParams, ParameterError, PipelineFailure, StageFailure,
                           default_l, prepare_structure, run_pipeline, sample_u, theorem_harness,
                           verify_claims)
from .graph import (BipartiteGraph, build_graph, density, random_bipartite, random_bipartite_exact_edges,
                    sub_seed)
from .numtheory import (BudgetError, ford_estimate, hxyz, multiplication_table, multiplication_table_size,
                        phi_complete_bipartite)
from .ramsey import (diversity_check, is_c_bipartite_ramsey, pair_diversity_check, richness_check_exact,
                     richness_check_sampled, RICHNESS_EXACT_MAX)
from .spectrum import phi_exact, phi_sampled

CSV_SCHEMA = 1
TIMING_KEYS = ("wall_time",)
EXACT_PHI_BUDGET = 2**20
MTABLE_DENSE_MAX = 20_000


@dataclass
class Report:
    command: str
    rows: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    verdict: Optional[bool] = None
    default_format: str = "csv"

    @property
    def exit_code(self) -> int:
        return 1 if self.verdict is False else 0


def _jsonable(v):
    if isinstance(v, (bool, str, int, float)) or v is None:
        return v
    if isinstance(v, Fraction):
        return float(v)
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, set, frozenset)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "to_json"):
        return _jsonable(v.to_json())
    return str(v)


def _strip_timing(d: dict) -> dict:
    return {k: v for k, v in d.items() if k not in TIMING_KEYS}


def _csv_cell(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if v is None:
        return ""
    if isinstance(v, Fraction):
        return repr(float(v))
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (dict, list, tuple)):
        return json.dumps(_jsonable(v), separators=(",", ":"))
    return str(v)


def format_report(report: Report, fmt: Optional[str] = None, timestamp: Optional[str] = None) -> str:
    """Render a report; pass ``timestamp=None`` for byte-reproducible output."""
    fmt = fmt or report.default_format
    rows = report.rows if timestamp else [_strip_timing(r) for r in report.rows]
    summary = report.summary if timestamp else _strip_timing(report.summary)
    if fmt == "json":
        doc = {"command": report.command, "schema": CSV_SCHEMA}
        if timestamp:
            doc["timestamp"] = timestamp
        doc["verdict"] = report.verdict
        doc["summary"] = _jsonable(summary)
        doc["rows"] = _jsonable(rows)
        return json.dumps(doc, indent=2) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    buf.write(f"# bip-ramsey-lab {report.command} csv-schema {CSV_SCHEMA}\n")
    if timestamp:
        buf.write(f"# generated {timestamp}\n")
    verdict = {True: "pass", False: "fail", None: "info"}[report.verdict]
    buf.write(f"# verdict {verdict}\n")
    if rows and summary:
        buf.write("# summary " + json.dumps(_jsonable(summary), separators=(",", ":")) + "\n")
    cols: list[str] = []
    for r in rows:
        cols.extend(k for k in r if k not in cols)
    if not cols and summary:
        # no tabular rows: emit the summary as a single row
        rows = [{k: v for k, v in summary.items()}]
        cols = list(rows[0])
    if cols:
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_csv_cell(r.get(c)) for c in cols])
    return buf.getvalue()


def now_stamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def map_trials(fn: Callable, args: Sequence, jobs: int = 1) -> list:
    """Order-preserving map, optionally across processes."""
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(fn, args, chunksize=max(1, len(args) // (4 * jobs))))
    return [fn(a) for a in args]


# -- thin wrappers ---------------------------------------------------------------


def cmd_mtable(n: int) -> Report:
    if n < 0:
        raise ValueError("n must be non-negative")
    size = multiplication_table(n).cardinality if n <= MTABLE_DENSE_MAX else multiplication_table_size(n)
    row = {"n": n, "size": size, "size_over_n2": size / (n * n) if n else None}
    return Report("mtable", [row], {"n": n, "size": size})


def cmd_hxyz(x: int, y: float, z: float) -> Report:
    val = hxyz(x, y, z)
    return Report("hxyz", [{"x": x, "y": y, "z": z, "H": val, "H_over_x": val / x if x else None}])


def spectrum_of(g: BipartiteGraph, trials: int = 0, seed: int = 0, budget: int = EXACT_PHI_BUDGET, jobs: int = 1):
    """Exact spectrum when the smaller side fits the budget, else a sampled lower bound."""
    try:
        return phi_exact(g, budget=budget, jobs=jobs)
    except BudgetError:
        return phi_sampled(g, max(trials, 1), seed)


def cmd_phi(g: BipartiteGraph, trials: int = 0, seed: int = 0, window: Optional[int] = None,
            budget: int = EXACT_PHI_BUDGET, jobs: int = 1, sampled: bool = False) -> Report:
    t = time.perf_counter()
    rep = phi_sampled(g, max(trials, 1), seed) if sampled else spectrum_of(g, trials, seed, budget, jobs)
    summary = rep.to_json(window)
    summary.update(x_size=g.x_size, y_size=g.y_size, edges=g.edge_count, wall_time=time.perf_counter() - t)
    return Report("phi", [], summary, None, "json")


def cmd_ramsey(g: BipartiteGraph, C: float) -> Report:
    v = is_c_bipartite_ramsey(g, C)
    summary = v.to_json()
    if v.witness is not None and not v.witness.verify(g):
        raise RuntimeError("witness failed verification")
    return Report("ramsey", [], summary, v.is_ramsey, "json")


def cmd_diverse(g: BipartiteGraph, c: float, delta: float, alpha: Optional[float] = None,
                eps: Optional[float] = None, seed: int = 0) -> Report:
    if alpha is not None:
        rep = pair_diversity_check(g, alpha, delta, eps if eps is not None else c, seed=seed)
    else:
        rep = diversity_check(g, c, delta)
    return Report("diverse", [], rep.to_json(), rep.passes, "json")


def cmd_rich(g: BipartiteGraph, gamma: float, delta: float, eps: float, trials: int = 0, seed: int = 0) -> Report:
    if trials or max(g.x_size, g.y_size) > RICHNESS_EXACT_MAX:
        rep = richness_check_sampled(g, gamma, delta, eps, trials or 1000, seed)
    else:
        rep = richness_check_exact(g, gamma, delta, eps)
    return Report("rich", [], rep.to_json(), rep.passes, "json")


def cmd_construct(g: BipartiteGraph, params: ConstructionParams, l: Optional[float] = None,
                  harness: bool = False) -> Report:
    t = time.perf_counter()
    if harness:
        res = theorem_harness(g, params)
        window = max(1, math.ceil(g.m / math.sqrt(g.f)))
        summary = {"distinct_count": res.distinct_count, "failed_l": res.failed, "runs": res.runs,
                   "coverage_window": window, "coverage": [list(c) for c in res.coverage(window)],
                   "wall_time": time.perf_counter() - t}
        rows = [{"size": s} for s in res.sizes.values()]
        return Report("construct", rows, summary, res.distinct_count > 0, "json")
    l = default_l(g.oriented(), params) if l is None else l
    try:
        wit, fam = run_pipeline(g, l, params)
    except PipelineFailure as e:
        summary = {"stage": e.stage, "reason": e.reason, "attempts": e.attempts, "diagnostics": e.last,
                   "wall_time": time.perf_counter() - t}
        return Report("construct", [], summary, False, "json")
    summary = wit.to_json(fam)
    summary["wall_time"] = time.perf_counter() - t
    rows = [{"size": s, "k": k, "i": i, "z": z} for s, (k, i, z) in sorted(fam.certificates.items())]
    return Report("construct", rows, summary, True, "json")


# -- conjecture harness ----------------------------------------------------------


def conjecture_shapes(n: int, max_side: int) -> list[tuple[int, int]]:
    shapes = [(a, b) for a in range(1, max_side + 1) for b in range(a, max_side + 1) if a * b >= n * n]
    if not shapes:
        raise ValueError(f"no sides n1 <= n2 <= {max_side} with n1*n2 >= {n * n}")
    return shapes


def _conjecture_trial(args):
    n, shapes, seed, trial = args
    rng = np.random.default_rng(sub_seed(seed, trial))
    a, b = shapes[int(rng.integers(len(shapes)))]
    gseed = int(rng.integers(2**62))
    g = random_bipartite_exact_edges(a, b, n * n, gseed)
    t = time.perf_counter()
    rep = spectrum_of(g, 2000, gseed)
    return {"trial": trial, "seed": gseed, "n1": a, "n2": b, "phi": rep.phi, "method": rep.method,
            "wall_time": time.perf_counter() - t}


def cmd_conjecture(n: int, samples: int, seed: int, max_side: Optional[int] = None,
                   exhaustive: bool = False, jobs: int = 1) -> Report:
    """Compare Phi(G) with Phi(K_{n,n}) over graphs with exactly n^2 edges."""
    if n < 1:
        raise ValueError("n must be positive")
    max_side = max_side or 2 * n
    shapes = conjecture_shapes(n, max_side)
    target = phi_complete_bipartite(n, n)
    rows = []
    if exhaustive:
        total = sum(math.comb(a * b, n * n) for a, b in shapes)
        if total > 10**6:
            raise BudgetError(f"exhaustive search needs {total} graphs")
        for a, b in shapes:
            cells = [(i, j) for i in range(a) for j in range(b)]
            t = time.perf_counter()
            count = viol = 0
            worst = None
            for edges in itertools.combinations(cells, n * n):
                phi = phi_exact(build_graph(a, b, edges)).phi
                count += 1
                viol += phi < target
                worst = phi if worst is None else min(worst, phi)
            rows.append({"n1": a, "n2": b, "graphs": count, "min_phi": worst, "target": target,
                         "violations": viol, "method": "exact", "wall_time": time.perf_counter() - t})
        exact_viol = sum(r["violations"] for r in rows)
        min_ratio = min(r["min_phi"] for r in rows) / target
        summary = {"n": n, "target": target, "mode": "exhaustive", "graphs": total,
                   "violations": exact_viol, "min_ratio": min_ratio}
        return Report("conjecture", rows, summary, exact_viol == 0)
    results = map_trials(_conjecture_trial, [(n, shapes, seed, t) for t in range(samples)], jobs)
    exact_viol = sampled_below = 0
    for r in results:
        r["target"] = target
        r["ratio"] = r["phi"] / target
        r["violation"] = r["method"] == "exact" and r["phi"] < target
        exact_viol += r["violation"]
        sampled_below += r["method"] != "exact" and r["phi"] < target
        rows.append(r)
    summary = {"n": n, "target": target, "mode": "sampled", "samples": samples, "max_side": max_side,
               "violations": exact_viol, "sampled_lower_bounds_below_target": sampled_below,
               "min_ratio": min((r["ratio"] for r in rows), default=None)}
    return Report("conjecture", rows, summary, exact_viol == 0)


# -- density study ---------------------------------------------------------------


def density_study(graphs: Iterable[tuple[int, BipartiteGraph]], C: float, band=(0.4, 0.6)) -> Report:
    """Densities of the graphs (given as (seed, graph)) that pass the C-Ramsey test."""
    rows = []
    for trial, (seed, g) in enumerate(graphs):
        t = time.perf_counter()
        v = is_c_bipartite_ramsey(g, C)
        rows.append({"trial": trial, "seed": seed, "x_size": g.x_size, "y_size": g.y_size,
                     "density": float(density(g)), "is_ramsey": v.is_ramsey,
                     "exhaustive": v.search_exhaustive, "wall_time": time.perf_counter() - t})
    passing = [r["density"] for r in rows if r["is_ramsey"] and r["exhaustive"]]
    summary = {"C": C, "trials": len(rows), "passing": len(passing), "band": list(band)}
    verdict = None
    if passing:
        lo, hi = min(passing), max(passing)
        summary.update(min_density=lo, max_density=hi, empirical_eps=min(lo, 1 - hi))
        verdict = band[0] < lo and hi < band[1]
    return Report("density", rows, summary, verdict)


def cmd_density(n: int, trials: int, C: float, seed: int, band=(0.4, 0.6)) -> Report:
    seeds = [sub_seed(seed, t) for t in range(trials)]
    return density_study(((s, random_bipartite(n, n, 0.5, s)) for s in seeds), C, band)


# -- Ford comparison -------------------------------------------------------------


def cmd_ford(n_list: Sequence[int], band: Optional[Sequence[float]] = None,
             max_step: Optional[float] = None) -> Report:
    cfg = load_defaults()["ford"]
    band = band or cfg["ratio_band"]
    max_step = cfg["max_step_change"] if max_step is None else max_step
    rows = []
    for n in n_list:
        t = time.perf_counter()
        size = multiplication_table_size(n)
        est = ford_estimate(n)
        rows.append({"n": n, "mtable_size": size, "ford_estimate": est, "ratio": size / est,
                     "size_over_n2": size / (n * n), "wall_time": time.perf_counter() - t})
    ratios = [r["ratio"] for r in rows]
    in_band = all(band[0] < r < band[1] for r in ratios)
    steps = [abs(b / a - 1) for a, b in zip(ratios, ratios[1:])]
    slow = all(s <= max_step for s in steps)
    dens = [r["size_over_n2"] for r in rows]
    summary = {"band": list(band), "max_step_change": max_step, "ratios_in_band": in_band,
               "step_changes": steps, "slowly_varying": slow,
               "size_over_n2_decreasing": all(b < a for a, b in zip(dens, dens[1:]))}
    return Report("ford", rows, summary, in_band and slow)


# -- claim frequencies -----------------------------------------------------------

CLAIM_NAMES = ("claim1_edges", "claim2_untouched", "claim3_window", "claim4_symdiff", "claim5_equal_pairs")


def _claims_trial(args):
    n, seed, trial, params = args
    gseed = sub_seed(seed, trial)
    g = random_bipartite(n, n, 0.5, gseed)
    row = {"trial": trial, "seed": gseed}
    t = time.perf_counter()
    try:
        st = prepare_structure(g, params)
    except StageFailure as e:
        row.update({k: False for k in CLAIM_NAMES})
        row["error"] = str(e)
        row["wall_time"] = time.perf_counter() - t
        return row
    h = st.graph
    l = default_l(h, params)
    U, p = sample_u(h, l, sub_seed(gseed, 1), params.c)
    d = verify_claims(h, U, st.A, l, p, st.d_dprime, params)
    row.update(dict(zip(CLAIM_NAMES, d.ok)))
    row.update({"A": len(st.A), "edge_deviation": d.edge_deviation, "untouched_fraction": d.untouched_fraction,
                "window_fraction": d.window_fraction, "min_symdiff": d.min_symdiff,
                "equal_pairs": d.equal_pairs, "error": "", "wall_time": time.perf_counter() - t})
    return row


def cmd_claims(n: int, trials: int, params: ConstructionParams, seed: int, floor: Optional[float] = None,
               jobs: int = 1) -> Report:
    floor = load_defaults()["claims"]["frequency_floor"] if floor is None else floor
    rows = map_trials(_claims_trial, [(n, seed, t, params) for t in range(trials)], jobs)
    freq = {k: (sum(r[k] for r in rows) / trials if trials else None) for k in CLAIM_NAMES}
    summary = {"n": n, "trials": trials, "floor": floor, "frequencies": freq}
    verdict = all(f >= floor for f in freq.values()) if trials else None
    return Report("claims", rows, summary, verdict)


__all__ = ["Report", "format_report", "now_stamp", "map_trials", "cmd_mtable", "cmd_hxyz", "cmd_phi",
           "cmd_ramsey", "cmd_diverse", "cmd_rich", "cmd_construct", "cmd_conjecture", "conjecture_shapes",
           "density_study", "cmd_density", "cmd_ford", "cmd_claims", "CLAIM_NAMES", "ParameterError"]
