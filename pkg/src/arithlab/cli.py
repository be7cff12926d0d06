"""Command-line experiments with CSV/JSON output.

Every output file starts with an echo of the full configuration, so a file is
enough to rerun the experiment. Exit status: 0 success, 1 a computation budget
was exceeded, 2 usage or parameter error. Files are written atomically; a
failed run leaves nothing behind.

    arithlab profile --set omega:0:2 --s 2 --N 2048..131072
    arithlab classify --f liouville --format json
    arithlab run --config experiment.json
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Optional

import numpy as np

from . import __version__
from . import combinatorics as comb
from . import ergodic as erg
from . import gowers, pretentious, sieve, structure
from .characters import dirichlet_characters, primitive_characters

OUTPUT_DIR_ENV = "ARITHLAB_OUTPUT_DIR"
COMMON = ("out", "format", "seed", "threads")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# parameter syntax


def parse_int(text) -> int:
    """Integers as 1000, 1e6, 10**6 or 2^17."""
    if isinstance(text, (int, np.integer)):
        return int(text)
    t = str(text).strip()
    for op in ("**", "^"):
        if op in t:
            b, e = t.split(op)
            return int(b) ** int(e)
    if "e" in t.lower():
        v = float(t)
        if v != int(v):
            raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
        return int(v)
    return int(t)


def parse_int_list(text) -> list[int]:
    """'a,b,c' or 'a..b' (doubling from a up to b)."""
    if isinstance(text, list):
        return [parse_int(v) for v in text]
    t = str(text)
    if ".." in t:
        lo, hi = (parse_int(x) for x in t.split(".."))
        if lo < 1 or hi < lo:
            raise argparse.ArgumentTypeError(f"bad range {text!r}")
        out = []
        while lo <= hi:
            out.append(lo)
            lo *= 2
        return out
    return [parse_int(x) for x in t.split(",") if x]


def parse_set(text: str) -> sieve.ArithmeticSet:
    """omega:A:b, bigomega:A:b, omegafrac:lo-hi,...:alpha, squarefree, mod:A:q, all; '+c' shifts."""
    t = text.strip()
    shift = 0
    if "+" in t:
        t, s = t.rsplit("+", 1)
        shift = parse_int(s)
    kind, *args = t.split(":")
    try:
        if kind in ("omega", "bigomega"):
            res, b = args
            mk = sieve.omega_set if kind == "omega" else sieve.bigomega_set
            return mk([int(a) for a in res.split(",")], int(b), shift)
        if kind in ("omegafrac", "bigomegafrac"):
            ivs, alpha = args
            iv = [tuple(float(x) for x in p.split("-")) for p in ivs.split(",")]
            mk = sieve.omega_frac_set if kind == "omegafrac" else sieve.bigomega_frac_set
            return mk(iv, float(alpha), shift)
        if kind == "squarefree" and not args:
            return sieve.squarefree_set(shift)
        if kind in ("mod", "all"):
            S = sieve.periodic_set([int(a) for a in args[0].split(",")], int(args[1])) if kind == "mod" else sieve.natural_numbers()
            return S.shifted(shift) if shift else S
    except (ValueError, IndexError) as exc:
        raise UsageError(f"bad set {text!r}: {exc}") from None
    raise UsageError(f"unknown set {text!r}")


def _single_rule(text: str) -> sieve.MultiplicativeRule:
    name, *args = text.strip().split(":")
    simple = {
        "one": sieve.constant_one,
        "liouville": sieve.liouville,
        "mobius": sieve.mobius,
        "squarefree": sieve.squarefree_indicator,
    }
    try:
        if name in simple and not args:
            return simple[name]()
        if name in ("omega_root", "bigomega_root"):
            b = int(args[0])
            a = int(args[1]) if len(args) > 1 else 1
            zeta = complex(sieve.e(a / b))
            return (sieve.omega_root if name == "omega_root" else sieve.bigomega_root)(zeta)
        if name == "unimodular_omega":
            return sieve.unimodular_omega(float(args[0]))
        if name == "unimodular_bigomega":
            return sieve.unimodular_bigomega(float(args[0]))
        if name == "power_t":
            return sieve.power_t(float(args[0]))
        if name in ("chi", "prim"):
            q, i = int(args[0]), int(args[1])
            bank = dirichlet_characters(q) if name == "chi" else primitive_characters(q)
            return sieve.dirichlet_rule(bank[i], label=text)
    except (ValueError, IndexError) as exc:
        raise UsageError(f"bad function {text!r}: {exc}") from None
    raise UsageError(f"unknown function {text!r}")


def parse_rule(text: str) -> sieve.MultiplicativeRule:
    """Named multiplicative functions joined by '*', e.g. chi:4:1*power_t:0.5."""
    return reduce(lambda f, g: f * g, [_single_rule(p) for p in text.split("*")])


def _weights(params, table_for, N):
    if params.get("f"):
        f = parse_rule(params["f"])
        return sieve.weight_vector(f, table_for(N), N)
    if params.get("set"):
        S = parse_set(params["set"])
        return sieve.weight_vector(S, table_for(N + S.shift), N)
    raise UsageError("give a weight with --f or --set")


# ---------------------------------------------------------------------------
# configuration and output


@dataclass
class ExperimentConfig:
    command: str
    params: dict = field(default_factory=dict)
    out: Optional[str] = None
    format: str = "csv"
    seed: int = 0
    threads: Optional[int] = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        data = json.loads(text)
        unknown = set(data) - {"command", "params", "out", "format", "seed", "threads"}
        if unknown or "command" not in data:
            raise UsageError(f"bad config keys: {sorted(unknown) or 'missing command'}")
        return cls(**data)

    def echo(self) -> dict:
        """Parameters as recorded in the output header."""
        d = asdict(self)
        d.pop("out")
        d["version"] = __version__
        return d

    def output_path(self) -> str:
        if self.out:
            return self.out
        base = os.environ.get(OUTPUT_DIR_ENV, ".")
        return os.path.join(base, f"{self.command}.{self.format}")


@dataclass
class Result:
    columns: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)


def _plain(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, complex):
        raise TypeError("complex values must be split into Re/Im before output")
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    return v


def _cell(v) -> str:
    v = _plain(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, list):
        return " ".join(_cell(x) for x in v)
    return str(v)


def render(config: ExperimentConfig, result: Result) -> str:
    echo = config.echo()
    if config.format == "json":
        doc = {"config": echo, "columns": result.columns, "rows": _plain(result.rows), "summary": _plain(result.summary)}
        return json.dumps(doc, sort_keys=True, indent=1) + "\n"
    buf = io.StringIO()
    buf.write("# " + json.dumps(echo, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    if result.rows:
        w.writerow(result.columns)
        for row in result.rows:
            w.writerow([_cell(x) for x in row])
    else:
        w.writerow(["key", "value"])
        for k in sorted(result.summary):
            w.writerow([k, _cell(result.summary[k])])
    return buf.getvalue()


def write_atomic(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# command handlers; each takes (params, ctx) and returns a Result


class Context:
    def __init__(self, seed: int, threads: int):
        self.rng = np.random.default_rng(seed)
        self.threads = threads
        self._table = None

    def table(self, n_hi: int) -> sieve.FactorTable:
        n_hi = max(int(n_hi), 16)
        if self._table is None or self._table.n_max < n_hi:
            self._table = sieve.build_factor_table(n_hi)
        return self._table


def cmd_sieve(p, ctx) -> Result:
    N = p["N"]
    if p["mode"] == "table":
        T = ctx.table(N)
        n = np.arange(1, N + 1)
        lam = sieve.mult_values(sieve.liouville(), T, n).real.astype(int)
        mu = sieve.mult_values(sieve.mobius(), T, n).real.astype(int)
        rows = zip(n, T.spf[1 : N + 1], T.omega_values[1 : N + 1], T.big_omega_values[1 : N + 1], lam, mu)
        return Result(["n", "spf", "omega", "bigomega", "liouville", "mobius"], [list(map(int, r)) for r in rows])
    specs = p["set"] or [f"omega:{a}:{b}" for b in range(2, 7) for a in range(b)]
    rows = []
    for spec in specs:
        S = parse_set(spec)
        d = sieve.set_density(S, ctx.table(N + S.shift), N)
        lim = S.density
        rows.append([spec, N, d, lim, None if lim is None else abs(d - lim)])
    return Result(["set", "N", "density", "limit", "abs_error"], rows)


def cmd_norm(p, ctx) -> Result:
    rows = []
    for N in p["N"]:
        w = _weights(p, ctx.table, N).values
        if p["center"]:
            w = w - (parse_set(p["set"]).density if p.get("set") else w.mean())
        M = p["M"] or N
        val = gowers.restricted_norm(w, p["s"], M, base=p["base"], workers=ctx.threads, s_max=p["s_max"])
        rows.append([N, M, p["s"], val])
    return Result(["N", "M", "s", "norm"], rows)


def cmd_profile(p, ctx) -> Result:
    S = parse_set(p["set"])
    T = ctx.table(max(p["N"]) + S.shift)
    prof = gowers.gowers_uniform_profile(
        S, p["s"], p["N"], T, density=p["density"], base=p["base"], workers=ctx.threads, s_max=p["s_max"]
    )
    return Result(["N", "norm"], [list(r) for r in prof])


def cmd_decompose(p, ctx) -> Result:
    params = structure.KernelParams(p["Q"], p["V"])
    f = parse_rule(p["f"])
    N = structure.next_admissible_prime(p["s"], p["N"], p["Q"]) if p["admissible"] else p["N"]
    dec = structure.decompose(sieve.mult_values(f, ctx.table(N), np.arange(1, N + 1)), N, params)
    if p["values"]:
        buf = io.StringIO()
        dec.to_csv(buf)
        lines = list(csv.reader(io.StringIO(buf.getvalue())))
        return Result(lines[0], [[int(r[0])] + [float(x) for x in r[1:]] for r in lines[1:]])
    arcs = structure.major_arcs(N, params)
    return Result(
        summary={
            "N": N,
            "arc_size": len(arcs),
            "reconstruction_residual": dec.reconstruction_residual(),
            "st_bound": dec.st_bound(),
            "un_bound": dec.un_bound(),
            "off_arc_leakage": dec.off_arc_leakage(),
            "kernel_min": structure.kernel_signal(N, params).min_real,
        }
    )


def cmd_distance(p, ctx) -> Result:
    f, g = parse_rule(p["f"]), parse_rule(p["g"])
    tr = pretentious.distance_trace(f, g, p["P"], ctx.table(max(p["P"])))
    return Result(["P", "distance_sq"], [[int(c), float(v)] for c, v in zip(tr.cutoffs, tr.partial_sums)])


def cmd_classify(p, ctx) -> Result:
    opts = pretentious.ClassifyOptions(
        t_min=p["t_min"], t_max=p["t_max"], t_step=p["t_step"], q_max=p["q_max"], P=p["P"]
    )
    res = pretentious.classify(parse_rule(p["f"]), ctx.table(opts.P), opts)
    d = res.to_dict()
    d.pop("options")
    return Result(summary=d)


def _system(p):
    if p["system"] == "skew":
        return erg.make_skew_product(p["M"], p["a"])
    moduli = parse_int_list(p["moduli"])
    shifts = [parse_int_list(v) for v in str(p["shifts"]).split(";")]
    return erg.make_product_rotation(moduli, shifts)


def _polys(p, sys_):
    if p.get("poly_matrix"):
        return erg.PolynomialMatrix(json.loads(p["poly_matrix"]))
    coeffs = tuple(parse_int_list(p["poly"]))
    return erg.PolynomialMatrix.diagonal(sys_.ell, coeffs)


def _observables(p, sys_, polys, ctx):
    X = sys_.point_count
    if p["obs"] == "random":
        return [erg.random_unimodular(X, ctx.rng) for _ in range(polys.m)]
    M = p["M"] if p["system"] == "skew" else parse_int_list(p["moduli"])[-1]
    return [erg.Observable(sieve.e((np.arange(X) % M) / M))] * polys.m


def cmd_simulate(p, ctx) -> Result:
    sys_ = _system(p)
    polys = _polys(p, sys_)
    obs = _observables(p, sys_, polys, ctx)
    Ns = p["N"]
    if p["mode"] == "restricted":
        S = parse_set(p["set"])
        T = ctx.table(max(Ns) + S.shift)
        return Result(["N", "l2"], [[N, erg.restricted_vs_scaled(sys_, polys, obs, S, N, T)] for N in Ns])
    if p["mode"] == "structured":
        f = parse_rule(p["f"])
        top = max(Ns)
        dec = structure.decompose(sieve.mult_values(f, ctx.table(top), np.arange(1, top + 1)), top, structure.KernelParams(p["Q"], p["V"]))
        tr = erg.structured_weight_average(sys_, polys, obs, dec, Ns)
    else:
        w = _weights(p, ctx.table, max(Ns))
        tr = erg.weighted_average_trace(sys_, polys, obs, w, Ns)
    return Result(["N", "mean_re", "mean_im", "l2"], [list(r) for r in tr.rows()])


def cmd_recurrence(p, ctx) -> Result:
    sys_ = _system(p)
    polys = _polys(p, sys_)
    S = parse_set(p["set"])
    N = p["N"][0]
    res = erg.recurrence_scan(sys_, parse_int_list(p["A"]), polys, S, N, ctx.table(N + S.shift), include_base=not p["exclude_base"])
    return Result(
        summary={
            "N": N,
            "count": int(res.good.size),
            "density": res.density,
            "lower_density": res.lower_density,
            "first_good": res.good[:20].tolist(),
        }
    )


def cmd_density(p, ctx) -> Result:
    forms = comb.LinearFormSystem(tuple(tuple(parse_int_list(f)) for f in p["forms"].split(";")))
    S = parse_set(p["set"])
    rows = []
    for N in p["N"]:
        T = ctx.table(forms.max_value(N) + S.shift)
        d = comb.linear_forms_density(forms, S, N, T, workers=ctx.threads)
        target = S.density**forms.ell if S.density is not None else None
        rows.append([N, d, target])
    return Result(["N", "density", "target"], rows)


def cmd_ipk(p, ctx) -> Result:
    S = parse_set(p["set"])
    T = ctx.table(p["k"] * p["bound"] + S.shift)
    gens = comb.find_ipk(S, p["k"], p["bound"], T)
    out = {"found": gens is not None, "generators": list(gens or []), "k": p["k"]}
    if gens:
        out["sums"] = comb.subset_sums(gens)
        out["validated"] = comb.validate_ipk(S, gens, T)
    return Result(summary=out)


def cmd_ap_search(p, ctx) -> Result:
    N = p["N"][0]
    E_set = parse_set(p["E"])
    T = ctx.table(N + E_set.shift)
    E = sieve.set_values(E_set, T, np.arange(1, N + 1)) > 0
    S = parse_set(p["set"])
    hit = comb.ap_search(E, p["k"], S, ctx.table(N + S.shift))
    out = {"found": hit is not None, "k": p["k"]}
    if hit:
        out.update(start=hit[0], difference=hit[1], terms=[hit[0] + j * hit[1] for j in range(p["k"])])
        out["validated"] = comb.validate_ap(E, S, ctx.table(N + S.shift), hit[0], hit[1], p["k"])
    return Result(summary=out)


def cmd_lemma_check(p, ctx) -> Result:
    lemma = p["lemma"]
    if lemma == "partial":
        N = p["N"][0]
        mean, c = erg.partial_summation_check(p["alpha"], Fraction(p["beta"]), N)
        return Result(summary={"N": N, "mean_re": mean.real, "mean_im": mean.imag, "c_re": c.real, "c_im": c.imag, "abs_diff": abs(mean - c)})
    if lemma == "major-arc":
        f = parse_rule(p["f"])
        tr = structure.major_arc_fourier_trace(f, p["Q"], p["p"], p["xi"], p["N"], ctx.table(max(p["N"])))
        return Result(["N", "re", "im"], [[N, v.real, v.imag] for N, v in tr])
    if lemma == "linf-l1":
        rows = []
        for N in p["N"]:
            w = _weights(p, ctx.table, N).values
            lhs, rhs = gowers.linf_l1_bound_check(w, p["s"], s_max=p["s_max"])
            rows.append([N, p["s"], lhs, rhs])
        return Result(["N", "s", "lhs", "rhs"], rows)
    if lemma == "triangle":
        P = p["P"][0]
        lhs, rhs = pretentious.triangle_residuals(
            parse_rule(p["f1"]), parse_rule(p["f2"]), parse_rule(p["g1"]), parse_rule(p["g2"]), P, ctx.table(P)
        )
        return Result(summary={"P": P, "lhs": lhs, "rhs": rhs, "holds": lhs <= rhs + 1e-12})
    raise UsageError(f"unknown lemma {lemma!r}")


HANDLERS = {
    "sieve": cmd_sieve,
    "norm": cmd_norm,
    "profile": cmd_profile,
    "decompose": cmd_decompose,
    "distance": cmd_distance,
    "classify": cmd_classify,
    "simulate": cmd_simulate,
    "recurrence": cmd_recurrence,
    "density": cmd_density,
    "ipk": cmd_ipk,
    "ap-search": cmd_ap_search,
    "lemma-check": cmd_lemma_check,
}


# ---------------------------------------------------------------------------
# argument parsing


def _system_args(sp):
    sp.add_argument("--system", choices=["rotation", "skew"], default="rotation")
    sp.add_argument("--moduli", default="7", help="rotation group Z_m1 x ... (comma list)")
    sp.add_argument("--shifts", default="1;3", help="one shift vector per map, ';'-separated")
    sp.add_argument("--M", type=parse_int, default=64, help="skew product modulus")
    sp.add_argument("--a", type=parse_int, default=1, help="skew product step")
    sp.add_argument("--poly", default="0,1", help="coefficients (constant first), used on the diagonal")
    sp.add_argument("--poly-matrix", default=None, help="JSON list [map][observable] of coefficient lists")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help=f"output file ('-' for stdout); default ${OUTPUT_DIR_ENV}/<command>.<format>")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")

    parser = argparse.ArgumentParser(prog="arithlab", description="Experiments on multiplicative functions, Gowers norms and ergodic averages.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sieve", parents=[common], help="densities of arithmetic sets or raw factor tables")
    sp.add_argument("--N", type=parse_int, default=10**6)
    sp.add_argument("--set", action="append", default=None)
    sp.add_argument("--mode", choices=["densities", "table"], default="densities")

    weight = argparse.ArgumentParser(add_help=False)
    weight.add_argument("--f", default=None, help="multiplicative function, e.g. liouville or chi:4:1*power_t:0.5")
    weight.add_argument("--set", default=None, help="arithmetic set, e.g. omega:0:2+1")

    gow = argparse.ArgumentParser(add_help=False)
    gow.add_argument("--s", type=int, default=2)
    gow.add_argument("--s-max", type=int, default=gowers.S_MAX)
    gow.add_argument("--base", choices=["fft", "direct"], default="fft")

    sp = sub.add_parser("norm", parents=[common, weight, gow], help="U^s norm of 1_[N] w on Z_M")
    sp.add_argument("--N", type=parse_int_list, required=True)
    sp.add_argument("--M", type=parse_int, default=None)
    sp.add_argument("--center", action="store_true", help="subtract the density (sets) or the mean")

    sp = sub.add_parser("profile", parents=[common, gow], help="||1_S - density||_{U^s(Z_N)} over N")
    sp.add_argument("--set", required=True)
    sp.add_argument("--N", type=parse_int_list, required=True)
    sp.add_argument("--density", type=float, default=None)

    sp = sub.add_parser("decompose", parents=[common], help="structured/uniform split of f on Z_N")
    sp.add_argument("--f", required=True)
    sp.add_argument("--N", type=parse_int, required=True)
    sp.add_argument("--Q", type=parse_int, required=True)
    sp.add_argument("--V", type=parse_int, required=True)
    sp.add_argument("--s", type=int, default=2)
    sp.add_argument("--admissible", action="store_true", help="replace N by the next prime P > sN, P = 1 mod Q")
    sp.add_argument("--values", action="store_true", help="emit f, f_st, f_un for every n")

    sp = sub.add_parser("distance", parents=[common], help="truncated pretentious distance D(f, g)^2")
    sp.add_argument("--f", required=True)
    sp.add_argument("--g", default="one")
    sp.add_argument("--P", type=parse_int_list, default=[10**3, 10**4, 10**5, 10**6])

    sp = sub.add_parser("classify", parents=[common], help="scan D(f chi, n^it) and report a verdict")
    sp.add_argument("--f", required=True)
    defaults = pretentious.ClassifyOptions()
    sp.add_argument("--P", type=parse_int, default=defaults.P)
    sp.add_argument("--q-max", type=int, default=defaults.q_max)
    sp.add_argument("--t-min", type=float, default=defaults.t_min)
    sp.add_argument("--t-max", type=float, default=defaults.t_max)
    sp.add_argument("--t-step", type=float, default=defaults.t_step)

    sp = sub.add_parser("simulate", parents=[common, weight], help="weighted multiple ergodic averages")
    _system_args(sp)
    sp.add_argument("--mode", choices=["average", "restricted", "structured"], default="average")
    sp.add_argument("--obs", choices=["random", "phase"], default="random")
    sp.add_argument("--N", type=parse_int_list, required=True)
    sp.add_argument("--Q", type=parse_int, default=2)
    sp.add_argument("--V", type=parse_int, default=3)

    sp = sub.add_parser("recurrence", parents=[common], help="n in S with positive intersection measure")
    _system_args(sp)
    sp.add_argument("--A", required=True, help="points of A (comma list)")
    sp.add_argument("--set", default="all")
    sp.add_argument("--N", type=parse_int_list, required=True)
    sp.add_argument("--exclude-base", action="store_true", help="do not intersect with A itself")

    sp = sub.add_parser("density", parents=[common], help="density of m with every L_i(m) in S")
    sp.add_argument("--forms", required=True, help="coefficient rows, e.g. '1,1;1,2'")
    sp.add_argument("--set", required=True)
    sp.add_argument("--N", type=parse_int_list, required=True)

    sp = sub.add_parser("ipk", parents=[common], help="search an IP_k witness inside S")
    sp.add_argument("--set", required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--bound", type=parse_int, default=10**4)

    sp = sub.add_parser("ap-search", parents=[common], help="AP of length k in E with difference in S")
    sp.add_argument("--E", required=True, help="set whose trace on [N] is searched")
    sp.add_argument("--set", required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--N", type=parse_int_list, required=True)

    sp = sub.add_parser("lemma-check", parents=[common, weight], help="numeric checks of auxiliary estimates")
    sp.add_argument("--lemma", choices=["partial", "major-arc", "linf-l1", "triangle"], required=True)
    sp.add_argument("--N", type=parse_int_list, default=[10**5])
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.add_argument("--beta", default="1/2")
    sp.add_argument("--Q", type=parse_int, default=2)
    sp.add_argument("--p", type=parse_int, default=0)
    sp.add_argument("--xi", type=parse_int, default=0)
    sp.add_argument("--s", type=int, default=2)
    sp.add_argument("--s-max", type=int, default=gowers.S_MAX)
    sp.add_argument("--P", type=parse_int_list, default=[10**5])
    for name in ("f1", "f2", "g1", "g2"):
        sp.add_argument(f"--{name}", default="one")

    sp = sub.add_parser("run", help="run an experiment stored as JSON")
    sp.add_argument("--config", required=True)
    return parser


def _argv_for(config: ExperimentConfig) -> list[str]:
    argv = [config.command]
    for key, val in sorted(config.params.items()):
        flag = "--" + key.replace("_", "-")
        if val is None or val is False:
            continue
        if val is True:
            argv.append(flag)
        elif isinstance(val, list) and key == "set" and config.command == "sieve":
            for v in val:
                argv += [flag, str(v)]
        elif isinstance(val, list):
            argv += [flag, ",".join(str(v) for v in val)]
        else:
            argv += [flag, str(val)]
    argv += ["--format", config.format, "--seed", str(config.seed)]
    if config.out:
        argv += ["--out", config.out]
    if config.threads:
        argv += ["--threads", str(config.threads)]
    return argv


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    d = vars(ns).copy()
    command = d.pop("command")
    common = {k: d.pop(k) for k in COMMON}
    return ExperimentConfig(command, d, common["out"], common["format"], common["seed"], common["threads"])


def run(config: ExperimentConfig) -> int:
    """Normalize ``config`` through the parser, compute, write the artifact."""
    ns = build_parser().parse_args(_argv_for(config))
    config = config_from_args(ns)
    ctx = Context(config.seed, config.threads or os.cpu_count() or 1)
    result = HANDLERS[config.command](config.params, ctx)
    write_atomic(config.output_path(), render(config, result))
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if ns.command == "run":
            with open(ns.config, encoding="utf-8") as fh:
                config = ExperimentConfig.from_json(fh.read())
            if config.command not in HANDLERS:
                raise UsageError(f"unknown command {config.command!r}")
        else:
            config = config_from_args(ns)
        return run(config)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (sieve.BudgetExceeded, MemoryError) as exc:
        print(f"arithlab: budget exceeded: {exc}", file=sys.stderr)
        return 1
    except (UsageError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"arithlab: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
