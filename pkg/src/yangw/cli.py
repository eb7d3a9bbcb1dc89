"""Command line driver: runs verification checks and writes JSON reports.

Exit status is 0 when every selected check passes, 1 on a verification
failure and 2 on a usage or configuration error.
"""
from __future__ import annotations

import argparse
import configparser
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .liealg import PartitionData, build_partition
from .modact import Mode, lin, vec_json, vec_text
from .scalars import ExactDomain, domains_for
from . import walgebra as wa
from . import yangian as ya

CHECKS = ("relations", "ev", "coproduct", "psi", "delta-l", "main-identity",
          "commutativity", "centralizer", "dzero", "emb")

# perturbation name per check, used for negative controls
PERTURBATIONS = {
    "relations": "h-sign: flip the sign of the hbar W1 W1 term in Phi(H_{i,1})",
    "ev": "x0-shift: add E_11 t to the image of X+_{0,0}",
    "coproduct": "drop-tail: remove the A_i tail from the coproduct",
    "psi": "drop-tail: remove the correction series from Psi1 and Psi2",
    "delta-l": "drop-D: omit the D_i family from the closed form",
    "main-identity": "no-gamma: drop the gamma term from W2",
    "commutativity": "shift-index: move the last factor's indices down by one",
    "centralizer": "mixing: use W1 modes that mix the first and second blocks",
    "dzero": "alpha: shift the alpha coefficient in d0(E_ij[-1]) by 1",
    "emb": "gamma: replace gamma_1 by gamma_1 + 1",
}

A_CHOICES = ya.A_CONVENTIONS + ("both", "all")


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    checks: list = field(default_factory=list)
    partition: str | None = None
    n: int = 3
    m: int = 1
    cutoff: int = 2
    mode: str = "symbolic"
    seed: int = 0
    points: int = 3
    a_convention: str = "all"
    perturb: bool = False
    derived: bool = False
    report: str | None = None

    def validate(self) -> None:
        for c in self.checks:
            if c not in CHECKS:
                raise UsageError(f"unknown check {c!r}")
        if self.cutoff < 0:
            raise UsageError("cutoff must be >= 0")
        if self.mode not in ("symbolic", "random"):
            raise UsageError(f"unknown mode {self.mode!r}")
        if self.mode == "random" and self.points < 2:
            raise UsageError("random mode needs at least 2 points")
        if self.a_convention not in A_CHOICES:
            raise UsageError(f"unknown a-convention {self.a_convention!r}")
        if self.partition is not None:
            self.partition_data()

    def partition_data(self) -> PartitionData:
        if self.partition is None:
            raise UsageError("this check needs --partition")
        try:
            return build_partition(self.partition)
        except (ValueError, TypeError) as exc:
            raise UsageError(str(exc)) from exc

    def conventions(self) -> list:
        if self.a_convention == "both":
            return ["theorem", "proof"]
        if self.a_convention == "all":
            return list(ya.A_CONVENTIONS)
        return [self.a_convention]


_INT_KEYS = ("n", "m", "cutoff", "seed", "points")
_BOOL_KEYS = ("perturb", "derived")


def load_config(path: str) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment.  ``checks`` is a
    comma separated list."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    text = Path(path).read_text()
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise UsageError(f"bad config file: {exc}") from exc
    out: dict = {}
    for key, val in parser["run"].items():
        key = key.replace("-", "_")
        if key not in RunConfig.__dataclass_fields__:
            raise UsageError(f"unknown config key {key!r}")
        if key == "checks":
            out[key] = [c.strip() for c in val.split(",") if c.strip()]
        elif key in _INT_KEYS:
            out[key] = int(val)
        elif key in _BOOL_KEYS:
            out[key] = val.strip().lower() in ("1", "true", "yes", "on")
        else:
            out[key] = val.strip()
    return out


# ---------------------------------------------------------------- checks

def _domains(cfg: RunConfig, eps_offset=None) -> list:
    return domains_for(cfg.mode, cfg.seed, cfg.points, eps_offset)


def _suite_json(rep: ya.SuiteReport) -> dict:
    fails = [asdict(r) for r in rep.failures]
    return {"label": rep.check, "ok": rep.ok, "instances": len(rep.results),
            "failures": fails[:20], "failure_count": len(fails)}


def _over_domains(cfg, eps_offset, body) -> tuple[bool, list]:
    parts, ok = [], True
    for dom in _domains(cfg, eps_offset):
        for rep in body(dom):
            entry = _suite_json(rep)
            entry["point"] = _point_json(dom)
            parts.append(entry)
            ok = ok and rep.ok
    return ok, parts


def _point_json(dom) -> dict | str:
    if dom.exact:
        return "symbolic"
    return {k: str(v) for k, v in dom.point().items()}


def check_relations(cfg: RunConfig) -> dict:
    P = cfg.partition_data()
    act = ya._require_active(P)
    h_sign = 1 if cfg.perturb else -1

    def body(dom):
        sp = wa.miura_space(P, dom)
        for a in act:
            yield ya.check_homomorphism(ya.phi(P, dom, a, sp, h_sign=h_sign).image(), sp, cfg.cutoff)
            params = ya.slot_params(P, dom, a, "negated")
            rho = ya.delta_l_compositional(P, dom, params)[a]
            yield ya.check_homomorphism(rho.image(), sp, cfg.cutoff)

    ok, parts = _over_domains(cfg, P.eps_offset(), body)
    return {"ok": ok, "suites": parts, "factors": act}


def _need_rank(n: int) -> None:
    if n < 3:
        raise UsageError(f"the affine Yangian of sl({n}) is not covered; need n >= 3")


def check_ev(cfg: RunConfig) -> dict:
    _need_rank(cfg.n)

    def body(dom):
        im, sp = ya.ev_image(cfg.n, dom)
        if cfg.perturb:
            im.base[("X+", 0, 0)] = lin([(1, im.base[("X+", 0, 0)]), (1, Mode(0, (0, 1, 1), 1))])
        yield ya.check_homomorphism(im, sp, cfg.cutoff)

    ok, parts = _over_domains(cfg, None, body)
    return {"ok": ok, "suites": parts}


def check_coproduct(cfg: RunConfig) -> dict:
    _need_rank(cfg.n)

    def body(dom):
        im, sp = ya.delta_ev_image(cfg.n, dom, tail=not cfg.perturb)
        yield ya.check_homomorphism(im, sp, cfg.cutoff)

    ok, parts = _over_domains(cfg, None, body)
    return {"ok": ok, "suites": parts}


def check_psi(cfg: RunConfig) -> dict:
    _need_rank(cfg.n)
    if cfg.m < 1:
        raise UsageError("psi needs m >= 1")
    tail = not cfg.perturb

    def body(dom):
        im, sp = ya.psi1_image(cfg.n, cfg.m, dom, tail)
        rep = ya.check_homomorphism(im, sp, cfg.cutoff)
        rep.check = "psi1 " + rep.check
        yield rep
        im, sp = ya.psi2_image(cfg.n, cfg.m, dom, tail)
        rep = ya.check_homomorphism(im, sp, cfg.cutoff)
        rep.check = "psi2 " + rep.check
        yield rep
        if cfg.m >= 3:
            yield ya.psi_cross_commutators(cfg.n, cfg.m, dom, cfg.cutoff, tail)

    ok, parts = _over_domains(cfg, None, body)
    return {"ok": ok, "suites": parts}


def check_delta_l(cfg: RunConfig) -> dict:
    P = cfg.partition_data()
    fams = "BC" if cfg.perturb else "BCD"

    def body(dom):
        yield ya.delta_l_consistency(P, dom, cfg.cutoff, "negated", families=fams)

    ok, parts = _over_domains(cfg, P.eps_offset(), body)
    return {"ok": ok, "suites": parts}


def check_main_identity(cfg: RunConfig) -> dict:
    P = cfg.partition_data()
    ya._require_active(P)
    verdicts = {}
    parts = []
    for conv in cfg.conventions():
        def body(dom, conv=conv):
            yield ya.main_identity_check(P, dom, cfg.cutoff, conv, gamma_term=not cfg.perturb)
        ok, sub = _over_domains(cfg, P.eps_offset(), body)
        for s in sub:
            s["a_convention"] = conv
        verdicts[conv] = ok
        parts += sub
    verified = [c for c, v in verdicts.items() if v]
    return {"ok": bool(verified), "suites": parts, "a_convention_verdicts": verdicts,
            "verified_a_conventions": verified}


def check_commutativity(cfg: RunConfig) -> dict:
    P = cfg.partition_data()
    act = ya._require_active(P)
    if len(act) < 2:
        raise UsageError(f"partition {P} has fewer than two Yangian factors")
    shift = -1 if cfg.perturb else 0

    def body(dom):
        yield ya.commutativity_check(P, dom, cfg.cutoff, shift, cfg.derived)

    ok, parts = _over_domains(cfg, P.eps_offset(), body)
    return {"ok": ok, "suites": parts}


def check_centralizer(cfg: RunConfig) -> dict:
    P = cfg.partition_data()
    try:
        ya._require_active(P)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if P.b[0] not in (1, 2):
        raise UsageError("centralizer check needs b_1 = 1 or 2")
    vacuous = True

    def body(dom):
        nonlocal vacuous
        rep = ya.centralizer_check(P, dom, cfg.cutoff, mixing=cfg.perturb)
        vacuous = vacuous and rep.info["vacuous"]
        yield rep

    ok, parts = _over_domains(cfg, P.eps_offset(), body)
    return {"ok": ok, "suites": parts, "vacuous": vacuous}


def check_dzero(cfg: RunConfig) -> dict:
    P = cfg.partition_data()
    perturb = {"alpha": 1} if cfg.perturb else None
    parts, ok = [], True
    for dom in _domains(cfg):
        rep = wa.dzero_check(P, dom, max(cfg.cutoff, 1), perturb)
        parts.append({"point": _point_json(dom), "ok": rep.ok,
                      "closure": [list(c) for c in rep.closure],
                      "square_checked": rep.checked_square,
                      "failures": [list(f) for f in rep.failures][:20]})
        ok = ok and rep.ok
    return {"ok": ok, "suites": parts}


def check_emb(cfg: RunConfig) -> dict:
    P = cfg.partition_data()
    if P.b[0] != 2:
        raise UsageError("emb check needs exactly two columns in the leading block")
    parts, ok = [], True
    for dom in _domains(cfg):
        rep = wa.emb_check(P, dom, gamma_perturb=1 if cfg.perturb else 0)
        d = asdict(rep)
        d["mismatches"] = d["mismatches"][:20]
        d["mismatch_count"] = len(rep.mismatches)
        d["point"] = _point_json(dom)
        parts.append(d)
        ok = ok and rep.ok
    return {"ok": ok, "suites": parts}


RUNNERS = {
    "relations": check_relations, "ev": check_ev, "coproduct": check_coproduct,
    "psi": check_psi, "delta-l": check_delta_l, "main-identity": check_main_identity,
    "commutativity": check_commutativity, "centralizer": check_centralizer,
    "dzero": check_dzero, "emb": check_emb,
}


def status_text(cfg: RunConfig, res: dict) -> str:
    if not res["ok"]:
        return "fail"
    if res.get("vacuous"):
        return "vacuous pass"
    return "exact pass" if cfg.mode == "symbolic" else "probabilistic pass"


def run(cfg: RunConfig) -> dict:
    """Execute the configured checks; returns the report dict."""
    cfg.validate()
    checks, timings = [], {}
    for name in cfg.checks:
        t0 = time.perf_counter()
        res = RUNNERS[name](cfg)
        timings[name] = round(time.perf_counter() - t0, 3)
        entry = {"check": name, "status": status_text(cfg, res)}
        entry.update(res)
        checks.append(entry)
    cfg_echo = asdict(cfg)
    cfg_echo.pop("report")
    return {"engine": f"yangw {__version__}", "config": cfg_echo,
            "ok": all(c["ok"] for c in checks), "checks": checks, "timings": timings}


def strip_timings(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "timings"}


# ---------------------------------------------------------------- artifacts

def generators_json(P: PartitionData, dom) -> dict:
    sp = wa.miura_space(P, dom)
    spb = wa.parabolic_space(P, dom, odd=False)
    out = {"partition": str(P), "miura": [], "cdet": []}
    for p in range(1, P.N + 1):
        for q in range(1, P.N + 1):
            if p > P.q[0] or q > P.q[0] or wa.block_of(P, p) != wa.block_of(P, q):
                continue
            out["miura"].append(wa.build_W1(P, p, q, sp).to_json(sp))
            out["miura"].append(wa.build_W2(P, p, q, sp).to_json(sp))
    for key, g in sorted(wa.cdet_generators(P, spb).items()):
        out["cdet"].append(g.to_json(spb))
    return out


def _latex_state(text: str) -> str:
    return text.replace("|0>", "").replace("psi", "\\psi").strip() or "0"


def generators_latex(P: PartitionData, dom) -> str:
    sp = wa.miura_space(P, dom)
    spb = wa.parabolic_space(P, dom, odd=False)
    lines = []
    m = P.q[0]
    for p in range(1, m + 1):
        for q in range(1, m + 1):
            if wa.block_of(P, p) != wa.block_of(P, q):
                continue
            for order, g in ((1, wa.build_W1(P, p, q, sp)), (2, wa.build_W2(P, p, q, sp))):
                lines.append(f"W^{{({order})}}_{{{p},{q}}} = {_latex_state(vec_text(g.state, dom))}")
    for (r, i, j), g in sorted(wa.cdet_generators(P, spb).items()):
        lines.append(f"\\widetilde{{W}}^{{({r})}}_{{{i},{j}}} = {_latex_state(vec_text(g.state, dom))}")
    return "\n".join(lines) + "\n"


def opes_artifact(P: PartitionData, dom, fmt: str):
    from .vertex import ope, ope_json, ope_latex
    sp = wa.miura_space(P, dom)
    m = P.na(1) - P.na(2)
    gens = {}
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            gens[f"W1[{i},{j}]"] = wa.build_W1(P, i, j, sp).state
            gens[f"W2[{i},{j}]"] = wa.build_W2(P, i, j, sp).state
    rows = []
    for a in sorted(gens):
        for b in sorted(gens):
            table = ope(sp, gens[a], gens[b])
            if fmt == "json":
                rows.append({"left": a, "right": b, "ope": ope_json(sp, table)})
            else:
                rows.append(ope_latex(sp, table, a, b))
    return {"partition": str(P), "opes": rows} if fmt == "json" else "\n".join(rows) + "\n"


def delta_terms_artifact(P: PartitionData, fmt: str):
    ya.check_block_sizes(P)
    out = []
    for a in P.active_factors():
        for i in range(1, P.factor_size(a)):
            terms = ya.closed_form_terms(P, a, i)
            out.append({"factor": a, "i": i,
                        "terms": [{**asdict(t), "text": t.text()} for t in terms]})
    if fmt == "json":
        return {"partition": str(P), "delta_terms": out}
    lines = []
    for blk in out:
        lines.append(f"% factor {blk['factor']}, i = {blk['i']}")
        lines += [f"{t['family']}: {t['text']}" for t in blk["terms"]]
    return "\n".join(lines) + "\n"


def _write(obj, fmt: str, out: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n" if fmt == "json" else obj
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- argparse

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--partition", help="column sizes, e.g. 4,1")
    p.add_argument("--cutoff", type=int, help="weight cutoff W")
    p.add_argument("--mode", choices=("symbolic", "random"))
    p.add_argument("--seed", type=int)
    p.add_argument("--points", type=int, help="sample points in random mode")
    p.add_argument("--a-convention", choices=A_CHOICES, dest="a_convention")
    p.add_argument("--n", type=int, help="rank for ev/coproduct/psi")
    p.add_argument("--m", type=int, help="second rank for psi")
    p.add_argument("--perturb", action="store_true", default=None,
                   help="apply the documented negative-control perturbation")
    p.add_argument("--derived", action="store_true", default=None,
                   help="include derived generator images (commutativity)")
    p.add_argument("--report", help="write the JSON report here")
    p.add_argument("--config", help="flat key = value config file")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="yangw", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in CHECKS:
        _common(sub.add_parser(f"check-{name}", help=f"run the {name} check"))
    r = sub.add_parser("run", help="run the checks listed in a config file")
    _common(r)
    r.add_argument("--checks", help="comma separated check names")
    w = sub.add_parser("wgen", help="print W1, W2 and cdet generators")
    w.add_argument("--partition", required=True)
    w.add_argument("--format", choices=("json", "latex"), default="json")
    w.add_argument("--out")
    e = sub.add_parser("emit", help="write generators, OPE tables or Delta_l terms")
    e.add_argument("artifact", choices=("generators", "opes", "delta-terms"))
    e.add_argument("--partition", required=True)
    e.add_argument("--format", choices=("json", "latex"), default="json")
    e.add_argument("--out")
    sub.add_parser("perturbations", help="list the negative-control perturbations")
    return ap


def config_from_args(args) -> RunConfig:
    values: dict = {}
    if getattr(args, "config", None):
        values.update(load_config(args.config))
    for key in ("partition", "cutoff", "mode", "seed", "points", "a_convention", "n", "m",
                "perturb", "derived", "report"):
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    if args.command.startswith("check-"):
        values["checks"] = [args.command[len("check-"):]]
    elif getattr(args, "checks", None):
        values["checks"] = [c.strip() for c in args.checks.split(",") if c.strip()]
    if not values.get("checks"):
        raise UsageError("no checks selected")
    return RunConfig(**values)


def _print_summary(report: dict) -> None:
    for c in report["checks"]:
        extra = ""
        if "verified_a_conventions" in c:
            extra = f"  (verified a-conventions: {', '.join(c['verified_a_conventions']) or 'none'})"
        print(f"{c['check']}: {c['status']}{extra}")
        if not c["ok"]:
            for s in c["suites"]:
                for f in s.get("failures", [])[:3]:
                    print(f"  {f}")


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.command == "perturbations":
            for k, v in PERTURBATIONS.items():
                print(f"{k}: {v}")
            return 0
        if args.command in ("wgen", "emit"):
            P = build_partition(args.partition)
            dom = ExactDomain()
            what = "generators" if args.command == "wgen" else args.artifact
            if what == "generators":
                obj = generators_json(P, dom) if args.format == "json" else generators_latex(P, dom)
            elif what == "opes":
                obj = opes_artifact(P, dom, args.format)
            else:
                obj = delta_terms_artifact(P, args.format)
            _write(obj, args.format, args.out)
            return 0
        cfg = config_from_args(args)
        report = run(cfg)
    except (UsageError, ValueError, OSError) as exc:
        print(f"yangw: error: {exc}", file=sys.stderr)
        return 2
    if cfg.report:
        Path(cfg.report).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    _print_summary(report)
    return 0 if report["ok"] else 1


if __name__ == "__main__":
    sys.exit(main())
