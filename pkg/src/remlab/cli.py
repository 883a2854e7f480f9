"""Batch front door: analytic curves, simulations, convergence studies.

Every run resolves its parameters (flags, optionally overridden by a JSON
config; the JSON wins with a warning), executes, and when ``--out`` is
given writes the result file plus a manifest echoing the resolved
parameters.  Feeding a manifest back through ``--config`` reproduces the
run byte for byte.  Exit codes: 0 success, 2 validation error, 3
enumeration budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__, analytic_rem
from .analytic_bk import BkSpec, bk_chain, bk_energy_min
from .analytic_grem import (
    GremSpec,
    beta_ladder,
    grem_curve,
    grem_energy,
    recover_params,
)
from .curves import FreeEnergyCurve, InvalidCurveError
from .external_field import FieldParams, WordSpec, rem_field_energy, word_grem_energy
from .simulator import (
    BudgetError,
    RemModel,
    TreeModel,
    converge,
    simulate,
)
from .simulator.converge import rows_to_csv

_REM_MODELS = {
    "rem-gaussian": ("gaussian", ()),
    "rem-exp": ("exponential", ()),
    "rem-exponential": ("exponential", ()),
    "rem-weibull": ("weibull", ("gamma",)),
    "rem-poisson": ("poisson", ("theta", "sign")),
    "rem-binomial": ("binomial", ("prob", "sign")),
    "rem-compact": ("compact", ("alpha",)),
    "rem-truncated-exp": ("truncated-exp", ("alpha",)),
    "rem-truncated-gauss": ("truncated-gauss", ("alpha",)),
}


class CliError(Exception):
    """Validation failure; message names the offending field."""


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.split(",") if tok != "")


def _parse_beta(text: str) -> np.ndarray:
    if ":" in text:
        lo, hi, step = (float(t) for t in text.split(":"))
        if step <= 0:
            raise CliError("invalid --beta: step must be > 0")
        return np.arange(lo, hi + 0.5 * step, step)
    return np.array(_parse_floats(text))


def _rem_rate_descriptor(name: str, ns) -> dict:
    kind, wanted = _REM_MODELS[name]
    if kind == "gaussian":
        return {"family": "gaussian", "params": []}
    if kind == "exponential":
        return {"family": "exponential", "params": []}
    if kind == "weibull":
        return {"family": "power-gamma", "params": [ns["gamma"]]}
    if kind == "poisson":
        fam = "poisson" if int(ns.get("sign") or 1) == 1 else "negated-poisson"
        return {"family": fam, "params": [ns["theta"]]}
    if kind == "binomial":
        fam = "binomial" if int(ns.get("sign") or 1) == 1 else "negated-binomial"
        return {"family": fam, "params": [ns["prob"]]}
    if kind == "truncated-exp":
        return {"family": "truncated-exponential", "params": [ns["alpha"]]}
    if kind == "truncated-gauss":
        # descriptor half-width = sqrt(2 * rate height)
        return {"family": "truncated-gaussian",
                "params": [float(np.sqrt(2.0 * ns["alpha"]))]}
    raise CliError(f"invalid --model: {name!r} has no driving distribution")


def _require(ns: dict, key: str, model: str):
    if ns.get(key) is None:
        raise CliError(f"missing --{key} for model {model!r}")
    return ns[key]


def _load_json(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _build_model(ns: dict):
    """Resolve the model object named by --model plus its parameter flags."""
    name = ns.get("model")
    if name is None:
        raise CliError("missing --model")
    if name in _REM_MODELS:
        kind, wanted = _REM_MODELS[name]
        for key in wanted:
            if key != "sign":
                _require(ns, key, name)
        if kind == "compact":
            return ("compact", float(ns["alpha"]))
        return RemModel(_rem_rate_descriptor(name, ns))
    if name == "rem-field":
        a = ns.get("a")
        weight = float(a[0]) if a else 1.0
        return FieldParams(weight, float(ns.get("h") or 0.0))
    if name == "grem":
        p = _require(ns, "p", name)
        a = _require(ns, "a", name)
        levels = ns.get("levels")
        if levels:
            return GremSpec.from_dict({"p": p, "a": a, "levels": levels})
        gamma = _require(ns, "gamma", name)
        return GremSpec.uniform(tuple(p), tuple(a), float(gamma))
    if name == "bk":
        spec = _load_json(_require(ns, "weights", name))
        return BkSpec.from_dict(spec)
    if name == "word":
        spec = _load_json(_require(ns, "words", name))
        return WordSpec.from_dict(spec)
    raise CliError(f"invalid --model: unknown model {name!r}")


def _analytic_values(model, ns: dict, betas: np.ndarray) -> np.ndarray:
    if isinstance(model, tuple) and model[0] == "compact":
        return np.array([analytic_rem.annealed_compact(model[1], b) for b in betas])
    if isinstance(model, RemModel):
        from .simulator.converge import analytic_reference

        return np.array([analytic_reference(model, b) for b in betas])
    if isinstance(model, FieldParams):
        return np.array([rem_field_energy(model, b) for b in betas])
    if isinstance(model, GremSpec):
        g = model.uniform_gamma
        if g is not None and g >= 1.0:
            return grem_curve(model)(betas)
        return np.array([grem_energy(model, b) for b in betas])
    if isinstance(model, BkSpec):
        return np.array([bk_energy_min(model, b) for b in betas])
    if isinstance(model, WordSpec):
        return np.array([word_grem_energy(model, b) for b in betas])
    raise CliError(f"invalid --model: no analytic curve for {type(model).__name__}")


def _emit(payload: str, ns: dict, suffix: str, resolved: dict) -> None:
    out = ns.get("out")
    if not out:
        sys.stdout.write(payload)
        return
    path = f"{out}.{suffix}"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(payload)
    manifest = {
        "tool": "remlab",
        "version": __version__,
        "command": ns["command"],
        "params": resolved,
    }
    with open(f"{out}.manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _resolved_params(ns: dict) -> dict:
    keep = {}
    for key, value in ns.items():
        if key in ("command", "config", "out", "format") or value is None:
            continue
        keep[key] = value
    return keep


def _csv_curve(betas: np.ndarray, values: np.ndarray) -> str:
    rows = ["beta,value"]
    for b, v in zip(betas, values):
        rows.append(f"{b:.17g},{v:.17g}")
    return "\n".join(rows) + "\n"


def _closed_curve(model, ns: dict):
    """The piecewise closed-form curve, when the model has one."""
    if isinstance(model, RemModel):
        name = ns["model"]
        kind, wanted = _REM_MODELS[name]
        params = {}
        if kind == "weibull":
            params["gamma"] = ns["gamma"]
        elif kind == "poisson":
            params.update(theta=ns["theta"], sign=int(ns.get("sign") or 1))
        elif kind == "binomial":
            params.update(p=ns["prob"], sign=int(ns.get("sign") or 1))
        elif kind.startswith("truncated") or kind == "compact":
            params["alpha"] = ns["alpha"]
        return analytic_rem.build_rem_curve(kind, **params)
    if isinstance(model, tuple) and model[0] == "compact":
        return analytic_rem.build_rem_curve("compact", alpha=model[1])
    if isinstance(model, GremSpec):
        g = model.uniform_gamma
        if g is not None and g >= 1.0:
            return grem_curve(model)
    return None


def _cmd_analytic(ns: dict) -> int:
    model = _build_model(ns)
    betas = _parse_beta(_require(ns, "beta", "analytic"))
    values = _analytic_values(model, ns, betas)
    if ns.get("format") == "json":
        body = {"beta": [float(b) for b in betas],
                "value": [float(v) for v in values]}
        curve = _closed_curve(model, ns)
        if curve is not None:
            body["curve"] = curve.to_dict()
        payload = json.dumps(body) + "\n"
        _emit(payload, ns, "json", _resolved_params(ns))
    else:
        _emit(_csv_curve(betas, values), ns, "csv", _resolved_params(ns))
    return 0


def _cmd_ladder(ns: dict) -> int:
    model = _build_model(ns)
    if isinstance(model, GremSpec):
        lad = beta_ladder(model)
        payload = json.dumps({"betas": list(lad.betas), "ranks": list(lad.ranks)}) + "\n"
    elif isinstance(model, BkSpec):
        chain = bk_chain(model)
        payload = json.dumps({
            "thresholds": list(chain.thresholds),
            "sets": [list(s) for s in chain.sets],
            "minimizing_permutations": chain.minimizing_permutation_count,
        }) + "\n"
    else:
        raise CliError("invalid --model: ladder needs a grem or bk model")
    _emit(payload, ns, "json", _resolved_params(ns))
    return 0


def _tree_model(ns: dict, model) -> TreeModel | None:
    name = ns.get("tree")
    if name is None:
        return None
    p = model.p if isinstance(model, GremSpec) else (1.0,)
    return TreeModel(name, tuple(p))


def _cmd_simulate(ns: dict) -> int:
    model = _build_model(ns)
    if isinstance(model, (tuple, FieldParams)):
        raise CliError(f"invalid --model: {ns['model']!r} cannot be simulated")
    betas = _parse_beta(_require(ns, "beta", "simulate"))
    if ns.get("seed") is None:
        raise CliError("missing --seed (required for stochastic commands)")
    result = simulate(
        model,
        int(_require(ns, "N", "simulate")),
        betas,
        replicas=int(ns.get("replicas") or 1),
        seed=int(ns["seed"]),
        tree=_tree_model(ns, model),
    )
    if ns.get("format") == "json":
        _emit(result.to_json() + "\n", ns, "json", _resolved_params(ns))
    else:
        _emit(result.to_csv(), ns, "csv", _resolved_params(ns))
    return 0


def _cmd_converge(ns: dict) -> int:
    model = _build_model(ns)
    if isinstance(model, (tuple, FieldParams)):
        raise CliError(f"invalid --model: {ns['model']!r} cannot be simulated")
    betas = _parse_beta(_require(ns, "beta", "converge"))
    if ns.get("seed") is None:
        raise CliError("missing --seed (required for stochastic commands)")
    n_list = [int(v) for v in _require(ns, "N_list", "converge")]
    trees = (ns.get("tree") or "fixed",)
    rows = converge(model, n_list, betas, replicas=int(ns.get("replicas") or 4),
                    seed=int(ns["seed"]), trees=trees)
    if ns.get("format") == "json":
        payload = json.dumps([{
            "tree": r.tree, "N": r.N, "beta": r.beta, "mean": r.mean,
            "std": r.std, "analytic": r.analytic, "abs_err": r.abs_err,
        } for r in rows]) + "\n"
        _emit(payload, ns, "json", _resolved_params(ns))
    else:
        _emit(rows_to_csv(rows), ns, "csv", _resolved_params(ns))
    return 0


def _cmd_recover(ns: dict) -> int:
    curve = FreeEnergyCurve.from_dict(_load_json(_require(ns, "curve", "recover")))
    family = ns.get("family") or "exp"
    if family == "gamma":
        family = ("gamma", float(_require(ns, "gamma", "recover")))
    spec = recover_params(curve, family)
    payload = json.dumps(spec.to_dict()) + "\n"
    _emit(payload, ns, "json", _resolved_params(ns))
    return 0


def _cmd_validate(ns: dict) -> int:
    model = _build_model(ns)
    name = type(model).__name__ if not isinstance(model, tuple) else "compact"
    sys.stdout.write(f"ok: {name}\n")
    return 0


_COMMANDS = {
    "analytic": _cmd_analytic,
    "simulate": _cmd_simulate,
    "converge": _cmd_converge,
    "ladder": _cmd_ladder,
    "recover": _cmd_recover,
    "validate": _cmd_validate,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="remlab",
        description="Free energies of random energy models: closed forms and simulation.",
    )
    parser.add_argument("--version", action="version", version=f"remlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config or manifest; overrides flags")
        p.add_argument("--model")
        p.add_argument("--p", type=_parse_floats)
        p.add_argument("--a", type=_parse_floats)
        p.add_argument("--gamma", type=float)
        p.add_argument("--theta", type=float)
        p.add_argument("--prob", type=float)
        p.add_argument("--sign", type=int, default=None)
        p.add_argument("--h", type=float)
        p.add_argument("--alpha", type=float)
        p.add_argument("--beta")
        p.add_argument("--N", type=int)
        p.add_argument("--N-list", dest="N_list", type=_parse_floats)
        p.add_argument("--seed", type=int)
        p.add_argument("--replicas", type=int)
        p.add_argument("--tree", choices=["fixed", "regular-poisson", "poisson",
                                          "multinomial1", "multinomial2"])
        p.add_argument("--weights", help="BkSpec JSON file")
        p.add_argument("--words", help="WordSpec JSON file")
        p.add_argument("--curve", help="FreeEnergyCurve JSON file")
        p.add_argument("--family", help="recover family: exp, gaussian or gamma")
        p.add_argument("--out")
        p.add_argument("--format", choices=["csv", "json"], default="csv")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    ns = vars(args)
    if ns.get("config"):
        try:
            loaded = _load_json(ns["config"])
        except (OSError, json.JSONDecodeError) as exc:
            sys.stderr.write(f"error: invalid --config: {exc}\n")
            return 2
        params = loaded.get("params", loaded)
        clash = [k for k, v in params.items()
                 if ns.get(k) is not None and ns[k] != v and k != "command"]
        if clash:
            sys.stderr.write(
                f"warning: --config overrides flags: {', '.join(sorted(clash))}\n")
        ns.update({k: v for k, v in params.items() if k != "command"})
        for key in ("p", "a", "N_list"):
            if isinstance(ns.get(key), list):
                ns[key] = tuple(ns[key])
    try:
        return _COMMANDS[ns["command"]](ns)
    except CliError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except BudgetError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 3
    except (ValueError, InvalidCurveError, OSError, KeyError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
