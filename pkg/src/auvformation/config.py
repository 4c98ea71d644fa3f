"""Scenario configuration: JSON schema, defaults, and validation.

A config file is a JSON object with optional sections ``agents``, ``graph``,
``formation``, ``leader``, ``controller``, ``sim``, ``fuzzy``, ``initial``.
Every omitted section or key falls back to the shipped default scenario (four
identical vehicles on a pinned chain graph, square formation, exponential-
approach leader, adaptive saturated controller, disturbance on).  Unknown keys
are rejected.

Structural problems (unknown key, wrong type, wrong length) raise SchemaError
with a JSON-pointer-style path; semantic problems (asymmetric adjacency,
nonpositive dt, offsets that do not match the graph) raise ValidationError.

Agent indices inside config files are 1-based, matching the CSV column
convention; they are converted to 0-based internally.
"""

import json

import numpy as np

from .control import BaselineGains, DisturbanceBound, FtGains
from .errors import SchemaError, ValidationError
from .fuzzy import FuzzyNet
from .sim import CONTROLLERS, LeaderPath, Scenario
from .topology import FormationGraph, FormationSpec, validate_formation
from .vehicle import AuvParams, AuvState

DEFAULT_ADJACENCY = (
    (0.0, 1.0, 0.0, 0.0),
    (1.0, 0.0, 1.0, 0.0),
    (0.0, 1.0, 0.0, 1.0),
    (0.0, 0.0, 1.0, 0.0),
)
DEFAULT_PINNING = (1.0, 0.0, 0.0, 0.0)
DEFAULT_OFFSETS = (
    (1, 2, (0.0, 10.0, 0.0)),
    (2, 1, (0.0, -10.0, 0.0)),
    (2, 3, (-10.0, 0.0, 0.0)),
    (3, 2, (10.0, 0.0, 0.0)),
    (3, 4, (0.0, -10.0, 0.0)),
    (4, 3, (0.0, 10.0, 0.0)),
)
DEFAULT_LEADER_OFFSETS = ((1, (20.0, 0.0, 0.0)),)
DEFAULT_INITIAL_ETA = (
    (2.0, 3.0, 3.0, 0.3, 0.0, 0.2),
    (2.5, 3.5, 3.0, 0.2, 0.0, 0.25),
    (2.0, 3.0, 3.0, 0.3, 0.0, 0.2),
    (3.0, 3.0, 2.0, 0.3, 0.0, 0.2),
)

_FT_GAIN_KEYS = ("k1", "k2", "k3", "k8", "k9", "k10", "gamma", "iota",
                 "beta_s", "eps_bl", "eps_sing", "w1", "w2")
_BASELINE_GAIN_KEYS = ("k1", "beta0", "eps_bl")


def _object(value, path):
    if not isinstance(value, dict):
        raise SchemaError(path, f"expected an object, got {type(value).__name__}")
    return value


def _array(value, path):
    if not isinstance(value, list):
        raise SchemaError(path, f"expected an array, got {type(value).__name__}")
    return value


def _number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(path, f"expected a number, got {type(value).__name__}")
    return float(value)


def _integer(value, path):
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(path, f"expected an integer, got {type(value).__name__}")
    return int(value)


def _boolean(value, path):
    if not isinstance(value, bool):
        raise SchemaError(path, f"expected a boolean, got {type(value).__name__}")
    return value


def _string(value, path):
    if not isinstance(value, str):
        raise SchemaError(path, f"expected a string, got {type(value).__name__}")
    return value


def _vector(value, path, *sizes):
    arr = _array(value, path)
    if len(arr) not in sizes:
        raise SchemaError(path, f"expected {' or '.join(map(str, sizes))} numbers, got {len(arr)}")
    return [_number(v, f"{path}/{k}") for k, v in enumerate(arr)]


def _reject_unknown(doc, path, allowed):
    for key in doc:
        if key not in allowed:
            raise SchemaError(f"{path}/{key}", "unknown key")


def _agent_index(value, path, n):
    idx = _integer(value, path)
    if not 1 <= idx <= n:
        raise ValidationError(f"{path}: agent index {idx} out of range 1..{n}")
    return idx - 1


def _parse_agent(doc, path):
    doc = _object(doc, path)
    _reject_unknown(doc, path, ("m", "inertia", "lin_drag", "added_mass", "tau_max"))
    kwargs = {}
    if "m" in doc:
        kwargs["m"] = _number(doc["m"], f"{path}/m")
    if "inertia" in doc:
        kwargs["inertia"] = _vector(doc["inertia"], f"{path}/inertia", 3)
    if "lin_drag" in doc:
        kwargs["lin_drag"] = _vector(doc["lin_drag"], f"{path}/lin_drag", 6)
    if "added_mass" in doc:
        kwargs["added_mass"] = _vector(doc["added_mass"], f"{path}/added_mass", 6)
    if "tau_max" in doc:
        kwargs["tau_max"] = _number(doc["tau_max"], f"{path}/tau_max")
    try:
        return AuvParams(**kwargs)
    except ValueError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def _parse_graph(doc):
    doc = _object(doc, "graph")
    _reject_unknown(doc, "graph", ("adjacency", "pinning"))
    adjacency = doc.get("adjacency", [list(r) for r in DEFAULT_ADJACENCY])
    pinning = doc.get("pinning", list(DEFAULT_PINNING))
    rows = _array(adjacency, "graph/adjacency")
    n = len(rows)
    matrix = [_vector(r, f"graph/adjacency/{i}", n) for i, r in enumerate(rows)]
    pin = _vector(pinning, "graph/pinning", n)
    for i in range(n):
        for j in range(i + 1, n):
            if matrix[i][j] != matrix[j][i]:
                raise ValidationError(
                    f"graph.adjacency[{i + 1}][{j + 1}] != adjacency[{j + 1}][{i + 1}] "
                    f"({matrix[i][j]} vs {matrix[j][i]}): adjacency must be symmetric"
                )
    try:
        return FormationGraph(np.array(matrix), np.array(pin))
    except ValueError as exc:
        raise ValidationError(f"graph: {exc}") from exc


def _parse_formation(doc, n):
    doc = _object(doc, "formation")
    _reject_unknown(doc, "formation", ("offsets", "leader_offsets"))
    if "offsets" in doc:
        offsets = {}
        for k, entry in enumerate(_array(doc["offsets"], "formation/offsets")):
            path = f"formation/offsets/{k}"
            entry = _object(entry, path)
            _reject_unknown(entry, path, ("i", "j", "delta"))
            for key in ("i", "j", "delta"):
                if key not in entry:
                    raise SchemaError(f"{path}/{key}", "missing required key")
            i = _agent_index(entry["i"], f"{path}/i", n)
            j = _agent_index(entry["j"], f"{path}/j", n)
            offsets[(i, j)] = _vector(entry["delta"], f"{path}/delta", 3, 6)
    else:
        offsets = {(i - 1, j - 1): list(d) for i, j, d in DEFAULT_OFFSETS}
    if "leader_offsets" in doc:
        leader_offsets = {}
        for k, entry in enumerate(_array(doc["leader_offsets"], "formation/leader_offsets")):
            path = f"formation/leader_offsets/{k}"
            entry = _object(entry, path)
            _reject_unknown(entry, path, ("i", "delta"))
            for key in ("i", "delta"):
                if key not in entry:
                    raise SchemaError(f"{path}/{key}", "missing required key")
            i = _agent_index(entry["i"], f"{path}/i", n)
            leader_offsets[i] = _vector(entry["delta"], f"{path}/delta", 3, 6)
    else:
        leader_offsets = {i - 1: list(d) for i, d in DEFAULT_LEADER_OFFSETS}
    try:
        return FormationSpec(offsets, leader_offsets)
    except ValueError as exc:
        raise ValidationError(f"formation: {exc}") from exc


def _parse_leader(doc):
    doc = _object(doc, "leader")
    _reject_unknown(doc, "leader", ("type", "params"))
    kind = _string(doc.get("type", "exp_approach"), "leader/type")
    params = _object(doc.get("params", {}), "leader/params")
    if kind == "exp_approach":
        _reject_unknown(params, "leader/params", ("amplitude", "rate", "vy", "vz"))
        kwargs = {
            key: _number(params[key], f"leader/params/{key}")
            for key in ("amplitude", "rate", "vy", "vz")
            if key in params
        }
        try:
            return LeaderPath("exp_approach", **kwargs)
        except ValueError as exc:
            raise ValidationError(f"leader: {exc}") from exc
    if kind == "constant":
        _reject_unknown(params, "leader/params", ("pose",))
        pose = _vector(params.get("pose", [0.0] * 6), "leader/params/pose", 6)
        return LeaderPath("constant", pose=tuple(pose))
    raise ValidationError(f"leader.type must be 'exp_approach' or 'constant', got {kind!r}")


def _parse_gains(doc, controller):
    if controller == "baseline_smc":
        _reject_unknown(doc, "controller/gains", _BASELINE_GAIN_KEYS)
        kwargs = {k: _number(doc[k], f"controller/gains/{k}") for k in doc}
        try:
            return BaselineGains(**kwargs)
        except ValueError as exc:
            raise ValidationError(f"controller.gains: {exc}") from exc
    _reject_unknown(doc, "controller/gains", _FT_GAIN_KEYS)
    kwargs = {k: _number(doc[k], f"controller/gains/{k}") for k in doc}
    try:
        return FtGains(**kwargs)
    except ValueError as exc:
        raise ValidationError(f"controller.gains: {exc}") from exc


def _parse_controller(doc, n, force=None):
    doc = _object(doc, "controller")
    _reject_unknown(doc, "controller", ("name", "gains", "smooth", "lambda_tilde"))
    name = _string(doc.get("name", "adaptive_sat"), "controller/name")
    if name not in CONTROLLERS:
        raise ValidationError(
            f"controller.name must be one of {', '.join(CONTROLLERS)}, got {name!r}"
        )
    if force is not None and force != name:
        # forced branch (compare command): keep config gains only if compatible
        compatible = (name != "baseline_smc") == (force != "baseline_smc")
        name = force
        if not compatible:
            doc = {k: v for k, v in doc.items() if k not in ("gains",)}
    gains = _parse_gains(_object(doc.get("gains", {}), "controller/gains"), name)
    smooth = _boolean(doc.get("smooth", True), "controller/smooth")
    bound = None
    if "lambda_tilde" in doc:
        lam = _vector(doc["lambda_tilde"], "controller/lambda_tilde", n)
        try:
            bound = DisturbanceBound(lam)
        except ValueError as exc:
            raise ValidationError(f"controller.lambda_tilde: {exc}") from exc
    return name, gains, smooth, bound


def _parse_sim(doc):
    doc = _object(doc, "sim")
    allowed = ("dt", "t_end", "kappa", "disturbance_on", "seed",
               "l1", "l2", "theta_bound")
    _reject_unknown(doc, "sim", allowed)
    out = {
        "dt": 1e-3, "t_end": 20.0, "kappa": 0.5, "disturbance_on": True,
        "seed": 0, "l1": 0.5, "l2": 0.5, "theta_bound": 0.0,
    }
    for key in ("dt", "t_end", "kappa", "l1", "l2", "theta_bound"):
        if key in doc:
            out[key] = _number(doc[key], f"sim/{key}")
    if "seed" in doc:
        out["seed"] = _integer(doc["seed"], "sim/seed")
    if "disturbance_on" in doc:
        out["disturbance_on"] = _boolean(doc["disturbance_on"], "sim/disturbance_on")
    if out["dt"] <= 0.0:
        raise ValidationError("sim.dt must be positive")
    if out["t_end"] < out["dt"]:
        raise ValidationError("sim.t_end must be at least sim.dt")
    if not 0.0 < out["kappa"] < 1.0:
        raise ValidationError("sim.kappa must lie in (0, 1)")
    if out["l1"] <= 0.0 or out["l2"] <= 0.0:
        raise ValidationError("sim.l1 and sim.l2 must be positive")
    if out["theta_bound"] < 0.0:
        raise ValidationError("sim.theta_bound must be nonnegative")
    return out


def _parse_fuzzy(doc):
    doc = _object(doc, "fuzzy")
    _reject_unknown(doc, "fuzzy", ("centers", "width"))
    kwargs = {}
    if "centers" in doc:
        centers = _array(doc["centers"], "fuzzy/centers")
        kwargs["centers"] = [_number(c, f"fuzzy/centers/{k}") for k, c in enumerate(centers)]
    if "width" in doc:
        kwargs["width"] = _number(doc["width"], "fuzzy/width")
    try:
        return FuzzyNet(**kwargs)
    except ValueError as exc:
        raise ValidationError(f"fuzzy: {exc}") from exc


def _parse_initial(doc, n):
    entries = _array(doc, "initial")
    if len(entries) != n:
        raise ValidationError(f"initial must list {n} states, got {len(entries)}")
    states = []
    for k, entry in enumerate(entries):
        path = f"initial/{k}"
        entry = _object(entry, path)
        _reject_unknown(entry, path, ("eta", "nu"))
        eta = _vector(entry.get("eta", [0.0] * 6), f"{path}/eta", 6)
        nu = _vector(entry.get("nu", [0.0] * 6), f"{path}/nu", 6)
        # the pitch guard is a simulation-abort condition, not a schema problem,
        # so AttitudeSingularity propagates for the CLI to map to exit code 2
        states.append(AuvState(eta, nu))
    return tuple(states)


def build_scenario(doc: dict, force_controller: str = None) -> Scenario:
    """Validate a parsed JSON document and assemble the scenario."""
    doc = _object(doc, "")
    _reject_unknown(doc, "", ("agents", "graph", "formation", "leader",
                              "controller", "sim", "fuzzy", "initial"))
    graph = _parse_graph(doc.get("graph", {}))
    n = graph.n
    if "agents" in doc:
        entries = _array(doc["agents"], "agents")
        if len(entries) != n:
            raise ValidationError(f"agents must list {n} entries, got {len(entries)}")
        agents = tuple(_parse_agent(e, f"agents/{k}") for k, e in enumerate(entries))
    else:
        agents = tuple(AuvParams() for _ in range(n))
    formation = _parse_formation(doc.get("formation", {}), n)
    try:
        validate_formation(graph, formation)
    except ValueError as exc:
        raise ValidationError(f"formation: {exc}") from exc
    leader = _parse_leader(doc.get("leader", {}))
    name, gains, smooth, bound = _parse_controller(
        doc.get("controller", {}), n, force_controller
    )
    sim_kwargs = _parse_sim(doc.get("sim", {}))
    net = _parse_fuzzy(doc.get("fuzzy", {}))
    if "initial" in doc:
        initial = _parse_initial(doc["initial"], n)
    elif n == len(DEFAULT_INITIAL_ETA):
        initial = tuple(AuvState(eta, [0.0] * 6) for eta in DEFAULT_INITIAL_ETA)
    else:
        raise ValidationError(
            f"initial states are required when the graph has {n} agents"
        )
    try:
        return Scenario(
            agents=agents, graph=graph, formation=formation, leader=leader,
            controller=name, gains=gains, initial=initial,
            smooth_switching=smooth, fuzzy_net=net, disturbance_bound=bound,
            **sim_kwargs,
        )
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc


def load_document(path) -> dict:
    """Read and parse a JSON config file, mapping parse failures to SchemaError."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"invalid JSON: {exc}") from exc


def parse_config(path) -> Scenario:
    """Load, validate, and default-fill a scenario config file."""
    return build_scenario(load_document(path))


def default_scenario(controller: str = None) -> Scenario:
    """The shipped scenario (empty config), optionally forcing the controller."""
    return build_scenario({}, force_controller=controller)
