"""Strict run configuration documents.

A config is a YAML mapping.  Nesting can be written as blocks or as dotted
keys (``sampler.count: 501``); both forms flatten to the same dotted paths,
which are checked against :data:`SCHEMA`.  Unknown keys are rejected, and
every error carries a machine-readable code, the key path and the line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import yaml

from .errors import ConfigError

COMMANDS = ("axioms", "iterate", "classify", "probe", "corpus")


@dataclass(frozen=True)
class Key:
    kind: str  # str | float | int | bool | float_list | int_list | table_list
    default: object = None
    choices: tuple | None = None
    positive: bool = False
    nonneg: bool = False


SCHEMA = {
    "instance": Key("str"),
    "command": Key("str", choices=COMMANDS),
    "domain.kind": Key("str", choices=("interval", "enumerated")),
    "domain.lo": Key("float"),
    "domain.hi": Key("float"),
    "domain.generator": Key("str"),  # enumerated default: harmonic
    "domain.n_max": Key("int", positive=True),  # enumerated default: 10**6
    "distance": Key("str"),
    "map": Key("str"),
    "s_claimed": Key("float"),
    "triangle_enforced": Key("bool", True),
    "x0": Key("float"),
    "sampler.strategy": Key("str", "grid", choices=("grid", "random")),
    "sampler.count": Key("int", 301, positive=True),
    "sampler.seed": Key("int", nonneg=True),
    "tolerances.tau_eq": Key("float", 1e-12, positive=True),
    "tolerances.tau_semi": Key("float", 1e-6, positive=True),
    "tolerances.tau_lim": Key("float", 1e-3, positive=True),
    "tolerances.tol": Key("float", 1e-9, positive=True),
    "tolerances.max_iter": Key("int", 10_000, positive=True),
    "checker.epsilons": Key("float_list", (0.05, 0.1, 0.25, 0.5), positive=True),
    "checker.delta_schedule.start_factor": Key("float", 1.0, positive=True),
    "checker.delta_schedule.ratio": Key("float", 0.5, positive=True),
    "checker.delta_schedule.steps": Key("int", 40, positive=True),
    "checker.r_max": Key("int", 10, positive=True),
    "checker.phi": Key("str", "t/2"),
    "checker.alpha": Key("str", "1/2"),
    "checker.alpha_variant": Key("str", "type_I", choices=("type_I", "type_II")),
    "checker.iter_depth": Key("int", 10_000, positive=True),
    "probe.offsets": Key("int_list", (0, 1, 2, 3), nonneg=True),
    "probe.gaps": Key("int_list", (0, 1, 2, 3, 4), nonneg=True),
    "probe.tables": Key("table_list", ()),
    "probe.K": Key("int", 30, positive=True),
    "probe.p_max": Key("int", 30, nonneg=True),
    "orbit.threshold": Key("float", 2.0, positive=True),
    "orbit.window_doublings": Key("int", 8, nonneg=True),
    "orbit.length": Key("int", 30, nonneg=True),
    "output.format": Key("str", "json", choices=("json", "csv")),
    "output.path": Key("str"),
}

_INLINE = ("domain.kind", "domain.lo", "domain.hi", "domain.generator", "domain.n_max",
           "distance", "map")


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration: a flat mapping of dotted key to value, defaults filled."""

    values: dict = field(default_factory=dict)
    # keys the document set explicitly (the rest are defaults)
    explicit: frozenset = field(default=frozenset(), compare=False)

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        return self.values.get(key, default)

    def is_set(self, key) -> bool:
        return key in self.explicit

    def replace(self, **changes) -> "RunConfig":
        """Return a copy with dotted keys (``__`` standing for ``.``) overridden and re-validated."""
        vals = dict(self.values)
        explicit = set(self.explicit)
        for k, v in changes.items():
            k = k.replace("__", ".")
            vals[k] = _coerce(k, v, None)
            explicit.add(k)
        _check_cross(vals, explicit, {})
        return RunConfig(vals, frozenset(explicit))

    def nested(self, explicit_only=False) -> dict:
        """Block-structured dict in schema order, suitable for dumping."""
        out: dict = {}
        for key in SCHEMA:
            if explicit_only and key not in self.explicit:
                continue
            value = self.values.get(key)
            if value is None:
                continue
            node = out
            *head, leaf = key.split(".")
            for part in head:
                node = node.setdefault(part, {})
            node[leaf] = [list(t) for t in value] if SCHEMA[key].kind == "table_list" else \
                list(value) if isinstance(value, tuple) else value
        return out


def _flatten(node, prefix, out, lines):
    if not isinstance(node, yaml.MappingNode):
        raise ConfigError("syntax", "expected a mapping", prefix or None, node.start_mark.line + 1)
    seen = set()
    for knode, vnode in node.value:
        if not isinstance(knode, yaml.ScalarNode):
            raise ConfigError("syntax", "keys must be plain scalars", prefix or None,
                              knode.start_mark.line + 1)
        name = f"{prefix}.{knode.value}" if prefix else knode.value
        line = knode.start_mark.line + 1
        if name in seen:
            raise ConfigError("syntax", "duplicate key", name, line)
        seen.add(name)
        is_leaf = name in SCHEMA
        if isinstance(vnode, yaml.MappingNode) and not is_leaf:
            if not any(k.startswith(name + ".") for k in SCHEMA):
                raise ConfigError("unknown_key", "not a configuration section", name, line)
            _flatten(vnode, name, out, lines)
            continue
        if not is_leaf:
            if any(k.startswith(name + ".") for k in SCHEMA):
                raise ConfigError("type_mismatch", "expected a section mapping", name, line)
            raise ConfigError("unknown_key", "not a configuration key", name, line)
        if name in out:
            raise ConfigError("syntax", "key given twice (block and dotted form)", name, line)
        out[name] = vnode
        lines[name] = line


def _scalar(node, kind):
    """Python value of a scalar node, read in the light of the key's kind.

    String keys keep the source text (``map: 0`` is the expression "0");
    numeric keys accept plain scalars such as ``1e-12`` that YAML 1.1 would
    otherwise leave as strings.
    """
    value = yaml.SafeLoader("").construct_object(node, deep=True)
    if value is None:
        return None
    if kind == "str" and not isinstance(value, bool):
        return node.value
    if kind in ("float", "int") and isinstance(value, str) and node.style is None:
        try:
            return float(value)
        except ValueError:
            return value
    return value


def _to_python(node, key, line, kind=None):
    kind = kind or SCHEMA[key].kind
    if isinstance(node, yaml.ScalarNode):
        return _scalar(node, kind)
    if isinstance(node, yaml.SequenceNode):
        inner = {"float_list": "float", "int_list": "int", "table_list": "table_list"}.get(kind, "int")
        return [_to_python(n, key, line, inner) for n in node.value]
    raise ConfigError("type_mismatch", "expected a scalar or a list", key, line)


def _type_error(key, line, want, got):
    return ConfigError("type_mismatch", f"expected {want}, got {type(got).__name__} {got!r}", key, line)


def _coerce_scalar(key, kind, value, line):
    if kind == "str":
        if not isinstance(value, str):
            raise _type_error(key, line, "a string", value)
        return value
    if kind == "bool":
        if not isinstance(value, bool):
            raise _type_error(key, line, "true or false", value)
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _type_error(key, line, "a number", value)
    if kind == "int":
        if isinstance(value, float):
            if not value.is_integer():
                raise _type_error(key, line, "an integer", value)
            value = int(value)
        return value
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError("constraint_violation", "must be finite", key, line)
    return value


def _coerce(key, value, line):
    spec = SCHEMA[key]
    if value is None:
        return spec.default
    if spec.kind.endswith("_list"):
        if not isinstance(value, (list, tuple)):
            raise _type_error(key, line, "a list", value)
        if spec.kind == "table_list":
            out = []
            for item in value:
                if not (isinstance(item, (list, tuple)) and len(item) == 2
                        and all(isinstance(seq, (list, tuple)) for seq in item)):
                    raise _type_error(key, line, "a list of [m, n] table pairs", item)
                out.append(tuple(tuple(_coerce_scalar(key, "int", v, line) for v in seq) for seq in item))
            return tuple(out)
        items = tuple(_coerce_scalar(key, spec.kind[:-5], v, line) for v in value)
        if not items:
            raise ConfigError("constraint_violation", "list must be nonempty", key, line)
        for v in items:
            _check_bounds(key, spec, v, line)
        return items
    v = _coerce_scalar(key, spec.kind, value, line)
    _check_bounds(key, spec, v, line)
    return v


def _check_bounds(key, spec, v, line):
    if spec.choices is not None and v not in spec.choices:
        raise ConfigError("constraint_violation", f"must be one of {', '.join(spec.choices)}", key, line)
    if spec.positive and not v > 0:
        raise ConfigError("constraint_violation", f"must be positive, got {v!r}", key, line)
    if spec.nonneg and not v >= 0:
        raise ConfigError("constraint_violation", f"must be >= 0, got {v!r}", key, line)


def _check_cross(vals, explicit, lines):
    def err(code, msg, key):
        return ConfigError(code, msg, key, lines.get(key))

    inline = [k for k in _INLINE if k in explicit]
    if vals.get("instance") is not None:
        if inline:
            raise err("constraint_violation", "inline space keys cannot be combined with 'instance'",
                      inline[0])
    elif vals.get("command") != "corpus":
        for k in ("domain.kind", "distance", "map"):
            if vals.get(k) is None:
                raise err("missing_key", "required unless 'instance' is given", k)
        if vals["domain.kind"] == "interval":
            for k in ("domain.lo", "domain.hi"):
                if vals.get(k) is None:
                    raise err("missing_key", "required for interval domains", k)
            if not vals["domain.lo"] < vals["domain.hi"]:
                raise err("constraint_violation", "domain.lo must be below domain.hi", "domain.hi")
    if vals.get("s_claimed") is not None and vals["s_claimed"] < 1:
        raise err("constraint_violation", "s must be >= 1", "s_claimed")
    if vals["sampler.strategy"] == "random" and vals.get("sampler.seed") is None:
        raise ConfigError("missing_key", "a seed is required for random sampling", "sampler.seed",
                          lines.get("sampler.strategy"))
    if not vals["checker.delta_schedule.ratio"] < 1:
        raise err("constraint_violation", "must be below 1", "checker.delta_schedule.ratio")
    if vals["checker.r_max"] > vals["tolerances.max_iter"]:
        raise err("constraint_violation", "r_max exceeds tolerances.max_iter", "checker.r_max")


def parse_config(text: str) -> RunConfig:
    """Parse and validate a config document, filling defaults.

    Raises:
        ConfigError: with ``code`` in syntax, unknown_key, type_mismatch,
            constraint_violation, missing_key.
    """
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError("syntax", str(getattr(exc, "problem", None) or exc),
                          line=mark.line + 1 if mark else None) from None
    nodes, lines = {}, {}
    if root is not None:
        _flatten(root, "", nodes, lines)
    vals, explicit = {}, set()
    for key in SCHEMA:
        if key in nodes:
            raw = _to_python(nodes[key], key, lines[key])
            vals[key] = _coerce(key, raw, lines[key])
            if raw is not None:
                explicit.add(key)
        else:
            vals[key] = SCHEMA[key].default
    _check_cross(vals, explicit, lines)
    return RunConfig(vals, frozenset(explicit))


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def dump_config(config: RunConfig, explicit_only=False) -> str:
    """Block-structured YAML text that :func:`parse_config` reads back to an equal config."""
    return yaml.safe_dump(config.nested(explicit_only), sort_keys=False, default_flow_style=None)


def default_config(instance: str = "banach_half", command: str = "classify", **overrides) -> RunConfig:
    """Defaults for a corpus instance; override keywords use ``__`` for dots."""
    vals = {k: s.default for k, s in SCHEMA.items()}
    return RunConfig(vals, frozenset()).replace(instance=instance, command=command, **overrides)
