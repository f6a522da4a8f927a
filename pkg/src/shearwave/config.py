"""Run configuration: one JSON file describing a whole pipeline run.

Example::

    {
      "schema_version": 1,
      "profile": {"type": "poly", "coeffs": [2.0, 1.0], "depth": 1.0},
      "params": {"g": 1.0, "calibrate": [1, 1]},
      "lattice": {"lambda1": 6.283185307179586, "lambda2": 6.283185307179586},
      "grid": {"n1": 32, "n2": 32, "n3": 33},
      "tolerances": {"riccati": 1e-10, "membership": 1e-8},
      "amplitudes": {"a0": 0.0, "modes": [{"k": [1, 1], "a": 1.0}], "w": []},
      "probe": {"eps": [0.01, 0.005, 0.002, 0.001, 0.0005, 0.0002, 0.0001]},
      "trivial": {"modulation": 0.0},
      "output": "out"
    }

``params`` takes either ``sigma`` or ``calibrate`` (a lattice index whose
mode is made resonant) and optionally ``dynamic``, a polynomial symbol
``{"type": "poly_ksq", "coeffs": [...]}`` in |k|^2.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, ShearwaveError
from .fields import KernelModeSet
from .profiles import LatticeSpec, ShearProfile, WaveParams
from .residuals import DEFAULT_EPS
from .riccati import DEFAULT_TOL
from .dispersion import MEMBERSHIP_TOL

SCHEMA_VERSION = 1

DEFAULTS = {
    "schema_version": SCHEMA_VERSION,
    "grid": {"n1": 32, "n2": 32, "n3": 33},
    "tolerances": {"riccati": DEFAULT_TOL, "membership": MEMBERSHIP_TOL},
    "amplitudes": {"a0": 0.0, "modes": [], "w": []},
    "probe": {"eps": list(DEFAULT_EPS)},
    "trivial": {"modulation": 0.0},
    "output": "out",
}
TOP_KEYS = set(DEFAULTS) | {"profile", "params", "lattice"}


def _num(block, key, path, positive=False, integer=False, required=True, default=None):
    if key not in block:
        if required:
            raise ConfigError(f"{path}.{key}", "missing required field")
        return default
    v = block[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}", f"expected a number, got {v!r}")
    if integer and int(v) != v:
        raise ConfigError(f"{path}.{key}", f"expected an integer, got {v!r}")
    if not math.isfinite(v):
        raise ConfigError(f"{path}.{key}", "must be finite")
    if positive and not v > 0:
        raise ConfigError(f"{path}.{key}", f"must be positive, got {v!r}")
    return int(v) if integer else float(v)


def _number(v, path):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(path, f"expected a finite number, got {v!r}")
    return float(v)


def _obj(data, key, path=""):
    v = data.get(key)
    full = f"{path}.{key}" if path else key
    if not isinstance(v, dict):
        raise ConfigError(full, "missing or not an object")
    return v


def _index(v, path):
    if not (isinstance(v, list) and len(v) == 2 and all(isinstance(x, int) and not isinstance(x, bool) for x in v)):
        raise ConfigError(path, f"expected a pair of integers, got {v!r}")
    return (v[0], v[1])


@dataclass
class RunConfig:
    """Validated run configuration; ``data`` is the canonical dictionary."""

    data: dict
    source: str = field(default=None, compare=False)

    @classmethod
    def from_dict(cls, raw, source=None):
        if not isinstance(raw, dict):
            raise ConfigError("$", "configuration must be a JSON object")
        unknown = sorted(set(raw) - TOP_KEYS)
        if unknown:
            raise ConfigError(unknown[0], "unknown field")
        data = copy.deepcopy(DEFAULTS)
        for key, v in raw.items():
            if isinstance(v, dict) and isinstance(data.get(key), dict):
                data[key].update(copy.deepcopy(v))
            else:
                data[key] = copy.deepcopy(v)
        if data["schema_version"] != SCHEMA_VERSION:
            raise ConfigError("schema_version", f"unsupported version {data['schema_version']!r}")
        cfg = cls(data, source)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path):
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(str(path), f"cannot read: {exc.strerror}") from None
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from None
        return cls.from_dict(raw, str(path))

    def to_dict(self):
        return copy.deepcopy(self.data)

    def dumps(self):
        return json.dumps(self.data, indent=2, sort_keys=True)

    def canonical(self):
        return json.dumps(self.data, sort_keys=True, separators=(",", ":"))

    @property
    def hash(self):
        """sha256 of the canonical config; the output location does not count."""
        data = {k: v for k, v in self.data.items() if k != "output"}
        return hashlib.sha256(json.dumps(data, sort_keys=True, separators=(",", ":")).encode()).hexdigest()

    # validation -------------------------------------------------------------
    def validate(self):
        d = self.data
        prof = _obj(d, "profile")
        kind = prof.get("type")
        if kind == "poly":
            if not isinstance(prof.get("coeffs"), list) or not prof["coeffs"]:
                raise ConfigError("profile.coeffs", "expected a non-empty list of numbers")
            for n, c in enumerate(prof["coeffs"]):
                _number(c, f"profile.coeffs[{n}]")
            _num(prof, "depth", "profile", positive=True)
        elif kind == "samples":
            for key in ("x3", "U"):
                if not isinstance(prof.get(key), list):
                    raise ConfigError(f"profile.{key}", "expected a list of numbers")
        else:
            raise ConfigError("profile.type", f"expected 'poly' or 'samples', got {kind!r}")

        params = _obj(d, "params")
        _num(params, "g", "params", positive=True)
        has_sigma = params.get("sigma") is not None
        if has_sigma:
            _num(params, "sigma", "params", positive=True)
        if "calibrate" in params:
            i, _ = _index(params["calibrate"], "params.calibrate")
            if has_sigma:
                raise ConfigError("params.calibrate", "give either sigma or calibrate, not both")
            if i == 0:
                raise ConfigError("params.calibrate", "first index must be nonzero")
        dyn = params.get("dynamic")
        if dyn is not None:
            if not isinstance(dyn, dict) or dyn.get("type") != "poly_ksq" or not isinstance(dyn.get("coeffs"), list):
                raise ConfigError("params.dynamic", "expected {'type': 'poly_ksq', 'coeffs': [...]}")
            for n, c in enumerate(dyn["coeffs"]):
                _number(c, f"params.dynamic.coeffs[{n}]")
            if "calibrate" in params:
                raise ConfigError("params.calibrate", "calibration only applies to the capillary-gravity symbol")
        if not has_sigma and "calibrate" not in params and dyn is None:
            raise ConfigError("params.sigma", "missing: give sigma, calibrate or dynamic")

        lat = _obj(d, "lattice")
        _num(lat, "lambda1", "lattice", positive=True)
        _num(lat, "lambda2", "lattice", positive=True)

        grid = _obj(d, "grid")
        for key in ("n1", "n2", "n3"):
            _num(grid, key, "grid", positive=True, integer=True)
        for key in ("n1", "n2"):
            if grid[key] % 2:
                raise ConfigError(f"grid.{key}", "horizontal grid sizes must be even")
        if grid["n3"] < 4:
            raise ConfigError("grid.n3", "need at least 4 vertical nodes")

        tol = _obj(d, "tolerances")
        _num(tol, "riccati", "tolerances", positive=True)
        _num(tol, "membership", "tolerances", positive=True)

        amps = _obj(d, "amplitudes")
        _num(amps, "a0", "amplitudes", required=False)
        if not isinstance(amps.get("modes", []), list):
            raise ConfigError("amplitudes.modes", "expected a list")
        for n, m in enumerate(amps.get("modes", [])):
            path = f"amplitudes.modes[{n}]"
            if not isinstance(m, dict):
                raise ConfigError(path, "expected an object")
            _index(m.get("k"), f"{path}.k")
            _num(m, "a", path)
        for n, w in enumerate(amps.get("w", [])):
            path = f"amplitudes.w[{n}]"
            if not isinstance(w, dict):
                raise ConfigError(path, "expected an object")
            _num(w, "j", path, integer=True)
            if w["j"] < 0:
                raise ConfigError(f"{path}.j", "must be non-negative")
            if not isinstance(w.get("coeffs"), list):
                raise ConfigError(f"{path}.coeffs", "expected a list of numbers")

        eps = _obj(d, "probe").get("eps")
        if not isinstance(eps, list) or len(eps) < 2:
            raise ConfigError("probe.eps", "expected at least two values")
        for n, e in enumerate(eps):
            if not _number(e, f"probe.eps[{n}]") > 0:
                raise ConfigError(f"probe.eps[{n}]", "must be positive")
        _num(_obj(d, "trivial"), "modulation", "trivial")
        if not isinstance(d["output"], str):
            raise ConfigError("output", "expected a directory path")

        # make sure the typed objects build
        for key, build in (("profile", self.profile), ("lattice", self.lattice)):
            try:
                build()
            except ShearwaveError as exc:
                raise ConfigError(key, str(exc)) from None

    # typed views -------------------------------------------------------------
    def profile(self):
        return ShearProfile.from_dict(self.data["profile"])

    def lattice(self):
        return LatticeSpec.from_dict(self.data["lattice"])

    @property
    def grid(self):
        g = self.data["grid"]
        return g["n1"], g["n2"], g["n3"]

    @property
    def tol(self):
        return float(self.data["tolerances"]["riccati"])

    @property
    def membership_tol(self):
        return float(self.data["tolerances"]["membership"])

    @property
    def calibrate_target(self):
        t = self.data["params"].get("calibrate")
        return tuple(t) if t is not None else None

    def params(self, sigma=None):
        """WaveParams; ``sigma`` supplies the calibrated value when needed."""
        p = self.data["params"]
        s = p.get("sigma") if sigma is None else sigma
        dyn = p.get("dynamic")
        if dyn is not None:
            return WaveParams.polynomial_symbol(p["g"], dyn["coeffs"])
        return WaveParams(float(p["g"]), None if s is None else float(s))

    def amplitudes(self):
        return KernelModeSet.from_dict(self.data["amplitudes"])

    @property
    def eps(self):
        return [float(e) for e in self.data["probe"]["eps"]]

    @property
    def modulation(self):
        return float(self.data["trivial"]["modulation"])

    @property
    def output(self):
        return self.data["output"]

    def with_overrides(self, tol=None, grid=None, output=None):
        data = self.to_dict()
        if tol is not None:
            data["tolerances"]["riccati"] = float(tol)
        if grid is not None:
            data["grid"] = {"n1": grid[0], "n2": grid[1], "n3": grid[2]}
        if output is not None:
            data["output"] = str(output)
        return RunConfig.from_dict(data, self.source)


def parse_grid(text):
    """'32x32x33' -> (32, 32, 33)."""
    parts = text.lower().split("x")
    if len(parts) != 3 or not all(p.isdigit() for p in parts):
        raise ConfigError("--grid", f"expected N1xN2xN3, got {text!r}")
    return tuple(int(p) for p in parts)
