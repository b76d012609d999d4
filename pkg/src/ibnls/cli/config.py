"""Run configuration: a flat INI file with fixed sections and keys."""
from __future__ import annotations

import configparser
import json
from pathlib import Path

from ..errors import ConfigError


def _bool(s):
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _floats(s):
    if isinstance(s, (list, tuple)):
        return [float(x) for x in s]
    return [float(x) for x in str(s).replace(";", ",").split(",") if x.strip()]


def _words(s):
    if isinstance(s, (list, tuple)):
        return [str(x) for x in s]
    return [x.strip() for x in str(s).split(",") if x.strip()]


def _exact(s):
    # kept as text so that "1/2" or "0.5" become exact fractions downstream
    s = str(s).strip()
    if not s:
        raise ValueError("empty value")
    return s


def _optional_exact(s):
    s = "" if s is None else str(s).strip()
    return s or None


REQUIRED = object()

# section -> key -> (converter, default)
SCHEMA = {
    "model": {
        "N": (int, REQUIRED),
        "sigma": (_exact, REQUIRED),
        "b": (_exact, REQUIRED),
        "p": (_optional_exact, None),
        "variant": (str, "p_equals_2"),
    },
    "grid": {
        "kind": (str, "radial"),
        "sizes": (int, 1024),
        "extent": (float, 30.0),
        "scheme": (str, "auto"),
        "singular": (str, "zeta"),
    },
    "solver": {
        "method": (str, "auto"),
        "tol": (float, 1e-15),
        "grad_tol": (float, 1e-10),
        "max_iter": (int, 2000),
        "seeds": (int, 1),
        "seed": (int, 0),
        "seed_profile": (str, "gaussian"),
        "seed_width": (float, 1.0),
        "petviashvili_tol": (float, 1e-13),
    },
    "gn": {
        "n_widths": (int, 10),
        "tol": (float, 1e-3),
        "perturbations": (_bool, True),
    },
    "evolution": {
        "initial": (str, "ground_state"),
        "amplitude": (float, 0.8),
        "width": (float, 1.0),
        "dt0": (float, 1e-3),
        "T": (float, 1.0),
        "scheme": (str, "strang"),
        "dt_min": (float, 1e-8),
        "blowup_factor": (float, 10.0),
        "lambda_c": (float, 1.0),
        "lambda_theta": (float, 0.5),
        "record_every": (int, 10),
        "adaptive": (_bool, True),
        "amplitudes": (_floats, [0.5, 0.9]),
        "criteria": (_words, ["auto"]),
    },
    "output": {
        "directory": (str, "ibnls-out"),
        "formats": (_words, ["json", "csv", "svg", "fld"]),
        "snapshot_times": (_floats, []),
    },
}

CHOICES = {
    ("model", "variant"): ("general_p", "p_equals_2", "p_equals_sigma_c", "hsc_variant"),
    ("grid", "kind"): ("radial", "cartesian"),
    ("grid", "scheme"): ("auto", "spectral", "fd2"),
    ("grid", "singular"): ("zeta", "midpoint"),
    ("solver", "method"): ("auto", "petviashvili", "weinstein"),
    ("solver", "seed_profile"): ("gaussian", "sech", "gauss_poly", "exp"),
    ("evolution", "initial"): ("ground_state", "gaussian", "zero"),
    ("evolution", "scheme"): ("strang", "lie"),
}
LIST_CHOICES = {
    ("evolution", "criteria"): ("auto", "h2", "mass_critical", "sigma_c", "hsc", "none"),
    ("output", "formats"): ("json", "csv", "svg", "fld"),
}


def resolve(raw: dict) -> dict:
    """Validate a {section: {key: value}} mapping and fill in defaults."""
    out = {}
    for sec in raw:
        if sec not in SCHEMA:
            raise ConfigError(f"unknown section [{sec}]")
    for sec, keys in SCHEMA.items():
        given = dict(raw.get(sec, {}))
        for key in given:
            if key not in keys:
                raise ConfigError(f"unknown key {sec}.{key}")
        res = {}
        for key, (conv, default) in keys.items():
            if key in given:
                try:
                    res[key] = conv(given[key])
                except (TypeError, ValueError) as exc:
                    raise ConfigError(f"bad value for {sec}.{key}: {exc}") from None
            elif default is REQUIRED:
                raise ConfigError(f"missing required key {sec}.{key}")
            else:
                res[key] = list(default) if isinstance(default, list) else default
            if (sec, key) in CHOICES and res[key] not in CHOICES[(sec, key)]:
                raise ConfigError(f"{sec}.{key} must be one of {CHOICES[(sec, key)]}, got {res[key]!r}")
            if (sec, key) in LIST_CHOICES:
                bad = [v for v in res[key] if v not in LIST_CHOICES[(sec, key)]]
                if bad:
                    raise ConfigError(f"{sec}.{key}: unknown entries {bad}")
        out[sec] = res
    return out


def read_ini(path) -> dict:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keys are case sensitive (N vs n)
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    return {sec: dict(cp[sec]) for sec in cp.sections()}


def load_config(path) -> dict:
    """Read an INI file, or the ``config`` block of a previously written manifest."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    if path.suffix == ".json":
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from None
        raw = data.get("config", data)
    else:
        raw = read_ini(path)
    return resolve(raw)
