"""Named parameter sets and the JSON config format for complex numbers."""

import cmath
import math

from .date import ParamsError, SolitonParams


def _u(deg):
    return cmath.exp(1j * math.radians(deg))


_RAW = {
    "A": ([1], [complex(0.25, math.sqrt(15) / 4)]),
    "B": ([1, 1], [_u(45), 1j]),
    "C": ([1, 1, 1], [_u(30), _u(60), _u(150)]),
    # sine-Gordon by v-constancy only; the literal parameter symmetry fails
    "D": ([1], [1j]),
    "E": ([1, -1], [_u(45), _u(135)]),
    "F": ([1, -1, 1j], [_u(30), _u(150), 1j]),
    "plr4": ([_u(30), _u(60), _u(150), _u(120)], [_u(30), _u(60), _u(120), _u(150)]),
    "sg4": ([_u(30), _u(60), _u(120), _u(150)], [_u(30), _u(60), _u(120), _u(150)]),
}

PRESETS = {k: SolitonParams(alpha=al, c=c, name=k) for k, (c, al) in _RAW.items()}

# plot domains: (s_range, t_range)
SURFACE_DOMAINS = {
    "A": ((-10, 10), (-10, 10)),
    "B": ((-10, 10), (-10, 10)),
    "C": ((-40, 40), (-40, 40)),
    "D": ((-10, 10), (-10, 10)),
    "E": ((-10, 10), (-10, 10)),
    "F": ((-25, 25), (-25, 25)),
    "plr4": ((-20, 20), (-20, 20)),
    "sg4": ((-20, 20), (-20, 20)),
}
CURVE_DOMAIN = (-25, 25)
CURVE_TIMES = (0.0, 1.0, 2.0)

NOTES = {
    "D": "treated as sine-Gordon by v-constancy: the parameter symmetry "
         "conj(c_1) = -c_1 fails for c_1 = 1, yet q is real and v is constant on grids",
}


def get_preset(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise ParamsError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None


def parse_complex(obj):
    """{re, im}, {mod, arg_deg}, or a bare real number."""
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return complex(obj)
    if isinstance(obj, dict):
        if set(obj) == {"re", "im"}:
            return complex(float(obj["re"]), float(obj["im"]))
        if set(obj) == {"mod", "arg_deg"}:
            return float(obj["mod"]) * _u(float(obj["arg_deg"]))
    raise ParamsError(f"cannot read complex number from {obj!r}")


def dump_complex(z):
    return {"re": z.real, "im": z.imag}


def params_from_config(cfg):
    """SolitonParams from {"preset": name} or {"alpha": [...], "c": [...], "v0": x}."""
    if "preset" in cfg:
        p = get_preset(cfg["preset"])
        if "v0" in cfg:
            p = SolitonParams(p.alpha, p.c, float(cfg["v0"]), p.name)
        return p
    try:
        al = [parse_complex(x) for x in cfg["alpha"]]
        c = [parse_complex(x) for x in cfg["c"]]
    except KeyError as exc:
        raise ParamsError(f"config missing {exc.args[0]!r}") from None
    return SolitonParams(al, c, float(cfg.get("v0", 0.0)), cfg.get("name", ""))


def params_to_config(p):
    return {"alpha": [dump_complex(a) for a in p.alpha], "c": [dump_complex(c) for c in p.c], "v0": p.v0}
