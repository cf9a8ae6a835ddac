"""JSON system descriptions: parsing, validation and serialization.

A file looks like::

    {"alphabet": 2,
     "transitions": [[1, 1], [1, 1]],
     "potential": {"range": 2, "values": {"00": 0, "01": -1, "10": "-2", "11": 0}},
     "options": {"precision_bits": 256, "beta_max": 50}}

Potential values may be JSON numbers, decimal strings or exact rationals
such as ``"-3/2"``; all are read into ``Fraction`` without rounding.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, fields, replace
from fractions import Fraction
from pathlib import Path

from .errors import ErgoptError, ParseError, ValidationError
from .potential import LocallyConstantPotential
from .sft import build_system, enumerate_words, parse_word, word_str

MINUS_SIGNS = {"−": "-", "‒": "-", "–": "-"}


@dataclass(frozen=True)
class Options:
    precision_bits: int = 256
    beta_min: float = 1.0
    beta_max: float = 50.0
    beta_steps: int = 50
    tol_h: float = 1e-9
    tol_zero: float = 1e-9
    tol_verify: float = 1e-3


_INT_OPTIONS = {"precision_bits", "beta_steps"}


@dataclass(frozen=True)
class SystemSpec:
    system: object
    potential: LocallyConstantPotential
    options: Options = field(default_factory=Options)


def _line_of(text, needle):
    if text is None:
        return None
    pos = text.find(needle)
    if pos < 0:
        return None
    return text.count("\n", 0, pos) + 1


def parse_number(raw, where="", text=None):
    """Exact value of a JSON number or numeric string."""
    if isinstance(raw, bool):
        raise ParseError(f"{where}: expected a number, got {raw!r}", _line_of(text, where), where)
    if isinstance(raw, (int, Fraction)):
        return Fraction(raw)
    if isinstance(raw, str):
        s = raw.strip()
        for k, v in MINUS_SIGNS.items():
            s = s.replace(k, v)
        s = re.sub(r"\s*/\s*", "/", s)
        try:
            return Fraction(s)
        except (ValueError, ZeroDivisionError):
            pass
    raise ParseError(f"{where}: cannot read {raw!r} as a number", _line_of(text, where), where)


def _require(obj, key, text):
    if key not in obj:
        raise ParseError(f"missing top-level key {key!r}", None, key)
    return obj[key]


def _parse_int(raw, where, text, minimum=None):
    if isinstance(raw, bool) or not isinstance(raw, (int, Fraction)) or Fraction(raw).denominator != 1:
        raise ParseError(f"{where}: expected an integer, got {raw!r}", _line_of(text, where), where)
    val = int(raw)
    if minimum is not None and val < minimum:
        raise ParseError(f"{where}: must be >= {minimum}, got {val}", _line_of(text, where), where)
    return val


def _parse_options(raw, text):
    if raw is None:
        return Options()
    if not isinstance(raw, dict):
        raise ParseError("options must be an object", _line_of(text, '"options"'), "options")
    known = {f.name for f in fields(Options)}
    kwargs = {}
    for key, val in raw.items():
        if key not in known:
            raise ParseError(f"unknown option {key!r}", _line_of(text, f'"{key}"'), f"options.{key}")
        where = f"options.{key}"
        if key in _INT_OPTIONS:
            kwargs[key] = _parse_int(val, where, text, minimum=1)
        else:
            kwargs[key] = float(parse_number(val, where, text))
    return Options(**kwargs)


def parse_system_text(text):
    try:
        data = json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno, None) from None
    if not isinstance(data, dict):
        raise ParseError("top level must be an object", 1, None)

    D = _parse_int(_require(data, "alphabet", text), "alphabet", text, minimum=1)
    trans = _require(data, "transitions", text)
    if (not isinstance(trans, list) or len(trans) != D
            or any(not isinstance(row, list) or len(row) != D for row in trans)):
        raise ParseError(f"transitions must be a {D}x{D} array", _line_of(text, '"transitions"'), "transitions")
    if any(x not in (0, 1) or isinstance(x, bool) for row in trans for x in row):
        raise ParseError("transition entries must be 0 or 1", _line_of(text, '"transitions"'), "transitions")
    try:
        system = build_system(D, [[int(x) for x in row] for row in trans])
    except ErgoptError as exc:
        raise ValidationError(f"transitions: {exc}", []) from exc

    pot = _require(data, "potential", text)
    if not isinstance(pot, dict):
        raise ParseError("potential must be an object", _line_of(text, '"potential"'), "potential")
    k = _parse_int(pot.get("range"), "range", text, minimum=1)
    vals = pot.get("values")
    if not isinstance(vals, dict):
        raise ParseError("potential.values must be an object", _line_of(text, '"values"'), "potential.values")
    values = {}
    for key, raw in vals.items():
        where = f'"{key}"'
        try:
            word = parse_word(key, D)
        except (ValueError, ErgoptError) as exc:
            raise ParseError(f"bad word {key!r}: {exc}", _line_of(text, where), f"potential.values.{key}") from None
        if len(word) != k:
            raise ParseError(f"word {key!r} has length {len(word)}, expected {k}",
                             _line_of(text, where), f"potential.values.{key}")
        if not system.is_admissible(word):
            raise ValidationError(f"value given for non-admissible word {key!r}", [])
        values[word] = parse_number(raw, where, text)

    missing = [w for w in enumerate_words(system, k) if w not in values]
    if missing:
        names = [word_str(w, D) for w in missing]
        raise ValidationError(f"missing potential values for {len(names)} admissible "
                              f"{k}-word(s): {', '.join(names)}", names)
    if k == 1 and not system.is_full_shift:
        raise ValidationError("range 1 needs the full shift; use range >= 2", [])

    return SystemSpec(system, LocallyConstantPotential(k, values), _parse_options(data.get("options"), text))


def parse_system_file(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not UTF-8 ({exc.reason})", None, None) from None
    return parse_system_text(text)


def _number_out(x):
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def to_dict(spec):
    D = spec.system.alphabet_size
    pot = spec.potential
    values = {word_str(w, D): _number_out(pot.values[w]) for w in sorted(pot.values)}
    return {
        "alphabet": D,
        "transitions": [[int(x) for x in row] for row in spec.system.matrix],
        "potential": {"range": pot.range, "values": values},
        "options": {f.name: getattr(spec.options, f.name) for f in fields(Options)},
    }


def serialize(spec):
    return json.dumps(to_dict(spec), indent=2, ensure_ascii=False) + "\n"


def with_options(spec, **changes):
    changes = {k: v for k, v in changes.items() if v is not None}
    return replace(spec, options=replace(spec.options, **changes))
