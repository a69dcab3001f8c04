"""Machine description file service.

The format is line oriented::

    ; comment
    [machine]
    kind = ptm
    states = s0 s1 acc rej
    initial = s0
    accept = acc
    reject = rej
    input_alphabet = a
    work_alphabet = 0 1
    compile = yes
    [delta]
    s0 # # -> s1 # +1 0 @ 1/2
    s1 a # -> acc # -1 0 @ 1/2 x2

A trailing ``xK`` repeats the rule as K identical branches.
"""

import re
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from app.core.errors import MachineFileError
from app.schemas.machine import BLANK, MachineKind, MachineSpec, Rule
from app.utils.formatting import format_fraction

MACHINE_KEYS = (
    "name", "kind", "states", "initial", "accept", "reject", "nonpost",
    "input_alphabet", "work_alphabet", "compile",
)
REQUIRED_KEYS = ("kind", "states", "initial", "accept", "reject", "input_alphabet")
DYADIC = (Fraction(0), Fraction(1, 2), Fraction(1))
MOVES = {"-1": -1, "0": 0, "+1": 1, "1": 1}

_TOKEN = re.compile(r"\S+")


def _tokens(line: str) -> List[Tuple[str, int]]:
    """Tokens with their 1-based columns."""
    return [(match.group(0), match.start() + 1) for match in _TOKEN.finditer(line)]


def _strip_comment(line: str) -> str:
    return line.split(";", 1)[0]


def _parse_probability(text: str, line: int, column: int) -> Fraction:
    if not re.fullmatch(r"\d+(/\d+)?", text):
        raise MachineFileError(f"malformed rational {text!r}", line, column)
    try:
        value = Fraction(text)
    except ZeroDivisionError:
        raise MachineFileError(f"malformed rational {text!r}", line, column)
    return value


def _parse_header(entries: Dict[str, Tuple[List[str], int]]) -> dict:
    for key in REQUIRED_KEYS:
        if key not in entries:
            raise MachineFileError(f"missing key {key!r} in [machine]")

    def single(key: str) -> Optional[str]:
        if key not in entries:
            return None
        values, line = entries[key]
        if len(values) != 1:
            raise MachineFileError(f"key {key!r} takes exactly one value", line)
        return values[0]

    kind_text = single("kind")
    try:
        kind = MachineKind(kind_text)
    except ValueError:
        raise MachineFileError(f"unknown machine kind {kind_text!r}", entries["kind"][1])

    states, states_line = entries["states"]
    if len(set(states)) != len(states):
        raise MachineFileError("duplicate state name", states_line)

    header = {
        "kind": kind,
        "states": states,
        "initial": single("initial"),
        "accept": single("accept"),
        "reject": single("reject"),
        "nonpost": single("nonpost"),
        "input_alphabet": entries["input_alphabet"][0],
        "work_alphabet": entries.get("work_alphabet", ([], 0))[0],
        "compile_target": (single("compile") or "no").lower() in ("yes", "true", "1"),
    }
    if "name" in entries:
        header["name"] = single("name")

    for key in ("initial", "accept", "reject", "nonpost"):
        value = header[key]
        if value is not None and value not in states:
            raise MachineFileError(f"unknown state {value!r} for key {key!r}", entries[key][1])

    for symbol in header["input_alphabet"]:
        if len(symbol) != 1 or symbol == BLANK:
            raise MachineFileError(
                f"input symbol {symbol!r} must be a single character other than {BLANK!r}",
                entries["input_alphabet"][1],
            )
    for symbol in header["work_alphabet"]:
        if symbol == BLANK:
            raise MachineFileError(f"work alphabet must not list the blank {BLANK!r}", entries["work_alphabet"][1])
    return header


def parse_machine_file(text: str, name: Optional[str] = None) -> MachineSpec:
    """Parse a machine description into a structurally valid MachineSpec.

    Raises:
        MachineFileError: with line/column diagnostics.
    """
    section = None
    entries: Dict[str, Tuple[List[str], int]] = {}
    rule_lines: List[Tuple[int, List[Tuple[str, int]]]] = []

    for number, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        stripped = line.strip()
        if stripped.startswith("["):
            if stripped not in ("[machine]", "[delta]"):
                raise MachineFileError(f"unknown section {stripped!r}", number, line.index("[") + 1)
            section = stripped[1:-1]
            continue
        if section is None:
            raise MachineFileError("content outside of a section", number, 1)
        if section == "machine":
            if "=" not in line:
                raise MachineFileError("expected 'key = values'", number, 1)
            key_part, value_part = line.split("=", 1)
            key = key_part.strip()
            if key not in MACHINE_KEYS:
                raise MachineFileError(f"unknown key {key!r}", number, line.index(key) + 1)
            if key in entries:
                raise MachineFileError(f"duplicate key {key!r}", number, line.index(key) + 1)
            entries[key] = (value_part.split(), number)
        else:
            rule_lines.append((number, _tokens(line)))

    header = _parse_header(entries)
    if name is not None and "name" not in header:
        header["name"] = name

    states = set(header["states"])
    sigma = set(header["input_alphabet"]) | {BLANK}
    gamma = set(header["work_alphabet"]) | {BLANK}
    check_dyadic = header["compile_target"] and header["kind"] == MachineKind.PTM

    delta: Dict[Tuple[str, str, str], List[Rule]] = {}
    seen = set()
    for number, tokens in rule_lines:
        words = [token for token, _ in tokens]
        if len(words) not in (10, 11) or words[3] != "->" or words[8] != "@":
            raise MachineFileError("expected 's σ γ -> s' γ' d_in d_wk @ p/q [xK]'", number, tokens[0][1])

        (state, s_col), (read_in, i_col), (read_wk, w_col) = tokens[0], tokens[1], tokens[2]
        (target, t_col), (write, wr_col) = tokens[4], tokens[5]
        if state not in states:
            raise MachineFileError(f"unknown state {state!r}", number, s_col)
        if target not in states:
            raise MachineFileError(f"unknown state {target!r}", number, t_col)
        if read_in not in sigma:
            raise MachineFileError(f"unknown input symbol {read_in!r}", number, i_col)
        for symbol, column in ((read_wk, w_col), (write, wr_col)):
            if symbol not in gamma:
                raise MachineFileError(f"unknown work symbol {symbol!r}", number, column)

        moves = []
        for token, column in (tokens[6], tokens[7]):
            if token not in MOVES:
                raise MachineFileError(f"head move must be -1, 0 or +1, got {token!r}", number, column)
            moves.append(MOVES[token])

        probability = _parse_probability(tokens[9][0], number, tokens[9][1])
        if check_dyadic and probability not in DYADIC:
            raise MachineFileError("probability not in {0,1/2,1}", number, tokens[9][1])

        multiplicity = 1
        if len(tokens) == 11:
            suffix, column = tokens[10]
            if not re.fullmatch(r"x[1-9]\d*", suffix):
                raise MachineFileError(f"malformed multiplicity {suffix!r}", number, column)
            multiplicity = int(suffix[1:])

        rule = Rule(next_state=target, write=write, d_in=moves[0], d_wk=moves[1], probability=probability)
        triple = (state, read_in, read_wk)
        if (triple, rule) in seen:
            raise MachineFileError(f"duplicate rule for ({state},{read_in},{read_wk})", number, s_col)
        seen.add((triple, rule))
        delta.setdefault(triple, []).extend([rule] * multiplicity)

    spec = MachineSpec(delta=delta, **header)
    if not spec.is_halting(spec.initial) and not any(key[0] == spec.initial for key in delta):
        raise MachineFileError("initial state has no outgoing rules")
    return spec


def load_machine(path: str) -> MachineSpec:
    """Read and parse a machine file; the file stem is the default name."""
    file_path = Path(path)
    return parse_machine_file(file_path.read_text(encoding="utf-8"), name=file_path.stem)


def _format_move(move: int) -> str:
    return {-1: "-1", 0: "0", 1: "+1"}[move]


def _ordered_triples(spec: MachineSpec) -> List[Tuple[str, str, str]]:
    state_order = {state: index for index, state in enumerate(spec.states)}
    sigma_order = {symbol: index for index, symbol in enumerate(spec.input_symbols)}
    gamma_order = {symbol: index for index, symbol in enumerate(spec.work_symbols)}
    return sorted(
        spec.delta,
        key=lambda triple: (state_order[triple[0]], sigma_order[triple[1]], gamma_order[triple[2]]),
    )


def format_machine_file(spec: MachineSpec) -> str:
    """Serialize a MachineSpec; consecutive identical branches collapse into ``xK``."""
    lines = [f"; {spec.name}", "[machine]", f"name = {spec.name}", f"kind = {spec.kind.value}"]
    lines.append(f"states = {' '.join(spec.states)}")
    lines.append(f"initial = {spec.initial}")
    lines.append(f"accept = {spec.accept}")
    lines.append(f"reject = {spec.reject}")
    if spec.nonpost is not None:
        lines.append(f"nonpost = {spec.nonpost}")
    lines.append(f"input_alphabet = {' '.join(spec.input_alphabet)}")
    lines.append(f"work_alphabet = {' '.join(spec.work_alphabet)}")
    if spec.compile_target:
        lines.append("compile = yes")
    lines.append("[delta]")

    for triple in _ordered_triples(spec):
        rules = spec.delta[triple]
        index = 0
        while index < len(rules):
            rule = rules[index]
            count = 1
            while index + count < len(rules) and rules[index + count] == rule:
                count += 1
            line = (
                f"{triple[0]} {triple[1]} {triple[2]} -> {rule.next_state} {rule.write} "
                f"{_format_move(rule.d_in)} {_format_move(rule.d_wk)} @ {format_fraction(rule.probability)}"
            )
            if count > 1:
                line += f" x{count}"
            lines.append(line)
            index += count
    return "\n".join(lines) + "\n"
