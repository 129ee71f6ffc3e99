"""Monotone access structures.

Parties are numbered ``1..n``.  A party set is any iterable of those numbers;
internally sets are bit masks with bit ``i-1`` standing for party ``i``.
Three representations are supported (minimal sets, monotone circuits with
AND/OR/threshold/weighted-threshold gates, explicit truth tables) and all of
them expose the same vectorised ``truth_table``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .gf import Field, in_span

MAX_EXHAUSTIVE = 20


class AccessError(ValueError):
    pass


def to_mask(P: Iterable[int], n: int) -> int:
    mask = 0
    for i in P:
        if not 1 <= i <= n:
            raise AccessError(f"party {i} out of range 1..{n}")
        mask |= 1 << (i - 1)
    return mask


def from_mask(mask: int) -> tuple[int, ...]:
    return tuple(i + 1 for i in range(mask.bit_length()) if mask >> i & 1)


def _popcounts(n: int) -> np.ndarray:
    masks = np.arange(1 << n, dtype=np.int64)
    pc = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        pc += (masks >> i) & 1
    return pc


def _input_bits(n: int) -> np.ndarray:
    """``bits[i]`` is the value of ``x_{i+1}`` on every mask."""
    masks = np.arange(1 << n, dtype=np.int64)
    return np.stack([((masks >> i) & 1).astype(bool) for i in range(n)]) if n else np.zeros((0, 1), bool)


class AccessStructure:
    n: int

    def evaluate(self, P: Iterable[int]) -> bool:
        return bool(self._eval_mask(to_mask(P, self.n)))

    def _eval_mask(self, mask: int) -> bool:
        raise NotImplementedError

    def truth_table(self) -> np.ndarray:
        if self.n > MAX_EXHAUSTIVE:
            raise AccessError(f"n = {self.n} exceeds the exhaustive limit {MAX_EXHAUSTIVE}")
        return self._table()

    def _table(self) -> np.ndarray:
        return np.fromiter((self._eval_mask(m) for m in range(1 << self.n)), bool, 1 << self.n)

    def authorized_sets(self) -> list[tuple[int, ...]]:
        return [from_mask(int(m)) for m in np.flatnonzero(self.truth_table())]

    def unauthorized_sets(self, nonempty: bool = True) -> list[tuple[int, ...]]:
        out = [from_mask(int(m)) for m in np.flatnonzero(~self.truth_table())]
        return [P for P in out if P or not nonempty]

    def minimal_sets(self) -> list[tuple[int, ...]]:
        return minimal_sets_of_table(self.truth_table(), self.n)

    def equivalent(self, other: "AccessStructure") -> bool:
        return self.n == other.n and bool(np.array_equal(self.truth_table(), other.truth_table()))

    def dominates(self, other: "AccessStructure") -> bool:
        """``self(P) >= other(P)`` for every P."""
        a, b = self.truth_table(), other.truth_table()
        return self.n == other.n and not bool(np.any(b & ~a))


def minimal_sets_of_table(table: np.ndarray, n: int) -> list[tuple[int, ...]]:
    masks = np.flatnonzero(table)
    minimal = np.ones(len(masks), bool)
    for i in range(n):
        has = (masks >> i) & 1 == 1
        minimal &= ~(has & table[masks & ~(1 << i)])
    sets = [from_mask(int(m)) for m in masks[minimal]]
    return sorted(sets)


@dataclass(frozen=True)
class TruthTable(AccessStructure):
    n: int
    table: tuple[bool, ...]

    def __post_init__(self):
        if len(self.table) != 1 << self.n:
            raise AccessError("truth table must have 2^n entries")

    def _eval_mask(self, mask):
        return self.table[mask]

    def _table(self):
        return np.array(self.table, bool)

    @classmethod
    def from_array(cls, n: int, arr) -> "TruthTable":
        return cls(n, tuple(bool(v) for v in arr))


@dataclass(frozen=True)
class MinSets(AccessStructure):
    """Authorized iff the set contains one of ``sets``."""

    n: int
    sets: tuple[frozenset[int], ...]

    def __post_init__(self):
        for s in self.sets:
            to_mask(s, self.n)

    @classmethod
    def of(cls, n: int, sets: Iterable[Iterable[int]]) -> "MinSets":
        return cls(n, tuple(frozenset(s) for s in sets))

    @cached_property
    def _masks(self):
        return [to_mask(s, self.n) for s in self.sets]

    def _eval_mask(self, mask):
        return any(m & mask == m for m in self._masks)

    def _table(self):
        masks = np.arange(1 << self.n, dtype=np.int64)
        out = np.zeros(1 << self.n, bool)
        for m in self._masks:
            out |= (masks & m) == m
        return out


GATE_KINDS = ("AND", "OR", "TH", "WTH")


@dataclass(frozen=True)
class Gate:
    id: str
    kind: str
    operands: tuple[str, ...]
    t: int = 0
    weights: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise AccessError(f"unknown gate kind {self.kind}")
        if not self.operands:
            raise AccessError(f"gate {self.id} has no inputs")
        if self.kind == "TH" and not 1 <= self.t <= len(self.operands):
            raise AccessError(f"gate {self.id}: threshold {self.t} outside 1..{len(self.operands)}")
        if self.kind == "WTH":
            if len(self.weights) != len(self.operands) or any(w < 0 for w in self.weights):
                raise AccessError(f"gate {self.id}: need one nonnegative weight per input")
            if not 1 <= self.t <= sum(self.weights):
                raise AccessError(f"gate {self.id}: threshold outside 1..{sum(self.weights)}")

    @property
    def threshold(self) -> int:
        """Number (or weight) of satisfied inputs needed."""
        if self.kind == "AND":
            return len(self.operands)
        if self.kind == "OR":
            return 1
        return self.t

    @property
    def input_weights(self) -> tuple[int, ...]:
        return self.weights if self.kind == "WTH" else (1,) * len(self.operands)


_VAR = re.compile(r"x(\d+)$")


def var_index(op: str) -> int | None:
    m = _VAR.match(op)
    return int(m.group(1)) if m else None


@dataclass(frozen=True)
class MonotoneCircuit(AccessStructure):
    """Gates in topological order; operands are ``x<i>`` or earlier gate ids."""

    n: int
    gates: tuple[Gate, ...]
    output: str

    def __post_init__(self):
        seen: set[str] = set()
        for g in self.gates:
            if g.id in seen or var_index(g.id) is not None:
                raise AccessError(f"bad or duplicate gate id {g.id}")
            for op in g.operands:
                v = var_index(op)
                if v is None and op not in seen:
                    raise AccessError(f"gate {g.id}: operand {op} is not an earlier gate (cycle or typo)")
                if v is not None and not 1 <= v <= self.n:
                    raise AccessError(f"gate {g.id}: variable {op} out of range")
            seen.add(g.id)
        if self.output not in seen:
            raise AccessError(f"output {self.output} is not a gate")

    @property
    def size(self) -> int:
        return len(self.gates)

    @cached_property
    def gate_map(self) -> dict[str, Gate]:
        return {g.id: g for g in self.gates}

    def _eval_mask(self, mask):
        vals: dict[str, bool] = {}
        for g in self.gates:
            s = 0
            for op, w in zip(g.operands, g.input_weights):
                v = var_index(op)
                bit = (mask >> (v - 1)) & 1 if v is not None else vals[op]
                s += w * bit
            vals[g.id] = s >= g.threshold
        return vals[self.output]

    def _table(self):
        bits = _input_bits(self.n)
        vals: dict[str, np.ndarray] = {}
        for g in self.gates:
            s = np.zeros(1 << self.n, dtype=np.int64)
            for op, w in zip(g.operands, g.input_weights):
                v = var_index(op)
                s += w * (bits[v - 1] if v is not None else vals[op])
            vals[g.id] = s >= g.threshold
        return vals[self.output]

    def is_tree(self) -> bool:
        """Every gate output and every variable feeds at most one gate."""
        uses: dict[str, int] = {}
        for g in self.gates:
            for op in g.operands:
                uses[op] = uses.get(op, 0) + 1
        return all(c == 1 for c in uses.values())

    def depth(self, node: str | None = None) -> int:
        node = self.output if node is None else node
        if var_index(node) is not None:
            return 0
        return 1 + max(self.depth(op) for op in self.gate_map[node].operands)


def threshold(t: int, n: int) -> MonotoneCircuit:
    """Th_n^t as a single gate."""
    return MonotoneCircuit(n, (Gate("g", "TH", tuple(f"x{i}" for i in range(1, n + 1)), t),), "g")


def weighted_threshold(weights: Sequence[int], t: int) -> MonotoneCircuit:
    n = len(weights)
    return MonotoneCircuit(
        n, (Gate("g", "WTH", tuple(f"x{i}" for i in range(1, n + 1)), t, tuple(weights)),), "g")


# --------------------------------------------------------------------------
# weights and analysis


@dataclass(frozen=True)
class WeightFunction:
    weights: tuple[int, ...]

    def __post_init__(self):
        if any(w < 0 for w in self.weights) or sum(self.weights) < 1:
            raise AccessError("weights must be nonnegative with positive total")

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def total(self) -> int:
        return sum(self.weights)

    @property
    def majority(self) -> int:
        return self.total // 2 + 1

    def of(self, P: Iterable[int]) -> int:
        return sum(self.weights[i - 1] for i in P)


@dataclass(frozen=True)
class Analysis:
    n: int
    monotone: bool
    no_cloning: bool
    heaviness: int | None
    heavy: bool
    minimal_sets: list[tuple[int, ...]]
    weighted_heavy: bool | None = None
    min_weight: int | None = None
    weight_threshold: int | None = None


def analyze(f: AccessStructure, w: WeightFunction | None = None, t: int | None = None) -> Analysis:
    """Decide the predicates exhaustively over all 2^n subsets.

    ``heaviness`` is the minimum size of an authorized set (None when nothing
    is authorized, in which case the heaviness predicate holds vacuously).
    With a weight function, ``weighted_heavy`` checks every authorized set has
    weight at least ``t`` (default: strict majority of the total weight).
    """
    n = f.n
    table = f.truth_table()
    masks = np.arange(1 << n, dtype=np.int64)
    monotone = all(not np.any(table & ~table[masks | (1 << i)]) for i in range(n))
    full = (1 << n) - 1
    no_cloning = not bool(np.any(table & table[full ^ masks]))
    pc = _popcounts(n)
    heaviness = int(pc[table].min()) if table.any() else None
    heavy = heaviness is None or heaviness >= n // 2 + 1
    rep = Analysis(n, monotone, no_cloning, heaviness, heavy, minimal_sets_of_table(table, n))
    if w is not None:
        if w.n != n:
            raise AccessError("weight function has the wrong number of parties")
        wt = np.zeros(1 << n, dtype=np.int64)
        for i, wi in enumerate(w.weights):
            wt += wi * ((masks >> i) & 1)
        tt = w.majority if t is None else t
        minw = int(wt[table].min()) if table.any() else None
        rep = Analysis(n, monotone, no_cloning, heaviness, heavy, rep.minimal_sets,
                       minw is None or minw >= tt, minw, tt)
    return rep


def enumerate_monotone(n: int) -> list[TruthTable]:
    """All monotone functions on n variables, by brute force over 2^(2^n) tables."""
    if n > 4:
        raise AccessError("brute-force enumeration only for n <= 4")
    size = 1 << n
    out = []
    for code in range(1 << size):
        table = [(code >> m) & 1 == 1 for m in range(size)]
        if all(not table[m] or table[m | (1 << i)] for m in range(size) for i in range(n)):
            out.append(TruthTable(n, tuple(table)))
    return out


# --------------------------------------------------------------------------
# heavy lift


def heavy_lift(f: AccessStructure) -> AccessStructure:
    """f'(x_1..x_2n) = f(x_1..x_n) AND x_{n+1} AND ... AND x_{2n}."""
    n = f.n
    if isinstance(f, MonotoneCircuit):
        gates = list(f.gates)
        ids = {g.id for g in gates}

        def fresh(base):
            k = 0
            while f"{base}{k}" in ids:
                k += 1
            ids.add(f"{base}{k}")
            return f"{base}{k}"

        acc = f"x{n + 1}"
        for i in range(n + 2, 2 * n + 1):
            gid = fresh("lift")
            gates.append(Gate(gid, "AND", (acc, f"x{i}")))
            acc = gid
        out = fresh("lift")
        gates.append(Gate(out, "AND", (f.output, acc)))
        return MonotoneCircuit(2 * n, tuple(gates), out)
    extra = frozenset(range(n + 1, 2 * n + 1))
    sets = f.sets if isinstance(f, MinSets) else [frozenset(s) for s in f.minimal_sets()]
    return MinSets(2 * n, tuple(frozenset(s) | extra for s in sets))


# --------------------------------------------------------------------------
# monotone span programs


@dataclass(frozen=True)
class MonotoneSpanProgram:
    """Rows labeled by parties; accepts P iff e_1 is in the span of P's rows."""

    field: Field
    rows: tuple[tuple[int, ...], ...]
    labels: tuple[int, ...]
    n: int

    def __post_init__(self):
        if not self.rows:
            raise AccessError("a span program needs at least one row")
        if len(self.rows) != len(self.labels):
            raise AccessError("one label per row")
        width = len(self.rows[0])
        if width < 1 or any(len(r) != width for r in self.rows):
            raise AccessError("rows must share a positive width")
        for lab in self.labels:
            if not 1 <= lab <= self.n:
                raise AccessError(f"row label {lab} out of range")

    @property
    def size(self) -> int:
        return len(self.rows)

    @property
    def target(self) -> tuple[int, ...]:
        return (1,) + (0,) * (len(self.rows[0]) - 1)

    def accepts(self, P: Iterable[int]) -> bool:
        P = set(P)
        to_mask(P, self.n)
        rows = [r for r, lab in zip(self.rows, self.labels) if lab in P]
        return in_span(self.field, rows, self.target)

    def as_structure(self) -> TruthTable:
        return TruthTable(self.n, tuple(self.accepts(from_mask(m)) for m in range(1 << self.n)))


def msp_accepts(m: MonotoneSpanProgram, P: Iterable[int]) -> bool:
    return m.accepts(P)


def canonical_msp(f: AccessStructure, F: Field) -> MonotoneSpanProgram:
    """Span program from the minimal-set DNF, one chain of rows per clause.

    For a clause {a_1..a_k} with fresh columns c_1..c_{k-1}:
    a_1 gets e_0 + e_{c_1}, a_j gets e_{c_j} - e_{c_{j-1}}, a_k gets -e_{c_{k-1}};
    the rows of one clause sum to e_0 and no proper subset reaches it.
    """
    sets = f.sets if isinstance(f, MinSets) else f.minimal_sets()
    sets = [sorted(s) for s in sets]
    if any(len(s) == 0 for s in sets):
        raise AccessError("a span program cannot accept the empty set")
    if not sets:
        return MonotoneSpanProgram(F, ((0,),), (1,), f.n)
    width = 1 + sum(len(s) - 1 for s in sets)
    rows, labels = [], []
    col = 1
    one, minus = 1, F.neg(1)
    for s in sets:
        k = len(s)
        for j, party in enumerate(s):
            r = [0] * width
            if j == 0:
                r[0] = one
            else:
                r[col + j - 1] = minus
            if j < k - 1:
                r[col + j] = one
            rows.append(tuple(r))
            labels.append(party)
        col += k - 1
    return MonotoneSpanProgram(F, tuple(rows), tuple(labels), f.n)


def threshold_msp(t: int, n: int, F: Field) -> MonotoneSpanProgram:
    """Vandermonde rows (1, i, i^2, .., i^{t-1}) for party i at point i."""
    if not 1 <= t <= n or n >= F.q:
        raise AccessError("need 1 <= t <= n < q")
    rows = tuple(tuple(F.pow(i, j) for j in range(t)) for i in range(1, n + 1))
    return MonotoneSpanProgram(F, rows, tuple(range(1, n + 1)), n)


def stack_lifted_msp(mprime: MonotoneSpanProgram, f: AccessStructure) -> MonotoneSpanProgram:
    """Span program for f from one for its lift.

    Party i receives its own rows of ``mprime`` together with a copy of every
    row labeled n+1..2n, so P is accepted iff the lift accepts P plus the
    padding parties.
    """
    n = f.n
    if mprime.n != 2 * n:
        raise AccessError("span program must be over 2n parties")
    if not np.array_equal(mprime.as_structure().truth_table(), heavy_lift(f).truth_table()):
        raise AccessError("span program does not compute the lift of f")
    pad = [r for r, lab in zip(mprime.rows, mprime.labels) if lab > n]
    rows, labels = [], []
    for i in range(1, n + 1):
        own = [r for r, lab in zip(mprime.rows, mprime.labels) if lab == i]
        for r in own + pad:
            rows.append(r)
            labels.append(i)
    if not rows:
        rows, labels = [tuple(0 for _ in mprime.rows[0])], [1]
    return MonotoneSpanProgram(mprime.field, tuple(rows), tuple(labels), n)


# --------------------------------------------------------------------------
# weighted-heavy families


def _shift_circuit(g: AccessStructure, offset: int, prefix: str) -> tuple[list[Gate], str]:
    if not isinstance(g, MonotoneCircuit):
        sets = g.sets if isinstance(g, MinSets) else g.minimal_sets()
        ands = []
        for k, s in enumerate(sets):
            ands.append(Gate(f"{prefix}a{k}", "AND", tuple(f"x{i}" for i in sorted(s))))
        if not ands:
            raise AccessError("inner structure must authorize something")
        g = MonotoneCircuit(g.n, tuple(ands) + (Gate(f"{prefix}or", "OR", tuple(a.id for a in ands)),),
                            f"{prefix}or")
        prefix = ""
    gates = []
    for gt in g.gates:
        ops = tuple(f"x{var_index(o) + offset}" if var_index(o) is not None else prefix + o
                    for o in gt.operands)
        gates.append(Gate(prefix + gt.id, gt.kind, ops, gt.t, gt.weights))
    return gates, prefix + g.output


def weighted_heavy_family(g: AccessStructure, n: int) -> tuple[MonotoneCircuit, WeightFunction]:
    """f = Th_3^2(x1, x2, g(x3..xn)) with weights n-3, n-3, 1, .., 1.

    The weights sum to 2(n-3) + (n-2) = 3n-8; f is weighted-heavy at strict
    majority of that total but not heavy, since {1,2} is authorized.
    """
    if n < 5 or g.n != n - 2:
        raise AccessError("need n >= 5 and g on n-2 parties")
    if not analyze(g).heavy:
        raise AccessError("g must be heavy")
    inner, out = _shift_circuit(g, 2, "g_")
    top = Gate("top", "TH", ("x1", "x2", out), 2)
    f = MonotoneCircuit(n, tuple(inner) + (top,), "top")
    w = WeightFunction((n - 3, n - 3) + (1,) * (n - 2))
    return f, w


def tree_family(g: AccessStructure, n: int) -> MonotoneCircuit:
    """Depth-2 tree Th^{2k/3}(Th_3^2 blocks over x1..xn, g(x_{n+1}..x_{2n})), k = n/3."""
    if n % 9 != 0 or n <= 0:
        raise AccessError("n must be a positive multiple of 9")
    if g.n != n:
        raise AccessError("g must be on n parties")
    if not analyze(g).heavy:
        raise AccessError("g must be heavy")
    k = n // 3
    blocks = [Gate(f"b{j}", "TH", tuple(f"x{3 * j - 2 + d}" for d in range(3)), 2)
              for j in range(1, k + 1)]
    inner, out = _shift_circuit(g, n, "g_")
    top = Gate("top", "TH", tuple(b.id for b in blocks) + (out,), 2 * k // 3)
    return MonotoneCircuit(2 * n, tuple(blocks) + tuple(inner) + (top,), "top")


def tree_witness(w: WeightFunction, n: int) -> tuple[int, ...]:
    """Authorized input of weight below half the total.

    Blocks are ranked by (weight sum, index); the heaviest k/3 are zeroed, in
    the rest the heaviest input (smallest index on ties) is zeroed, and the
    g-inputs are all zero.
    """
    if w.n != 2 * n or n % 9:
        raise AccessError("weight function must cover 2n parties with 9 | n")
    k = n // 3
    ws = w.weights
    sums = [(ws[3 * j] + ws[3 * j + 1] + ws[3 * j + 2], j) for j in range(k)]
    rank = {j: r + 1 for r, (_, j) in enumerate(sorted(sums))}
    x = [0] * (2 * n)
    for j in range(k):
        if rank[j] > 2 * k // 3:
            continue
        block = [3 * j, 3 * j + 1, 3 * j + 2]
        heaviest = max(block, key=lambda i: (ws[i], -i))
        for i in block:
            x[i] = 0 if i == heaviest else 1
    return tuple(x)


# --------------------------------------------------------------------------
# text grammar


class ParseError(AccessError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line = line
        self.col = col


@dataclass
class ParsedStructure:
    name: str
    structure: AccessStructure
    weights: WeightFunction | None = None


def parse_structure(text: str) -> ParsedStructure:
    """Parse the line-oriented ``.acs`` format.

    ``WTH`` operands may carry a weight as ``x3*2``; unweighted operands
    default to weight 1.
    """
    name, n = None, None
    weights = None
    gates: list[Gate] = []
    output = None
    minsets = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        col = len(line) - len(line.lstrip()) + 1
        words = line.split()
        head = words[0]
        try:
            if head == "structure":
                if len(words) != 4 or words[2] != "parties":
                    raise ParseError("expected 'structure <name> parties <n>'", lineno, col)
                name, n = words[1], int(words[3])
            elif head == "weights":
                weights = WeightFunction(tuple(int(v) for v in words[1:]))
            elif head == "gate":
                m = re.match(r"\s*gate\s+(\w+)\s*=\s*(AND|OR|TH|WTH)\s*(\d+)?\s*:(.*)$", line)
                if not m:
                    raise ParseError("expected 'gate <id> = AND|OR|TH t|WTH t : operands'", lineno, col)
                gid, kind, t, rest = m.groups()
                if kind in ("TH", "WTH") and t is None:
                    raise ParseError(f"{kind} needs a threshold", lineno, line.index(kind) + 1)
                ops, ws = [], []
                for tok in rest.split():
                    if "*" in tok:
                        if kind != "WTH":
                            raise ParseError("operand weights only allowed on WTH", lineno,
                                             line.index(tok) + 1)
                        o, wv = tok.split("*", 1)
                        ops.append(o)
                        ws.append(int(wv))
                    else:
                        ops.append(tok)
                        ws.append(1)
                gates.append(Gate(gid, kind, tuple(ops), int(t or 0),
                                  tuple(ws) if kind == "WTH" else ()))
            elif head == "output":
                if len(words) != 2:
                    raise ParseError("expected 'output <id>'", lineno, col)
                output = words[1]
            elif head == "minsets":
                body = line[line.index("minsets") + len("minsets"):]
                minsets = _parse_setlist(body, lineno, line.index("minsets") + len("minsets") + 1)
            else:
                raise ParseError(f"unknown directive '{head}'", lineno, col)
        except ParseError:
            raise
        except (ValueError, AccessError) as exc:
            raise ParseError(str(exc), lineno, col) from None
    if n is None:
        raise ParseError("missing 'structure' line", 1, 1)
    if minsets is not None and gates:
        raise ParseError("give either gates or minsets, not both", 1, 1)
    try:
        if minsets is not None:
            f: AccessStructure = MinSets.of(n, minsets)
        else:
            if output is None:
                raise ParseError("missing 'output' line", 1, 1)
            f = MonotoneCircuit(n, tuple(gates), output)
        if weights is not None and weights.n != n:
            raise ParseError(f"{weights.n} weights for {n} parties", 1, 1)
    except ParseError:
        raise
    except AccessError as exc:
        raise ParseError(str(exc), 1, 1) from None
    return ParsedStructure(name or "unnamed", f, weights)


def _parse_setlist(body: str, lineno: int, col0: int) -> list[list[int]]:
    s = body.strip()
    if not (s.startswith("{") and s.endswith("}")):
        raise ParseError("expected '{ {..} {..} }'", lineno, col0)
    inner = s[1:-1]
    sets = []
    for m in re.finditer(r"\{([^{}]*)\}", inner):
        sets.append([int(v) for v in re.split(r"[,\s]+", m.group(1).strip()) if v])
    if re.sub(r"\{[^{}]*\}", "", inner).strip():
        raise ParseError("stray text inside minsets", lineno, col0)
    return sets


# --------------------------------------------------------------------------
# compact expressions used by presets: th(2,3), minsets{{1,2},{2,3}},
# and(x1, th(2, x2, x3, x4)), or(...), wth(3; 2*x1, x2, x3)


def parse_expr(text: str, n: int | None = None) -> AccessStructure:
    s = text.strip()
    m = re.fullmatch(r"th\(\s*(\d+)\s*,\s*(\d+)\s*\)", s)
    if m:
        return threshold(int(m.group(1)), int(m.group(2)))
    if s.startswith("minsets"):
        sets = _parse_setlist(s[len("minsets"):].replace("},", "} ").replace("}{", "} {"), 1, 1)
        nn = n if n is not None else max((max(x) for x in sets if x), default=1)
        return MinSets.of(nn, sets)
    gates: list[Gate] = []
    pos = 0

    def skip():
        nonlocal pos
        while pos < len(s) and s[pos].isspace():
            pos += 1

    def node() -> str:
        nonlocal pos
        skip()
        m = re.compile(r"x(\d+)").match(s, pos)
        if m and not s[m.end():m.end() + 1].isalnum():
            pos = m.end()
            return m.group(0)
        m = re.compile(r"(and|or|th|wth)\s*\(").match(s, pos)
        if not m:
            raise ParseError(f"unexpected text '{s[pos:pos + 10]}'", 1, pos + 1)
        kind = m.group(1).upper()
        pos = m.end()
        t = 0
        if kind in ("TH", "WTH"):
            skip()
            mt = re.compile(r"(\d+)\s*[,;]").match(s, pos)
            if not mt:
                raise ParseError("threshold expected", 1, pos + 1)
            t = int(mt.group(1))
            pos = mt.end()
        ops, ws = [], []
        while True:
            skip()
            w = 1
            mw = re.compile(r"(\d+)\s*\*").match(s, pos)
            if mw:
                w = int(mw.group(1))
                pos = mw.end()
            ops.append(node())
            ws.append(w)
            skip()
            if pos < len(s) and s[pos] == ",":
                pos += 1
                continue
            if pos < len(s) and s[pos] == ")":
                pos += 1
                break
            raise ParseError("',' or ')' expected", 1, pos + 1)
        gid = f"g{len(gates)}"
        gates.append(Gate(gid, kind, tuple(ops), t, tuple(ws) if kind == "WTH" else ()))
        return gid

    out = node()
    skip()
    if pos != len(s):
        raise ParseError("trailing text", 1, pos + 1)
    if var_index(out) is not None:
        gates.append(Gate("g0", "OR", (out,)))
        out = "g0"
    nvars = max(var_index(o) or 0 for g in gates for o in g.operands)
    return MonotoneCircuit(n if n is not None else nvars, tuple(gates), out)


def as_circuit(f: AccessStructure) -> MonotoneCircuit:
    """Circuit form: circuits pass through, anything else becomes an OR of ANDs."""
    if isinstance(f, MonotoneCircuit):
        return f
    gates, out = _shift_circuit(f, 0, "")
    return MonotoneCircuit(f.n, tuple(gates), out)
